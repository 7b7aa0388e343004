"""Text format for reaction networks and the canonical JSON document.

One reaction per line::

    # comment
    param k1 = 2.5
    S1 -> U1 + S2 @ k1
    E + A <-> EA @ k1, k2 fast      # reverse reaction is fast
    r7: 2*A -> 0 @ 0.3 fast

Complexes are ``+``-separated ``coeff*Species`` or ``Species`` terms and
``0`` is the empty complex. Rates are positive decimals or symbols; a
symbol never bound by ``param`` defaults to 1. Reaction ids are assigned
1, 2, ... in order of appearance (``<->`` takes two ids, forward first).
"""
from __future__ import annotations

import json
import re

from .errors import ParseError
from .network import MassAction, Reaction, ReactionNetwork, Tabulated

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_PARAM = re.compile(rf"^param\s+({_IDENT})\s*=\s*(\S+)\s*$")
_LABEL = re.compile(rf"^\s*({_IDENT})\s*:(?!:)")
_TERM = re.compile(rf"^(?:(\d+)\s*\*\s*)?({_IDENT})$")
_RATE = re.compile(rf"^({_NUMBER}|{_IDENT})(?:\s+(fast|slow))?$")


def _parse_complex(text, lineno, col, species, order):
    col += len(text) - len(text.lstrip())
    text = text.strip()
    if text == "0":
        return {}
    if not text:
        raise ParseError("empty complex (use 0 for the empty complex)", lineno, col)
    counts = {}
    offset = 0
    for raw in text.split("+"):
        term = raw.strip()
        m = _TERM.match(term)
        if not m:
            lead = len(raw) - len(raw.lstrip())
            raise ParseError(f"bad complex term {term!r}", lineno, col + offset + lead)
        coeff = int(m.group(1)) if m.group(1) else 1
        name = m.group(2)
        if coeff == 0:
            raise ParseError("zero stoichiometric coefficient", lineno, col + offset)
        if name not in species:
            species[name] = len(order)
            order.append(name)
        counts[name] = counts.get(name, 0) + coeff
        offset += len(raw) + 1
    return counts


def _parse_rate(text, lineno, col):
    m = _RATE.match(text.strip())
    if not m:
        raise ParseError(f"bad rate specification {text.strip()!r}", lineno, col)
    token, flag = m.group(1), m.group(2)
    if re.fullmatch(_NUMBER, token):
        value = float(token)
        if not value > 0:
            raise ParseError(f"non-positive rate constant {token}", lineno, col)
        return (None, value), flag == "fast"
    return (token, None), flag == "fast"


def parse_network(text: str) -> ReactionNetwork:
    """Parse DSL source into a :class:`ReactionNetwork`."""
    species, order = {}, []
    params = {}
    pending = []  # (label, lhs, rhs, (symbol, value), fast, lineno)
    labels = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.startswith("param ") or stripped == "param":
            m = _PARAM.match(stripped)
            if not m:
                raise ParseError("expected 'param NAME = VALUE'", lineno, 1)
            try:
                value = float(m.group(2))
            except ValueError:
                raise ParseError(f"bad parameter value {m.group(2)!r}", lineno, line.find(m.group(2)) + 1)
            if not value > 0:
                raise ParseError(f"non-positive rate constant {m.group(2)}", lineno, line.find(m.group(2)) + 1)
            params[m.group(1)] = value
            continue

        label = None
        body_start = 0
        m = _LABEL.match(line)
        if m:
            label = m.group(1)
            body_start = m.end()
        body = line[body_start:]
        if "@" not in body:
            raise ParseError("missing '@ RATE'", lineno, len(line) + 1)
        at = body.index("@")
        arrow_part, rate_part = body[:at], body[at + 1 :]
        rate_col = body_start + at + 2
        if "<->" in arrow_part:
            lhs, rhs = arrow_part.split("<->", 1)
            reversible = True
        elif "->" in arrow_part:
            lhs, rhs = arrow_part.split("->", 1)
            reversible = False
        else:
            raise ParseError("missing '->' or '<->'", lineno, body_start + 1)
        lhs_col = body_start + 1
        rhs_col = body_start + len(lhs) + (4 if reversible else 3)
        y = _parse_complex(lhs, lineno, lhs_col, species, order)
        yp = _parse_complex(rhs, lineno, rhs_col, species, order)
        rates = rate_part.split(",")
        if reversible:
            if len(rates) != 2:
                raise ParseError("'<->' needs two rates 'kf, kr'", lineno, rate_col)
            fwd, ffast = _parse_rate(rates[0], lineno, rate_col)
            rev, rfast = _parse_rate(rates[1], lineno, rate_col + len(rates[0]) + 1)
            names = (label, f"{label}_rev" if label else None)
            pending.append((names[0], y, yp, fwd, ffast, lineno))
            pending.append((names[1], yp, y, rev, rfast, lineno))
        else:
            if len(rates) != 1:
                raise ParseError("'->' takes exactly one rate", lineno, rate_col)
            rate, fast = _parse_rate(rates[0], lineno, rate_col)
            pending.append((label, y, yp, rate, fast, lineno))
        for name in ((label, f"{label}_rev") if reversible and label else (label,)):
            if name is None:
                continue
            if name in labels:
                raise ParseError(f"duplicate reaction id {name!r}", lineno, 1)
            labels.add(name)

    n = len(order)
    reactions, fast = [], set()
    for rid, (label, y, yp, (symbol, value), is_fast, lineno) in enumerate(pending, start=1):
        if symbol is not None:
            value = params.get(symbol, 1.0)
        reactant = tuple(y.get(s, 0) for s in order)
        product = tuple(yp.get(s, 0) for s in order)
        reactions.append(Reaction(rid, reactant, product, MassAction(value, symbol), label))
        if is_fast:
            fast.add(rid)
    assert all(len(r.reactant) == n for r in reactions)
    return ReactionNetwork(tuple(order), tuple(reactions), frozenset(fast))


def load_network(path) -> ReactionNetwork:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())


def _complex_src(net, y):
    terms = []
    for s, c in zip(net.species, y):
        if c == 1:
            terms.append(s)
        elif c > 1:
            terms.append(f"{c}*{s}")
    return " + ".join(terms) if terms else "0"


def render_network(net: ReactionNetwork) -> str:
    """Render a mass-action network back to DSL source (one line per reaction)."""
    lines = []
    for sym, k in net.rate_symbols.items():
        lines.append(f"param {sym} = {k!r}")
    for r in net.reactions:
        if not isinstance(r.law, MassAction):
            raise ValueError(f"reaction {r.id} has a non mass-action law and cannot be rendered")
        rate = r.law.symbol if r.law.symbol else repr(r.law.k)
        head = f"{r.label}: " if r.label else ""
        tail = " fast" if r.id in net.fast else ""
        lines.append(f"{head}{_complex_src(net, r.reactant)} -> {_complex_src(net, r.product)} @ {rate}{tail}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# JSON

NETWORK_SCHEMA = "srn-reduce/1"


def _stoich_map(net, y):
    return {s: c for s, c in zip(net.species, y) if c}


def network_to_dict(net: ReactionNetwork) -> dict:
    return {
        "schema": NETWORK_SCHEMA,
        "document": "network",
        "species": list(net.species),
        "reactions": [
            {
                "id": r.id,
                "label": r.label,
                "reactant": _stoich_map(net, r.reactant),
                "product": _stoich_map(net, r.product),
                "rate": r.law.describe(),
                "fast": r.id in net.fast,
            }
            for r in net.reactions
        ],
    }


def network_from_dict(doc: dict) -> ReactionNetwork:
    if doc.get("schema") != NETWORK_SCHEMA or doc.get("document", "network") != "network":
        raise ParseError(f"unsupported schema {doc.get('schema')!r}")
    species = tuple(doc["species"])
    reactions, fast = [], set()
    for entry in doc["reactions"]:
        y = tuple(entry["reactant"].get(s, 0) for s in species)
        yp = tuple(entry["product"].get(s, 0) for s in species)
        rate = entry["rate"]
        if rate["type"] == "mass_action":
            law = MassAction(float(rate["k"]), rate.get("symbol"))
        elif rate["type"] == "tabulated" and rate.get("table") is not None:
            law = Tabulated({tuple(k): float(v) for k, v in rate["table"]}, float(rate.get("default", 0.0)))
        else:
            raise ParseError(f"rate law {rate['type']!r} cannot be loaded from JSON")
        reactions.append(Reaction(int(entry["id"]), y, yp, law, entry.get("label")))
        if entry.get("fast"):
            fast.add(int(entry["id"]))
    return ReactionNetwork(species, tuple(reactions), frozenset(fast))


def dumps_network(net: ReactionNetwork) -> str:
    return json.dumps(network_to_dict(net), indent=2, sort_keys=False)
