"""Event sets given as conjunctions of per-species count comparisons.

``"S3>=1 & S1<2"`` selects states with at least one S3 and fewer than two
S1. Clauses are joined by ``&`` (or ``,``); the empty string selects every
state.
"""
from __future__ import annotations

import operator
import re
from dataclasses import dataclass

from .errors import ConfigError

_OPS = {
    ">=": operator.ge,
    "<=": operator.le,
    "==": operator.eq,
    "!=": operator.ne,
    ">": operator.gt,
    "<": operator.lt,
}
_CLAUSE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(>=|<=|==|!=|>|<)\s*(-?\d+)\s*$")


@dataclass(frozen=True)
class Event:
    clauses: tuple  # (species, op symbol, value)
    text: str = ""

    def bind(self, species):
        """Return a predicate on state tuples ordered like ``species``."""
        index = {s: i for i, s in enumerate(species)}
        checks = []
        for name, op, value in self.clauses:
            if name not in index:
                raise ConfigError(f"event refers to unknown species {name!r}")
            checks.append((index[name], _OPS[op], value))

        def predicate(x):
            return all(fn(x[i], v) for i, fn, v in checks)

        return predicate


def parse_event(text: str) -> Event:
    text = text or ""
    clauses = []
    for part in re.split(r"[&,]", text):
        if not part.strip():
            continue
        m = _CLAUSE.match(part)
        if not m:
            raise ConfigError(f"bad event clause {part.strip()!r} (expected e.g. 'S3>=1')")
        clauses.append((m.group(1), m.group(2), int(m.group(3))))
    return Event(tuple(clauses), text.strip())
