"""Command-line interface: ``srn reduce|check|sweep|simulate|compare-stationary``.

Exit codes: 0 success, 1 parse or configuration error, 2 structural
precondition failure, 3 numerical failure. Machine-readable output goes to
stdout (or ``--out``); human-readable summaries go to stderr.
"""
from __future__ import annotations

import argparse
import itertools
import json
import sys
from pathlib import Path

import numpy as np

from . import zoo
from .ctmc import ssa_simulate
from .dsl import load_network
from .elimination import (
    build_elimination_graph,
    graph_properness,
    is_noninteracting,
    proper_fast_set_exists,
    reduce,
    reduced_network_is_finite,
)
from .errors import ConfigError, SRNError, StateSpaceCapExceeded, StructureError
from .events import parse_event
from .network import conservation_class, consuming
from .twoscale import (
    DEFAULT_EPSILONS,
    assemble,
    check_assumption2,
    check_sufficient_conditions,
    epsilon_sweep,
    is_intermediate_set,
    partition_states,
    stationary_convergence,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# ---------------------------------------------------------------------------
# argument helpers


def _load(args):
    spec = args.net
    default_u = None
    if spec.startswith("zoo:"):
        name = spec[4:]
        try:
            net, default_u = zoo.load(name)
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None
    else:
        path = Path(spec)
        if not path.exists():
            raise ConfigError(f"network file {spec} does not exist")
        net = load_network(path)
    if args.rates:
        values = _parse_map(args.rates, float, "--rates")
        unknown = set(values) - set(net.rate_symbols) - {f"#{r}" for r in net.reaction_ids}
        if unknown:
            raise ConfigError(f"--rates refers to unknown rate symbols {sorted(unknown)}")
        if any(not v > 0 for v in values.values()):
            raise ConfigError("rate constants must be positive")
        net = net.with_rates(values)
    if args.u is None:
        if default_u is None:
            raise ConfigError("--u is required for network files")
        U = tuple(default_u)
    else:
        U = tuple(s.strip() for s in args.u.split(",") if s.strip() and s.strip().lower() != "none")
    for s in U:
        if s not in net.species:
            raise ConfigError(f"unknown species {s!r} in --u")
    if args.fast is None:
        F = net.fast
    elif args.fast == "all-consuming":
        F = consuming(net, U)
    else:
        try:
            F = frozenset(int(v) for v in args.fast.split(",") if v.strip())
        except ValueError:
            raise ConfigError(f"bad --fast value {args.fast!r}") from None
        missing = F - set(net.reaction_ids)
        if missing:
            raise ConfigError(f"--fast refers to unknown reactions {sorted(missing)}")
    return net.with_fast(F), U, F


def _parse_map(text, cast, flag):
    out = {}
    for part in text.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise ConfigError(f"bad {flag} entry {part.strip()!r} (expected NAME=VALUE)")
        k, v = part.split("=", 1)
        try:
            out[k.strip()] = cast(v.strip())
        except ValueError:
            raise ConfigError(f"bad {flag} value {v.strip()!r}") from None
    return out


def _state(net, text, flag="--x0"):
    if text is None:
        raise ConfigError(f"{flag} is required")
    counts = _parse_map(text, int, flag)
    for k, v in counts.items():
        if k not in net.species:
            raise ConfigError(f"unknown species {k!r} in {flag}")
        if v < 0:
            raise ConfigError(f"negative count for {k} in {flag}")
    return net.vector(counts)


def _epsilons(text):
    if text is None:
        return list(DEFAULT_EPSILONS)
    try:
        eps = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad --epsilons {text!r}") from None
    if not eps or any(not 0 < e <= 1 for e in eps):
        raise ConfigError("--epsilons values must lie in (0, 1]")
    return eps


def _horizon(value):
    if not value >= 0:
        raise ConfigError("--T must be non-negative")
    return value


def _emit(args, text):
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dumps(doc):
    return json.dumps(doc, indent=2) + "\n"


def _say(msg):
    print(msg, file=sys.stderr)


def _require_structure(net, U, F):
    ni = is_noninteracting(net, U)
    if not ni:
        raise StructureError(f"{', '.join(U)} are not non-interacting: {ni.reason} in {net.complex_str(ni.witness)}")
    graph = build_elimination_graph(net, U, F)
    prop = graph_properness(graph)
    if not prop:
        best = proper_fast_set_exists(net, U)
        if not best:
            raise StructureError(
                f"no proper fast set exists for U: {best.describe()}",
                {"unreachable_from_in": list(best.unreachable_from_in),
                 "cannot_reach_out": list(best.cannot_reach_out)},
            )
        raise StructureError(f"fast set is not proper: {prop.describe()}")
    return graph


# ---------------------------------------------------------------------------
# commands


def _box_states(red, args, net):
    if args.box:
        bounds = _parse_map(args.box, int, "--box")
        for k in bounds:
            if k not in red.species:
                raise ConfigError(f"--box refers to {k!r}, which is not a core species")
        ranges = [range(bounds.get(s, args.box_max) + 1) for s in red.species]
    elif args.x0:
        x0 = _state(net, args.x0)
        return [red.graph.core(x0)]
    else:
        ranges = [range(args.box_max + 1) for _ in red.species]
    return list(itertools.product(*ranges))


def cmd_reduce(args):
    net, U, F = _load(args)
    _require_structure(net, U, F)
    red = reduce(net, U, F)
    states = _box_states(red, args, net)
    table = red.materialize(states)
    finite, cycles = reduced_network_is_finite(red.graph)
    reactions = []
    for k, (rr, taus) in enumerate(table, start=1):
        reactions.append({
            "id": k,
            "label": None,
            "reactant": {s: c for s, c in zip(red.species, rr.reactant) if c},
            "product": {s: c for s, c in zip(red.species, rr.product) if c},
            "trivial": rr.trivial,
            "fast": False,
            "rate": {"type": "tabulated", "table": [[list(z), tau] for z, tau in sorted(taus.items())],
                     "default": 0.0},
            "origin": [{"kind": "slow_copy", "reaction": rid} if kind == "slow"
                       else {"kind": "walks", "creating_reaction": rid} for kind, rid in rr.origins],
        })
    doc = {
        "schema": "srn-reduce/1",
        "document": "reduced-network",
        "species": list(red.species),
        "eliminated": list(U),
        "fast": sorted(F),
        "finite": finite,
        "family": None if finite else {
            "cycle_core_changes": [{s: v for s, v in zip(red.species, c) if v} for c in cycles],
            "activity": "a reaction is active at z exactly when z covers its reactant",
        },
        "states": [list(z) for z in states],
        "reactions": reactions,
    }
    if args.format == "csv":
        lines = ["reactant,product,trivial," + ",".join(red.species) + ",tau"]
        for rr, taus in table:
            for z, tau in sorted(taus.items()):
                lines.append(f"{red.complex_str(rr.reactant)},{red.complex_str(rr.product)},{int(rr.trivial)},"
                             + ",".join(map(str, z)) + f",{tau!r}")
        _emit(args, "\n".join(lines) + "\n")
    else:
        _emit(args, _dumps(doc))
    nontriv = sum(1 for rr, _ in table if not rr.trivial)
    _say(f"{nontriv} non-trivial and {len(table) - nontriv} trivial reduced reactions on {len(states)} states"
         + ("" if finite else " (the reduced network is infinite; reactions shown are those active on the box)"))
    for rr, _ in table:
        _say(f"  {red.reaction_str(rr.key)}{'  [trivial]' if rr.trivial else ''}")
    return 0


def eq41_all_states(net, U, F, box_max=3):
    """Decide whether the mass-balance identity holds for every core state.

    Uses the structural certificates when available and otherwise scans the
    box ``[0, box_max]^p``. Returns ``(holds, method, witness)``.
    """
    suff = check_sufficient_conditions(net, U, F)
    if suff.certified:
        return True, "sufficient-condition", None
    red = reduce(net, U, F)
    if is_intermediate_set(net, U):
        return True, "intermediate-species", None
    for z in itertools.product(range(box_max + 1), repeat=len(red.species)):
        rep = check_assumption2(red, [z])
        if not rep.ok:
            f = rep.failures()[0]
            return False, f"box-scan<={box_max}", {"z": red.labeled(z), "status": f.status, "witness": f.witness}
    return True, f"box-scan<={box_max}", None


def cmd_check(args):
    net, U, F = _load(args)
    report = {"schema": "srn-reduce/1", "document": "check", "species": list(net.species), "eliminated": list(U), "fast": sorted(F)}
    ni = is_noninteracting(net, U)
    report["noninteracting"] = bool(ni)
    cons = conservation_class(net)
    report["conservation"] = {
        "kind": cons.kind,
        "witness": None if cons.witness is None else [str(v) for v in cons.witness],
        "certificate": cons.certificate,
    }
    report["sub_conservative"] = cons.sub_conservative
    if not ni:
        report["error"] = f"{ni.reason} in {net.complex_str(ni.witness)}"
        _emit(args, _dumps(report))
        _say(f"not non-interacting: {report['error']}")
        return 2
    graph = build_elimination_graph(net, U, F)
    prop = graph_properness(graph)
    report["proper"] = bool(prop)
    report["properness"] = {"unreachable_from_in": list(prop.unreachable_from_in),
                            "cannot_reach_out": list(prop.cannot_reach_out)}
    if not prop:
        best = proper_fast_set_exists(net, U)
        report["proper_fast_set_exists"] = bool(best)
        if not best:
            report["error"] = f"no proper fast set exists for U: {best.describe()}"
        else:
            report["error"] = f"fast set is not proper: {prop.describe()}"
        _emit(args, _dumps(report))
        _say(report["error"])
        return 2
    suff = check_sufficient_conditions(net, U, F)
    report["sufficient_conditions"] = suff.to_dict()
    report["intermediate"] = is_intermediate_set(net, U)
    finite, cycles = reduced_network_is_finite(graph)
    report["reduced_finite"] = finite
    holds, method, witness = eq41_all_states(net, U, F, args.box_max if args.box_max is not None else 3)
    report["eq41_all_states"] = {"holds": holds, "method": method, "witness": witness}
    if args.x0:
        x0 = _state(net, args.x0)
        try:
            sys_ = assemble(net, U, F, x0=x0)
            a2 = check_assumption2(sys_)
            report["class_size"] = len(sys_.E)
        except StateSpaceCapExceeded:
            # unbounded class: judge the initial core state on its own
            red = reduce(net, U, F)
            a2 = check_assumption2(red, [red.graph.core(x0)])
            report["class_size"] = None
        report["assumption2"] = a2.to_dict()
    _emit(args, _dumps(report))
    mark = {True: "yes", False: "no"}
    _say(f"sub-conservative: {mark[cons.sub_conservative]} | mass balance for all z: {mark[holds]} ({method}) "
         f"| reduced network finite: {mark[finite]}")
    if args.x0:
        _say(f"mass balance on the class of x0: {report['assumption2']['status']}")
    return 0


def cmd_sweep(args):
    net, U, F = _load(args)
    _require_structure(net, U, F)
    x0 = _state(net, args.x0)
    eps = _epsilons(args.epsilons)
    T = _horizon(args.T)
    event = parse_event(args.event or "")
    sys_ = assemble(net, U, F, x0=x0)
    event.bind(sys_.reduced.species)
    part = partition_states(sys_, x0)
    a2 = check_assumption2(sys_)
    if not a2.ok:
        if not args.force:
            _emit(args, _dumps({"schema": "srn-reduce/1", "document": "sweep", "error": "mass balance fails", "assumption2": a2.to_dict()}))
            _say(f"mass balance fails ({a2.status}); rerun with --force to sweep anyway")
            return 2
        _say(f"warning: mass balance fails ({a2.status}); sweeping anyway")
    rep = epsilon_sweep(sys_, part, sys_.E.index[x0], event, T, eps)
    rep.assumption2 = {"status": a2.status}
    for w in rep.warnings:
        _say(f"warning: {w}")
    _emit(args, rep.to_csv() if args.format == "csv" else _dumps(rep.to_dict()))
    slope = "undefined" if rep.slope is None else f"{rep.slope:.3f}"
    _say(f"errors: {', '.join(f'{e:.3e}' for e in rep.errors)}; slope {slope}; monotone {rep.monotone}")
    if rep.slope is not None and rep.slope < 0.5:
        _say("fitted slope below 0.5")
        return 3
    return 0


def cmd_simulate(args):
    net, U, F = _load(args)
    _require_structure(net, U, F)
    x0 = _state(net, args.x0)
    T = _horizon(args.T)
    eps = _epsilons(args.epsilons)[-1] if args.epsilons else 1e-3
    seed = args.seed
    event = parse_event(args.event or "")
    red = reduce(net, U, F)
    z0 = red.graph.core(x0)
    scaled = net.with_fast_scaled(eps)
    orig = ssa_simulate(scaled, x0, T, seed, 0)
    redt = ssa_simulate(red, z0, T, seed, 0, species=red.species)
    pred_full = event.bind(net.species)
    pred_core = event.bind(red.species)
    ui = set(red.graph.u_index)
    grid = np.linspace(0.0, T, args.grid + 1) if T > 0 else np.array([0.0])
    occ_o = np.zeros(len(grid))
    occ_r = np.zeros(len(grid))
    for k in range(args.paths):
        a = orig if k == 0 else ssa_simulate(scaled, x0, T, seed, k)
        b = redt if k == 0 else ssa_simulate(red, z0, T, seed, k, species=red.species)
        for j, t in enumerate(grid):
            xa = a.state_at(t)
            occ_o[j] += (not any(xa[i] for i in ui)) and pred_full(tuple(xa))
            occ_r[j] += pred_core(tuple(b.state_at(t)))
    occ_o /= args.paths
    occ_r /= args.paths
    occ = "t,original,reduced\n" + "".join(f"{t!r},{a!r},{b!r}\n" for t, a, b in zip(grid, occ_o, occ_r))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "original.csv").write_text(orig.to_csv(), encoding="utf-8")
        (out / "reduced.csv").write_text(redt.to_csv(), encoding="utf-8")
        (out / "occupancy.csv").write_text(occ, encoding="utf-8")
    else:
        sys.stdout.write("# original\n" + orig.to_csv() + "# reduced\n" + redt.to_csv() + "# occupancy\n" + occ)
    _say(f"original: {len(orig.times) - 1} jumps, reduced: {len(redt.times) - 1} jumps; "
         f"occupancy of the event at T over {args.paths} paths: {occ_o[-1]:.4f} vs {occ_r[-1]:.4f}")
    return 0


def cmd_compare_stationary(args):
    net, U, F = _load(args)
    _require_structure(net, U, F)
    x0 = _state(net, args.x0)
    eps = _epsilons(args.epsilons)
    sys_ = assemble(net, U, F, x0=x0)
    try:
        rep = stationary_convergence(sys_, eps, override=args.override)
    except StructureError as exc:
        doc = {"schema": "srn-reduce/1", "document": "stationary", "error": str(exc), **exc.details}
        _emit(args, _dumps(doc))
        _say(f"error: {exc}")
        for m in exc.details.get("mismatches", []):
            _say(f"  state {m['z']}: {m['original']} for the original network, {m['reduced']} for the reduced one")
        return 2
    _emit(args, rep.to_csv() if args.format == "csv" else _dumps(rep.to_dict()))
    _say("sup-gaps: " + ", ".join(f"eps={e:g}: {g:.3e}" for e, g in zip(rep.epsilons, rep.gaps)))
    for m in rep.mismatches:
        _say(f"  state {m.z}: {m.original} for the original network, {m.reduced} for the reduced one")
    return 0


# ---------------------------------------------------------------------------
# entry point


def build_parser():
    p = _Parser(prog="srn", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(sp, fmt="json"):
        sp.add_argument("--net", required=True, help="network file or zoo:NAME")
        sp.add_argument("--u", help="comma-separated non-interacting species (default for zoo networks)")
        sp.add_argument("--fast", help="comma-separated reaction ids or 'all-consuming' (default: file markers)")
        sp.add_argument("--rates", help="rate overrides, e.g. k1=2,k3=0.5")
        sp.add_argument("--out", help="output path")
        sp.add_argument("--format", choices=("json", "csv"), default=fmt)

    sp = sub.add_parser("reduce", help="build the reduced network")
    common(sp)
    sp.add_argument("--box", help="per-species upper bounds of the state box, e.g. S=3,E=1")
    sp.add_argument("--box-max", type=int, default=2, help="bound for species not listed in --box")
    sp.add_argument("--x0", help="evaluate at the core part of this state instead of a box")
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("check", help="structural report")
    common(sp)
    sp.add_argument("--x0", help="initial state whose class is checked for mass balance")
    sp.add_argument("--box-max", type=int, default=3, help="box bound for the mass-balance scan")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("sweep", help="eps sweep of the transient approximation error")
    common(sp)
    sp.add_argument("--x0", required=True)
    sp.add_argument("--T", type=float, default=5.0)
    sp.add_argument("--epsilons")
    sp.add_argument("--event", default="")
    sp.add_argument("--force", action="store_true")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("simulate", help="SSA trajectories of the scaled and the reduced network")
    common(sp, fmt="csv")
    sp.add_argument("--x0", required=True)
    sp.add_argument("--T", type=float, default=5.0)
    sp.add_argument("--epsilons", help="eps for the original network (last value is used; default 1e-3)")
    sp.add_argument("--event", default="")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--paths", type=int, default=100)
    sp.add_argument("--grid", type=int, default=10, help="number of occupancy intervals on [0, T]")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("compare-stationary", help="stationary gaps between scaled and reduced chains")
    common(sp, fmt="csv")
    sp.add_argument("--x0", required=True)
    sp.add_argument("--epsilons")
    sp.add_argument("--override", action="store_true", help="continue when hypotheses fail")
    sp.set_defaults(func=cmd_compare_stationary)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "paths", 1) < 1:
            raise ConfigError("--paths must be positive")
        return args.func(args)
    except SRNError as exc:
        _say(f"error: {exc}")
        return exc.exit_code
    except (ValueError, KeyError) as exc:
        _say(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
