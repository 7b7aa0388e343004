"""Two-time-scale systems, their limit generators and convergence experiments.

The scaled chain has generator ``Q_eps = Q_fast / eps + Q_slow`` on a
finite closed set ``E``. Starting from a state without non-interacting
molecules, the set is partitioned into ``S1`` (surrogate-reachable, no
U-molecules), ``S2`` (other U-free states), ``F1`` (surrogate-reachable
with one U-molecule) and ``F2`` (the rest). The reduced network's
generator on the core projection of ``S1`` is compared with two
independent limit constructions and with the scaled chain itself.
"""
from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import spsolve

from .ctmc import (
    ModulatedGenerator,
    NetworkSource,
    StateSpace,
    build_generator,
    classify_states,
    explore,
    is_closed,
    reachable_closed_set,
    stationary_distribution,
    surrogate_reachable,
    transient_distribution,
    transient_distribution_timedep,
)
from .elimination import ReducedSRN, reduce
from .errors import NumericalError, StructureError
from .network import (
    ReactionNetwork,
    complex_digraph,
    conservation_class,
    consuming,
    creating,
    is_weakly_reversible,
    species_indices,
)


# ---------------------------------------------------------------------------
# assembly


@dataclass
class TwoScaleSystem:
    net: ReactionNetwork
    U: tuple
    F: frozenset
    E: StateSpace
    Q_fast: sparse.csr_matrix
    Q_slow: sparse.csr_matrix
    reduced: ReducedSRN
    _modulated: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def u_index(self) -> tuple:
        return self.reduced.graph.u_index

    @property
    def core_index(self) -> tuple:
        return self.reduced.graph.core_index

    def n_u(self, x) -> int:
        return sum(x[i] for i in self.u_index)

    def core(self, x) -> tuple:
        return tuple(x[i] for i in self.core_index)

    def embed(self, z) -> tuple:
        return self.reduced.graph.embed(z)

    def generators_at(self, t):
        """Fast and slow generators with time-modulated laws evaluated at ``t``."""
        if not self.net.time_dependent:
            return self.Q_fast, self.Q_slow
        if self._modulated is None:
            slow = [r for r in self.net.reaction_ids if r not in self.F]
            self._modulated = (ModulatedGenerator(self.net, self.E, sorted(self.F)),
                               ModulatedGenerator(self.net, self.E, slow))
        return self._modulated[0](t), self._modulated[1](t)

    def generator(self, eps: float, t=None) -> sparse.csr_matrix:
        if not eps > 0:
            raise ValueError("eps must be positive")
        Qf, Qs = (self.Q_fast, self.Q_slow) if t is None else self.generators_at(t)
        return (Qf / eps + Qs).tocsr()


def assemble(net: ReactionNetwork, U: Iterable[str], F: Iterable[int] | None = None, E=None, x0=None,
             cap: int = 100_000, t0: float | None = None) -> TwoScaleSystem:
    """Split the generator of ``net`` on ``E`` into fast and slow parts.

    ``E`` defaults to the set reachable from ``x0``. Raises
    :class:`StructureError` for an improper fast set or an open ``E``.
    """
    U = tuple(U)
    F = net.fast if F is None else frozenset(F)
    red = reduce(net, U, F)
    t = t0 if net.time_dependent else None
    if t is None and net.time_dependent:
        t = 0.0
    if E is None:
        if x0 is None:
            raise ValueError("assemble needs either E or x0")
        E = reachable_closed_set(net, x0, cap=cap, t=t)
    else:
        E = E if isinstance(E, StateSpace) else StateSpace(tuple(E), species=net.species)
        ok, witness = is_closed(net, E, t)
        if not ok:
            raise StructureError(f"state set is not closed: {witness[0]} -> {witness[1]}")
        E.closed = True
    slow = [r for r in net.reaction_ids if r not in F]
    Qf = build_generator(NetworkSource(net, F), E, t)
    Qs = build_generator(NetworkSource(net, slow), E, t)
    return TwoScaleSystem(net, U, F, E, Qf, Qs, red)


# ---------------------------------------------------------------------------
# partition


@dataclass
class StatePartition:
    S1: np.ndarray
    S2: np.ndarray
    F1: np.ndarray
    F2: np.ndarray
    M: StateSpace
    fast_kind: np.ndarray  # classification of every E state under Q_fast
    zero_block_entries: int = 0  # number of matrix entries scanned for the zero-block check

    def core_space(self, sys: TwoScaleSystem) -> StateSpace:
        return StateSpace(tuple(sys.core(sys.E.states[i]) for i in self.S1), closed=True,
                          species=sys.reduced.species)


def zero_block_violations(sys: TwoScaleSystem, part: StatePartition):
    """Scan the blocks that must vanish; returns ``(violations, entries_scanned)``."""
    n = len(sys.E)
    Qf = sys.Q_fast.tocsr()
    Qs = sys.Q_slow.tocsr()
    checks = [
        ("slow S1->S2", Qs, part.S1, part.S2),
        ("slow S1->F2", Qs, part.S1, part.F2),
        ("fast rows of S1", Qf, part.S1, np.arange(n)),
        ("fast rows of S2", Qf, part.S2, np.arange(n)),
        ("fast F1->S2", Qf, part.F1, part.S2),
        ("fast F1->F2", Qf, part.F1, part.F2),
    ]
    out = []
    scanned = 0
    for name, Q, rows, cols in checks:
        if len(rows) == 0 or len(cols) == 0:
            continue
        block = Q[rows][:, cols]
        scanned += len(rows) * len(cols)
        block = block.tocoo()
        nz = block.data != 0
        for i, j in zip(block.row[nz], block.col[nz]):
            out.append((name, sys.E.states[rows[i]], sys.E.states[cols[j]]))
    return out, scanned


def partition_states(sys: TwoScaleSystem, x0, check=True) -> StatePartition:
    x0 = tuple(int(v) for v in x0)
    if sys.n_u(x0):
        raise StructureError("the initial state must not contain non-interacting molecules")
    if x0 not in sys.E:
        raise StructureError("the initial state is not in E")
    # positive modulators do not change which jumps are possible, so any time will do
    t = 0.0 if sys.net.time_dependent else None
    M = surrogate_reachable(sys.net, sys.U, sys.F, x0, cap=max(len(sys.E), 1) + 1, t=t)
    outside = [x for x in M.states if x not in sys.E]
    if outside:
        raise StructureError(f"surrogate-reachable state {outside[0]} is not in E")
    S1, S2, F1, F2 = [], [], [], []
    for i, x in enumerate(sys.E.states):
        nu = sys.n_u(x)
        inM = x in M
        if nu == 0:
            (S1 if inM else S2).append(i)
        elif nu == 1 and inM:
            F1.append(i)
        else:
            F2.append(i)
    cl = classify_states(sys.Q_fast)
    part = StatePartition(*(np.array(v, dtype=int) for v in (S1, S2, F1, F2)), M, cl.kind)
    if check:
        bad, scanned = zero_block_violations(sys, part)
        part.zero_block_entries = scanned
        if bad:
            raise NumericalError(f"zero-block structure violated: {bad[0]}", )
    return part


# ---------------------------------------------------------------------------
# mass balance of fast excursions


@dataclass
class EntryCheck:
    z: tuple
    reaction: int
    creation_rate: float
    walk_rate: float
    status: str
    witness: object = None


@dataclass
class Assumption2Report:
    status: str  # "ok" | "blocked" | "trapped"
    entries: list = field(default_factory=list)
    species: tuple = ()
    u_species: tuple = ()

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def failures(self) -> list:
        return [e for e in self.entries if e.status != "ok"]

    def to_dict(self, full_species=None) -> dict:
        def lab(z):
            return {s: int(v) for s, v in zip(self.species, z)}

        out = []
        for e in self.entries:
            d = {
                "z": lab(e.z),
                "reaction": e.reaction,
                "creation_rate": e.creation_rate,
                "walk_rate": e.walk_rate,
                "status": e.status,
            }
            if e.witness is not None:
                d["witness"] = e.witness
            out.append(d)
        first = self.failures()[0] if self.failures() else None
        return {
            "schema": "srn-assumption2/1",
            "status": self.status,
            "first_failure": None if first is None else {"z": lab(first.z), "reaction": first.reaction,
                                                          "status": first.status, "witness": first.witness},
            "entries": out,
        }


def fast_structure(net: ReactionNetwork, U, F, entry, t=None, cap=100_000):
    """Plain fast-only exploration from an entry state.

    Returns ``(status, witness)`` with status ``ok``, ``blocked`` (a state
    carrying a U-molecule without any active fast reaction) or ``trapped``
    (a closed fast class that keeps a U-molecule).
    """
    ui = species_indices(net, U)
    src = NetworkSource(net, F)
    fast_trivial = [net.reaction(r) for r in F if net.reaction(r).trivial]
    space = explore(src, [entry], cap=cap, t=t)
    states = space.states
    index = space.index
    rows, cols = [], []
    for i, x in enumerate(states):
        for xi in src.transitions(x, t):
            y = tuple(a + b for a, b in zip(x, xi))
            rows.append(i)
            cols.append(index[y])
    has_u = [any(x[i] for i in ui) for x in states]
    out_deg = np.bincount(rows, minlength=len(states)) if rows else np.zeros(len(states), dtype=int)
    for i, x in enumerate(states):
        if has_u[i] and out_deg[i] == 0:
            if any(r.intensity(x, t) > 0 for r in fast_trivial):
                return "trapped", [net.labeled(x)]
            return "blocked", net.labeled(x)
    n = len(states)
    g = sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    ncomp, lab = connected_components(g, directed=True, connection="strong")
    leaf = np.ones(ncomp, dtype=bool)
    for a, b in zip(rows, cols):
        if lab[a] != lab[b]:
            leaf[lab[a]] = False
    for c in range(ncomp):
        members = [i for i in range(n) if lab[i] == c]
        if leaf[c] and any(has_u[i] for i in members):
            return "trapped", [net.labeled(states[i]) for i in members]
    return "ok", None


def assumption2_at(red: ReducedSRN, z, t=None, tol=1e-10) -> list:
    """Check the mass-balance identity at one core state, structurally and numerically."""
    net = red.net
    x0 = red.graph.embed(z)
    out = []
    for rid in red.creating_ids:
        lam = net.reaction(rid).intensity(x0, t)
        if lam <= 0:
            continue
        entry = tuple(a + d for a, d in zip(x0, net.reaction(rid).xi))
        status, witness = fast_structure(net, red.U, red.F, entry, t, cap=red.state_cap)
        res = red.entry_analysis(z, rid, t)
        walk = res.rate * res.absorbed
        numeric_ok = abs(walk - lam) <= tol * max(1.0, lam)
        if numeric_ok != (status == "ok"):
            raise NumericalError(
                f"structural and numerical checks disagree at z={tuple(z)}, reaction {rid}: "
                f"{status} vs walk mass {walk!r} of {lam!r}"
            )
        out.append(EntryCheck(tuple(z), rid, lam, walk, status, witness))
    return out


def check_assumption2(sys_or_red, states=None, t=None) -> Assumption2Report:
    """Check the walk mass-balance identity on every U-free state.

    With a :class:`TwoScaleSystem` the default states are the core
    projections of ``E`` without U-molecules; with a bare
    :class:`ReducedSRN` pass ``states`` (core vectors) explicitly.
    """
    if isinstance(sys_or_red, TwoScaleSystem):
        red = sys_or_red.reduced
        if states is None:
            states = [sys_or_red.core(x) for x in sys_or_red.E.states if sys_or_red.n_u(x) == 0]
    else:
        red = sys_or_red
        if states is None:
            raise ValueError("states are required when checking a reduced network directly")
    entries = []
    for z in states:
        entries.extend(assumption2_at(red, tuple(z), t))
    status = "ok"
    for e in entries:
        if e.status != "ok":
            status = e.status
            break
    return Assumption2Report(status, entries, red.species, red.U)


# ---------------------------------------------------------------------------
# structural sufficient conditions


@dataclass
class SufficientConditions:
    a: bool
    b: bool
    c: bool
    sub_conservative: bool

    @property
    def certified(self) -> bool:
        return self.sub_conservative and (self.a or self.b or self.c)

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "sub_conservative": self.sub_conservative,
                "certified": self.certified}


def check_sufficient_conditions(net: ReactionNetwork, U, F) -> SufficientConditions:
    U = tuple(U)
    F = frozenset(F)
    R_U = consuming(net, U)
    R_up = creating(net, U)
    entering = R_up - R_U
    a = is_weakly_reversible(net, sorted(F | entering))
    inner = sorted(F & R_U & R_up)
    has_reverse = all(
        any(net.reaction(f).reactant == net.reaction(r).product and net.reaction(f).product == net.reaction(r).reactant
            for f in F)
        for r in entering
    )
    b = is_weakly_reversible(net, inner) and has_reverse
    c = is_weakly_reversible(net) and F == R_U
    sub = conservation_class(net).sub_conservative
    return SufficientConditions(a, b, c, sub)


def is_intermediate_set(net: ReactionNetwork, U) -> bool:
    ui = species_indices(net, U)
    for r in net.reactions:
        for y in (r.reactant, r.product):
            for i in ui:
                if y[i] and (y[i] != 1 or sum(y) != 1):
                    return False
    return True


# ---------------------------------------------------------------------------
# limit generators


def _fast_exit_probabilities(Q_fast, T_idx, targets):
    """(-Q_TT)^{-1} Q_{T,targets} as a dense array."""
    if len(T_idx) == 0 or len(targets) == 0:
        return np.zeros((len(T_idx), len(targets)))
    QTT = Q_fast[T_idx][:, T_idx].tocsc()
    rhs = Q_fast[T_idx][:, targets].toarray()
    H = spsolve(-QTT, rhs)
    return np.asarray(H).reshape(len(T_idx), len(targets))


def watched_generator(sys: TwoScaleSystem, part: StatePartition) -> sparse.csr_matrix:
    """Generator of the chain watched on S1, in the order of ``part.S1``.

    Slow jumps out of S1 either land in S1 directly or enter F1, from where
    the fast chain is absorbed back into S1 with the computed probabilities.
    """
    S1, F1 = part.S1, part.F1
    Qs = sys.Q_slow.tocsr()
    Qf = sys.Q_fast.tocsr()
    direct = Qs[S1][:, S1]
    if len(F1) == 0:
        return direct.tocsr()
    idx = np.concatenate([F1, S1])
    cl = classify_states(Qf[idx][:, idx])
    stuck = [idx[i] for i in range(len(F1)) if cl.kind[i] != "transient"]
    if stuck:
        witness = [sys.net.labeled(sys.E.states[i]) for i in stuck[:5]]
        raise StructureError("fast block on F1 is singular: some states never return to S1",
                             {"non_transient": witness})
    H = _fast_exit_probabilities(Qf, F1, S1)
    return (direct + sparse.csr_matrix(Qs[S1][:, F1] @ H)).tocsr()


@dataclass
class LimitGenerator:
    Q: np.ndarray
    A: np.ndarray  # absorbing states of the fast part (indices into E)
    W: list  # recurrent fast classes (index arrays into E)
    T: np.ndarray  # transient states of the fast part
    nu: list  # stationary law of each W class
    p0: np.ndarray | None = None

    def a_position(self, e_index: int) -> int:
        return int(np.flatnonzero(self.A == e_index)[0])


def limit_generator_general(sys: TwoScaleSystem, pi0=None) -> LimitGenerator:
    """Limit generator on the absorbing states and collapsed recurrent classes of the fast part.

    Rows of recurrent classes are averaged with the class's stationary law
    and columns summed; transient fast states are eliminated through their
    exit probabilities. With ``pi0`` (a vector over E) the projected initial
    law is returned as well.
    """
    Qf = sys.Q_fast.tocsr()
    Qs = sys.Q_slow.tocsr()
    cl = classify_states(Qf)
    A = np.flatnonzero(cl.kind == "absorbing")
    W = [c for c in cl.recurrent_classes if len(c) > 1 or cl.kind[c[0]] == "recurrent"]
    T = cl.transient()
    nu = [stationary_distribution(Qf, c) for c in W]
    AW = np.concatenate([A] + [np.asarray(c) for c in W]).astype(int)
    H = _fast_exit_probabilities(Qf, T, AW)
    K = Qs[AW][:, AW].toarray()
    if len(T):
        K = K + Qs[AW][:, T].toarray() @ H
    nA, l = len(A), len(W)
    L = np.zeros((nA + l, len(AW)))
    R = np.zeros((len(AW), nA + l))
    L[:nA, :nA] = np.eye(nA)
    R[:nA, :nA] = np.eye(nA)
    pos = nA
    for k, c in enumerate(W):
        L[nA + k, pos:pos + len(c)] = nu[k]
        R[pos:pos + len(c), nA + k] = 1.0
        pos += len(c)
    Qbar = L @ K @ R
    p0 = None
    if pi0 is not None:
        pi0 = np.asarray(pi0, dtype=float)
        pAW = pi0[AW] + (pi0[T] @ H if len(T) else 0.0)
        p0 = pAW @ R
    return LimitGenerator(Qbar, A, W, T, nu, p0)


def reduced_generator(sys: TwoScaleSystem, part: StatePartition, t=None):
    """Generator of the reduced network on the core projection of S1."""
    E0 = part.core_space(sys)
    return E0, build_generator(sys.reduced, E0, t)


# ---------------------------------------------------------------------------
# epsilon sweep


DEFAULT_EPSILONS = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)


@dataclass
class SweepReport:
    epsilons: list
    errors: list
    slope: float | None
    intercept: float | None
    time_grid: list
    solver_floors: list
    monotone: bool
    fit_points: list
    assumption2: dict | None = None
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "schema": "srn-reduce/1",
            "document": "sweep",
            "epsilons": self.epsilons,
            "errors": self.errors,
            "slope": self.slope,
            "intercept": self.intercept,
            "time_grid": self.time_grid,
            "solver_floors": self.solver_floors,
            "monotone": self.monotone,
            "fit_points": self.fit_points,
            "assumption2": self.assumption2,
            "warnings": self.warnings,
        }

    def to_csv(self) -> str:
        lines = ["epsilon,error,solver_floor"]
        for e, err, fl in zip(self.epsilons, self.errors, self.solver_floors):
            lines.append(f"{e!r},{err!r},{fl!r}")
        return "\n".join(lines) + "\n"


def fit_slope(epsilons, errors, floors, floor_factor=100.0):
    """Least-squares slope of log(error) against log(eps), skipping floor-dominated points."""
    pts = [(e, err) for e, err, fl in zip(epsilons, errors, floors) if err >= floor_factor * fl and err > 0]
    if len(pts) < 2:
        return None, None, pts
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept), pts


def _core_predicate(sys, event):
    if event is None:
        return lambda z: True
    if hasattr(event, "bind"):
        return event.bind(sys.reduced.species)
    return event


def epsilon_sweep(sys: TwoScaleSystem, part: StatePartition, pi, event, T: float,
                  epsilons=DEFAULT_EPSILONS, n_grid: int = 201, tol: float = 1e-12,
                  timedep_steps: int | None = None) -> SweepReport:
    """Sup-in-time error between the scaled chain and the reduced chain, per eps.

    ``pi`` is a probability vector over ``part.S1`` (or a single E-index
    of an S1 state); ``event`` is an :class:`Event` or a predicate on
    core vectors selecting B.
    """
    pred = _core_predicate(sys, event)
    E0 = part.core_space(sys)
    n = len(sys.E)
    if np.isscalar(pi):
        p_full = np.zeros(n)
        p_full[int(pi)] = 1.0
        if int(pi) not in set(part.S1.tolist()):
            raise StructureError("the initial law must be supported on S1")
    else:
        pi = np.asarray(pi, dtype=float)
        p_full = np.zeros(n)
        p_full[part.S1] = pi
    p0 = np.array([p_full[i] for i in part.S1])
    B_full = np.array([sys.n_u(x) == 0 and pred(sys.core(x)) for x in sys.E.states], dtype=bool)
    B0 = np.array([pred(z) for z in E0.states], dtype=bool)
    grid = np.linspace(0.0, T, n_grid)
    notes = []
    if not B0.any():
        notes.append("event set is empty on the reduced state space")
    td = sys.net.time_dependent
    if td:
        steps = timedep_steps or (n_grid - 1)
        ref_tl = transient_distribution_timedep(lambda t: build_generator(sys.reduced, E0, t), p0, T, steps=steps)
        grid = ref_tl.times
    else:
        Q0 = build_generator(sys.reduced, E0)
        ref_tl = transient_distribution(Q0, p0, grid, tol=tol)
    ref = ref_tl.probability(B0)
    ref_floor = float(ref_tl.error_bounds.max())
    errors, floors = [], []
    for eps in epsilons:
        if td:
            tl = transient_distribution_timedep(lambda t, e=eps: sys.generator(e, t), p_full, T, steps=len(grid) - 1)
        else:
            tl = transient_distribution(sys.generator(eps), p_full, grid, tol=tol)
        err = float(np.max(np.abs(tl.probability(B_full) - ref)))
        errors.append(err)
        floors.append(float(tl.error_bounds.max()) + ref_floor + 1e-13)
    slope, intercept, pts = fit_slope(epsilons, errors, floors)
    if len(epsilons) < 2:
        notes.append("a single eps value gives no slope")
    elif slope is None:
        notes.append("fewer than two errors above 100x the solver floor; slope undefined")
    order = np.argsort(epsilons)[::-1]
    monotone = all(
        errors[order[k + 1]] <= errors[order[k]] + floors[order[k]] + floors[order[k + 1]]
        for k in range(len(order) - 1)
    )
    return SweepReport(list(map(float, epsilons)), errors, slope, intercept, [float(t) for t in grid],
                       floors, monotone, [[float(a), float(b)] for a, b in pts], warnings=notes)


# ---------------------------------------------------------------------------
# stationary comparison


@dataclass
class TypeMismatch:
    z: dict
    original: str
    reduced: str


def _recurrence(kind):
    return "transient" if kind == "transient" else "recurrent"


def state_type_mismatches(sys: TwoScaleSystem) -> list:
    """U-free states whose transient/recurrent type differs between the chain and its reduction."""
    Q = (sys.Q_fast + sys.Q_slow).tocsr()
    cl = classify_states(Q)
    zs = {sys.core(x): i for i, x in enumerate(sys.E.states) if sys.n_u(x) == 0}
    E0 = explore(sys.reduced, list(zs), cap=sys.reduced.state_cap, species=sys.reduced.species)
    cl0 = classify_states(build_generator(sys.reduced, E0))
    out = []
    for z in sorted(zs):
        a = _recurrence(cl.kind[zs[z]])
        b = _recurrence(cl0.kind[E0.index[z]])
        if a != b:
            out.append(TypeMismatch(sys.reduced.labeled(z), a, b))
    return out


@dataclass
class StationaryReport:
    epsilons: list
    gaps: list
    extrapolated: float | None
    trend_slope: float | None
    hypotheses: dict
    mismatches: list

    def to_dict(self) -> dict:
        return {
            "schema": "srn-reduce/1",
            "document": "stationary",
            "epsilons": self.epsilons,
            "gaps": self.gaps,
            "extrapolated_gap": self.extrapolated,
            "trend_slope": self.trend_slope,
            "hypotheses": self.hypotheses,
            "mismatches": [m.__dict__ for m in self.mismatches],
        }

    def to_csv(self) -> str:
        return "epsilon,sup_gap\n" + "".join(f"{e!r},{g!r}\n" for e, g in zip(self.epsilons, self.gaps))


def stationary_hypotheses(sys: TwoScaleSystem) -> dict:
    Q = (sys.Q_fast + sys.Q_slow).tocsr()
    cl = classify_states(Q)
    return {
        "intermediate": is_intermediate_set(sys.net, sys.U),
        "fast_is_all_consuming": sys.F == consuming(sys.net, sys.U),
        "sub_conservative": conservation_class(sys.net).sub_conservative,
        "irreducible": len(cl.recurrent_classes) == 1 and len(cl.recurrent_classes[0]) == len(sys.E),
    }


def stationary_convergence(sys: TwoScaleSystem, epsilons=DEFAULT_EPSILONS, override=False) -> StationaryReport:
    """Sup-gap between the stationary laws of the scaled chain and of the reduced chain."""
    hyp = stationary_hypotheses(sys)
    mismatches = state_type_mismatches(sys)
    failed = [k for k, v in hyp.items() if not v]
    if failed and not override:
        raise StructureError(
            f"hypotheses violated: {', '.join(failed)}",
            {"hypotheses": hyp, "mismatches": [m.__dict__ for m in mismatches]},
        )
    if not hyp["irreducible"]:
        raise StructureError("E is not irreducible", {"hypotheses": hyp,
                                                       "mismatches": [m.__dict__ for m in mismatches]})
    zs = {sys.core(x): i for i, x in enumerate(sys.E.states) if sys.n_u(x) == 0}
    E0 = StateSpace(tuple(zs), closed=True, species=sys.reduced.species)
    Q0 = build_generator(sys.reduced, E0)
    pi0 = stationary_distribution(Q0)
    gaps = []
    for eps in epsilons:
        pe = stationary_distribution(sys.generator(eps))
        gaps.append(float(max(abs(pe[zs[z]] - pi0[E0.index[z]]) for z in zs)))
    order = list(np.argsort(epsilons)[::-1])
    extrap, slope = None, None
    head = [k for k in order[:-1] if gaps[k] > 0]
    if len(head) >= 2:
        slope, icpt = np.polyfit(np.log([epsilons[k] for k in head]), np.log([gaps[k] for k in head]), 1)
        extrap = float(math.exp(icpt + slope * math.log(epsilons[order[-1]])))
        slope = float(slope)
    return StationaryReport(list(map(float, epsilons)), gaps, extrap, slope, hyp, mismatches)
