"""Finite-state continuous-time Markov chains for reaction networks.

A *transition source* is anything exposing ``transitions(x, t) -> {xi: rate}``.
:func:`network_source` wraps a :class:`ReactionNetwork` (optionally
restricted to a subset of reactions); a :class:`ReducedSRN` already has
the method. Generators are ``scipy.sparse.csr_matrix`` over a
:class:`StateSpace` whose states are sorted lexicographically.
"""
from __future__ import annotations

import csv
import io
import json
import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import spsolve

from .errors import NumericalError, StateSpaceCapExceeded, StructureError
from .network import ReactionNetwork, Scaled, TimeModulated, is_time_dependent

DEFAULT_STATE_CAP = 100_000
DEFAULT_JUMP_CAP = 1_000_000


# ---------------------------------------------------------------------------
# transition sources


class NetworkSource:
    """Aggregated jump rates of a reaction network (trivial reactions drop out)."""

    def __init__(self, net: ReactionNetwork, reactions: Iterable[int] | None = None, gate=None):
        self.net = net
        ids = net.reaction_ids if reactions is None else tuple(reactions)
        self.reactions = tuple(net.reaction(r) for r in ids)
        self.gate = gate  # optional per-reaction predicate (reaction, x) -> bool

    def transitions(self, x, t=None) -> dict:
        out = defaultdict(float)
        for r in self.reactions:
            if r.trivial:
                continue
            if self.gate is not None and not self.gate(r, x):
                continue
            lam = r.intensity(x, t)
            if lam > 0:
                out[r.xi] += lam
        return dict(out)


def network_source(net, reactions=None, gate=None) -> NetworkSource:
    return NetworkSource(net, reactions, gate)


def _as_source(obj):
    if isinstance(obj, ReactionNetwork):
        return NetworkSource(obj)
    if hasattr(obj, "transitions"):
        return obj
    raise TypeError(f"cannot derive transitions from {type(obj).__name__}")


# ---------------------------------------------------------------------------
# state spaces


@dataclass
class StateSpace:
    states: tuple
    closed: bool = False
    species: tuple | None = None

    def __post_init__(self):
        self.states = tuple(sorted(tuple(int(v) for v in s) for s in self.states))
        self.index = {s: i for i, s in enumerate(self.states)}

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __contains__(self, x):
        return tuple(x) in self.index

    def labels(self) -> list:
        if self.species is None:
            return ["(" + ",".join(map(str, s)) + ")" for s in self.states]
        return [" ".join(f"{n}={v}" for n, v in zip(self.species, s)) for s in self.states]

    def mask(self, predicate) -> np.ndarray:
        return np.array([bool(predicate(s)) for s in self.states], dtype=bool)


def explore(source, starts, cap=DEFAULT_STATE_CAP, t=None, species=None) -> StateSpace:
    """Breadth-first closure of ``starts`` under the positive-rate jumps of ``source``."""
    source = _as_source(source)
    starts = [tuple(int(v) for v in s) for s in starts]
    seen = set(starts)
    queue = deque(starts)
    while queue:
        x = queue.popleft()
        for xi in source.transitions(x, t):
            y = tuple(a + b for a, b in zip(x, xi))
            if min(y) < 0:
                raise NumericalError(f"jump from {x} by {xi} leaves the non-negative orthant")
            if y not in seen:
                if len(seen) >= cap:
                    raise StateSpaceCapExceeded(
                        f"reachable set exceeds the cap of {cap} states", list(y)
                    )
                seen.add(y)
                queue.append(y)
    return StateSpace(tuple(seen), closed=True, species=species)


def reachable_closed_set(net: ReactionNetwork, x0, cap=DEFAULT_STATE_CAP, t=None) -> StateSpace:
    """All states reachable from ``x0``; closed by construction."""
    return explore(net, [x0], cap=cap, t=t, species=net.species)


def surrogate_reachable(net: ReactionNetwork, U, F, x0, cap=DEFAULT_STATE_CAP, t=None) -> StateSpace:
    """Reachability under the surrogate dynamics: fast reactions always, slow ones only without U-molecules."""
    from .network import species_indices

    ui = species_indices(net, U)
    F = frozenset(F)
    if any(x0[i] for i in ui):
        raise StructureError("the surrogate model starts from a state without non-interacting molecules")

    def gate(r, x):
        return r.id in F or not any(x[i] for i in ui)

    space = explore(NetworkSource(net, gate=gate), [x0], cap=cap, t=t, species=net.species)
    space.closed = False  # closed for the surrogate dynamics only
    return space


def is_closed(source, E: StateSpace, t=None):
    """Return ``(closed, witness)`` where witness is a (state, successor) leaving E."""
    source = _as_source(source)
    for x in E.states:
        for xi in source.transitions(x, t):
            y = tuple(a + b for a, b in zip(x, xi))
            if y not in E.index:
                return False, (x, y)
    return True, None


# ---------------------------------------------------------------------------
# generators


def build_generator(source, E: StateSpace, t=None, check_closed=True) -> sparse.csr_matrix:
    """Sparse generator of ``source`` on ``E``.

    Off-diagonal entries aggregate rates per jump vector; the diagonal is
    minus the compensated sum of each row's off-diagonal entries.
    """
    source = _as_source(source)
    n = len(E)
    rows, cols, vals = [], [], []
    for i, x in enumerate(E.states):
        out = []
        for xi, rate in source.transitions(x, t).items():
            if rate == 0:
                continue
            y = tuple(a + b for a, b in zip(x, xi))
            j = E.index.get(y)
            if j is None:
                if check_closed:
                    raise StructureError(
                        f"state set is not closed: {x} -> {y}", {"state": list(x), "successor": list(y)}
                    )
                continue
            rows.append(i)
            cols.append(j)
            vals.append(rate)
            out.append(rate)
        rows.append(i)
        cols.append(i)
        vals.append(-math.fsum(out))
    return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


class _LawSource:
    """Transitions of ``(reaction, law)`` pairs, with the law overriding the reaction's own."""

    def __init__(self, pairs):
        self.pairs = pairs

    def transitions(self, x, t=None) -> dict:
        out = defaultdict(float)
        for r, law in self.pairs:
            if r.trivial:
                continue
            lam = law.rate(x, r.reactant, t)
            if lam > 0:
                out[r.xi] += lam
        return dict(out)


def _split_modulator(law):
    """Return ``(time-free law, modulator)`` or ``(law, None)`` if no single modulator factors out."""
    if isinstance(law, TimeModulated) and not is_time_dependent(law.base):
        return law.base, law.modulator
    if isinstance(law, Scaled):
        base, mod = _split_modulator(law.base)
        if mod is not None:
            return Scaled(base, law.factor), mod
    return law, None


class ModulatedGenerator:
    """Generator ``Q(t) = Q_0 + sum_j f_j(t) Q_j`` of reactions with factored time modulators.

    The matrices are assembled once; evaluating at ``t`` is a sparse linear
    combination. Reactions whose time dependence does not factor through a
    single modulator are rebuilt at every call.
    """

    def __init__(self, net: ReactionNetwork, E: StateSpace, reactions: Iterable[int] | None = None):
        ids = net.reaction_ids if reactions is None else tuple(reactions)
        const, groups, other = [], {}, []
        for rid in ids:
            r = net.reaction(rid)
            base, mod = _split_modulator(r.law)
            if mod is not None:
                groups.setdefault(id(mod), (mod, []))[1].append((r, base))
            elif is_time_dependent(r.law):
                other.append((r, r.law))
            else:
                const.append((r, r.law))
        self.E = E
        self.Q0 = build_generator(_LawSource(const), E, check_closed=False)
        self.parts = [(mod, build_generator(_LawSource(pairs), E, check_closed=False))
                      for mod, pairs in groups.values()]
        self.other = _LawSource(other) if other else None

    def __call__(self, t) -> sparse.csr_matrix:
        Q = self.Q0.copy()
        for mod, Qj in self.parts:
            Q = Q + float(mod(t)) * Qj
        if self.other is not None:
            Q = Q + build_generator(self.other, self.E, t, check_closed=False)
        return Q.tocsr()


def check_generator(Q, atol=0.0):
    """Raise NumericalError unless Q has non-negative off-diagonal entries and zero row sums."""
    Q = sparse.csr_matrix(Q)
    off = Q - sparse.diags(Q.diagonal())
    if off.nnz and off.data.min() < 0:
        raise NumericalError("generator has a negative off-diagonal entry")
    rs = np.abs(np.asarray(Q.sum(axis=1)).ravel())
    scale = np.maximum(np.abs(Q.diagonal()), 1.0)
    if np.any(rs > atol + 1e-13 * scale):
        raise NumericalError(f"generator row sums deviate from zero by {rs.max():.3e}")


def restrict(Q, idx) -> sparse.csr_matrix:
    idx = np.asarray(idx, dtype=int)
    return sparse.csr_matrix(Q)[idx][:, idx]


# ---------------------------------------------------------------------------
# transient distributions


@dataclass
class DistributionTimeline:
    times: np.ndarray
    probabilities: np.ndarray  # (len(times), n_states)
    error_bounds: np.ndarray
    labels: list | None = None
    meta: dict = field(default_factory=dict)

    def probability(self, mask) -> np.ndarray:
        return self.probabilities[:, np.asarray(mask, dtype=bool)].sum(axis=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        labels = self.labels or [str(i) for i in range(self.probabilities.shape[1])]
        w.writerow(["time", *labels])
        for t, p in zip(self.times, self.probabilities):
            w.writerow([repr(float(t)), *(repr(float(v)) for v in p)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "schema": "srn-reduce/1",
            "document": "timeline",
            "times": [float(t) for t in self.times],
            "labels": self.labels,
            "probabilities": self.probabilities.tolist(),
            "error_bounds": [float(e) for e in self.error_bounds],
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def poisson_weights(lam: float, tol: float):
    """Poisson(lam) probabilities for indices ``start..K``.

    Returns ``(weights, tail_bound, start)`` where the mass outside the
    kept window is at most ``tail_bound <= tol``. Weights are generated by
    recursion outward from the mode, which stays accurate for large lam.
    """
    if lam == 0:
        return np.array([1.0]), 0.0, 0
    mode = int(math.floor(lam))
    w_mode = math.exp(-lam + mode * math.log(lam) - math.lgamma(mode + 1))
    left = [w_mode]
    k = mode
    left_tail = 0.0
    while k > 0:
        w = left[-1] * k / lam
        k -= 1
        # the terms below index k shrink at least geometrically with ratio k/lam
        bound = w * (k / lam) / (1.0 - k / lam) if k < lam else math.inf
        left.append(w)
        if bound < tol / 2:
            left_tail = bound
            break
    start = k
    right = []
    w = w_mode
    k = mode
    while True:
        k += 1
        w = w * lam / k
        right.append(w)
        if k + 1 > lam:
            bound = w * lam / (k + 1 - lam)
            if bound < tol / 2:
                break
    return np.array(left[::-1] + right), left_tail + bound, start


def _uniformized_step(P_T, v, lam, tol):
    """v @ exp(Q dt) where P_T = (I + Q/Lambda)^T and lam = Lambda*dt."""
    weights, tail, start = poisson_weights(lam, tol)
    acc = np.zeros_like(v)
    cur = v.copy()
    for _ in range(start):
        cur = P_T @ cur
    for w in weights:
        acc += w * cur
        cur = P_T @ cur
    return acc, tail


def transient_distribution(Q, pi0, times, tol=1e-12, max_poisson=50.0, labels=None) -> DistributionTimeline:
    """Solve p(t) = pi0 exp(Q t) on a sorted time grid by uniformization.

    Between grid points the chain is advanced in sub-steps whose Poisson
    mean stays below ``max_poisson``; the per-sub-step truncation target is
    scaled so the accumulated tail at every grid point stays below ``tol``.
    ``error_bounds`` records that accumulated tail (the exactness
    certificate: the computed vector underestimates the truth entrywise by
    at most this total mass).
    """
    Q = sparse.csr_matrix(Q)
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0) or (times.size and times[0] < 0):
        raise ValueError("times must be non-negative and sorted")
    v = np.asarray(pi0, dtype=float).copy()
    n = Q.shape[0]
    Lam = float(np.max(-Q.diagonal())) if n else 0.0
    out = np.zeros((len(times), n))
    bounds = np.zeros(len(times))
    if Lam == 0:
        out[:] = v
        return DistributionTimeline(times, out, bounds, labels, {"method": "uniformization", "rate": 0.0})
    P_T = (sparse.identity(n, format="csr") + Q / Lam).T.tocsr()
    total_lam = Lam * (times[-1] if len(times) else 0.0)
    n_sub_total = max(1, int(math.ceil(total_lam / max_poisson)))
    sub_tol = tol / (n_sub_total + len(times))
    t_prev = 0.0
    tail_acc = 0.0
    for k, t in enumerate(times):
        dt = t - t_prev
        if dt > 0:
            lam = Lam * dt
            nsub = max(1, int(math.ceil(lam / max_poisson)))
            for _ in range(nsub):
                v, tail = _uniformized_step(P_T, v, lam / nsub, sub_tol)
                tail_acc += tail
        out[k] = v
        bounds[k] = tail_acc
        t_prev = t
    if np.any(bounds > tol):
        raise NumericalError(f"uniformization tail {bounds.max():.2e} exceeds {tol:.0e}")
    return DistributionTimeline(
        times, out, bounds, labels, {"method": "uniformization", "rate": Lam, "tail_tolerance": tol}
    )


def transient_distribution_timedep(
    Q_of_t: Callable[[float], sparse.spmatrix],
    pi0,
    T: float,
    steps: int = 200,
    tol: float = 1e-10,
    min_step: float = 1e-12,
    labels=None,
) -> DistributionTimeline:
    """Integrate p'(t) = p(t) Q(t) on [0, T] with classical Runge-Kutta.

    Each step is compared against two half steps and halved until the
    difference (max norm) drops below ``tol``. The output grid has
    ``steps + 1`` equally spaced points. Drift of the total mass from one
    is recorded in ``meta["mass_drift"]`` and never corrected.
    """
    grid = np.linspace(0.0, T, steps + 1) if T > 0 else np.array([0.0])
    v = np.asarray(pi0, dtype=float).copy()
    n = v.size
    out = np.zeros((len(grid), n))
    bounds = np.zeros(len(grid))
    out[0] = v

    def f(t, p):
        return sparse.csr_matrix(Q_of_t(t)).T @ p

    def rk4(t, p, h):
        k1 = f(t, p)
        k2 = f(t + h / 2, p + h / 2 * k1)
        k3 = f(t + h / 2, p + h / 2 * k2)
        k4 = f(t + h, p + h * k3)
        return p + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    err_acc = 0.0
    h = grid[1] - grid[0] if len(grid) > 1 else 0.0
    n_steps = 0
    for k in range(1, len(grid)):
        t, t_end = grid[k - 1], grid[k]
        while t < t_end:
            rest = t_end - t
            # fold a rounding-sized remainder into this step and land on the grid point exactly
            step = rest if h >= rest * (1.0 - 1e-9) else h
            while True:
                if step < min_step:
                    raise NumericalError(f"step size underflow at t={t:.6g}")
                full = rk4(t, v, step)
                half = rk4(t + step / 2, rk4(t, v, step / 2), step / 2)
                err = float(np.max(np.abs(full - half)))
                if err <= tol:
                    break
                step /= 2
                h = step
            # Richardson estimate for the accepted two-half-step solution
            v = half + (half - full) / 15.0
            err_acc += err / 15.0
            t = t_end if step == rest else t + step
            n_steps += 1
            if err < tol / 64:
                h *= 2
        out[k] = v
        bounds[k] = err_acc
    drift = float(np.max(np.abs(out.sum(axis=1) - 1.0)))
    return DistributionTimeline(
        grid, out, bounds, labels, {"method": "rk4-step-doubling", "steps": n_steps, "mass_drift": drift}
    )


# ---------------------------------------------------------------------------
# classification and stationary distributions


@dataclass
class Classification:
    kind: np.ndarray  # "absorbing" | "transient" | "recurrent"
    component: np.ndarray  # SCC label per state
    recurrent_classes: list  # list of index arrays (absorbing singletons included)

    def transient(self) -> np.ndarray:
        return np.flatnonzero(self.kind == "transient")


def classify_states(Q) -> Classification:
    Q = sparse.csr_matrix(Q)
    n = Q.shape[0]
    off = (Q - sparse.diags(Q.diagonal())).tocoo()
    keep = off.data > 0
    g = sparse.csr_matrix((np.ones(keep.sum()), (off.row[keep], off.col[keep])), shape=(n, n))
    ncomp, lab = connected_components(g, directed=True, connection="strong")
    leaves = np.ones(ncomp, dtype=bool)
    gc = g.tocoo()
    cross = lab[gc.row] != lab[gc.col]
    leaves[lab[gc.row[cross]]] = False
    kind = np.empty(n, dtype=object)
    members = defaultdict(list)
    for i in range(n):
        members[lab[i]].append(i)
    classes = []
    for c in sorted(members, key=lambda c: members[c][0]):
        idx = np.array(members[c])
        if leaves[c]:
            classes.append(idx)
            kind[idx] = "absorbing" if len(idx) == 1 and g[idx[0]].nnz == 0 else "recurrent"
        else:
            kind[idx] = "transient"
    return Classification(kind, lab, classes)


def stationary_distribution(Q, component=None, residual_tol=1e-12) -> np.ndarray:
    """Stationary distribution of Q on an irreducible closed class.

    ``component`` is an index array (default: all states). The returned
    vector lives on ``component``. The residual max|pi Q| relative to the
    largest exit rate must not exceed ``residual_tol``.
    """
    Q = sparse.csr_matrix(Q)
    n = Q.shape[0]
    idx = np.arange(n) if component is None else np.asarray(component, dtype=int)
    inside = np.zeros(n, dtype=bool)
    inside[idx] = True
    leaving = Q[idx][:, ~inside]
    if leaving.nnz and np.any(leaving.data > 0):
        raise StructureError("component is not closed")
    Qs = Q[idx][:, idx]
    m = len(idx)
    if m == 1:
        return np.array([1.0])
    cl = classify_states(Qs)
    if len(cl.recurrent_classes) != 1 or len(cl.recurrent_classes[0]) != m:
        raise StructureError("component is not irreducible", {"n_classes": len(cl.recurrent_classes)})
    A = Qs.T.tolil()
    A[m - 1, :] = np.ones(m)
    b = np.zeros(m)
    b[-1] = 1.0
    A = A.tocsc()
    pi = spsolve(A, b)
    scale = max(float(np.max(np.abs(Qs.diagonal()))), 1e-300)
    for _ in range(3):
        r = Qs.T @ pi
        res = float(np.max(np.abs(r))) / scale
        if res <= residual_tol:
            break
        corr = spsolve(A, np.concatenate([-r[:-1], [1.0 - pi.sum()]]))
        pi = pi + corr
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    res = float(np.max(np.abs(Qs.T @ pi))) / scale
    if res > residual_tol:
        raise NumericalError(f"stationary residual {res:.2e} exceeds {residual_tol:.0e}")
    return pi


# ---------------------------------------------------------------------------
# stochastic simulation


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    species: tuple | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        names = list(self.species) if self.species else [f"x{i}" for i in range(self.states.shape[1])]
        w.writerow(["t", *names])
        for t, x in zip(self.times, self.states):
            w.writerow([repr(float(t)), *(int(v) for v in x)])
        return buf.getvalue()

    def state_at(self, t) -> np.ndarray:
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        return self.states[max(k, 0)]


def rng_for(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by (seed, stream)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


def ssa_simulate(source, x0, T: float, seed: int, replicate: int = 0, max_jumps=DEFAULT_JUMP_CAP, species=None):
    """Gillespie direct method on ``source`` from ``x0`` up to time ``T``."""
    if isinstance(source, ReactionNetwork):
        species = species or source.species
        if source.time_dependent:
            raise ValueError("ssa_simulate supports time-homogeneous rates only")
    src = _as_source(source)
    rng = rng_for(seed, replicate)
    x = tuple(int(v) for v in x0)
    t = 0.0
    times, states = [0.0], [x]
    for _ in range(max_jumps):
        tr = src.transitions(x)
        if not tr:
            break
        jumps = sorted(tr.items())
        rates = np.array([r for _, r in jumps])
        total = rates.sum()
        t += rng.exponential(1.0 / total)
        if t > T:
            break
        k = int(np.searchsorted(np.cumsum(rates), rng.random() * total, side="right"))
        k = min(k, len(jumps) - 1)
        x = tuple(a + b for a, b in zip(x, jumps[k][0]))
        times.append(t)
        states.append(x)
    else:
        raise NumericalError(f"jump cap of {max_jumps} exceeded before T={T}")
    return Trajectory(np.array(times), np.array(states, dtype=int), species)


def ssa_generator_ensemble(Q, start, T: float, n: int, seed: int, chunk: int = 10_000, max_jumps=DEFAULT_JUMP_CAP):
    """Sample the state index at time ``T`` for ``n`` independent paths of generator ``Q``.

    Paths are simulated in chunks; chunk ``k`` draws from stream
    ``(seed, k)`` so results do not depend on how chunks are scheduled.
    """
    Q = sparse.csr_matrix(Q)
    m = Q.shape[0]
    off = (Q - sparse.diags(Q.diagonal())).tocsr()
    off.eliminate_zeros()
    exit_rate = np.asarray(off.sum(axis=1)).ravel()
    indptr, indices, data = off.indptr, off.indices, off.data
    # row-normalized cumulative probabilities shifted by row number, so one
    # global searchsorted picks the successor for every active path at once
    cum = np.zeros_like(data)
    for i in range(m):
        a, b = indptr[i], indptr[i + 1]
        if b > a:
            c = np.cumsum(data[a:b]) / exit_rate[i]
            c[-1] = 1.0
            cum[a:b] = c + i
    result = np.empty(n, dtype=int)
    for k, lo in enumerate(range(0, n, chunk)):
        hi = min(n, lo + chunk)
        rng = rng_for(seed, k)
        state = np.full(hi - lo, int(start))
        t = np.zeros(hi - lo)
        active = np.ones(hi - lo, dtype=bool)
        for _ in range(max_jumps):
            act = np.flatnonzero(active)
            if act.size == 0:
                break
            s = state[act]
            rate = exit_rate[s]
            dead = rate == 0
            active[act[dead]] = False
            act, s, rate = act[~dead], s[~dead], rate[~dead]
            if act.size == 0:
                break
            t[act] += rng.exponential(1.0, act.size) / rate
            done = t[act] > T
            active[act[done]] = False
            act, s = act[~done], s[~done]
            u = rng.random(act.size)
            pos = np.searchsorted(cum, s + u, side="right")
            pos = np.minimum(pos, indptr[s + 1] - 1)
            state[act] = indices[pos]
        else:
            raise NumericalError(f"jump cap of {max_jumps} exceeded")
        result[lo:hi] = state
    return result


def dkw_band(n: int, alpha: float = 0.01) -> float:
    """Half-width of the Dvoretzky-Kiefer-Wolfowitz confidence band."""
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def empirical_cdf_distance(samples, probabilities) -> float:
    """Sup distance between the empirical CDF of state indices and a reference distribution."""
    counts = np.bincount(np.asarray(samples), minlength=len(probabilities)) / len(samples)
    return float(np.max(np.abs(np.cumsum(counts) - np.cumsum(probabilities))))
