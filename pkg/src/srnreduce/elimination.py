"""Elimination of fast-degraded non-interacting species.

Given a non-interacting species set ``U`` and a proper fast set ``F`` the
reduced network lives on the core species only. Every reduced reaction is
either a copy of a reaction that does not touch ``U`` or the contraction
of a walk ``*in -> U_i -> ... -> *out`` through the elimination graph.

Production intensities are exact: for each core state ``z`` and each
creating reaction active at ``(z, 0)`` we solve for the absorption
probabilities of the fast jump chain started at the entry state. The
chain state is augmented with the running minimum of
``x_core - reactant_core`` along the path, which pins down the contracted
reactant, so walks with equal net change but different reactants stay
separate. Walk enumeration and a truncated walk-sum are provided as
independent oracles.
"""
from __future__ import annotations

import itertools
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import spsolve

from .errors import NumericalError, StateSpaceCapExceeded, StructureError
from .network import ReactionNetwork, consuming, creating, require_subset, species_indices

IN = "*in"
OUT = "*out"


# ---------------------------------------------------------------------------
# non-interacting sets


@dataclass
class NonInteracting:
    ok: bool
    witness: tuple | None = None  # complex (as a tuple) violating the definition
    reason: str = ""

    def __bool__(self):
        return self.ok


def _complexes(net):
    seen = []
    for r in net.reactions:
        for y in (r.reactant, r.product):
            if y not in seen:
                seen.append(y)
    return seen


def is_noninteracting(net: ReactionNetwork, U: Iterable[str]) -> NonInteracting:
    ui = species_indices(net, U)
    for y in _complexes(net):
        present = [i for i in ui if y[i]]
        if any(y[i] >= 2 for i in present):
            return NonInteracting(False, y, "coefficient >= 2 on a non-interacting species")
        if len(present) >= 2:
            return NonInteracting(False, y, "two non-interacting species share a complex")
    return NonInteracting(True)


def find_noninteracting_sets(net: ReactionNetwork) -> list:
    """All maximal non-interacting species sets, as sorted tuples of names."""
    complexes = _complexes(net)
    eligible = [i for i in range(net.n_species) if all(y[i] <= 1 for y in complexes)]
    adj = {i: set() for i in eligible}
    for y in complexes:
        present = [i for i in eligible if y[i]]
        for a, b in itertools.combinations(present, 2):
            adj[a].add(b)
            adj[b].add(a)
    # maximal independent sets = maximal cliques of the complement (Bron-Kerbosch with pivot)
    comp = {i: set(eligible) - adj[i] - {i} for i in eligible}
    found = []

    def expand(R, P, X):
        if not P and not X:
            found.append(tuple(sorted(net.species[i] for i in R)))
            return
        pivot = max(P | X, key=lambda v: len(comp[v] & P))
        for v in list(P - comp[pivot]):
            expand(R | {v}, P & comp[v], X & comp[v])
            P = P - {v}
            X = X | {v}

    expand(set(), set(eligible), set())
    return sorted(found)


# ---------------------------------------------------------------------------
# elimination graph


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    reaction: int


@dataclass
class EliminationGraph:
    net: ReactionNetwork
    U: tuple
    F: frozenset
    edges: tuple

    @property
    def vertices(self) -> tuple:
        return (IN, OUT) + self.U

    def out_edges(self, vertex) -> tuple:
        return self._out.get(vertex, ())

    def __post_init__(self):
        out = defaultdict(list)
        for e in self.edges:
            out[e.source].append(e)
        self._out = {k: tuple(v) for k, v in out.items()}
        self.u_index = species_indices(self.net, self.U)
        ui = set(self.u_index)
        self.core_index = tuple(i for i in range(self.net.n_species) if i not in ui)

    def u_species(self, y) -> str | None:
        for i in self.u_index:
            if y[i]:
                return self.net.species[i]
        return None

    def core(self, x) -> tuple:
        return tuple(x[i] for i in self.core_index)

    def embed(self, z) -> tuple:
        x = [0] * self.net.n_species
        for i, v in zip(self.core_index, z):
            x[i] = v
        return tuple(x)


def build_elimination_graph(net: ReactionNetwork, U: Iterable[str], F: Iterable[int]) -> EliminationGraph:
    U = tuple(sorted(U, key=net.index))
    F = frozenset(F)
    ni = is_noninteracting(net, U)
    if not ni:
        raise StructureError(
            f"species {list(U)} are not non-interacting ({ni.reason}: {net.complex_str(ni.witness)})",
            {"witness": net.complex_str(ni.witness)},
        )
    R_U = consuming(net, U)
    R_up = creating(net, U)
    require_subset(F, R_U)
    ui = species_indices(net, U)

    def which(y):
        for i in ui:
            if y[i]:
                return net.species[i]
        return None

    edges = []
    for r in net.reactions:
        src, dst = which(r.reactant), which(r.product)
        if r.id in R_up and r.id not in R_U:
            edges.append(Edge(IN, dst, r.id))
        elif r.id in F:
            edges.append(Edge(src, dst if dst is not None else OUT, r.id))
    return EliminationGraph(net, U, F, tuple(edges))


@dataclass
class Properness:
    ok: bool
    unreachable_from_in: tuple = ()
    cannot_reach_out: tuple = ()

    def __bool__(self):
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return "proper"
        parts = []
        if self.unreachable_from_in:
            parts.append(f"not created from a U-free reactant: {', '.join(self.unreachable_from_in)}")
        if self.cannot_reach_out:
            parts.append(f"cannot be degraded by fast reactions: {', '.join(self.cannot_reach_out)}")
        return "; ".join(parts)


def _reach(graph: EliminationGraph, start, reverse=False):
    adj = defaultdict(set)
    for e in graph.edges:
        if reverse:
            adj[e.target].add(e.source)
        else:
            adj[e.source].add(e.target)
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def graph_properness(graph: EliminationGraph) -> Properness:
    fwd = _reach(graph, IN)
    bwd = _reach(graph, OUT, reverse=True)
    a = tuple(u for u in graph.U if u not in fwd)
    b = tuple(u for u in graph.U if u not in bwd)
    return Properness(not a and not b, a, b)


def is_proper(net: ReactionNetwork, U: Iterable[str], F: Iterable[int]) -> Properness:
    return graph_properness(build_elimination_graph(net, U, F))


def proper_fast_set_exists(net: ReactionNetwork, U: Iterable[str]) -> Properness:
    """Properness only gains from extra fast edges, so test the largest choice F = R_U."""
    return is_proper(net, U, consuming(net, tuple(U)))


# ---------------------------------------------------------------------------
# walks


def validate_walk(graph: EliminationGraph, walk: Sequence[Edge]):
    if len(walk) < 2:
        raise StructureError("a walk has at least two edges")
    if walk[0].source != IN or walk[-1].target != OUT:
        raise StructureError("a walk must start at *in and end at *out")
    edge_set = set(graph.edges)
    for a, b in zip(walk, walk[1:]):
        if a.target != b.source:
            raise StructureError(f"edges {a} and {b} are not consecutive")
    for e in walk:
        if e not in edge_set:
            raise StructureError(f"{e} is not an edge of the elimination graph")


def contract_walk(graph: EliminationGraph, walk: Sequence[Edge]) -> tuple:
    """Return the contracted (reactant, product) on core species."""
    validate_walk(graph, walk)
    net = graph.net
    n = net.n_species
    prefix = [0] * n  # sum_{j<i} (y_j - y'_j)
    demand = [0] * n
    for e in walk:
        r = net.reaction(e.reaction)
        w = [r.reactant[k] + prefix[k] for k in range(n)]
        demand = [max(a, b) for a, b in zip(demand, w)]
        prefix = [prefix[k] + r.reactant[k] - r.product[k] for k in range(n)]
    product = [demand[k] - prefix[k] for k in range(n)]
    if any(demand[i] or product[i] for i in graph.u_index):
        raise NumericalError("contracted complex has a non-interacting coordinate")
    return graph.core(demand), graph.core(product)


def walk_intensity(graph: EliminationGraph, walk: Sequence[Edge], z, t=None) -> float:
    """Probability-weighted rate of a walk: creating rate times fast branching probabilities."""
    net = graph.net
    x = list(graph.embed(z))
    value = None
    for j, e in enumerate(walk):
        r = net.reaction(e.reaction)
        lam = r.intensity(tuple(x), t)
        if j == 0:
            value = lam
        else:
            total = sum(net.reaction(o.reaction).intensity(tuple(x), t) for o in graph.out_edges(e.source))
            if total == 0:
                return 0.0  # 0/0 = 0
            value *= lam / total
        if value == 0:
            return 0.0
        x = [a + d for a, d in zip(x, r.xi)]
    return value


def enumerate_walks(graph: EliminationGraph, max_edges: int):
    """Yield every walk from *in to *out with at most ``max_edges`` edges."""
    stack = [(e,) for e in graph.out_edges(IN)]
    while stack:
        path = stack.pop()
        last = path[-1]
        if last.target == OUT:
            if len(path) >= 2:
                yield path
            continue
        if len(path) >= max_edges:
            continue
        for e in graph.out_edges(last.target):
            stack.append(path + (e,))


def reduced_network_is_finite(graph: EliminationGraph):
    """Decide whether the set of contracted reactions is finite.

    Finite iff every cycle among non-interacting vertices has zero net core
    change; checked with a potential per vertex inside each strongly
    connected piece. Returns ``(finite, cycle_vectors)`` where the vectors
    are nonzero core net changes of detected cycles.
    """
    net = graph.net
    index = {u: i for i, u in enumerate(graph.U)}
    inner = [e for e in graph.edges if e.source in index and e.target in index]
    m = len(graph.U)
    if not inner:
        return True, []
    g = csr_matrix(
        (np.ones(len(inner)), ([index[e.source] for e in inner], [index[e.target] for e in inner])),
        shape=(m, m),
    )
    _, labels = connected_components(g, directed=True, connection="strong")
    potential = {}
    adj = defaultdict(list)
    for e in inner:
        if labels[index[e.source]] == labels[index[e.target]]:
            xi = graph.core(net.reaction(e.reaction).xi)
            adj[e.source].append((e.target, xi))
            adj[e.target].append((e.source, tuple(-v for v in xi)))
    cycles = []
    for u in graph.U:
        if u in potential:
            continue
        potential[u] = tuple(0 for _ in graph.core_index)
        queue = deque([u])
        while queue:
            v = queue.popleft()
            for w, xi in adj[v]:
                want = tuple(a + b for a, b in zip(potential[v], xi))
                if w not in potential:
                    potential[w] = want
                    queue.append(w)
                elif potential[w] != want:
                    diff = tuple(a - b for a, b in zip(want, potential[w]))
                    if diff not in cycles and tuple(-d for d in diff) not in cycles:
                        cycles.append(diff)
    return not cycles, cycles


# ---------------------------------------------------------------------------
# exact per-state intensities


@dataclass
class EntryAnalysis:
    """Fast jump chain started after one creating reaction fired at (z, 0)."""

    creating: int
    rate: float
    entry: tuple
    outcomes: dict  # (reactant, product) -> absorption probability
    stuck: list = field(default_factory=list)  # reachable U-states without an active fast reaction
    trapped: list = field(default_factory=list)  # closed fast classes that never reach a U-free state
    n_states: int = 0

    @property
    def status(self) -> str:
        if self.stuck:
            return "blocked"
        if self.trapped:
            return "trapped"
        return "ok"

    @property
    def absorbed(self) -> float:
        return float(sum(self.outcomes.values()))


class ReducedReaction:
    """A reaction of the reduced network on core species.

    ``origins`` lists where the reaction comes from: ``("slow", id)`` for a
    copy of a reaction that does not touch U, ``("walks", id)`` for walks
    starting with creating reaction ``id``.
    """

    def __init__(self, reduced, reactant, product, origins=()):
        self._reduced = reduced
        self.reactant = tuple(reactant)
        self.product = tuple(product)
        self.origins = tuple(origins)

    @property
    def key(self):
        return (self.reactant, self.product)

    @property
    def trivial(self) -> bool:
        return self.reactant == self.product

    def intensity(self, z, t=None) -> float:
        return self._reduced.intensity(self.key, z, t)

    def __repr__(self):
        return f"ReducedReaction({self._reduced.reaction_str(self.key)})"

    def __eq__(self, other):
        return isinstance(other, ReducedReaction) and self.key == other.key

    def __hash__(self):
        return hash(self.key)


class ReducedSRN:
    """Reduced stochastic reaction network obtained by eliminating (U, F).

    Intensities are evaluated lazily per core state and cached; the
    (possibly infinite) reaction set is exposed through
    :meth:`active_reactions` and :meth:`materialize`.
    """

    def __init__(self, graph: EliminationGraph, state_cap: int = 100_000):
        self.graph = graph
        self.net = graph.net
        self.U = graph.U
        self.F = graph.F
        self.species = tuple(graph.net.species[i] for i in graph.core_index)
        self.state_cap = state_cap
        R_U = consuming(self.net, self.U)
        R_up = creating(self.net, self.U)
        self.creating_ids = tuple(r.id for r in self.net.reactions if r.id in R_up and r.id not in R_U)
        self.slow_copy_ids = tuple(r.id for r in self.net.reactions if r.id not in R_U and r.id not in R_up)
        self._cache = {}
        self._entries = {}
        self._origins = defaultdict(set)

    # -- labels ---------------------------------------------------------
    def complex_str(self, y) -> str:
        terms = []
        for s, c in zip(self.species, y):
            if c == 1:
                terms.append(s)
            elif c > 1:
                terms.append(f"{c}{s}")
        return " + ".join(terms) if terms else "0"

    def reaction_str(self, key) -> str:
        return f"{self.complex_str(key[0])} -> {self.complex_str(key[1])}"

    def labeled(self, z) -> dict:
        return {s: int(v) for s, v in zip(self.species, z)}

    # -- core computation -------------------------------------------------
    def entry_analysis(self, z, rid, t=None) -> EntryAnalysis:
        key = (tuple(z), rid, t)
        if key in self._entries:
            return self._entries[key]
        res = self._solve_entry(tuple(z), rid, t)
        self._entries[key] = res
        return res

    def _solve_entry(self, z, rid, t):
        g = self.graph
        net = self.net
        x0 = g.embed(z)
        r = net.reaction(rid)
        rate = r.intensity(x0, t)
        entry = tuple(a + d for a, d in zip(x0, r.xi))
        if rate <= 0:
            return EntryAnalysis(rid, 0.0, entry, {})
        core_idx = g.core_index
        start_m = tuple(z[k] - r.reactant[i] for k, i in enumerate(core_idx))
        start = (entry, start_m)
        index = {start: 0}
        nodes = [start]
        rows, cols, vals = [], [], []
        out_rows, out_keys, out_vals = [], [], []
        totals = []
        outcome_index = {}
        queue = deque([0])
        while queue:
            i = queue.popleft()
            x, m = nodes[i]
            u = g.u_species(x)
            lams = []
            for e in g.out_edges(u):
                f = net.reaction(e.reaction)
                lam = f.intensity(x, t)
                if lam > 0:
                    lams.append((f, lam))
            total = sum(lam for _, lam in lams)
            totals.append(total)
            for f, lam in lams:
                x2 = tuple(a + d for a, d in zip(x, f.xi))
                m2 = tuple(min(mk, x[ci] - f.reactant[ci]) for mk, ci in zip(m, core_idx))
                p = lam / total
                if g.u_species(x2) is None:
                    reactant = tuple(zk - mk for zk, mk in zip(z, m2))
                    product = tuple(a + x2[ci] - zk for a, ci, zk in zip(reactant, core_idx, z))
                    okey = (reactant, product)
                    if okey not in outcome_index:
                        outcome_index[okey] = len(outcome_index)
                    out_rows.append(i)
                    out_keys.append(outcome_index[okey])
                    out_vals.append(p)
                else:
                    node = (x2, m2)
                    j = index.get(node)
                    if j is None:
                        j = len(nodes)
                        if j >= self.state_cap:
                            raise StateSpaceCapExceeded(
                                f"fast chain from {net.labeled(entry)} exceeds {self.state_cap} states",
                                net.labeled(x2),
                            )
                        index[node] = j
                        nodes.append(node)
                        queue.append(j)
                    rows.append(i)
                    cols.append(j)
                    vals.append(p)
        n = len(nodes)
        stuck = [net.labeled(nodes[i][0]) for i in range(n) if totals[i] == 0]
        # states that can reach a U-free outcome
        good = np.zeros(n, dtype=bool)
        rev = defaultdict(list)
        for a, b in zip(rows, cols):
            rev[b].append(a)
        q = deque(sorted(set(out_rows)))
        for i in q:
            good[i] = True
        while q:
            b = q.popleft()
            for a in rev[b]:
                if not good[a]:
                    good[a] = True
                    q.append(a)
        trapped = []
        if not good.all():
            bad = np.flatnonzero(~good)
            bad_set = set(bad.tolist())
            # closed classes among non-absorbing bad states (stuck states are reported separately)
            sub = {b: k for k, b in enumerate(bad)}
            br = [sub[a] for a, b in zip(rows, cols) if a in bad_set and b in bad_set]
            bc = [sub[b] for a, b in zip(rows, cols) if a in bad_set and b in bad_set]
            gm = csr_matrix((np.ones(len(br)), (br, bc)), shape=(len(bad), len(bad)))
            ncomp, lab = connected_components(gm, directed=True, connection="strong")
            leaves = set(range(ncomp))
            for a, b in zip(br, bc):
                if lab[a] != lab[b]:
                    leaves.discard(lab[a])
            for c in sorted(leaves):
                members = [bad[k] for k in range(len(bad)) if lab[k] == c]
                if len(members) == 1 and totals[members[0]] == 0:
                    continue
                trapped.append([net.labeled(nodes[k][0]) for k in members])
        outcomes = {}
        if good[0] and outcome_index:
            gi = np.flatnonzero(good)
            pos = {int(k): a for a, k in enumerate(gi)}
            ng = len(gi)
            keys = list(outcome_index)
            A_rows = [pos[a] for a, b in zip(rows, cols) if good[a] and good[b]]
            A_cols = [pos[b] for a, b in zip(rows, cols) if good[a] and good[b]]
            A_vals = [v for a, b, v in zip(rows, cols, vals) if good[a] and good[b]]
            P = csr_matrix((A_vals, (A_rows, A_cols)), shape=(ng, ng))
            B = csr_matrix(
                (out_vals, ([pos[a] for a in out_rows], out_keys)), shape=(ng, len(keys))
            ).toarray()
            M = np.eye(ng) - P.toarray() if ng <= 400 else None
            if M is not None:
                H = np.linalg.solve(M, B)
            else:
                from scipy.sparse import identity

                H = spsolve((identity(ng, format="csc") - P.tocsc()), B)
                H = np.asarray(H).reshape(ng, len(keys))
            row = H[0]
            for okey, k in outcome_index.items():
                if row[k] > 0:
                    outcomes[okey] = float(row[k])
        return EntryAnalysis(rid, rate, entry, outcomes, stuck, trapped, n)

    def contributions(self, z, t=None) -> dict:
        """Map (reactant, product) -> list of (origin, value) at core state z."""
        z = tuple(int(v) for v in z)
        ckey = (z, t)
        if ckey in self._cache:
            return self._cache[ckey]
        g = self.graph
        x0 = g.embed(z)
        out = defaultdict(list)
        for rid in self.slow_copy_ids:
            r = self.net.reaction(rid)
            lam = r.intensity(x0, t)
            if lam > 0:
                key = (g.core(r.reactant), g.core(r.product))
                out[key].append((("slow", rid), lam))
        for rid in self.creating_ids:
            res = self.entry_analysis(z, rid, t)
            if res.rate <= 0:
                continue
            for key, p in res.outcomes.items():
                out[key].append((("walks", rid), res.rate * p))
        out = dict(out)
        for key, parts in out.items():
            self._origins[key].update(o for o, _ in parts)
        self._cache[ckey] = out
        return out

    def intensity(self, key, z, t=None) -> float:
        parts = self.contributions(z, t).get(tuple(map(tuple, key)), ())
        return float(sum(v for _, v in parts))

    def active_reactions(self, z, t=None) -> list:
        """Reduced reactions with positive intensity at z, sorted by (reactant, product)."""
        out = []
        for key, parts in sorted(self.contributions(z, t).items()):
            tau = float(sum(v for _, v in parts))
            if tau > 0:
                origins = sorted({o for o, _ in parts})
                out.append((ReducedReaction(self, key[0], key[1], origins), tau))
        return out

    def materialize(self, domain: Iterable, t=None) -> list:
        """All reduced reactions active somewhere on ``domain``, with their intensity tables."""
        table = defaultdict(dict)
        for z in domain:
            z = tuple(int(v) for v in z)
            for rr, tau in self.active_reactions(z, t):
                table[rr.key][z] = tau
        out = []
        for key in sorted(table):
            rr = ReducedReaction(self, key[0], key[1], sorted(self._origins[key]))
            out.append((rr, table[key]))
        return out

    def transitions(self, z, t=None) -> dict:
        """Net jump vector -> total rate of the non-trivial active reactions at z."""
        out = defaultdict(float)
        for rr, tau in self.active_reactions(z, t):
            if not rr.trivial:
                xi = tuple(b - a for a, b in zip(rr.reactant, rr.product))
                out[xi] += tau
        return dict(out)

    def creation_rate(self, z, t=None) -> float:
        x0 = self.graph.embed(z)
        return float(sum(self.net.reaction(r).intensity(x0, t) for r in self.creating_ids))

    def walk_rate(self, z, t=None) -> float:
        """Total walk intensity at z (trivial walks included)."""
        return float(
            sum(
                self.entry_analysis(z, r, t).rate * self.entry_analysis(z, r, t).absorbed
                for r in self.creating_ids
            )
        )


def reduce(net: ReactionNetwork, U: Iterable[str], F: Iterable[int] | None = None, domain=None, state_cap=100_000):
    """Eliminate (U, F) from ``net``.

    ``F`` defaults to the network's fast markers. Raises
    :class:`StructureError` when U is not non-interacting or F is not
    proper. When ``domain`` is given the intensities on it are computed
    eagerly.
    """
    U = tuple(U)
    F = net.fast if F is None else frozenset(F)
    graph = build_elimination_graph(net, U, F)
    if not U and F:
        raise StructureError("with no non-interacting species the fast set must be empty")
    prop = graph_properness(graph)
    if not prop:
        raise StructureError(f"fast set is not proper: {prop.describe()}", {"properness": prop.__dict__})
    red = ReducedSRN(graph, state_cap=state_cap)
    if domain is not None:
        red.materialize(domain)
    return red


# ---------------------------------------------------------------------------
# truncated walk sum (verification oracle)


def walk_sum_intensities(graph: EliminationGraph, z, t=None, tol=1e-12, max_steps=100_000):
    """Sum walk intensities by expanding walk prefixes edge by edge.

    Prefixes sharing the same (state, minimum slack) are merged, so the
    expansion is a truncated power series in the fast branching
    probabilities. Stops when the mass on unfinished prefixes drops below
    ``tol`` times the total creation rate. Returns ``(intensities, tail)``.
    """
    net = graph.net
    z = tuple(z)
    x0 = graph.embed(z)
    R_U = consuming(net, graph.U)
    totals = defaultdict(float)
    frontier = defaultdict(float)
    scale = 0.0
    for e in graph.out_edges(IN):
        r = net.reaction(e.reaction)
        if r.id in R_U:
            continue
        lam = r.intensity(x0, t)
        if lam <= 0:
            continue
        scale += lam
        x = tuple(a + d for a, d in zip(x0, r.xi))
        m = tuple(z[k] - r.reactant[i] for k, i in enumerate(graph.core_index))
        frontier[(x, m)] += lam
    for x, v in list(frontier.items()):
        pass
    steps = 0
    tail = sum(frontier.values())
    while frontier and tail > tol * max(scale, 1e-300):
        steps += 1
        if steps > max_steps:
            break
        nxt = defaultdict(float)
        for (x, m), mass in frontier.items():
            u = graph.u_species(x)
            out = graph.out_edges(u)
            lams = [(net.reaction(e.reaction), net.reaction(e.reaction).intensity(x, t)) for e in out]
            total = sum(l for _, l in lams)
            if total == 0:
                continue  # 0/0 = 0: the prefix dies
            for f, lam in lams:
                if lam == 0:
                    continue
                x2 = tuple(a + d for a, d in zip(x, f.xi))
                m2 = tuple(min(mk, x[ci] - f.reactant[ci]) for mk, ci in zip(m, graph.core_index))
                w = mass * lam / total
                if graph.u_species(x2) is None:
                    reactant = tuple(zk - mk for zk, mk in zip(z, m2))
                    product = tuple(a + x2[ci] - zk for a, ci, zk in zip(reactant, graph.core_index, z))
                    totals[(reactant, product)] += w
                else:
                    nxt[(x2, m2)] += w
        frontier = nxt
        tail = sum(frontier.values())
    return dict(totals), tail
