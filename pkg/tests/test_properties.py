"""Property tests on randomly generated networks with non-interacting species."""
import itertools
from fractions import Fraction

import numpy as np
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from srnreduce.ctmc import (
    build_generator,
    check_generator,
    explore,
    is_closed,
    reachable_closed_set,
    transient_distribution,
)
from srnreduce.elimination import (
    build_elimination_graph,
    contract_walk,
    enumerate_walks,
    reduce,
    walk_sum_intensities,
)
from srnreduce.errors import StateSpaceCapExceeded
from srnreduce.network import MassAction, Reaction, ReactionNetwork, conservation_class, consuming, creating
from srnreduce.twoscale import (
    assemble,
    check_assumption2,
    limit_generator_general,
    partition_states,
    reduced_generator,
    watched_generator,
    zero_block_violations,
)

SPECIES = ("A", "B", "C", "U1", "U2")
CORE = 3
U = ("U1", "U2")

_CORES = [c for c in itertools.product(range(3), range(2), range(2)) if sum(c) <= 2]
_core = st.sampled_from(_CORES)
_u = st.sampled_from([None, 0, 1])
_rate = st.sampled_from([0.5, 1.0, 2.0, 3.0])


def _cx(core, u=None):
    v = list(core) + [0, 0]
    if u is not None:
        v[CORE + u] = 1
    return tuple(v)


def _shrink(core, limit):
    """Drop molecules from ``core`` until it has at most ``limit`` of them."""
    core = list(core)
    i = 0
    while sum(core) > limit:
        if core[i]:
            core[i] -= 1
        i = (i + 1) % len(core)
    return tuple(core)


@st.composite
def networks(draw, bounded=False):
    """Random networks where U1, U2 are non-interacting and R_U is proper.

    With ``bounded`` no reaction increases the total molecule count, so the
    all-ones vector certifies sub-conservation and every class is finite.
    """
    nonempty = st.sampled_from([c for c in _CORES if sum(c) >= 1])

    def row(a_core, u, b_core, v, rate, is_fast):
        if bounded:
            b_core = _shrink(b_core, sum(a_core) + (u is not None) - (v is not None))
        return _cx(a_core, u), _cx(b_core, v), rate, is_fast

    rows = []
    # every U species is created somewhere and can always be degraded by a fast reaction
    for u in (0, 1):
        rows.append(row(draw(nonempty if bounded else _core), None, draw(_core), u, draw(_rate), False))
        rows.append(row((0, 0, 0), u, draw(_core), None, draw(_rate), True))
    for _ in range(draw(st.integers(0, 3))):
        v = draw(_u)
        rows.append(row(draw(nonempty if bounded and v is not None else _core), None, draw(_core), v,
                        draw(_rate), False))
    for _ in range(draw(st.integers(0, 3))):
        u, v = draw(st.integers(0, 1)), draw(_u)
        a = draw(_core)
        if v is None:
            b = draw(_core)
        else:
            # a fast U -> U step may consume core molecules but never create them, otherwise a
            # single excursion could produce unboundedly many and the outcome set is infinite
            b = tuple(draw(st.integers(0, c)) for c in a)
        rows.append(row(a, u, b, v, draw(_rate), draw(st.booleans())))
    reactions, fast = [], set()
    for k, (a, b, k_rate, is_fast) in enumerate(rows, start=1):
        if a == b:
            continue
        reactions.append(Reaction(k, a, b, MassAction(k_rate)))
        if is_fast:
            fast.add(k)
    return ReactionNetwork(SPECIES, tuple(reactions), frozenset(fast))


def _box(n, top=2):
    return list(itertools.product(range(top + 1), repeat=n))


SETTINGS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@SETTINGS
@given(networks())
def test_walk_contractions_are_core_complexes(net):
    g = build_elimination_graph(net, U, net.fast)
    for walk in enumerate_walks(g, 6):
        r, p = contract_walk(g, walk)
        assert min(r) >= 0 and min(p) >= 0
        # the summed net change of the walk has no U component
        total = np.zeros(len(SPECIES), dtype=int)
        for e in walk:
            total += np.array(net.reaction(e.reaction).xi)
        assert tuple(total) == tuple(np.array(g.embed(p)) - np.array(g.embed(r)))


@SETTINGS
@given(networks())
def test_activity_matches_reactant_cover(net):
    red = reduce(net, U)
    g = red.graph
    keys = {contract_walk(g, w) for w in enumerate_walks(g, 5)}
    keys |= {(g.core(net.reaction(r).reactant), g.core(net.reaction(r).product)) for r in red.slow_copy_ids}
    for z in _box(CORE):
        active = {rr.key for rr, _ in red.active_reactions(z)}
        for key in active:
            assert all(a >= b for a, b in zip(z, key[0]))
        for key in keys:
            if all(a >= b for a, b in zip(z, key[0])):
                assert key in active


@SETTINGS
@given(networks())
def test_walk_sums_agree_with_absorption(net):
    red = reduce(net, U)
    for z in _box(CORE, 1):
        exact = {rr.key: tau for rr, tau in red.active_reactions(z)}
        slow = {k: sum(v for o, v in parts if o[0] == "slow") for k, parts in red.contributions(z).items()}
        approx, tail = walk_sum_intensities(red.graph, z)
        assert tail < 1e-12 * max(1.0, red.creation_rate(z))
        for key in set(exact) | set(approx):
            want = exact.get(key, 0.0) - slow.get(key, 0.0)
            assert abs(approx.get(key, 0.0) - want) <= 1e-9 * max(abs(want), 1e-3)


@SETTINGS
@given(networks())
def test_total_reduced_intensity_is_bounded(net):
    red = reduce(net, U)
    R_U = consuming(net, U)
    entering = creating(net, U) - R_U
    for z in _box(CORE):
        x = red.graph.embed(z)
        bound = sum(net.reaction(r).intensity(x) for r in net.reaction_ids if r in entering or r not in R_U)
        total = sum(t for _, t in red.active_reactions(z))
        assert total <= bound * (1 + 1e-12) + 1e-14


@SETTINGS
@given(networks())
def test_assumption2_status_matches_mass_balance(net):
    red = reduce(net, U)
    # structural and numerical verdicts are computed independently; disagreement raises
    rep = check_assumption2(red, states=_box(CORE, 1))
    for e in rep.entries:
        balanced = abs(e.walk_rate - e.creation_rate) <= 1e-10 * max(1.0, e.creation_rate)
        assert balanced == (e.status == "ok")


def _assembled(net, x0):
    return assemble(net, U, x0=x0, cap=5000)


@SETTINGS
@given(networks(bounded=True), _core)
def test_generators_and_zero_blocks(net, z0):
    x0 = _cx(z0)
    assert conservation_class(net).sub_conservative
    sys = _assembled(net, x0)
    for Q in (sys.Q_fast, sys.Q_slow, sys.generator(0.1)):
        check_generator(Q)
    # integer-valued rates make every row sum exactly zero
    Qi = build_generator(net.with_rates({f"#{r}": 1.0 for r in net.reaction_ids}), sys.E).tocsr()
    for i in range(Qi.shape[0]):
        row = Qi.data[Qi.indptr[i]:Qi.indptr[i + 1]]
        assert sum(Fraction(v) for v in row) == 0
    assert is_closed(net, sys.E)[0]
    part = partition_states(sys, x0, check=False)
    bad, scanned = zero_block_violations(sys, part)
    assert bad == [] and scanned > 0


@SETTINGS
@given(networks(bounded=True), _core)
def test_limit_constructions_agree(net, z0):
    x0 = _cx(z0)
    sys = _assembled(net, x0)
    assume(check_assumption2(sys).ok)
    part = partition_states(sys, x0)
    Qw = watched_generator(sys, part).toarray()
    lim = limit_generator_general(sys)
    pos = [lim.a_position(i) for i in part.S1]
    _, Q0 = reduced_generator(sys, part)
    assert np.abs(Qw - lim.Q[np.ix_(pos, pos)]).max() <= 1e-10
    assert np.abs(Qw - Q0.toarray()).max() <= 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 60), st.integers(0, 2**32 - 1), st.floats(0.01, 5.0))
def test_uniformization_matches_expm(n, seed, t):
    rng = np.random.default_rng(seed)
    A = (rng.random((n, n)) < 3.0 / n) * rng.uniform(0.0, 4.0, (n, n))
    np.fill_diagonal(A, 0.0)
    Q = A - np.diag(A.sum(axis=1))
    p0 = rng.dirichlet(np.ones(n))
    tl = transient_distribution(Q, p0, [t])
    assert np.abs(tl.probabilities[-1] - p0 @ expm(Q * t)).max() < 1e-9


@SETTINGS
@given(networks(bounded=True), _core)
def test_explored_sets_are_closed(net, z0):
    E = reachable_closed_set(net, _cx(z0), cap=5000)
    for x in E.states:
        for r in net.reactions:
            if r.intensity(x) > 0:
                assert tuple(a + b for a, b in zip(x, r.xi)) in E
    red = reduce(net, U)
    try:
        E0 = explore(red, [z0], cap=1500)
    except StateSpaceCapExceeded:
        return
    assert is_closed(red, E0)[0]
