import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from conftest import canon, reduced_table
from srnreduce import parse_network
from srnreduce.elimination import (
    IN,
    OUT,
    Edge,
    build_elimination_graph,
    contract_walk,
    enumerate_walks,
    find_noninteracting_sets,
    is_noninteracting,
    is_proper,
    proper_fast_set_exists,
    reduce,
    reduced_network_is_finite,
    walk_intensity,
    walk_sum_intensities,
)
from srnreduce.errors import StructureError
from srnreduce.network import MassAction, Reaction, ReactionNetwork, consuming

ONES5 = {f"k{i}": 1.0 for i in range(1, 6)}


# -- non-interacting sets ---------------------------------------------------------


def test_noninteracting_examples(load):
    net, _ = load("mm2")
    assert is_noninteracting(net, ["EA", "EAB"])
    res = is_noninteracting(net, ["E", "A"])
    assert not res and net.complex_str(res.witness) == "E + A"
    res = is_noninteracting(parse_network("2*U -> A @ 1"), ["U"])
    assert not res and "coefficient" in res.reason


def _brute_maximal_sets(net):
    species = net.species
    good = [set(c) for k in range(len(species) + 1) for c in itertools.combinations(species, k)
            if is_noninteracting(net, c)]
    return sorted(tuple(sorted(s)) for s in good if not any(s < t for t in good))


def test_find_noninteracting_sets_examples(load):
    net, _ = load("mm2")
    sets = find_noninteracting_sets(net)
    assert sets == _brute_maximal_sets(net)
    assert any({"EA", "EAB"} <= set(s) for s in sets)
    assert find_noninteracting_sets(parse_network("A + B -> 0 @ 1")) == [("A",), ("B",)]
    assert find_noninteracting_sets(ReactionNetwork(("X", "Y"), ())) == [("X", "Y")]


_cx = st.tuples(st.integers(0, 2), st.integers(0, 1), st.integers(0, 1), st.integers(0, 1), st.integers(0, 1))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(_cx, _cx), min_size=1, max_size=5))
def test_find_noninteracting_sets_matches_brute_force(pairs):
    net = ReactionNetwork(tuple("ABCDE"), tuple(Reaction(i + 1, a, b, MassAction(1.0)) for i, (a, b) in enumerate(pairs)))
    assert find_noninteracting_sets(net) == _brute_maximal_sets(net)


# -- elimination graph and properness ----------------------------------------------


def _edges(graph):
    return sorted((e.source, e.target, e.reaction) for e in graph.edges)


def test_elimination_graph_of_two_substrate_mechanism(load):
    net, U = load("mm2")
    g = build_elimination_graph(net, U, consuming(net, U))
    assert _edges(g) == sorted([(IN, "EA", 1), ("EA", OUT, 2), ("EA", "EAB", 3), ("EAB", "EA", 4), ("EAB", OUT, 5)])
    g = build_elimination_graph(net, U, {3, 4, 5})
    assert (("EA", OUT, 2)) not in [(e.source, e.target, e.reaction) for e in g.edges]
    g = build_elimination_graph(net, (), ())
    assert g.edges == () and g.vertices == (IN, OUT)


def test_elimination_graph_rejects_bad_fast_set(load):
    net, U = load("mm2")
    with pytest.raises(StructureError):
        build_elimination_graph(net, U, {1})


def test_properness_examples(load):
    net, _ = load("mm2")
    assert is_proper(net, ["EA", "EAB"], consuming(net, ["EA", "EAB"]))
    res = is_proper(net, ["EA", "P"], consuming(net, ["EA", "P"]))
    assert not res and "P" in res.cannot_reach_out
    intro, _ = load("intro")
    res = is_proper(intro, ["U1"], ())
    assert not res and res.cannot_reach_out == ("U1",)


def test_no_proper_fast_set_for_isomerisation_loop(load):
    net, U = load("s6-nonexample")
    res = proper_fast_set_exists(net, U)
    assert not res
    assert set(res.unreachable_from_in) == {"U1", "U2"}
    with pytest.raises(StructureError):
        reduce(net, U, consuming(net, U))


# -- walks ------------------------------------------------------------------------


def _walk(graph, *rids):
    by_r = {e.reaction: e for e in graph.edges}
    return [by_r[r] for r in rids]


@pytest.fixture
def mm2_graph(load):
    net, U = load("mm2")
    return build_elimination_graph(net, U, consuming(net, U))


def test_contract_walk_examples(mm2_graph):
    sp = ("E", "A", "B", "P", "Q")
    r, p = contract_walk(mm2_graph, _walk(mm2_graph, 1, 2))
    assert (canon(sp, r), canon(sp, p)) == ("A+E", "A+E")
    r, p = contract_walk(mm2_graph, _walk(mm2_graph, 1, 3, 5))
    assert (canon(sp, r), canon(sp, p)) == ("A+B+E", "E+P+Q")
    r, p = contract_walk(mm2_graph, _walk(mm2_graph, 1, 3, 4, 2))
    assert (canon(sp, r), canon(sp, p)) == ("A+B+E", "A+B+E")


def test_contract_walk_rejects_malformed(mm2_graph):
    with pytest.raises(StructureError):
        contract_walk(mm2_graph, _walk(mm2_graph, 1, 4, 2))
    with pytest.raises(StructureError):
        contract_walk(mm2_graph, _walk(mm2_graph, 1))
    with pytest.raises(StructureError):
        contract_walk(mm2_graph, [Edge(IN, "EA", 1), Edge("EA", OUT, 9)])


def test_walk_intensity_examples(mm2_graph):
    z = (1, 1, 1, 0, 0)
    assert walk_intensity(mm2_graph, _walk(mm2_graph, 1, 2), z) == pytest.approx(0.5, abs=1e-15)
    assert walk_intensity(mm2_graph, _walk(mm2_graph, 1, 3, 5), z) == pytest.approx(0.25, abs=1e-15)
    assert walk_intensity(mm2_graph, _walk(mm2_graph, 1, 3, 5), (1, 1, 0, 0, 0)) == 0.0


def test_walk_intensities_match_closed_forms(load):
    rng = np.random.default_rng(3)
    net, U = load("mm2")
    for _ in range(3):
        k = {f"k{i}": float(rng.uniform(0.3, 3)) for i in range(1, 6)}
        g = build_elimination_graph(net.with_rates(k), U, consuming(net, U))
        for z in itertools.product(range(3), range(3), range(4), [0], [0]):
            zd = dict(zip(("E", "A", "B", "P", "Q"), z))
            assert walk_intensity(g, _walk(g, 1, 2), z) == pytest.approx(O.mm2_walk_gamma0(k, zd), rel=1e-12, abs=0)
            for n in range(1, 4):
                a = _walk(g, 1, *([3, 4] * n), 2)
                b = _walk(g, 1, *([3, 4] * (n - 1)), 3, 5)
                assert walk_intensity(g, a, z) == pytest.approx(O.mm2_walk_A(k, zd, n), rel=1e-12, abs=0)
                assert walk_intensity(g, b, z) == pytest.approx(O.mm2_walk_B(k, zd, n), rel=1e-12, abs=0)


# -- reduced network ---------------------------------------------------------------


def test_reduce_intro_example(load):
    net, U = load("intro")
    red = reduce(net, U)
    assert red.species == ("S1", "S2", "S3", "S4")
    tab = reduced_table(red, (2, 0, 0, 0))
    assert tab == {("S1", "S3"): pytest.approx(1.0, abs=1e-15), ("S1", "S2+S4"): pytest.approx(1.0, abs=1e-15)}
    assert red.active_reactions((0, 3, 1, 1)) == []


def test_reduce_partial_fast_indicator(load):
    net, U = load("mm2-partial-fast")
    red = reduce(net, U)
    assert reduced_table(red, (2, 1, 1, 0, 0)) == {("A+B+E", "E+P+Q"): pytest.approx(2.0, abs=1e-14)}
    assert reduced_table(red, (2, 1, 0, 0, 0)) == {}


def test_reduce_suicide_example(load):
    net, U = load("suicide")
    red = reduce(net, U)
    z = dict(S=1, E=1, Ei=0, P=0)
    vec = tuple(z[s] for s in red.species)
    tab = reduced_table(red, vec)
    assert tab[("E+S", "E+P")] == pytest.approx(0.25, abs=1e-15)
    assert tab[("E+S", "Ei")] == pytest.approx(0.25, abs=1e-15)


def test_active_reactions_infinite_family(load):
    net, U = load("ex311")
    red = reduce(net, U)
    assert red.species == ("S1", "S3", "S2")
    tab = reduced_table(red, (1, 0, 2))
    assert set(tab) == {("S1", "S3"), ("S1+S2", "S3"), ("2S2+S1", "S3")}
    assert reduced_table(red, (1, 0, 0)) == {("S1", "S3"): pytest.approx(1.0, abs=1e-15)}
    finite, cycles = reduced_network_is_finite(red.graph)
    assert not finite and cycles == [(0, 0, -1)]


def test_finiteness_of_zoo(load):
    expected = {"intro": True, "mm2": True, "mm2-partial-fast": True, "inhibition": True,
                "allosteric": False, "suicide": True, "ex311": False}
    for name, want in expected.items():
        net, U = load(name)
        assert reduced_network_is_finite(reduce(net, U).graph)[0] is want, name


def test_reduce_with_empty_partition_copies_network(load):
    net, _ = load("intro")
    slow = net.with_fast(())
    red = reduce(slow, (), ())
    assert red.species == net.species
    x = (2, 1, 1, 0, 0)
    assert red.transitions(x) == {r.xi: r.intensity(x) for r in net.reactions if r.intensity(x) > 0}
    with pytest.raises(StructureError):
        reduce(net, (), {2})


def test_reduce_rejects_interacting_set(load):
    net, _ = load("mm2")
    with pytest.raises(StructureError):
        reduce(net, ("E", "A"), ())


def test_trivial_reactions_are_kept_and_flagged(load):
    net, U = load("mm2")
    red = reduce(net, U)
    act = red.active_reactions((1, 1, 1, 0, 0))
    assert [rr.trivial for rr, _ in act].count(True) == 2
    # trivial reactions do not move the chain
    assert set(red.transitions((1, 1, 1, 0, 0))) == {(0, -1, -1, 1, 1)}


def test_provenance_records_slow_copies(load):
    net, U = load("counter1")
    red = reduce(net, U)
    origins = {red.reaction_str(rr.key): rr.origins for rr, _ in red.active_reactions((1, 1, 0))}
    assert origins["S2 -> S1"] == (("slow", 4),)
    assert origins["S1 -> S2"] == (("walks", 1),)


def test_materialize_orders_lexicographically(load):
    net, U = load("allosteric")
    red = reduce(net, U)
    box = [dict(R=1, E=1, S=s, P=0) for s in range(4)]
    table = red.materialize([tuple(z[s] for s in red.species) for z in box])
    keys = [rr.key for rr, _ in table]
    assert keys == sorted(keys)
    assert sum(1 for rr, _ in table if not rr.trivial) == 5


def test_walk_sum_oracle_agrees(load):
    for name, box in [("mm2", (2, 2, 3, 0, 0)), ("ex311", (2, 0, 4)), ("allosteric", (1, 1, 4, 0)),
                      ("inhibition", (2, 3, 2, 0))]:
        net, U = load(name)
        red = reduce(net, U)
        for z in itertools.product(*[range(b + 1) for b in box]):
            exact = {rr.key: tau for rr, tau in red.active_reactions(z)}
            slow = {k: sum(v for o, v in parts if o[0] == "slow") for k, parts in red.contributions(z).items()}
            approx, tail = walk_sum_intensities(red.graph, z)
            assert tail < 1e-12 * max(1.0, red.creation_rate(z))
            for key in set(exact) | set(approx):
                want = exact.get(key, 0.0) - slow.get(key, 0.0)
                assert approx.get(key, 0.0) == pytest.approx(want, rel=1e-9, abs=1e-12), (name, z, key)


def test_enumerated_walks_have_nonnegative_core_contractions(load):
    for name in ("mm2", "inhibition", "allosteric", "ex311", "suicide", "intro"):
        net, U = load(name)
        g = build_elimination_graph(net, U, net.fast)
        n = 0
        for walk in enumerate_walks(g, 7):
            r, p = contract_walk(g, walk)
            assert min(r) >= 0 and min(p) >= 0
            n += 1
        assert n > 0


def test_geometric_series_fixture(load):
    rng = np.random.default_rng(11)
    net, U = load("mm2")
    for _ in range(4):
        k = {f"k{i}": float(rng.uniform(0.1, 5)) for i in range(1, 6)}
        red = reduce(net.with_rates(k), U)
        for z in itertools.product(range(1, 3), range(1, 3), range(0, 5), [0], [1]):
            zd = dict(zip(("E", "A", "B", "P", "Q"), z))
            got = reduced_table(red, z).get(("A+B+E", "E+P+Q"), 0.0)
            assert got == pytest.approx(O.mm2_tau3(k, zd), rel=1e-10, abs=0)


def test_printed_trivial_walk_sum_breaks_identity():
    k = dict(ONES5, k2=2.0)
    z = dict(E=1, A=1, B=1)
    lam = k["k1"]
    good = O.mm2_walk_gamma0(k, z) + O.mm2_tau2(k, z) + O.mm2_tau3(k, z)
    bad = O.mm2_walk_gamma0(k, z) + O.mm2_tau2_as_printed(k, z) + O.mm2_tau3(k, z)
    assert good == pytest.approx(lam, rel=1e-14)
    assert abs(bad - lam) > 1e-3


def test_intensity_bound_is_strict_when_blocked(load):
    net, U = load("mm2-partial-fast")
    red = reduce(net, U)
    z = (1, 1, 0, 0, 0)
    total = sum(t for _, t in red.active_reactions(z))
    assert total == 0.0 < red.creation_rate(z)
