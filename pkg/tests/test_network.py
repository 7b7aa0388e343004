from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srnreduce import parse_network
from srnreduce.network import (
    MassAction,
    Reaction,
    ReactionNetwork,
    Tabulated,
    TimeModulated,
    complex_digraph,
    conservation_class,
    is_weakly_reversible,
    mass_action_intensity,
    validate_compatibility,
)


def test_mass_action_examples():
    net = parse_network("2*A -> B @ 3\nA -> B @ 1\n0 -> A @ 5")
    r1, r2, r3 = net.reactions
    assert mass_action_intensity(r1, (4, 0)) == 3 * 4 * 3
    assert mass_action_intensity(r2, (0, 7)) == 0
    assert mass_action_intensity(r3, (0, 0)) == 5
    assert mass_action_intensity(r3, (9, 2)) == 5


def test_mass_action_rejects_nonpositive_constant():
    with pytest.raises(ValueError):
        MassAction(0.0)


@given(st.integers(0, 6), st.integers(0, 6), st.integers(0, 3), st.integers(0, 3))
def test_mass_action_positive_iff_covered(x1, x2, y1, y2):
    r = Reaction(1, (y1, y2), (0, 0), MassAction(2.0))
    lam = mass_action_intensity(r, (x1, x2))
    assert (lam > 0) == (x1 >= y1 and x2 >= y2)


def test_compatibility_mass_action_passes():
    net = parse_network("A + B -> C @ 2\nC -> 0 @ 1")
    dom = list(product(range(3), repeat=3))
    assert validate_compatibility(net, dom).ok


def test_compatibility_failures_carry_witness():
    always = ReactionNetwork(("A", "B"), (Reaction(1, (1, 0), (0, 1), Tabulated({}, default=1.0)),))
    rep = validate_compatibility(always, [(1, 0), (0, 0)])
    assert not rep.ok and rep.entries[0].witness == (0, 0)

    holes = ReactionNetwork(("A", "B"), (Reaction(1, (1, 0), (0, 1), Tabulated({(1, 0): 1.0, (2, 0): 0.0})),))
    rep = validate_compatibility(holes, [(1, 0), (2, 0)])
    assert not rep.ok and rep.entries[0].witness == (2, 0)


def test_time_modulated_law_needs_time():
    law = TimeModulated(MassAction(1.0), lambda t: 2.0 + t, 0.0, "affine")
    r = Reaction(1, (1,), (0,), law)
    assert r.intensity((3,), 1.0) == pytest.approx(9.0)
    with pytest.raises(ValueError):
        r.intensity((3,))


def _check_witness(net, cls):
    for r in net.reactions:
        dot = sum(Fraction(c) * v for c, v in zip(cls.witness, r.xi))
        if cls.kind == "conservative":
            assert dot == 0
        else:
            assert dot <= 0
    assert all(c > 0 for c in cls.witness)


def test_conservation_examples(load):
    net, _ = load("mm2")
    cls = conservation_class(net)
    assert cls.kind == "conservative"
    _check_witness(net, cls)

    assert conservation_class(parse_network("0 -> A @ 1")).kind == "neither"
    sub = conservation_class(parse_network("A -> 0 @ 1"))
    assert sub.kind == "sub-conservative" and sub.witness == (Fraction(1),)


def test_conservation_neither_has_farkas_ray():
    cls = conservation_class(parse_network("0 -> A @ 1\nA -> 2*A + B @ 1"))
    assert cls.kind == "neither"
    assert cls.certificate["farkas_ray"]


_complex = st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 1))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(_complex, _complex).filter(lambda p: p[0] != p[1]), min_size=1, max_size=6))
def test_conservation_witness_is_exact(pairs):
    net = ReactionNetwork(("A", "B", "C"), tuple(Reaction(i + 1, a, b, MassAction(1.0)) for i, (a, b) in enumerate(pairs)))
    cls = conservation_class(net)
    if cls.sub_conservative:
        _check_witness(net, cls)
    else:
        # brute-force: no small positive integer vector works
        for c in product(range(1, 5), repeat=3):
            assert any(sum(ci * v for ci, v in zip(c, r.xi)) > 0 for r in net.reactions)


def test_weak_reversibility_examples(load):
    assert is_weakly_reversible(parse_network("A -> B @ 1\nB -> A @ 1"))
    assert not is_weakly_reversible(parse_network("A -> B @ 1"))
    net, _ = load("mm2")
    assert is_weakly_reversible(net, [3, 4])
    assert not is_weakly_reversible(net, [3, 4, 5])


def _brute_weakly_reversible(complexes, edges):
    adj = {i: set() for i in range(len(complexes))}
    for i, j, _ in edges:
        adj[i].add(j)

    def reach(a, b):
        seen, stack = {a}, [a]
        while stack:
            v = stack.pop()
            if v == b:
                return True
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return False

    return all(reach(j, i) for i, j, _ in edges)


@settings(max_examples=150, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9)).filter(lambda p: p[0] != p[1]), max_size=14))
def test_weak_reversibility_matches_brute_force(pairs):
    names = tuple(f"C{i}" for i in range(10))

    def unit(i):
        return tuple(1 if k == i else 0 for k in range(10))

    net = ReactionNetwork(names, tuple(Reaction(k + 1, unit(a), unit(b), MassAction(1.0)) for k, (a, b) in enumerate(pairs)))
    complexes, edges = complex_digraph(net)
    assert is_weakly_reversible(net) == _brute_weakly_reversible(complexes, edges)


def test_network_helpers():
    net = parse_network("A + B -> C @ k1 fast\nC -> A @ 2")
    assert net.with_rates({"k1": 4.0}).reaction(1).law.k == 4.0
    assert net.with_rates({"#2": 7.0}).reaction(2).law.k == 7.0
    scaled = net.with_fast_scaled(0.01)
    assert scaled.reaction(1).law.k == pytest.approx(100.0)
    assert scaled.reaction(2).law.k == 2.0
    assert net.subnetwork([2]).reaction_ids == (2,)
    with pytest.raises(ValueError):
        ReactionNetwork(("A", "A"), ())
    with pytest.raises(ValueError):
        ReactionNetwork(("A",), (), frozenset({4}))
