"""Stabilizer chains against brute-force closure; invariants on known groups."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orblat.permgrp import (
    PermGroup,
    compose,
    deterministic_chain,
    group_invariants,
    identity,
    inverse,
    is_identity,
    orbits,
    perm,
    perm_order,
    randomized_chain,
)


def brute_force_order(gens, degree):
    """Closure size by breadth-first multiplication (small groups only)."""
    ident = identity(degree)
    seen = {ident.tobytes()}
    frontier = [ident]
    while frontier:
        nxt = []
        for e in frontier:
            for g in gens:
                h = compose(e, g)
                key = h.tobytes()
                if key not in seen:
                    seen.add(key)
                    nxt.append(h)
        frontier = nxt
    return len(seen)


def small_gen_sets(max_pts=7, max_gens=3):
    def build(n, picks):
        rng = np.random.RandomState(picks)
        return n, [perm(rng.permutation(n)) for _ in range(1 + picks % max_gens)]

    return st.integers(2, max_pts).flatmap(
        lambda n: st.integers(0, 10**6).map(lambda picks: build(n, picks))
    )


def test_symmetric_group():
    cyc = perm([1, 2, 3, 0])
    swap = perm([1, 0, 2, 3])
    g = PermGroup([cyc, swap], 4)
    assert g.order() == 24
    assert sum(1 for _ in g.elements()) == 24


def test_cyclic_group():
    g = PermGroup([perm([1, 2, 3, 4, 0])], 5)
    assert g.order() == 5
    assert g.contains(perm([2, 3, 4, 0, 1]))
    assert not g.contains(perm([1, 0, 2, 3, 4]))


def test_trivial_group():
    g = PermGroup([], 4)
    assert g.order() == 1
    assert g.contains(identity(4))
    els = list(g.elements())
    assert len(els) == 1 and is_identity(els[0])


def test_elements_distinct_and_complete():
    rot = perm([1, 2, 3, 4, 5, 0])
    flip = perm([0, 5, 4, 3, 2, 1])
    g = PermGroup([rot, flip], 6)
    assert g.order() == 12
    keys = {e.tobytes() for e in g.elements()}
    assert len(keys) == 12
    for e in g.elements():
        assert g.contains(e)


@settings(max_examples=80, deadline=None)
@given(small_gen_sets())
def test_chain_matches_brute_force(case):
    n, gens = case
    g = PermGroup(gens, n)
    assert g.order() == brute_force_order(g.gens or [identity(n)], n)


@settings(max_examples=30, deadline=None)
@given(small_gen_sets(max_pts=6))
def test_randomized_chain_agrees(case):
    n, gens = case
    target = PermGroup(gens, n).order()
    chain = randomized_chain([g for g in gens if not is_identity(g)], n, target, seed=7)
    assert chain.order() == target


def test_randomized_chain_rejects_wrong_targets():
    cyc = perm([1, 2, 3, 0])
    swap = perm([1, 0, 2, 3])
    with pytest.raises(ValueError):
        randomized_chain([cyc, swap], 4, 12)  # true order 24
    with pytest.raises(ValueError):
        randomized_chain([cyc, swap], 4, 48)


def test_invariants_s3():
    g = PermGroup([perm([1, 2, 0]), perm([1, 0, 2])], 3)
    inv = group_invariants(g)
    assert inv["order"] == 6
    assert inv["order_factored"] == {"2": 1, "3": 1}
    assert inv["exponent"] == 6
    assert inv["center_order"] == 1
    assert inv["derived_order"] == 3
    assert inv["abelianization"] == [2]
    assert not inv["abelian"]


def test_invariants_dihedral_12():
    rot = perm([1, 2, 3, 4, 5, 0])
    flip = perm([0, 5, 4, 3, 2, 1])
    inv = group_invariants(PermGroup([rot, flip], 6))
    assert inv["order"] == 12
    assert inv["exponent"] == 6
    assert inv["center_order"] == 2
    assert inv["derived_order"] == 3
    assert inv["abelianization"] == [2, 2]
    assert not inv["abelian"]


def test_invariants_abelian_groups():
    z6 = PermGroup([perm([1, 2, 3, 4, 5, 0])], 6)
    assert group_invariants(z6)["abelianization"] == [6]
    z2z2 = PermGroup([perm([1, 0, 2, 3]), perm([0, 1, 3, 2])], 4)
    inv = group_invariants(z2z2)
    assert inv["abelianization"] == [2, 2] and inv["exponent"] == 2
    z4 = PermGroup([perm([1, 2, 3, 0])], 4)
    assert group_invariants(z4)["abelianization"] == [4]
    z2z4 = PermGroup([perm([1, 0, 2, 3, 4, 5]), perm([0, 1, 3, 4, 5, 2])], 6)
    assert group_invariants(z2z4)["abelianization"] == [2, 4]


def test_invariants_partial_flag():
    cyc = perm([1, 2, 3, 0])
    swap = perm([1, 0, 2, 3])
    inv = group_invariants(PermGroup([cyc, swap], 4), enum_cap=10)
    assert inv["partial"] and inv["order"] == 24
    assert "exponent" not in inv


def test_random_word_deterministic():
    g = PermGroup([perm([1, 2, 3, 0]), perm([1, 0, 2, 3])], 4)
    w1 = g.random_word(42, 17)
    w2 = g.random_word(42, 17)
    assert np.array_equal(w1, w2)
    assert is_identity(g.random_word(1, 0))
    assert g.contains(w1)


def test_orbit_utilities():
    g1 = perm([1, 0, 2, 3, 4])
    g2 = perm([0, 1, 3, 4, 2])
    assert orbits([g1, g2], 5) == [[0, 1], [2, 3, 4]]


def test_perm_order():
    assert perm_order(perm([1, 2, 0, 4, 3])) == 6
    assert perm_order(identity(3)) == 1


def test_inverse_compose():
    p = perm([2, 0, 3, 1])
    assert is_identity(compose(p, inverse(p)))
    q = perm([1, 0, 3, 2])
    left = compose(p, q)  # q first
    assert left[0] == p[q[0]]
