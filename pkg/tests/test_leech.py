"""Tests for the Leech lattice construction and class-representative search."""

import json

import numpy as np
import pytest

from orblat.exactmat import IntMatrix
from orblat.lattice import (
    DiscriminantGroup,
    Isometry,
    fixed_and_coinvariant,
    one_minus_g_quotients,
    restrict_isometry,
)
from orblat.leech import (
    CLASS_TABLE,
    GolayCode,
    class_invariants,
    conway_generators,
    find_class_rep,
    leech_lattice,
)
from orblat.shortvec import short_vectors_gram


@pytest.fixture(scope="module")
def golay():
    return GolayCode()


@pytest.fixture(scope="module")
def leech():
    return leech_lattice()


class TestGolay:
    def test_weight_distribution(self, golay):
        weights = golay.words.sum(axis=1)
        dist = {int(w): int((weights == w).sum()) for w in set(weights.tolist())}
        assert dist == {0: 1, 8: 759, 12: 2576, 16: 759, 24: 1}

    def test_contains(self, golay):
        assert golay.contains([0] * 24)
        assert golay.contains([1] * 24)
        assert not golay.contains([1] + [0] * 23)

    def test_octad_count(self, golay):
        assert len(golay.octads()) == 759

    def test_psl2_generators_preserve_code(self, golay):
        # contains() checks inside psl2_generators; assert orders here.
        alpha, beta, gamma = golay.psl2_generators()

        def perm_order(perm):
            p = perm.copy()
            k = 1
            while not (p == np.arange(24)).all():
                p = perm[p]
                k += 1
            return k

        assert perm_order(alpha) == 23
        assert perm_order(beta) == 11
        assert perm_order(gamma) == 2

    def test_sextet_partitions(self, golay):
        parts = golay.sextet({0, 1, 2, 3})
        assert len(parts) == 6
        assert set().union(*parts) == set(range(24))

    def test_sextet_of_other_tetrad(self, golay):
        parts = golay.sextet({0, 5, 9, 17})
        assert len(parts) == 6
        assert sorted(len(t) for t in parts) == [4] * 6


class TestLeechLattice:
    def test_even_unimodular_rank24(self, leech):
        lat, basis = leech
        assert lat.rank == 24
        assert lat.det() == 1
        assert all(lat.gram[i, i] % 2 == 0 for i in range(24))

    def test_gram_matches_basis(self, leech):
        lat, basis = leech
        b = np.array(basis.entries, dtype=np.int64)
        assert (b @ b.T == 8 * np.array(lat.gram.entries, dtype=np.int64)).all()

    def test_no_roots(self, leech):
        # Minimum norm is 4: no vectors of norm 2 (checked exhaustively).
        lat, _ = leech
        sv = short_vectors_gram(lat.gram, 2)
        assert [v for v, norm in sv if norm == 2] == []

    def test_generator_count_and_isometry(self, leech):
        lat, _ = leech
        gens = conway_generators()
        assert len(gens) == 16
        for g in gens:
            assert g.matrix.transpose() @ lat.gram @ g.matrix == lat.gram

    def test_generator_orders(self):
        orders = sorted(g.order() for g in conway_generators())
        assert orders[-1] == 23  # the projective-line shift
        assert 11 in orders

    def test_nonmonomial_generator_present(self, leech):
        # Convert each generator back to standard sqrt(8) coordinates
        # (M = B^T A (B^T)^-1) and verify at least one is not monomial
        # (more than one nonzero entry in some column).
        from fractions import Fraction

        from orblat.exactmat import RatMatrix, rat_inverse

        lat, basis = leech
        bt = RatMatrix(
            [[Fraction(basis[j, i]) for j in range(24)] for i in range(24)]
        )
        bt_inv = rat_inverse(bt)
        monomial_flags = []
        for g in conway_generators():
            m = bt @ g.matrix.to_rational() @ bt_inv
            monomial = all(
                sum(1 for i in range(24) if m[i, j] != 0) == 1
                for j in range(24)
            )
            monomial_flags.append(monomial)
        assert False in monomial_flags  # the sextet isometry
        assert True in monomial_flags  # the permutations and sign flips


class TestClassReps:
    @pytest.mark.parametrize("label", sorted(CLASS_TABLE))
    def test_find_and_verify(self, label, tmp_path):
        rep = find_class_rep(label, seed=0, cache_dir=tmp_path)
        target = CLASS_TABLE[label]
        assert rep.invariants == target
        # reload from cache must give the identical matrix
        rep2 = find_class_rep(label, seed=0, cache_dir=tmp_path)
        assert rep2.isometry.matrix == rep.isometry.matrix

    def test_cache_tamper_rejected(self, tmp_path):
        find_class_rep("23A", cache_dir=tmp_path)
        path = tmp_path / "23A.json"
        data = json.loads(path.read_text())
        data["matrix"][0][0] += 1
        path.write_text(json.dumps(data))
        rep = find_class_rep("23A", cache_dir=tmp_path)
        assert rep.invariants == CLASS_TABLE["23A"]

    def test_unknown_label(self):
        with pytest.raises(ValueError, match="unknown class"):
            find_class_rep("7B")

    def test_invariants_reject_non_odd_prime_order(self, leech):
        lat, _ = leech
        with pytest.raises(ValueError, match="odd prime"):
            class_invariants(lat, Isometry(lat, IntMatrix.identity(24)))
        g2 = next(g for g in conway_generators() if g.order() == 2)
        with pytest.raises(ValueError, match="odd prime"):
            class_invariants(lat, g2)

    def test_invariants_reject_composite_order(self, leech):
        lat, _ = leech
        gens = conway_generators()
        g23 = next(g for g in gens if g.order() == 23)
        g11 = next(g for g in gens if g.order() == 11)
        product = Isometry(lat, g23.matrix @ g11.matrix)
        order = product.order()
        if order >= 3 and all(order % d for d in range(2, order)):
            pytest.skip(f"product happens to have odd prime order {order}")
        with pytest.raises(ValueError, match="odd prime"):
            class_invariants(lat, product)

    @pytest.mark.parametrize("label", sorted(CLASS_TABLE))
    def test_coinvariant_quotients(self, label, tmp_path):
        """|L/(1-g)L| = p^(rank/(p-1)) and L/(1-g)L* is p-elementary."""
        rep = find_class_rep(label, cache_dir=tmp_path)
        lat, _ = leech_lattice()
        _, lco, _, emb = fixed_and_coinvariant(lat, rep.isometry)
        gco = restrict_isometry(lat, rep.isometry, emb)
        p = rep.invariants.order
        quots = one_minus_g_quotients(lco, gco, p)
        assert quots["l_mod"] == lco.rank // (p - 1)
        expected_dual = {
            "3C": 4,  # |L/(1-g)L*| = 3^4
            "5C": 2,  # 5^2
            "11A": 0,  # trivial
            "23A": 0,  # trivial
        }
        assert quots["ldual_mod"] == expected_dual[label]

    @pytest.mark.parametrize(
        "label,disc_orders",
        [("3C", (3,) * 5), ("5C", (5,) * 3), ("11A", (11, 11)), ("23A", (23,))],
    )
    def test_discriminant_groups(self, label, disc_orders, tmp_path):
        rep = find_class_rep(label, cache_dir=tmp_path)
        lat, _ = leech_lattice()
        _, lco, _, emb = fixed_and_coinvariant(lat, rep.isometry)
        disc = DiscriminantGroup(lco)
        assert tuple(o for o in disc.orders if o > 1) == disc_orders
