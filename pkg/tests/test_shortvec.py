"""Short-vector enumeration against a brute-force box oracle, LLL postconditions."""

from fractions import Fraction
from math import isqrt

from hypothesis import given, settings, strategies as st

from orblat.exactmat import IntMatrix, rat_inverse
from orblat.lattice import Lattice
from orblat.shortvec import lll_gram, lll_reduce, enumerate_short, short_vectors_gram

A2 = IntMatrix([[2, 1], [1, 2]])


def pos_def_grams(max_dim=4, max_entry=4):
    """Random positive-definite Gram matrices B^T B from integer B."""

    def to_gram(rows):
        b = IntMatrix(rows)
        return b.transpose() @ b

    return (
        st.integers(1, max_dim)
        .flatmap(
            lambda n: st.lists(
                st.lists(st.integers(-max_entry, max_entry), min_size=n, max_size=n),
                min_size=n,
                max_size=n,
            )
        )
        .map(to_gram)
        .filter(lambda g: g.det() != 0)
    )


def box_oracle(gram, bound):
    """All short vectors up to sign by exhaustive box search (small ranks)."""
    n = gram.rows
    ginv = rat_inverse(gram)
    lims = []
    for i in range(n):
        r = Fraction(bound) * ginv[i, i]
        lims.append(isqrt(r.numerator // r.denominator))

    out = {}

    def rec(i, partial):
        if i == n:
            norm = sum(
                partial[a] * gram[a, b] * partial[b] for a in range(n) for b in range(n)
            )
            if 0 < norm <= bound:
                v = tuple(partial)
                neg = tuple(-x for x in v)
                out[max(v, neg)] = norm
            return
        for x in range(-lims[i], lims[i] + 1):
            rec(i + 1, partial + [x])

    rec(0, [])
    return sorted(out.items())


def test_a2_roots():
    sv = enumerate_short(Lattice(A2), 2)
    assert len(sv) == 3
    assert all(n == 2 for n in sv.norms())


def test_empty_below_minimum():
    d4ish = IntMatrix([[4, 1], [1, 4]])
    sv = short_vectors_gram(d4ish, 2)
    assert len(sv) == 0 and sv.min_norm() is None


def test_canonical_order_and_sign():
    sv = enumerate_short(Lattice(A2), 6)
    vecs = [v for v, _ in sv]
    assert vecs == sorted(vecs)
    assert all(v >= tuple(-x for x in v) for v in vecs)


def test_lll_worked_example():
    reduced, t = lll_gram(IntMatrix([[5, 13], [13, 34]]))
    assert reduced == IntMatrix.identity(2)
    assert t.det() in (1, -1)


def test_lll_reduce_lattice():
    lat2, t = lll_reduce(Lattice(IntMatrix([[2, 1], [1, 2]])))
    assert t.transpose() @ A2 @ t == lat2.gram
    assert lat2.det() == 3


@settings(max_examples=60, deadline=None)
@given(pos_def_grams(), st.integers(1, 8))
def test_matches_box_oracle(gram, bound):
    got = sorted((v, n) for v, n in short_vectors_gram(gram, bound))
    assert got == box_oracle(gram, bound)


@settings(max_examples=40, deadline=None)
@given(pos_def_grams(max_dim=3))
def test_lll_postconditions(gram):
    reduced, t = lll_gram(gram)
    assert t.det() in (1, -1)
    assert t.transpose() @ gram @ t == reduced
    # Lovasz condition on the reduced gram
    from orblat.shortvec import _gram_schmidt

    n = reduced.rows
    rows = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    mu, b = _gram_schmidt(rows, lambda x, y: sum(
        x[a] * reduced[a, c] * y[c] for a in range(n) for c in range(n)
    ))
    for k in range(1, n):
        assert b[k] >= (Fraction(3, 4) - mu[k][k - 1] ** 2) * b[k - 1]
        for j in range(k):
            assert abs(mu[k][j]) <= Fraction(1, 2)


def test_thread_determinism():
    gram = IntMatrix([[4, 1, 0], [1, 4, 1], [0, 1, 6]])
    a = short_vectors_gram(gram, 12, threads=1)
    b = short_vectors_gram(gram, 12, threads=3)
    assert a.vectors == b.vectors


def test_json_round_trip():
    sv = enumerate_short(Lattice(A2), 4)
    from orblat.shortvec import ShortVectorSet

    assert ShortVectorSet.from_json(sv.to_json()).vectors == sv.vectors
