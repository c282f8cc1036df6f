"""Integral lattices, dual lattices, discriminant groups with their quadratic
forms, fixed/coinvariant sublattices, and finite quotient invariants.

Conventions: a lattice of rank n is Z^n with bilinear form (x|y) = x^T G y for
an integral Gram matrix G.  Isometries act on column vectors, h: x -> h @ x.
The dual L* is G^{-1} Z^n in the same coordinates, so D(L) = L*/L is presented
as Z^n / G Z^n via y = G x.
"""

import hashlib
import json
from fractions import Fraction
from itertools import product

from .exactmat import IntMatrix, RatMatrix, hnf, snf, rat_inverse, kernel_basis


class QZValue:
    """Element of Q/Z as a reduced fraction with 0 <= num < den."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=1):
        f = Fraction(num, den)
        f = f - (f.numerator // f.denominator)
        object.__setattr__(self, "num", f.numerator)
        object.__setattr__(self, "den", f.denominator)

    def __setattr__(self, name, value):
        raise AttributeError("QZValue is immutable")

    @staticmethod
    def from_fraction(f):
        return QZValue(f.numerator, f.denominator)

    def as_fraction(self):
        return Fraction(self.num, self.den)

    def __add__(self, other):
        return QZValue.from_fraction(self.as_fraction() + other.as_fraction())

    def __sub__(self, other):
        return QZValue.from_fraction(self.as_fraction() - other.as_fraction())

    def is_zero(self):
        return self.num == 0

    def __eq__(self, other):
        return isinstance(other, QZValue) and (self.num, self.den) == (other.num, other.den)

    def __hash__(self):
        return hash((self.num, self.den))

    def __str__(self):
        return "%d/%d" % (self.num, self.den)

    def __repr__(self):
        return "QZValue(%d, %d)" % (self.num, self.den)


class Lattice:
    """Positive-definite integral lattice given by its Gram matrix."""

    def __init__(self, gram):
        if not isinstance(gram, IntMatrix):
            gram = IntMatrix(gram)
        if not gram.is_symmetric():
            raise ValueError("gram matrix must be symmetric")
        for k in range(1, gram.rows + 1):
            minor = IntMatrix([row[:k] for row in gram.entries[:k]])
            if minor.det() <= 0:
                raise ValueError("gram matrix not positive definite")
        self.gram = gram
        self.rank = gram.rows
        self.even = all(gram[i, i] % 2 == 0 for i in range(gram.rows))
        self._gram_inv = None

    def gram_inverse(self):
        if self._gram_inv is None:
            self._gram_inv = rat_inverse(self.gram)
        return self._gram_inv

    def det(self):
        return self.gram.det()

    def bilinear(self, x, y):
        g = self.gram
        return sum(
            Fraction(x[i]) * g[i, j] * Fraction(y[j])
            for i in range(self.rank)
            for j in range(self.rank)
        )

    def norm(self, x):
        return self.bilinear(x, x)

    def content_hash(self):
        blob = json.dumps(self.gram.to_json()).encode()
        return hashlib.sha256(blob).hexdigest()

    def to_json(self):
        return {"rank": self.rank, "gram": [[int(x) for x in row] for row in self.gram.entries]}

    @staticmethod
    def from_json(data):
        lat = Lattice(IntMatrix(data["gram"]))
        if lat.rank != data["rank"]:
            raise ValueError("rank field inconsistent with gram matrix")
        return lat

    def __eq__(self, other):
        return isinstance(other, Lattice) and self.gram == other.gram

    def __hash__(self):
        return hash(self.gram)


class Isometry:
    """Lattice isometry h with h^T G h = G, acting as x -> h @ x."""

    def __init__(self, lat, matrix):
        if not isinstance(matrix, IntMatrix):
            matrix = IntMatrix(matrix)
        if matrix.transpose() @ lat.gram @ matrix != lat.gram:
            raise ValueError("matrix does not preserve the gram matrix")
        self.lattice = lat
        self.matrix = matrix

    def order(self):
        m = self.matrix
        n = IntMatrix.identity(m.rows)
        for k in range(1, 10000):
            n = n @ m
            if n.is_identity():
                return k
        raise ValueError("order exceeds search limit")

    def inverse(self):
        return Isometry(self.lattice, rat_inverse(self.matrix).to_int_matrix())

    def __matmul__(self, other):
        return Isometry(self.lattice, self.matrix @ other.matrix)

    def power(self, k):
        if k < 0:
            return self.inverse().power(-k)
        out = IntMatrix.identity(self.matrix.rows)
        for _ in range(k):
            out = out @ self.matrix
        return Isometry(self.lattice, out)

    def content_hash(self):
        blob = json.dumps(self.matrix.to_json()).encode()
        return hashlib.sha256(blob).hexdigest()

    def __eq__(self, other):
        return isinstance(other, Isometry) and self.matrix == other.matrix

    def __hash__(self):
        return hash(self.matrix)


class DiscriminantGroup:
    """D(L) = L*/L with generator coset representatives and q_L values.

    Elements are exponent tuples (a_1, ..., a_k) with 0 <= a_i < d_i against
    the stored generators; orders satisfy d_1 | d_2 | ... | d_k.
    """

    _ENUM_CAP = 10**5

    def __init__(self, lat):
        self.lattice = lat
        g = lat.gram
        d, u, _ = snf(g)
        uinv = rat_inverse(u).to_int_matrix()
        self._full_divisors = tuple(d[i, i] for i in range(g.rows))
        divisors = [(d[i, i], i) for i in range(g.rows) if d[i, i] > 1]
        self.orders = tuple(di for di, _ in divisors)
        ginv = lat.gram_inverse()
        gens = []
        gens_y = []
        for _, i in divisors:
            y = uinv.col(i)
            alpha = ginv @ IntMatrix.column(list(y))
            alpha = RatMatrix([[v - (v.numerator // v.denominator)] for v in alpha.col(0)])
            gens.append(alpha)
            gens_y.append(tuple(y))
        self.generators = tuple(gens)
        self._gens_y = tuple(gens_y)
        self._u = u
        # rational gram of the generator representatives
        k = len(gens)
        self._qgram = [
            [
                sum(
                    gens[a][i, 0] * g[i, j] * gens[b][j, 0]
                    for i in range(g.rows)
                    for j in range(g.rows)
                )
                for b in range(k)
            ]
            for a in range(k)
        ]
        self._check_nondegenerate()

    def order(self):
        out = 1
        for d in self.orders:
            out *= d
        return out

    def elements(self):
        """Iterate over all exponent tuples (small groups only)."""
        if self.order() > self._ENUM_CAP:
            raise ValueError("discriminant group too large to enumerate")
        return product(*(range(d) for d in self.orders))

    def q(self, elt):
        """q_L(x) = (x|x)/2 mod Z for the class with exponents elt."""
        k = len(self.orders)
        val = sum(
            (Fraction(elt[a]) * Fraction(elt[b]) * self._qgram[a][b] for a in range(k) for b in range(k)),
            Fraction(0),
        )
        return QZValue.from_fraction(val / 2)

    def bilinear(self, x, y):
        """(x|y) mod Z on D(L)."""
        k = len(self.orders)
        val = sum(
            Fraction(x[a]) * Fraction(y[b]) * self._qgram[a][b]
            for a in range(k)
            for b in range(k)
        )
        return QZValue.from_fraction(val)

    def qvals(self):
        """Map from every element to its q_L value (small groups only)."""
        return {elt: self.q(elt) for elt in self.elements()}

    def coset_representative(self, elt):
        """A representative in L* (rational column) of the class elt."""
        n = self.lattice.rank
        vec = [Fraction(0)] * n
        for a, e in enumerate(elt):
            for i in range(n):
                vec[i] += e * self.generators[a][i, 0]
        return RatMatrix([[v] for v in vec])

    def exponents_of(self, alpha):
        """Exponent tuple of a dual vector alpha (rational column) in D(L)."""
        y = self.lattice.gram @ alpha
        if not y.is_integral():
            raise ValueError("vector is not in the dual lattice")
        z = self._u @ y.to_int_matrix()
        return tuple(z[i, 0] % d for i, d in enumerate(self._full_divisors) if d > 1)

    def _check_nondegenerate(self):
        if not self.orders:
            return
        if self.order() <= self._ENUM_CAP:
            trivial = 0
            for elt in self.elements():
                if all(self.bilinear(elt, tuple(g)).is_zero() for g in _unit_tuples(self.orders)):
                    trivial += 1
            if trivial != 1:
                raise ValueError("discriminant bilinear form is degenerate")

    def is_p_elementary(self, p):
        return all(d == p for d in self.orders)

    def to_json(self):
        return {
            "orders": list(self.orders),
            "qvals": [
                {"elt": list(elt), "q": str(self.q(elt))} for elt in self.elements()
            ],
        }


def _unit_tuples(orders):
    k = len(orders)
    for i in range(k):
        t = [0] * k
        t[i] = 1
        yield tuple(t)


def discriminant_group(lat):
    """Discriminant group D(L) = L*/L with its quadratic form."""
    return DiscriminantGroup(lat)


def lattice_predicates(lat, p):
    """Exact {even, rootless, p_elementary} flags for the lattice."""
    from . import shortvec

    rootless = all(n != 2 for n in shortvec.enumerate_short(lat, 2).norms())
    pdual = lat.gram_inverse().scale(p)
    return {
        "even": lat.even,
        "rootless": rootless,
        "p_elementary": pdual.is_integral(),
    }


def saturate(lat, cols):
    """Saturation in Z^n of the column span of cols; basis as matrix columns."""
    h, _ = hnf(cols.transpose())
    rows = [list(r) for r in h.entries if any(r)]
    if not rows:
        return None
    # saturate: solve for the primitive lattice containing the span
    m = IntMatrix(rows)  # rows span the sublattice
    d, u, v = snf(m)
    r = len(rows)
    # rows of (D^{-1} U M) = first r rows of V^{-1} give the saturated basis
    vinv = rat_inverse(v).to_int_matrix()
    sat_rows = [vinv.row(i) for i in range(r)]
    return IntMatrix(sat_rows).transpose()


def fixed_and_coinvariant(lat, g):
    """Split along an isometry: (fixed part, coinvariant part, embeddings).

    Returns (L_fixed, L_coinv, emb_fixed, emb_coinv) where each embedding has
    the sublattice basis vectors as columns in lattice coordinates.  A rank-0
    part is returned as (None, None) for (lattice, embedding).
    """
    if g.lattice.gram != lat.gram:
        raise ValueError("isometry does not belong to this lattice")
    n = lat.rank
    one_minus = IntMatrix.identity(n) - g.matrix
    bfix = kernel_basis(one_minus)
    if bfix is None:
        emb_fix, lfix, rfix = None, None, 0
    else:
        emb_fix = bfix
        lfix = Lattice(bfix.transpose() @ lat.gram @ bfix)
        rfix = bfix.cols
    if rfix == n:
        emb_co, lco, rco = None, None, 0
    else:
        if bfix is None:
            emb_co = IntMatrix.identity(n)
        else:
            emb_co = kernel_basis(bfix.transpose() @ lat.gram)
        lco = Lattice(emb_co.transpose() @ lat.gram @ emb_co)
        rco = emb_co.cols
    if rfix + rco != n:
        raise ValueError("rank split failed: %d + %d != %d" % (rfix, rco, n))
    return lfix, lco, emb_fix, emb_co


def restrict_isometry(lat, g, embedding):
    """Restrict g to the sublattice spanned by the embedding's columns."""
    target = g.matrix @ embedding
    emb_r = embedding.to_rational()
    sq = rat_inverse(emb_r.transpose() @ emb_r)
    sol = sq @ emb_r.transpose() @ target.to_rational()
    if not sol.is_integral():
        raise ValueError("sublattice is not invariant under the isometry")
    if embedding.to_rational() @ sol != target.to_rational():
        raise ValueError("restriction is inconsistent")
    sub = Lattice(embedding.transpose() @ lat.gram @ embedding)
    return Isometry(sub, sol.to_int_matrix())


def quotient_invariants(lat, cols):
    """Abelian invariants (free_rank, torsion divisors > 1) of L / <columns>.

    cols may be rational; all columns must lie in L, otherwise this raises
    with the standing-assumption message (the rational caller is the
    (1-g)-image of the dual lattice).
    """
    if isinstance(cols, RatMatrix):
        if not cols.is_integral():
            raise ValueError("(1-g)L* subset L fails")
        cols = cols.to_int_matrix()
    if cols.rows != lat.rank:
        raise ValueError("generator columns have wrong dimension")
    d, _, _ = snf(cols)
    diag = [d[i, i] for i in range(min(d.rows, d.cols))]
    rank_s = sum(1 for x in diag if x != 0)
    free_rank = lat.rank - rank_s
    torsion = [x for x in diag if x > 1]
    return free_rank, torsion


def sublattice_one_minus_g(lat, g):
    """Column generators of (1-g)L."""
    return IntMatrix.identity(lat.rank) - g.matrix


def sublattice_one_minus_g_dual(lat, g):
    """Column generators of (1-g)L* (rational; integrality = standing assumption)."""
    one_minus = IntMatrix.identity(lat.rank) - g.matrix
    return one_minus.to_rational() @ lat.gram_inverse()


def one_minus_g_quotients(lat, g, p):
    """Invariants of L/(1-g)L and L/(1-g)L* for fixed-point-free prime-order g.

    Checks L/(1-g)L = p^(rank/(p-1)) and both quotients p-elementary; returns
    {"l_mod": exponent of p in |L/(1-g)L|, "ldual_mod": same for L/(1-g)L*}.
    """
    fr, tor = quotient_invariants(lat, sublattice_one_minus_g(lat, g))
    expected = lat.rank // (p - 1)
    if fr != 0 or tor != [p] * expected:
        raise ValueError("L/(1-g)L is not p^(rank/(p-1)): got %r" % ((fr, tor),))
    fr2, tor2 = quotient_invariants(lat, sublattice_one_minus_g_dual(lat, g))
    if fr2 != 0 or any(t != p for t in tor2):
        raise ValueError("L/(1-g)L* is not p-elementary: got %r" % ((fr2, tor2),))
    return {"l_mod": len(tor), "ldual_mod": len(tor2)}


def discriminant_action(h, disc):
    """Matrix of the induced action of an isometry on D(L) generators.

    Returns a k x k IntMatrix whose column i gives the exponents of the image
    of generator i (entries reduced mod the row's order), or None when D(L)
    is trivial.  Asserts that the action preserves q_L and the bilinear form.
    """
    lat = disc.lattice
    if h.lattice.gram != lat.gram:
        raise ValueError("isometry does not belong to this lattice")
    k = len(disc.orders)
    if k == 0:
        return None
    cols = []
    for i in range(k):
        alpha = h.matrix @ disc.generators[i]
        cols.append(disc.exponents_of(alpha))
    mat = IntMatrix([[cols[j][i] % disc.orders[i] for j in range(k)] for i in range(k)])

    def apply(elt):
        return tuple(
            sum(mat[i, j] * elt[j] for j in range(k)) % disc.orders[i] for i in range(k)
        )

    for a in _unit_tuples(disc.orders):
        if disc.q(apply(a)) != disc.q(a):
            raise ValueError("induced action does not preserve q_L")
        for b in _unit_tuples(disc.orders):
            if disc.bilinear(apply(a), apply(b)) != disc.bilinear(a, b):
                raise ValueError("induced action does not preserve the bilinear form")
    return mat
