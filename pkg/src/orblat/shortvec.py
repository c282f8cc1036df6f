"""Exact enumeration of all lattice vectors up to a norm bound: rational LLL
reduction plus Fincke-Pohst style search with exact pruning bounds.

Vectors are returned in the lattice's own coordinates, one representative per
{v, -v} pair (the lexicographically larger one), sorted lexicographically.
"""

from fractions import Fraction
from math import isqrt

from .exactmat import IntMatrix


class ShortVectorSet:
    """All vectors with 0 < (v|v) <= bound, up to sign, canonically sorted."""

    def __init__(self, bound, vectors):
        self.bound = bound
        self.vectors = tuple((tuple(v), n) for v, n in vectors)

    def __len__(self):
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def norms(self):
        return tuple(n for _, n in self.vectors)

    def min_norm(self):
        """Smallest norm present, or None when the set is empty."""
        return min(self.norms(), default=None)

    def to_json(self):
        return {"bound": self.bound, "vectors": [[list(v), n] for v, n in self.vectors]}

    @staticmethod
    def from_json(data):
        return ShortVectorSet(data["bound"], [(tuple(v), n) for v, n in data["vectors"]])


def _round_half(x):
    """Nearest integer to the fraction x (ties toward +infinity)."""
    return (2 * x.numerator + x.denominator) // (2 * x.denominator)


def _gram_schmidt(vecs, ip):
    """Exact GS data for the rows in vecs: (mu, B) with B the GS norms."""
    n = len(vecs)
    mu = [[Fraction(0)] * n for _ in range(n)]
    b = [Fraction(0)] * n
    for i in range(n):
        for j in range(i):
            s = Fraction(ip(vecs[i], vecs[j]))
            for l in range(j):
                s -= mu[j][l] * mu[i][l] * b[l]
            mu[i][j] = s / b[j]
        s = Fraction(ip(vecs[i], vecs[i]))
        for l in range(i):
            s -= mu[i][l] * mu[i][l] * b[l]
        b[i] = s
    return mu, b


def lll_gram(gram, delta=Fraction(3, 4)):
    """LLL-reduce a positive-definite Gram matrix with exact arithmetic.

    Returns (gram', transform) with transform unimodular and
    transform^T @ gram @ transform = gram'.
    """
    n = gram.rows
    rows = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def ip(x, y):
        return sum(x[a] * gram[a, b] * y[b] for a in range(n) for b in range(n) if x[a] and gram[a, b])

    mu, b = _gram_schmidt(rows, ip)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = _round_half(mu[k][j])
            if q:
                rows[k] = [x - q * y for x, y in zip(rows[k], rows[j])]
                mu[k][j] -= q
                for l in range(j):
                    mu[k][l] -= q * mu[j][l]
        if b[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * b[k - 1]:
            k += 1
        else:
            rows[k], rows[k - 1] = rows[k - 1], rows[k]
            mu, b = _gram_schmidt(rows, ip)
            k = max(k - 1, 1)
    transform = IntMatrix(rows).transpose()
    reduced = transform.transpose() @ gram @ transform
    return reduced, transform


def _ldl(gram):
    """Exact LDL^T of a positive-definite Gram: (L unit lower, D diagonal)."""
    n = gram.rows
    lo = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    d = [Fraction(0)] * n
    for i in range(n):
        for j in range(i):
            s = Fraction(gram[i, j])
            for l in range(j):
                s -= lo[i][l] * lo[j][l] * d[l]
            lo[i][j] = s / d[j]
        s = Fraction(gram[i, i])
        for l in range(i):
            s -= lo[i][l] * lo[i][l] * d[l]
        d[i] = s
        if d[i] <= 0:
            raise ValueError("gram matrix not positive definite")
    return lo, d


def _range_for(c, r):
    """Integer m-interval with (m + c)^2 <= r, exact; empty -> (1, 0)."""
    if r < 0:
        return 1, 0

    def below(m):  # m + c <= sqrt(r)
        t = m + c
        return t <= 0 or t * t <= r

    def above(m):  # m + c >= -sqrt(r)
        t = m + c
        return t >= 0 or t * t <= r

    # float hints only seed the search; exactness comes from the predicates
    try:
        hint = int(float(-c) + float(r) ** 0.5)
    except (OverflowError, ValueError):
        hint = isqrt(r.numerator // r.denominator) - _round_half(c)
    hi = hint
    while below(hi + 1):
        hi += 1
    while not below(hi):
        hi -= 1
    try:
        hint = int(float(-c) - float(r) ** 0.5)
    except (OverflowError, ValueError):
        hint = -isqrt(r.numerator // r.denominator) - _round_half(c)
    lo = hint
    while above(lo - 1):
        lo -= 1
    while not above(lo):
        lo += 1
    return lo, hi


def _enumerate_reduced(gram, bound, top_range=None):
    """All nonzero x with x^T gram x <= bound, one per sign pair.

    Yields (coords tuple, norm).  top_range restricts the outermost
    coordinate to [a, b] for parallel splitting.
    """
    n = gram.rows
    lo, d = _ldl(gram)
    acc = [Fraction(0)] * n  # acc[j] = sum_{k>j} L[k][j] * x[k]
    x = [0] * n
    out = []

    def descend(i, remaining, all_zero):
        if i < 0:
            norm = bound - remaining
            out.append((tuple(x), norm))
            return
        a, b = _range_for(acc[i], remaining / d[i])
        if i == n - 1 and top_range is not None:
            a, b = max(a, top_range[0]), min(b, top_range[1])
        if all_zero:
            a = max(a, 0)
        for v in range(a, b + 1):
            t = v + acc[i]
            rem = remaining - d[i] * t * t
            if rem < 0:
                continue
            if all_zero and v == 0 and i == 0:
                continue
            x[i] = v
            for j in range(i):
                acc[j] += lo[i][j] * v
            descend(i - 1, rem, all_zero and v == 0)
            for j in range(i):
                acc[j] -= lo[i][j] * v
        x[i] = 0

    descend(n - 1, Fraction(bound), True)
    return out


def _canonical_sign(v):
    return v if v >= tuple(-a for a in v) else tuple(-a for a in v)


def short_vectors_gram(gram, bound, threads=1):
    """ShortVectorSet of a positive-definite integer Gram matrix."""
    if bound < 1:
        raise ValueError("bound must be >= 1")
    reduced, transform = lll_gram(gram)
    n = gram.rows
    t_rows = [transform.col(j) for j in range(n)]  # t_rows[j] = new basis vector j

    def to_original(xs):
        return tuple(
            sum(xs[j] * t_rows[j][i] for j in range(n) if xs[j]) for i in range(n)
        )

    # split the outermost nonnegative coordinate range into chunks; each chunk
    # is enumerated independently and the merged result is order-canonical
    top_hi = _range_for(Fraction(0), Fraction(bound) / _ldl(reduced)[1][n - 1])[1]
    chunks = [(a, a) for a in range(0, top_hi + 1)] if threads > 1 else [(0, top_hi)]
    results = []
    if threads > 1 and len(chunks) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            for part in pool.map(
                lambda c: _enumerate_reduced(reduced, bound, top_range=c), chunks
            ):
                results.extend(part)
    else:
        for c in chunks:
            results.extend(_enumerate_reduced(reduced, bound, top_range=c))

    vecs = {}
    for xs, norm in results:
        v = _canonical_sign(to_original(xs))
        assert norm.denominator == 1
        vecs[v] = int(norm)
    return ShortVectorSet(bound, sorted(vecs.items()))


def lll_reduce(lat):
    """LLL-reduce a Lattice; returns (reduced Lattice, unimodular transform)."""
    from .lattice import Lattice

    reduced, transform = lll_gram(lat.gram)
    return Lattice(reduced), transform


def enumerate_short(lat, bound, threads=1):
    """All lattice vectors of norm in (0, bound], up to sign, canonical order."""
    return short_vectors_gram(lat.gram, bound, threads=threads)
