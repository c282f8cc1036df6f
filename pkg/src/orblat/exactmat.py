"""Arbitrary-precision integer/rational matrix kernel: exact normal forms,
determinants, inverses and integer kernels that every other module builds on.

No floating point anywhere.  Vectors are columns: a matrix acts as x -> M@x.
"""

from fractions import Fraction


class IntMatrix:
    """Immutable matrix with arbitrary-precision integer entries."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries):
        entries = tuple(tuple(row) for row in entries)
        if not entries or not entries[0]:
            raise ValueError("dimensions must be positive")
        ncols = len(entries[0])
        for row in entries:
            if len(row) != ncols:
                raise ValueError("ragged rows")
            for x in row:
                if not isinstance(x, int) or isinstance(x, bool):
                    raise TypeError("entries must be int, got %r" % (x,))
        object.__setattr__(self, "rows", len(entries))
        object.__setattr__(self, "cols", ncols)
        object.__setattr__(self, "entries", entries)

    def __setattr__(self, name, value):
        raise AttributeError("IntMatrix is immutable")

    @staticmethod
    def identity(n):
        return IntMatrix([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @staticmethod
    def zeros(rows, cols):
        return IntMatrix([[0] * cols for _ in range(rows)])

    @staticmethod
    def diagonal(diag):
        n = len(diag)
        return IntMatrix([[diag[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @staticmethod
    def column(vec):
        return IntMatrix([[x] for x in vec])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row(self, i):
        return self.entries[i]

    def col(self, j):
        return tuple(row[j] for row in self.entries)

    def transpose(self):
        return IntMatrix(list(zip(*self.entries)))

    def __matmul__(self, other):
        if isinstance(other, RatMatrix):
            return RatMatrix(self.entries) @ other
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        bt = list(zip(*other.entries))
        return IntMatrix(
            [[sum(a * b for a, b in zip(row, col)) for col in bt] for row in self.entries]
        )

    def __add__(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        return IntMatrix(
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)]
        )

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, k):
        return IntMatrix([[k * x for x in row] for row in self.entries])

    def __eq__(self, other):
        return isinstance(other, IntMatrix) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return "IntMatrix(%r)" % (list(map(list, self.entries)),)

    def is_symmetric(self):
        return self.entries == tuple(zip(*self.entries))

    def is_identity(self):
        return self.rows == self.cols and self == IntMatrix.identity(self.rows)

    def is_zero(self):
        return all(x == 0 for row in self.entries for x in row)

    def det(self):
        """Determinant by fraction-free (Bareiss) elimination."""
        if self.rows != self.cols:
            raise ValueError("determinant of non-square matrix")
        n = self.rows
        a = [list(row) for row in self.entries]
        sign = 1
        prev = 1
        for k in range(n - 1):
            if a[k][k] == 0:
                for i in range(k + 1, n):
                    if a[i][k] != 0:
                        a[k], a[i] = a[i], a[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
                a[i][k] = 0
            prev = a[k][k]
        return sign * a[n - 1][n - 1]

    def to_rational(self):
        return RatMatrix(self.entries)

    def to_json(self):
        return [[str(x) for x in row] for row in self.entries]

    @staticmethod
    def from_json(data):
        return IntMatrix([[int(s) for s in row] for row in data])


class RatMatrix:
    """Immutable matrix with exact rational entries in lowest terms."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries):
        entries = tuple(tuple(Fraction(x) for x in row) for row in entries)
        if not entries or not entries[0]:
            raise ValueError("dimensions must be positive")
        ncols = len(entries[0])
        if any(len(row) != ncols for row in entries):
            raise ValueError("ragged rows")
        object.__setattr__(self, "rows", len(entries))
        object.__setattr__(self, "cols", ncols)
        object.__setattr__(self, "entries", entries)

    def __setattr__(self, name, value):
        raise AttributeError("RatMatrix is immutable")

    @staticmethod
    def identity(n):
        return RatMatrix([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def col(self, j):
        return tuple(row[j] for row in self.entries)

    def transpose(self):
        return RatMatrix(list(zip(*self.entries)))

    def __matmul__(self, other):
        if isinstance(other, IntMatrix):
            other = other.to_rational()
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        bt = list(zip(*other.entries))
        return RatMatrix(
            [[sum(a * b for a, b in zip(row, col)) for col in bt] for row in self.entries]
        )

    def __add__(self, other):
        return RatMatrix(
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)]
        )

    def __sub__(self, other):
        return RatMatrix(
            [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)]
        )

    def scale(self, k):
        k = Fraction(k)
        return RatMatrix([[k * x for x in row] for row in self.entries])

    def __eq__(self, other):
        return isinstance(other, RatMatrix) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return "RatMatrix(%r)" % (list(map(list, self.entries)),)

    def is_integral(self):
        return all(x.denominator == 1 for row in self.entries for x in row)

    def to_int_matrix(self):
        if not self.is_integral():
            raise ValueError("matrix has non-integer entries")
        return IntMatrix([[int(x) for x in row] for row in self.entries])

    def is_identity(self):
        return self.rows == self.cols and all(
            x == (1 if i == j else 0)
            for i, row in enumerate(self.entries)
            for j, x in enumerate(row)
        )

    def to_json(self):
        return [
            [
                "%d/%d" % (x.numerator, x.denominator) if x.denominator != 1 else str(x.numerator)
                for x in row
            ]
            for row in self.entries
        ]

    @staticmethod
    def from_json(data):
        return RatMatrix([[Fraction(s) for s in row] for row in data])


def hnf(m):
    """Row Hermite normal form: return (H, U) with H = U @ m, U unimodular,
    H in echelon form with positive pivots and entries above pivots reduced.
    """
    a = [list(row) for row in m.entries]
    u = [[1 if i == j else 0 for j in range(m.rows)] for i in range(m.rows)]
    nrows, ncols = m.rows, m.cols
    r = 0
    for j in range(ncols):
        if r == nrows:
            break
        # gcd-eliminate column j below row r, keeping the smallest pivot on top
        while True:
            nz = [i for i in range(r, nrows) if a[i][j] != 0]
            if not nz:
                break
            i0 = min(nz, key=lambda i: abs(a[i][j]))
            if i0 != r:
                a[r], a[i0] = a[i0], a[r]
                u[r], u[i0] = u[i0], u[r]
            done = True
            for i in range(r + 1, nrows):
                if a[i][j] == 0:
                    continue
                q = a[i][j] // a[r][j]
                a[i] = [x - q * y for x, y in zip(a[i], a[r])]
                u[i] = [x - q * y for x, y in zip(u[i], u[r])]
                if a[i][j] != 0:
                    done = False
            if done:
                break
        if r < nrows and a[r][j] != 0:
            if a[r][j] < 0:
                a[r] = [-x for x in a[r]]
                u[r] = [-x for x in u[r]]
            for i in range(r):
                q = a[i][j] // a[r][j]
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[r])]
                    u[i] = [x - q * y for x, y in zip(u[i], u[r])]
            r += 1
    return IntMatrix(a), IntMatrix(u)


def snf(m):
    """Smith normal form: return (D, U, V) with D = U @ m @ V diagonal,
    d_i | d_{i+1}, and U, V unimodular.
    """
    a = [list(row) for row in m.entries]
    nrows, ncols = m.rows, m.cols
    u = [[1 if i == j else 0 for j in range(nrows)] for i in range(nrows)]
    v = [[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)]

    def swap_rows(i, k):
        a[i], a[k] = a[k], a[i]
        u[i], u[k] = u[k], u[i]

    def swap_cols(j, k):
        for row in a:
            row[j], row[k] = row[k], row[j]
        for row in v:
            row[j], row[k] = row[k], row[j]

    def addmul_row(dst, src, q):
        a[dst] = [x - q * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x - q * y for x, y in zip(u[dst], u[src])]

    def addmul_col(dst, src, q):
        for row in a:
            row[dst] -= q * row[src]
        for row in v:
            row[dst] -= q * row[src]

    t = 0
    while t < min(nrows, ncols):
        # locate a minimal-absolute-value nonzero pivot in the trailing block
        best = None
        for i in range(t, nrows):
            for j in range(t, ncols):
                if a[i][j] != 0 and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        # clear row and column t; restart if a remainder survives
        clean = True
        for i in range(t + 1, nrows):
            if a[i][t] != 0:
                q = a[i][t] // a[t][t]
                addmul_row(i, t, q)
                if a[i][t] != 0:
                    clean = False
        for j in range(t + 1, ncols):
            if a[t][j] != 0:
                q = a[t][j] // a[t][t]
                addmul_col(j, t, q)
                if a[t][j] != 0:
                    clean = False
        if not clean:
            continue
        # enforce divisibility: pivot must divide the whole trailing block
        offender = None
        for i in range(t + 1, nrows):
            for j in range(t + 1, ncols):
                if a[i][j] % a[t][t] != 0:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            addmul_row(t, offender, -1)
            continue
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return IntMatrix(a), IntMatrix(u), IntMatrix(v)


def rat_inverse(m):
    """Exact inverse of a square integer or rational matrix."""
    if m.rows != m.cols:
        raise ValueError("singular matrix: not square")
    n = m.rows
    a = [[Fraction(x) for x in row] for row in m.entries]
    inv = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for k in range(n):
        piv = None
        for i in range(k, n):
            if a[i][k] != 0:
                piv = i
                break
        if piv is None:
            raise ValueError("singular matrix")
        a[k], a[piv] = a[piv], a[k]
        inv[k], inv[piv] = inv[piv], inv[k]
        d = a[k][k]
        a[k] = [x / d for x in a[k]]
        inv[k] = [x / d for x in inv[k]]
        for i in range(n):
            if i != k and a[i][k] != 0:
                f = a[i][k]
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
                inv[i] = [x - f * y for x, y in zip(inv[i], inv[k])]
    return RatMatrix(inv)


def kernel_basis(m):
    """Basis of the saturated integer kernel {x : m @ x = 0}, as matrix columns.

    Returns None when the kernel is trivial.
    """
    d, _, v = snf(m)
    zero_cols = [j for j in range(m.cols) if j >= m.rows or d[j, j] == 0]
    if not zero_cols:
        return None
    return IntMatrix([[v[i, j] for j in zero_cols] for i in range(m.cols)])


def elementary_divisors(m):
    """Nontrivial elementary divisors (> 1) of an integer matrix, ascending."""
    d, _, _ = snf(m)
    divs = [d[i, i] for i in range(min(m.rows, m.cols))]
    return [x for x in divs if x > 1]
