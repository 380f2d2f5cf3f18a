"""Exact linear and polynomial algebra over the rationals.

Everything downstream that certifies a sign, a signature, or a root
location runs through this module, so nothing here touches floating
point except :func:`symmetric_eigen`, the one deliberately numerical
routine, and that one certifies its own output a posteriori.

Conventions
-----------
* Scalars are :class:`fractions.Fraction`.  :func:`rational` coerces
  ints, Fractions, and strings like ``"-19/10"``; it refuses floats,
  because a float reaching the exact layer is always a bug upstream.
* Matrices (:class:`QMatrix`) are immutable and hashable.
* Polynomials (:class:`QPoly`) store ascending coefficients, so
  ``QPoly([1, 0, -3, 2])`` is 1 - 3t^2 + 2t^3.
* Root isolation returns rational intervals, never floats.  An interval
  ``(a, a)`` with equal endpoints marks an exact rational root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CertificationError

Q = Fraction


def rational(x):
    """Coerce ``x`` to an exact Fraction.

    Accepts Fractions, ints, and strings such as ``"-19/10"``.  Floats
    are rejected on purpose: ``Fraction(0.1)`` would silently encode the
    binary rounding error as if it were data.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("refusing to build an exact rational from a float: %r" % (x,))
    return Q(x)


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

class QMatrix:
    """Immutable dense matrix over Q.

    Deliberately thin: every caller keeps the dimension below ten, so
    O(n^3) fraction arithmetic with no pivoting cleverness is plenty.
    Supports ``@``, ``+``, ``-``, scalar ``*``, ``.T``, ``det``, ``inv``.
    """

    __slots__ = ("rows",)

    def __init__(self, rows):
        rows = tuple(tuple(rational(v) for v in row) for row in rows)
        if rows and any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("ragged rows")
        self.rows = rows

    @classmethod
    def identity(cls, n):
        return cls([[Q(1) if i == j else Q(0) for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, n, m=None):
        m = n if m is None else m
        return cls([[Q(0)] * m for _ in range(n)])

    @classmethod
    def diagonal(cls, entries):
        entries = list(entries)
        n = len(entries)
        return cls([[rational(entries[i]) if i == j else Q(0) for j in range(n)]
                    for i in range(n)])

    @classmethod
    def column(cls, entries):
        return cls([[v] for v in entries])

    @property
    def shape(self):
        n = len(self.rows)
        return (n, len(self.rows[0]) if n else 0)

    @property
    def T(self):
        return QMatrix(zip(*self.rows))

    def __getitem__(self, key):
        if isinstance(key, tuple):
            i, j = key
            return self.rows[i][j]
        return self.rows[key]

    def col(self, j):
        return tuple(row[j] for row in self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __eq__(self, other):
        return isinstance(other, QMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        body = "; ".join(" ".join(str(v) for v in row) for row in self.rows)
        return "QMatrix[%s]" % body

    def __add__(self, other):
        return QMatrix(tuple(a + b for a, b in zip(ra, rb))
                       for ra, rb in zip(self.rows, other.rows))

    def __sub__(self, other):
        return QMatrix(tuple(a - b for a, b in zip(ra, rb))
                       for ra, rb in zip(self.rows, other.rows))

    def __neg__(self):
        return QMatrix(tuple(-a for a in row) for row in self.rows)

    def __mul__(self, scalar):
        s = rational(scalar)
        return QMatrix(tuple(s * a for a in row) for row in self.rows)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, DualMatrix):
            return DualMatrix(self @ other.val, self @ other.dot)
        cols = other.T.rows
        return QMatrix(tuple(sum(a * b for a, b in zip(row, c)) for c in cols)
                       for row in self.rows)

    def matvec(self, v):
        """Matrix times a plain tuple/list of rationals -> tuple."""
        v = tuple(rational(x) for x in v)
        return tuple(sum(a * b for a, b in zip(row, v)) for row in self.rows)

    def trace(self):
        return sum(self.rows[i][i] for i in range(len(self.rows)))

    def is_symmetric(self):
        return self.rows == self.T.rows

    def det(self):
        n, m = self.shape
        if n != m:
            raise ValueError("determinant of a non-square matrix")
        a = [list(row) for row in self.rows]
        out = Q(1)
        for col in range(n):
            piv = next((r for r in range(col, n) if a[r][col] != 0), None)
            if piv is None:
                return Q(0)
            if piv != col:
                a[col], a[piv] = a[piv], a[col]
                out = -out
            out *= a[col][col]
            inv = 1 / a[col][col]
            for r in range(col + 1, n):
                f = a[r][col] * inv
                if f:
                    for c in range(col, n):
                        a[r][c] -= f * a[col][c]
        return out

    def inv(self):
        n, m = self.shape
        if n != m:
            raise ValueError("inverse of a non-square matrix")
        a = [list(row) + [Q(1) if i == j else Q(0) for j in range(n)]
             for i, row in enumerate(self.rows)]
        for col in range(n):
            piv = next((r for r in range(col, n) if a[r][col] != 0), None)
            if piv is None:
                raise ZeroDivisionError("matrix is singular")
            if piv != col:
                a[col], a[piv] = a[piv], a[col]
            d = a[col][col]
            a[col] = [v / d for v in a[col]]
            for r in range(n):
                if r != col and a[r][col]:
                    f = a[r][col]
                    a[r] = [v - f * p for v, p in zip(a[r], a[col])]
        return QMatrix(tuple(row[n:]) for row in a)

    def to_float(self):
        return np.array([[float(v) for v in row] for row in self.rows], dtype=float)


def outer(u, v):
    """Rank-one matrix u v^T from two sequences."""
    u = [rational(x) for x in u]
    v = [rational(x) for x in v]
    return QMatrix([[a * b for b in v] for a in u])


def from_float(arr, limit=10 ** 12):
    """Turn a float array into a QMatrix of limited-denominator rationals.

    Only for building *test* fixtures and never for certified paths; the
    denominator limit is arbitrary.
    """
    return QMatrix([[Q(float(x)).limit_denominator(limit) for x in row]
                    for row in np.atleast_2d(arr)])


def to_longdouble(x):
    """Rational -> longdouble through a double-double split.

    numpy routes big Python ints through float64, so a direct
    longdouble(numerator)/longdouble(denominator) would quietly round to
    53 bits; converting the leading float and the exact remainder
    separately keeps the full 64-bit mantissa.
    """
    x = rational(x)
    hi = float(x)
    lo = float(x - Q(hi))
    return np.longdouble(hi) + np.longdouble(lo)


# ---------------------------------------------------------------------------
# dual numbers: exact forward-mode derivatives
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DualQ:
    """a + b*eps with eps^2 = 0, over Q.

    One exact derivative for free: evaluate any rational expression at
    ``DualQ.var(t)`` and read the derivative off ``.b``.
    """

    a: Fraction
    b: Fraction = Q(0)

    @classmethod
    def var(cls, value):
        return cls(rational(value), Q(1))

    def __add__(self, other):
        other = _dual(other)
        return DualQ(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other):
        other = _dual(other)
        return DualQ(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        return _dual(other) - self

    def __neg__(self):
        return DualQ(-self.a, -self.b)

    def __mul__(self, other):
        other = _dual(other)
        return DualQ(self.a * other.a, self.a * other.b + self.b * other.a)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _dual(other)
        if other.a == 0:
            raise ZeroDivisionError("dual number with zero real part is not a unit")
        inv = 1 / other.a
        return DualQ(self.a * inv, (self.b * other.a - self.a * other.b) * inv * inv)

    def __rtruediv__(self, other):
        return _dual(other) / self

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("dual powers only for non-negative integer exponents")
        out = DualQ(Q(1))
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out


def _dual(x):
    return x if isinstance(x, DualQ) else DualQ(rational(x))


class DualMatrix:
    """Pair (value, derivative): a matrix over Q[eps]/(eps^2).

    Multiplication carries the product rule, and
    ``(V + eps D)^-1 = V^-1 - eps V^-1 D V^-1``, so a product of dual
    reflection matrices yields the exact t-derivative of the word.
    """

    __slots__ = ("val", "dot")

    def __init__(self, val, dot=None):
        self.val = val
        self.dot = QMatrix.zeros(*val.shape) if dot is None else dot
        if self.val.shape != self.dot.shape:
            raise ValueError("value/derivative shape mismatch")

    @classmethod
    def identity(cls, n):
        return cls(QMatrix.identity(n))

    def __matmul__(self, other):
        if isinstance(other, QMatrix):
            other = DualMatrix(other)
        return DualMatrix(self.val @ other.val,
                          self.val @ other.dot + self.dot @ other.val)

    def inv(self):
        vi = self.val.inv()
        return DualMatrix(vi, -(vi @ self.dot @ vi))

    def __eq__(self, other):
        return (isinstance(other, DualMatrix)
                and self.val == other.val and self.dot == other.dot)

    def __hash__(self):
        return hash((self.val, self.dot))


# ---------------------------------------------------------------------------
# polynomials, Sturm chains, root isolation
# ---------------------------------------------------------------------------

class QPoly:
    """Univariate polynomial over Q, ascending coefficients."""

    __slots__ = ("coeffs", "_chain")

    def __init__(self, coeffs=()):
        cs = [rational(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)
        self._chain = None

    @property
    def degree(self):
        return len(self.coeffs) - 1   # -1 for the zero polynomial

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        return isinstance(other, QPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        if not self.coeffs:
            return "QPoly(0)"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            elif i == 1:
                terms.append("%s*t" % c)
            else:
                terms.append("%s*t^%d" % (c, i))
        return "QPoly(%s)" % " + ".join(terms)

    def __call__(self, x):
        # Horner; works verbatim over any commutative ring containing Q,
        # DualQ included.
        out = x * 0
        for c in reversed(self.coeffs):
            out = out * x + c
        return out

    def deriv(self):
        return QPoly(i * c for i, c in enumerate(self.coeffs) if i > 0)

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return QPoly(tuple(x + y for x, y in zip(a, b)) + a[len(b):])

    def __neg__(self):
        return QPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, QPoly):
            if not self or not other:
                return QPoly()
            out = [Q(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                if a:
                    for j, b in enumerate(other.coeffs):
                        out[i + j] += a * b
            return QPoly(out)
        s = rational(other)
        return QPoly(s * c for c in self.coeffs)

    __rmul__ = __mul__

    def __divmod__(self, other):
        if not other:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        den = other.coeffs
        quot = [Q(0)] * max(0, len(rem) - len(den) + 1)
        inv_lead = 1 / den[-1]
        for i in range(len(rem) - len(den), -1, -1):
            f = rem[i + len(den) - 1] * inv_lead
            if f:
                quot[i] = f
                for j, d in enumerate(den):
                    rem[i + j] -= f * d
        return QPoly(quot), QPoly(rem[:len(den) - 1])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def monic(self):
        if not self:
            return self
        return self * (1 / self.coeffs[-1])

    @staticmethod
    def gcd(p, q):
        while q:
            p, q = q, p % q
        return p.monic()

    def squarefree(self):
        """self with repeated roots collapsed to simple ones."""
        if self.degree <= 0:
            return self
        return (self // QPoly.gcd(self, self.deriv())).monic()

    # -- Sturm machinery ---------------------------------------------------

    def _sturm(self):
        if self._chain is None:
            p = self.squarefree()
            chain = [p, p.deriv()]
            while chain[-1]:
                chain.append(-(chain[-2] % chain[-1]))
            chain.pop()
            self._chain = tuple(c for c in chain if c)
        return self._chain

    def variations(self, x):
        """Sign variations of the Sturm chain at x, zeros skipped."""
        x = rational(x)
        signs = []
        for c in self._sturm():
            v = c(x)
            if v:
                signs.append(1 if v > 0 else -1)
        return sum(1 for a, b in zip(signs, signs[1:]) if a != b)

    def count_roots(self, a, b):
        """Number of distinct real roots in the half-open interval (a, b]."""
        a, b = rational(a), rational(b)
        if a >= b:
            raise ValueError("need a < b")
        return self.variations(a) - self.variations(b)

    def cauchy_bound(self):
        """B with every real root in (-B, B)."""
        if self.degree < 0:
            raise ValueError("zero polynomial")
        lead = abs(self.coeffs[-1])
        return 1 + max((abs(c) for c in self.coeffs[:-1]), default=Q(0)) / lead

    def isolate_roots(self, lo=None, hi=None):
        """Disjoint rational isolating intervals for the distinct real roots.

        Returns a sorted list of pairs ``(a, b)`` of Fractions.  A pair
        with ``a == b`` is an exact rational root; otherwise the interval
        is half-open ``(a, b]`` and contains exactly one root.  With no
        arguments the whole real line is covered (via a Cauchy bound);
        passing ``lo``/``hi`` restricts to roots in ``(lo, hi]``.
        """
        if self.degree < 0:
            raise ValueError("zero polynomial has every point as a root")
        if self.degree == 0:
            return []
        p = self.squarefree()
        bound = p.cauchy_bound()
        a = -bound if lo is None else rational(lo)
        b = bound if hi is None else rational(hi)
        if a >= b:
            return []
        out = []
        stack = [(a, b)]
        while stack:
            a, b = stack.pop()
            n = p.count_roots(a, b)
            if n == 0:
                continue
            if n == 1:
                if p(b) == 0:
                    out.append((b, b))
                else:
                    out.append((a, b))
                continue
            mid = (a + b) / 2
            stack.append((a, mid))
            stack.append((mid, b))
        out.sort()
        return out

    def refine(self, interval, max_width):
        """Shrink an isolating interval by Sturm bisection.

        Exact intervals ``(r, r)`` pass through unchanged.  The returned
        half-open interval still contains the root and has width at most
        ``max_width``.
        """
        a, b = rational(interval[0]), rational(interval[1])
        max_width = rational(max_width)
        if a == b:
            return (a, b)
        p = self.squarefree()
        while b - a > max_width:
            mid = (a + b) / 2
            if p.count_roots(a, mid) == 1:
                b = mid
            else:
                a = mid
        return (a, b)


def poly_interpolate(points):
    """The unique polynomial through exact ``(x, y)`` pairs (Lagrange)."""
    pts = [(rational(x), rational(y)) for x, y in points]
    xs = [x for x, _ in pts]
    if len(set(xs)) != len(xs):
        raise ValueError("interpolation nodes must be distinct")
    total = QPoly()
    for i, (xi, yi) in enumerate(pts):
        term = QPoly([Q(1)])
        den = Q(1)
        for j, (xj, _) in enumerate(pts):
            if j != i:
                term = term * QPoly([-xj, Q(1)])
                den *= xi - xj
        total = total + (yi / den) * term
    return total


def interval_distance(t, interval):
    """Exact distance from the rational t to a closed interval [a, b]."""
    t = rational(t)
    a, b = rational(interval[0]), rational(interval[1])
    if t < a:
        return a - t
    if t > b:
        return t - b
    return Q(0)


# ---------------------------------------------------------------------------
# signatures
# ---------------------------------------------------------------------------

def signature(mat):
    """Inertia (n_plus, n_minus, n_zero) of a symmetric rational matrix.

    Symmetric Gaussian elimination: every step is a congruence, so by
    Sylvester's law of inertia the diagonal signs are exact.  The
    zero-diagonal case is handled by the usual char-0 trick of adding a
    row/column pair to manufacture a nonzero pivot.
    """
    if not mat.is_symmetric():
        raise ValueError("signature needs a symmetric matrix")
    n = mat.shape[0]
    a = [list(row) for row in mat.rows]
    pos = neg = zero = 0
    start = 0
    while start < n:
        piv = next((i for i in range(start, n) if a[i][i] != 0), None)
        if piv is None:
            pair = next(((i, j) for i in range(start, n)
                         for j in range(i + 1, n) if a[i][j] != 0), None)
            if pair is None:
                zero += n - start
                break
            i, j = pair
            for c in range(start, n):
                a[i][c] += a[j][c]
            for r in range(start, n):
                a[r][i] += a[r][j]
            piv = i
        if piv != start:
            a[piv], a[start] = a[start], a[piv]
            for r in range(start, n):
                a[r][piv], a[r][start] = a[r][start], a[r][piv]
        d = a[start][start]
        if d > 0:
            pos += 1
        else:
            neg += 1
        mult = [a[r][start] / d for r in range(n)]
        for r in range(start + 1, n):
            if mult[r]:
                for c in range(start, n):
                    a[r][c] -= mult[r] * a[start][c]
        for c in range(start + 1, n):
            if mult[c]:
                for r in range(start, n):
                    a[r][c] -= mult[c] * a[r][start]
        start += 1
    return (pos, neg, zero)


# ---------------------------------------------------------------------------
# the one numerical routine: deterministic cyclic Jacobi
# ---------------------------------------------------------------------------

_JACOBI_SWEEPS = 100
_JACOBI_TOL = 1e-14


def symmetric_eigen(mat):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Deterministic by construction: rotations are applied in fixed
    row-major (p, q) order, eigenvalues are returned in descending
    order, and each eigenvector's sign is pinned by making its
    largest-magnitude entry positive.  Runs in plain loops; every input
    here is at most 8x8.

    Parameters
    ----------
    mat : QMatrix or array_like
        Symmetric matrix.  A float64 or longdouble ndarray is processed
        in its own precision; any other input goes through float64.

    Returns
    -------
    evals : (n,) ndarray, descending
    evecs : (n, n) ndarray, column i pairs with ``evals[i]``

    Raises
    ------
    CertificationError
        If the off-diagonal mass has not vanished after 100 sweeps, or
        the residual check on ``A V - V diag`` fails afterwards.
    """
    if isinstance(mat, QMatrix):
        a = mat.to_float()
    else:
        a = np.array(mat)
        if a.dtype not in (np.dtype(np.float64), np.dtype(np.longdouble)):
            a = a.astype(float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("need a square matrix")
    if not np.allclose(a, a.T, atol=1e-12):
        raise ValueError("need a symmetric matrix")
    a = 0.5 * (a + a.T)
    a0 = a.copy()
    n = a.shape[0]
    v = np.eye(n, dtype=a.dtype)
    scale = max(1.0, float(np.linalg.norm(a0)))
    # sweep until the off-diagonal is at rounding level for the dtype
    # (float64 input reproduces the old 1e-14-ish threshold; longdouble
    # input converges three more digits)
    tol = max(_JACOBI_TOL * float(np.finfo(a.dtype).eps) / 2.2e-16, 1e-18) * scale

    def offdiag():
        if n < 2:
            return 0.0
        return max(abs(a[p, q]) for p in range(n - 1) for q in range(p + 1, n))

    for _ in range(_JACOBI_SWEEPS):
        if offdiag() <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= tol:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                sgn = 1.0 if theta >= 0 else -1.0
                t = sgn / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise CertificationError(
            "jacobi did not converge in %d sweeps (off-diagonal %.3e)"
            % (_JACOBI_SWEEPS, offdiag()))

    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = v[:, order]
    for j in range(n):
        i = int(np.argmax(np.abs(v[:, j])))
        if v[i, j] < 0:
            v[:, j] = -v[:, j]

    resid = float(np.max(np.abs(a0 @ v - v * w)))
    ortho = float(np.max(np.abs(v.T @ v - np.eye(n))))
    if resid > 1e-12 * scale or ortho > 1e-12:
        raise CertificationError(
            "jacobi output failed certification (residual %.3e, orthogonality %.3e)"
            % (resid, ortho))
    return w, v
