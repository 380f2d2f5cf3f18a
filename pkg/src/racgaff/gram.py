"""The deformed Gram family M_t = Id + t N and its reflection representations.

For a right-angled presentation with 0/1 adjacency N (ones at the
∞-pairs), the symmetric family M_t deforms the t = -1 Gram matrix.
Each generator acts by the ⟨.,.⟩_t-reflection

    G_i = Id - 2 e_i (row_i M_t),

which is exact over Q for rational t, so every group relation holds with
zero tolerance and every signature statement is a theorem about the
specific rational sample, not a float estimate.

The exceptional set E is the set of real roots of det(M_t); it is
handled only through isolating rational intervals.  The deformation
interval of interest sits inside (-∞, -1] ∖ E.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .coxeter import CoxeterGraph, normal_form
from .errors import CertificationError, ConfigError
from .exact import (
    DualMatrix,
    QMatrix,
    QPoly,
    interval_distance,
    outer,
    poly_interpolate,
    rational,
    signature,
)

Q = Fraction

PF_TOL = 1e-13
PF_MAX_ITER = 100_000
EXCEPTIONAL_GUARD = Q(1, 10 ** 10)   # refuse to normalize closer than this to E


class GramFamily:
    """A presentation together with its 0/1 matrix N."""

    __slots__ = ("graph", "n")

    def __init__(self, graph):
        if not isinstance(graph, CoxeterGraph):
            raise ConfigError("GramFamily needs a CoxeterGraph")
        self.graph = graph
        self.n = graph.n_matrix()

    @classmethod
    def preset(cls, name):
        return cls(CoxeterGraph.preset(name))

    @property
    def k(self):
        return self.graph.k

    def __eq__(self, other):
        return isinstance(other, GramFamily) and self.graph == other.graph

    def __hash__(self):
        return hash(self.graph)

    def __repr__(self):
        return "GramFamily(%r)" % (self.graph,)


def pairing(m, v, w):
    """The bilinear form v^T m w, exact, on plain rational sequences."""
    mv = m.matvec(w)
    return sum(rational(a) * b for a, b in zip(v, mv))


# ---------------------------------------------------------------------------
# the family and its reflections
# ---------------------------------------------------------------------------

@lru_cache(maxsize=4096)
def gram_matrix(fam, t):
    """Exact M_t = Id + t N."""
    t = rational(t)
    return QMatrix.identity(fam.k) + t * fam.n


@lru_cache(maxsize=4096)
def _generators(fam, t):
    m = gram_matrix(fam, t)
    k = fam.k
    gens = []
    for i in range(k):
        e = [Q(0)] * k
        e[i] = Q(1)
        gens.append(QMatrix.identity(k) - 2 * outer(e, m[i]))
    return tuple(gens)


def reflection_matrix(fam, i, t):
    """The reflection G_i = Id - 2 e_i (row_i M_t), generators 1-indexed."""
    fam.graph._check_gen(i)
    return _generators(fam, rational(t))[i - 1]


@lru_cache(maxsize=200_000)
def represent(fam, word, t):
    """Exact product of generator matrices in word order."""
    t = rational(t)
    gens = _generators(fam, t)
    out = QMatrix.identity(fam.k)
    for g in word:
        fam.graph._check_gen(g)
        out = out @ gens[g - 1]
    return out


@lru_cache(maxsize=4096)
def _dual_generators(fam, t):
    t = rational(t)
    gens = _generators(fam, t)
    k = fam.k
    out = []
    for i in range(k):
        e = [Q(0)] * k
        e[i] = Q(1)
        # d/dτ (Id - 2 e_i row_i(Id + τN)) is constant in τ
        out.append(DualMatrix(gens[i], -2 * outer(e, fam.n[i])))
    return tuple(out)


@lru_cache(maxsize=200_000)
def represent_dual(fam, word, t):
    """(ρ_t(w), d/dτ ρ_τ(w)|_{τ=t}) as one exact dual-matrix product."""
    t = rational(t)
    gens = _dual_generators(fam, t)
    out = DualMatrix.identity(fam.k)
    for g in word:
        fam.graph._check_gen(g)
        out = out @ gens[g - 1]
    return out


@dataclass(frozen=True)
class DeformedRep:
    """Convenience bundle: one family frozen at one rational parameter."""

    fam: GramFamily
    t: Fraction
    m: QMatrix
    gens: tuple

    @classmethod
    def build(cls, fam, t):
        t = rational(t)
        return cls(fam, t, gram_matrix(fam, t), _generators(fam, t))

    def represent(self, word):
        return represent(self.fam, tuple(word), self.t)

    def pair(self, v, w):
        return pairing(self.m, v, w)


# ---------------------------------------------------------------------------
# exceptional set and signature profile
# ---------------------------------------------------------------------------

@lru_cache(maxsize=1024)
def det_polynomial(fam):
    """det(Id + tN) as an exact polynomial in t (Lagrange through k+1 points)."""
    pts = [(Q(j), gram_matrix(fam, Q(j)).det()) for j in range(fam.k + 1)]
    return poly_interpolate(pts)


def exceptional_intervals(fam, lo=None, hi=Q(-1)):
    """Isolating intervals for the roots of det(M_t) in (lo, hi].

    ``lo=None`` means "all the way down" (a Cauchy bound takes over).
    Degenerate pairs (r, r) are exact rational roots.  The left endpoint
    is checked separately so a root exactly at ``lo`` is not dropped.
    """
    p = det_polynomial(fam)
    out = []
    if lo is not None:
        lo = rational(lo)
        if p(lo) == 0:
            out.append((lo, lo))
    out.extend(p.isolate_roots(lo, rational(hi)))
    return out


def default_interval(fam):
    """The deformation interval: the segment of (-∞,-1] ∖ E next to -∞.

    Returned as ``(None, b)`` meaning (-∞, b); ``b`` is -1 itself when no
    exceptional value lies at or below -1, otherwise the left endpoint of
    the leftmost isolating interval (a safe rational stand-in for the
    root).
    """
    ivals = exceptional_intervals(fam)
    if not ivals:
        return (None, Q(-1))
    return (None, ivals[0][0])


def far_left_sample(fam):
    """A rational point guaranteed inside the default interval."""
    lo, hi = default_interval(fam)
    bound = det_polynomial(fam).cauchy_bound()
    return min(hi, -bound) - 1


def exceptional_distance(fam, t):
    """Exact rational lower bound for the distance from t to E.

    Zero iff det(M_t) = 0.  Intervals are refined to width 1e-12 first,
    so the bound is sharp enough for any 1e-10 proximity guard.
    """
    t = rational(t)
    p = det_polynomial(fam)
    if p(t) == 0:
        return Q(0)
    best = None
    width = Q(1, 10 ** 12)
    for ival in p.isolate_roots():
        a, b = p.refine(ival, width)
        d = interval_distance(t, (a - width, b + width))
        if best is None or d < best:
            best = d
    return best if best is not None else Q(10) ** 9


def assert_far_from_exceptional(fam, t, guard=EXCEPTIONAL_GUARD):
    d = exceptional_distance(fam, t)
    if d <= guard:
        raise CertificationError(
            "t = %s is too close to the exceptional set (distance bound %s <= %s)"
            % (t, d, guard))


def signature_at(fam, t):
    """Exact signature (n_plus, n_minus) of M_t; errors if t is exceptional."""
    t = rational(t)
    pos, neg, zero = signature(gram_matrix(fam, t))
    if zero:
        raise ConfigError("t = %s is an exceptional value (det M_t = 0)" % (t,))
    return (pos, neg)


def same_segment(fam, t, s):
    """Exact test: no exceptional value in the closed interval between t and s."""
    t, s = rational(t), rational(s)
    p = det_polynomial(fam)
    if p(t) == 0 or p(s) == 0:
        return False
    if t == s:
        return True
    a, b = (t, s) if t < s else (s, t)
    return p.count_roots(a, b) == 0


def require_same_segment(fam, t, s):
    if not same_segment(fam, t, s):
        between = exceptional_intervals(
            fam, lo=min(rational(t), rational(s)), hi=max(rational(t), rational(s)))
        pretty = ", ".join("[%s, %s]" % (a, b) for a, b in between) or "endpoint"
        raise ConfigError(
            "t = %s and s = %s do not lie in one component of the complement "
            "of the exceptional set (roots isolated in: %s)" % (t, s, pretty))


@dataclass(frozen=True)
class SignatureProfile:
    lo: Fraction
    hi: Fraction
    exceptional_intervals: tuple
    segments: tuple          # ((a, b), (n_plus, n_minus)) per open segment


def signature_profile(fam, lo, hi):
    """Root isolation on [lo, hi] plus the exact signature of each segment.

    Segments are the maximal open pieces of [lo, hi] between (refined,
    pairwise disjoint) isolating intervals; each is sampled at its
    rational midpoint and the signature certified by exact congruence.

    Raises
    ------
    ConfigError
        Unless lo < hi ≤ -1, the range the deformation cares about.
    """
    lo, hi = rational(lo), rational(hi)
    if not (lo < hi and hi <= -1):
        raise ConfigError("signature profile needs lo < hi <= -1, got [%s, %s]"
                          % (lo, hi))
    p = det_polynomial(fam)
    roots = exceptional_intervals(fam, lo=lo, hi=hi)
    width = min(Q(1, 1000), (hi - lo) / 1000)
    while True:
        roots = [p.refine(iv, width) for iv in roots]
        if all(roots[i][1] < roots[i + 1][0] for i in range(len(roots) - 1)):
            break
        width /= 2
    segments = []
    cursor = lo
    for a, b in roots:
        if cursor < a:
            segments.append(((cursor, a), _segment_signature(fam, cursor, a)))
        cursor = b
    if cursor < hi:
        segments.append(((cursor, hi), _segment_signature(fam, cursor, hi)))
    return SignatureProfile(lo, hi, tuple(roots), tuple(segments))


def _segment_signature(fam, a, b):
    pos, neg, zero = signature(gram_matrix(fam, (a + b) / 2))
    if zero:
        raise CertificationError(
            "segment sample (%s, %s) unexpectedly degenerate" % (a, b))
    return (pos, neg)


# ---------------------------------------------------------------------------
# Perron-Frobenius data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PerronData:
    lambda_pf: float
    v_pf: np.ndarray
    residual: float
    lambda_exact: Fraction | None = None
    v_exact: tuple | None = None


@lru_cache(maxsize=1024)
def perron(fam):
    """Perron-Frobenius eigenpair of N by shifted power iteration.

    The iteration runs on N + Id so bipartite adjacency spectra cannot
    oscillate; the residual is reported for N itself.  For a regular
    graph the constant vector is an exact eigenvector, recorded in
    ``v_exact``/``lambda_exact`` so downstream consumers can stay
    rational.

    Raises
    ------
    ConfigError
        For a reducible presentation (the eigenvector need not be
        positive there).
    CertificationError
        If the iteration stalls, positivity fails, or (for k ≥ 3) the
        certified eigenvalue drops below √2 - residual.
    """
    if not fam.graph.is_irreducible():
        raise ConfigError("Perron data needs an irreducible presentation "
                          "(the ∞-edge graph must be connected)")
    k = fam.k
    n = fam.n.to_float()
    shifted = n + np.eye(k)
    v = np.ones(k) / math.sqrt(k)
    for _ in range(PF_MAX_ITER):
        w = shifted @ v
        w /= float(np.linalg.norm(w))
        if float(np.max(np.abs(w - v))) < PF_TOL:
            v = w
            break
        v = w
    else:
        raise CertificationError("power iteration did not converge in %d steps"
                                 % PF_MAX_ITER)
    lam = float(v @ (n @ v))
    residual = float(np.linalg.norm(n @ v - lam * v))
    if float(np.min(v)) <= 0.0:
        raise CertificationError("Perron vector lost positivity (min %.3e)"
                                 % float(np.min(v)))
    if k >= 3 and lam < math.sqrt(2) - residual:
        raise CertificationError(
            "certified Perron eigenvalue %.15g below sqrt(2) - residual" % lam)
    lam_exact = v_exact = None
    if fam.graph.is_regular():
        lam_exact = Q(fam.graph.degrees()[0])
        v_exact = tuple([Q(1)] * k)
    return PerronData(lam, v, residual, lam_exact, v_exact)


# ---------------------------------------------------------------------------
# dual simplex vertices
# ---------------------------------------------------------------------------

def dual_vertices(fam, t):
    """The k columns of -M_t^{-1}; satisfy ⟨e'_i, e_j⟩_t = -δ_ij exactly."""
    t = rational(t)
    m = gram_matrix(fam, t)
    try:
        minv = m.inv()
    except ZeroDivisionError:
        raise ConfigError(
            "M_t is singular at t = %s: t is an exceptional value" % (t,)) from None
    neg = -minv
    return [neg.col(j) for j in range(fam.k)]


def normal_form_matrix(fam, word, t):
    """represent() after canonicalizing the word (hits the cache harder)."""
    return represent(fam, normal_form(fam.graph, word), rational(t))
