"""Normalization to the standard form and the induced affine actions.

For t in a fixed nondegenerate segment the deformed form M_t is congruent
to J = diag(1,...,1,-1,...,-1) by a smooth family iota_t built from the
(t-independent) eigenbasis of N.  Conjugating the reflection
representation by iota_t lands it in O(p,q+1); differentiating the
conjugated family in t produces a cocycle u_t with values in o(p,q+1),
and with it the affine action

    w . Y  =  Ad(rep(w)) Y + u(w)

on the Lie algebra, plus the right-and-left action g -> rep_s(w) g
rep_t(w)^{-1} on the group itself.

The derivative of the exact representation is taken with dual numbers
(no finite differences); only the final conjugation by iota_t is float.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .coxeter import normal_form
from .errors import CertificationError, ConfigError
from .exact import rational, symmetric_eigen, to_longdouble
from .gram import (
    GramFamily,
    assert_far_from_exceptional,
    gram_matrix,
    represent,
    represent_dual,
    signature_at,
)

IOTA_CONVENTION = "P^1/2 + Q^1/2"

_EIGEN_GUARD = 1e-10          # min |1 + t nu_i| before building is refused
_CONGRUENCE_TOL = 1e-10       # |iota^T J iota - M_t| entrywise
_INVERSE_TOL = 1e-11          # |iota iota_inv - Id| entrywise
_LIE_GUARD = 1e-6             # residual allowed on cocycle values, relative
                              # to the largest term assembled (catches wrong
                              # formulas, tolerates float noise on huge words)


@lru_cache(maxsize=None)
def _n_eigen(fam):
    """Eigendecomposition of N in extended precision, shared across t.

    The congruence error of iota enters every cocycle multiplied by the
    squared word norm, so the eigenbasis is computed on longdouble
    (64-bit mantissa on x86); three extra digits here buy three extra
    digits on every residual downstream.
    """
    n = fam.graph.n_matrix().to_float().astype(np.longdouble)
    return symmetric_eigen(n)


def _q_to_ld(mat):
    """QMatrix -> longdouble ndarray, entrywise exact to 64-bit mantissa."""
    out = np.empty((len(mat.rows), len(mat.rows[0])), dtype=np.longdouble)
    for i, row in enumerate(mat.rows):
        for j, x in enumerate(row):
            out[i, j] = to_longdouble(x)
    return out


@dataclass(frozen=True, eq=False)
class Normalizer:
    """The congruence iota with iota^T J iota = M_t, and its t-derivative.

    Rows of iota are (|1 + t nu_i|^{1/2}) v_i^T with the eigendirections
    permuted so every positive sign comes first; the permutation is
    constant on the whole nondegenerate segment, which is what makes the
    family smooth in t.

    The public matrices are float64; the ``*_hi`` copies are the
    longdouble originals, consumed by the cocycle assembly where the
    extra precision is load-bearing.
    """

    fam: GramFamily
    t: Fraction
    iota: np.ndarray
    iota_inv: np.ndarray
    iota_dot: np.ndarray
    signature: tuple
    iota_hi: np.ndarray
    iota_inv_hi: np.ndarray
    iota_dot_hi: np.ndarray

    @property
    def j(self):
        pos, neg = self.signature
        return np.diag([1.0] * pos + [-1.0] * neg)

    @property
    def form(self):
        from .hpq import StandardForm

        pos, neg = self.signature
        if neg == 0:
            raise ConfigError(
                "form at t = %s is positive definite: no H^{p,q} geometry" % self.t)
        return StandardForm(pos, neg - 1)

    def __repr__(self):
        return "Normalizer(%r, t=%s, signature=%s)" % (
            self.fam.graph, self.t, self.signature)


def build_normalizer(fam, t):
    """Construct the congruence iota_t = P (1 + t nu)^{1/2} V^T.

    Parameters
    ----------
    fam : GramFamily
    t : rational, away from the exceptional set

    Raises
    ------
    CertificationError
        If t is too close to the exceptional set (exactly, or through an
        eigenvalue 1 + t nu_i smaller than 1e-10 in magnitude), or if the
        constructed matrix fails its own congruence checks.
    """
    t = rational(t)
    assert_far_from_exceptional(fam, t)
    nu, vecs = _n_eigen(fam)
    tf = to_longdouble(t)
    s = 1.0 + tf * nu
    if float(np.min(np.abs(s))) < _EIGEN_GUARD:
        raise CertificationError(
            "t = %s too close to exceptional set: |1 + t nu| = %.3e"
            % (t, float(np.min(np.abs(s)))))
    order = [i for i in range(fam.k) if s[i] > 0] + \
            [i for i in range(fam.k) if s[i] < 0]
    signature = (sum(1 for x in s if x > 0), sum(1 for x in s if x < 0))
    if signature != signature_at(fam, t):
        raise CertificationError(
            "eigenvalue signs disagree with the exact signature at t = %s" % t)

    sq = np.sqrt(np.abs(s[order]))
    rows = vecs.T[order]
    iota = sq[:, None] * rows
    iota_inv = vecs[:, order] / sq[None, :]
    iota_dot = (np.sign(s[order]) * nu[order] / (2.0 * sq))[:, None] * rows

    j = np.diag([1.0] * signature[0] + [-1.0] * signature[1])
    mt = _q_to_ld(gram_matrix(fam, t))
    if float(np.max(np.abs(iota.T @ j @ iota - mt))) > _CONGRUENCE_TOL:
        raise CertificationError("iota^T J iota failed to reproduce M_t")
    if float(np.max(np.abs(iota @ iota_inv - np.eye(fam.k)))) > _INVERSE_TOL:
        raise CertificationError("iota inverse failed its residual check")
    return Normalizer(fam=fam, t=t,
                      iota=iota.astype(float),
                      iota_inv=iota_inv.astype(float),
                      iota_dot=iota_dot.astype(float),
                      signature=signature,
                      iota_hi=iota, iota_inv_hi=iota_inv, iota_dot_hi=iota_dot)


def conjugated_rep(fam, norm, w):
    """The normalized representation iota rho_t(w) iota^{-1} in O(p,q+1).

    rho_t(w) is exact; the sandwich is taken in extended precision and
    rounded once at the end, so the result is a correctly-rounded float64
    matrix up to the accuracy of iota itself.
    """
    return _conjugated_hi(fam, norm, w).astype(float)


def _conjugated_hi(fam, norm, w):
    w = tuple(w)
    if not w:
        return np.eye(fam.k, dtype=np.longdouble)
    r = represent(fam, w, norm.t)
    return norm.iota_hi @ _q_to_ld(r) @ norm.iota_inv_hi


def _assemble_u(norm, mid, b, binv, k_mat):
    inner = norm.iota_hi @ mid @ norm.iota_inv_hi
    outer = b @ k_mat @ binv
    u = k_mat + inner - outer
    j = norm.j
    resid = float(np.max(np.abs(u.T @ j + j @ u)))
    scale = max(1.0, float(np.max(np.abs(u))),
                float(np.max(np.abs(inner))), float(np.max(np.abs(outer))))
    if resid > _LIE_GUARD * scale:
        raise CertificationError(
            "cocycle value left o(p,q+1): residual %.3e at scale %.3e"
            % (resid, scale))
    return u


def cocycle(fam, norm, w):
    """u(w) = (d/dtau rho*_tau(w))|_t rho*_t(w)^{-1}, a value in o(p,q+1).

    The derivative of rho_tau(w) is exact (dual numbers), as is the
    inverse of rho_t(w); iota and iota_dot contribute the correction
    terms K - Ad(rho*(w)) K with K = iota_dot iota^{-1}.  All float work
    happens in extended precision with one rounding at the end.  Use a
    CocycleTable when evaluating many words at the same t.
    """
    nf = normal_form(fam.graph, tuple(w))
    if not nf:
        return np.zeros((fam.k, fam.k))
    rd = represent_dual(fam, nf, norm.t)
    mid = _q_to_ld(rd.dot @ rd.val.inv())
    b = _conjugated_hi(fam, norm, nf)
    binv = _conjugated_hi(fam, norm, nf[::-1])
    k_mat = norm.iota_dot_hi @ norm.iota_inv_hi
    return _assemble_u(norm, mid, b, binv, k_mat).astype(float)


class CocycleTable:
    """Cocycle values and normalized representation matrices, cached.

    Words are keyed by normal form, so the table never stores two copies
    of the same group element.  Build once, then read from any number of
    threads; nothing here mutates after a lookup has filled its slot.
    """

    def __init__(self, fam, norm):
        if norm.fam != fam:
            raise ConfigError("normalizer was built for a different graph")
        self.fam = fam
        self.norm = norm
        self.k_hi = norm.iota_dot_hi @ norm.iota_inv_hi
        self._rep = {}
        self._rep_hi = {}
        self._u = {}

    def _hi(self, nf):
        out = self._rep_hi.get(nf)
        if out is None:
            out = _conjugated_hi(self.fam, self.norm, nf)
            self._rep_hi[nf] = out
        return out

    def rep(self, w):
        nf = normal_form(self.fam.graph, tuple(w))
        out = self._rep.get(nf)
        if out is None:
            out = self._hi(nf).astype(float)
            self._rep[nf] = out
        return out

    def u(self, w):
        nf = normal_form(self.fam.graph, tuple(w))
        out = self._u.get(nf)
        if out is None:
            if not nf:
                out = np.zeros((self.fam.k, self.fam.k))
            else:
                rd = represent_dual(self.fam, nf, self.norm.t)
                mid = _q_to_ld(rd.dot @ rd.val.inv())
                out = _assemble_u(self.norm, mid, self._hi(nf),
                                  self._hi(nf[::-1]), self.k_hi).astype(float)
            self._u[nf] = out
        return out

    def to_json(self):
        """Exportable dict: normal-form strings to row-major matrices."""
        entries = {}
        for nf in sorted(self._u, key=lambda word: (len(word), word)):
            mat = self._u[nf]
            entries[".".join(str(i) for i in nf)] = [
                float(x) for row in mat for x in row]
        return {
            "t": str(self.norm.t),
            "signature": list(self.norm.signature),
            "graph": self.fam.graph.digest(),
            "iota_convention": IOTA_CONVENTION,
            "entries": entries,
        }


def affine_act(rep, coc, w, y):
    """The affine action w . y = Ad(rho*(w)) y + u(w) on o(p,q+1)."""
    if rep.t != coc.norm.t or rep.fam != coc.fam:
        raise ConfigError("normalizer and cocycle table disagree about (graph, t)")
    w = tuple(w)
    b = coc.rep(w)
    binv = coc.rep(w[::-1])
    return b @ np.asarray(y, dtype=float) @ binv + coc.u(w)


def killing_form_signature(p, q):
    """Signature (p', q') of the trace form on o(p,q+1).

    p' = p(q+1) counts the boost directions, q' = (p^2+q^2-p+q)/2 the
    compact ones; together they exhaust dim o(n) = n(n-1)/2 for
    n = p+q+1.
    """
    if p < 1 or q < 0:
        raise ConfigError("need p >= 1 and q >= 0")
    return (p * (q + 1), (p * p + q * q - p + q) // 2)


def right_left_act(rep_t, rep_s, w, g):
    """The right-and-left action g -> rho*_s(w) g rho*_t(w)^{-1}.

    Both normalizers must target the same O(p,q+1); the inverse on the
    right is taken through the reversed word, hence exactly.
    """
    if rep_t.fam != rep_s.fam:
        raise ConfigError("the two representations belong to different graphs")
    if rep_t.signature != rep_s.signature:
        raise ConfigError(
            "signature mismatch between t = %s (%s) and s = %s (%s)"
            % (rep_t.t, rep_t.signature, rep_s.t, rep_s.signature))
    w = tuple(w)
    gs = conjugated_rep(rep_s.fam, rep_s, w)
    gt_inv = conjugated_rep(rep_t.fam, rep_t, w[::-1])
    return gs @ np.asarray(g, dtype=float) @ gt_inv
