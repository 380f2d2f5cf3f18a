"""Contraction experiments on deformation orbits.

Between two parameters t, s in one signature segment the deformation
family carries a transport map

    f_{t,s} = iota_s . Phi_{t,s} . iota_t^{-1},    Phi_{t,s}|_chamber = M_s^{-1} M_t,

equivariant from rho*_t to rho*_s, whose s-derivative at s = t is a
vector field Z_t along the orbit of the base point.  This module builds
both, samples orbits, and estimates the contraction data behind proper
affine actions: spacelike Lipschitz ratios of f_{t,s}, first-variation
quotients of Z_t, quadric expansion margins, eigenvalue-gauge slopes,
and the Banach fixed-point projection.

Everything here is an experiment with a verdict, never a proof claim:
reports carry the sampled witnesses and fitted constants that reproduce
them.  The spacelike/other split of every pair that enters a statistic
is decided in exact integer arithmetic (denominators cleared), not by a
float sign; only the distances themselves are floating point.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from random import Random

import numpy as np

from .chamber import reduce_to_chamber
from .coxeter import enumerate_ball, normal_form, random_word
from .errors import CertificationError, ConfigError
from .exact import rational, to_longdouble
from .gram import gram_matrix, pairing, perron, represent, \
    require_same_segment, signature_at
from .hpq import LIGHTLIKE_BAND, StandardForm, eig_log_moduli, \
    hilbert_distance_ball, is_proximal, killing_value, mu1, normalize_lift, \
    pseudo_distance, tangent_projection
from .normalize import CocycleTable, affine_act, build_normalizer, conjugated_rep

Q = Fraction

_ARGMIN_TIE = 1e-9      # relative tie band when reading a float argmin set
_LAMBDA_TOL = 1e-6      # pointwise slack for the eigenvalue-gauge inequality
_QUADRIC_TOL = 1e-10
# additive float-noise allowance, per unit of squared lift size, on the
# per-step displacement contraction (the distance measurement degrades
# like eps * ||x||^2 as iterates sink toward the ball boundary)
_BANACH_SLACK = 1e-6


def _pmap(fn, items, workers=1):
    """Deterministic map: results in input order whatever the pool does."""
    items = list(items)
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# per-parameter session
# ---------------------------------------------------------------------------

class _Session:
    """Everything the experiments reuse at one (family, parameter)."""

    def __init__(self, fam, t):
        self.fam = fam
        self.t = t
        self.norm = build_normalizer(fam, t)
        self.table = CocycleTable(fam, self.norm)
        self.form = self.norm.form
        self.w_mat = _chamber_field(self.norm)


def _chamber_field(norm):
    """W = K - iota M_t^{-1} N iota^{-1}, the value of the field on the chamber."""
    fam, t = norm.fam, norm.t
    minv_n = (gram_matrix(fam, t).inv() @ fam.n).to_float()
    return (norm.iota_dot @ norm.iota_inv
            - norm.iota @ minv_n @ norm.iota_inv)


@lru_cache(maxsize=64)
def _session(fam, t):
    return _Session(fam, t)


@lru_cache(maxsize=64)
def _transition_exact(fam, t, s):
    """M_s^{-1} M_t, the chamber piece of the transport."""
    return gram_matrix(fam, s).inv() @ gram_matrix(fam, t)


@lru_cache(maxsize=64)
def _transition(fam, t, s):
    """Longdouble M_s^{-1} M_t."""
    return _q_ld(_transition_exact(fam, t, s))


def _q_ld(mat):
    return np.array([[to_longdouble(x) for x in row] for row in mat.rows])


# ---------------------------------------------------------------------------
# the transport map and its derivative field
# ---------------------------------------------------------------------------

def equivariant_map(fam, t, s, x, max_steps=None):
    """Transport the point x from the t-geometry to the s-geometry.

    Pull x back through iota_t, reduce it to the chamber (recovering the
    group element that carried the chamber representative there), apply
    M_s^{-1} M_t, push forward by the same group element at s, and land
    through iota_s.  For s = t this is the identity on the orbit domain;
    in general it intertwines rho*_t with rho*_s.

    Parameters
    ----------
    x : array_like
        A timelike lift; only its projective class matters.
    max_steps : int, optional
        Reduction budget, defaulting to the chamber module's.

    Raises
    ------
    ReductionBudgetError
        If the pullback cannot be walked into the chamber within budget
        (point outside the orbit domain, or budget too small).
    """
    t, s = rational(t), rational(s)
    require_same_segment(fam, t, s)
    st, ss = _session(fam, t), _session(fam, s)
    x_hat = normalize_lift(st.form, x)
    # the walk back to the chamber is the ill-conditioned part (condition
    # number ~ ||rho(w)||^2), so it runs in extended precision throughout;
    # the result is rounded once, at the end
    v = st.norm.iota_inv_hi @ x_hat.astype(np.longdouble)
    word, coords = reduce_to_chamber(fam, t, v, max_steps)
    y = _q_ld(represent(fam, word, s)) @ (
        _transition(fam, t, s) @ np.array(coords))
    return normalize_lift(ss.form, (ss.norm.iota_hi @ y).astype(float))


def transport_vector(fam, t, s, v, max_steps=None):
    """Exact-rational transport: the chart-level map behind
    :func:`equivariant_map`.

    Takes and returns chart vectors in R^k (coordinates on the t- and
    s-quadrics respectively) instead of normalized lifts, so the walk,
    the chamber piece and the push-forward all run in exact arithmetic.
    This is the reference the float entry point is measured against:
    evaluating at a float point is ill-conditioned at deep words (input
    dust is amplified by roughly ||rho_s(w)|| ||rho_t(w)^{-1}||), while
    the exact track has no depth limit.
    """
    t, s = rational(t), rational(s)
    require_same_segment(fam, t, s)
    word, coords = reduce_to_chamber(
        fam, t, tuple(rational(x) for x in v), max_steps)
    return represent(fam, word, s).matvec(
        _transition_exact(fam, t, s).matvec(coords))


def vector_field_Z(fam, t, x, max_steps=None, word=None):
    """The deformation field at x: d/ds of f_{t,s}(x) at s = t.

    Differentiating iota_s rho_s(w) (M_s^{-1} M_t) c through the chain at
    s = t gives, with B = rho*_t(w) and K = iota_dot iota^{-1},

        cdot = (u(w) + B (K - iota M_t^{-1} N iota^{-1}) B^{-1}) x_hat,

    every factor analytic (the word derivative runs on dual numbers, no
    finite differences anywhere); the tangent projection accounts for
    keeping the moving lift on the hyperboloid.

    A caller that already knows which group element carried x out of the
    chamber can pass it as ``word`` and skip the reduction (worth doing
    at depth, where re-deriving the word from a float lift is the
    ill-conditioned part).  The hint also skips the renormalization: the
    lift is used exactly as given, because at depth no float64 vector is
    unit to better than ~eps ||x||^2 and silently rescaling it would
    fight the caller's bookkeeping.
    """
    t = rational(t)
    st = _session(fam, t)
    if word is None:
        x_hat = normalize_lift(st.form, x)
        v = st.norm.iota_inv_hi @ x_hat.astype(np.longdouble)
        word, _ = reduce_to_chamber(fam, t, v, max_steps)
    else:
        x_hat = np.asarray(x, dtype=float)
    return _z_value(st.table, st.w_mat, st.form, tuple(word), x_hat)


def _z_value(table, w_mat, form, word, x_hat):
    word = tuple(word)
    u = table.u(word)
    b = table.rep(word)
    b_inv = table.rep(word[::-1])
    cdot = (u + b @ w_mat @ b_inv) @ x_hat
    return tangent_projection(form, x_hat, cdot)


# ---------------------------------------------------------------------------
# orbit samples
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class OrbitSample:
    """A finite piece of the orbit of a base point under rho*_t.

    ``points`` pairs each normal form w with the unit timelike lift of
    rho*_t(w) . base, deduplicated and sorted by (length, word).  The
    exact side is kept alongside: ``chamber_vec`` and ``base_word`` are
    the chamber representative c0 and a transcript w0 with
    base = rho_t(w0) c0, and ``ints``/``scale``/``m_int`` hold every
    pullback vector as scale * v_w in integers together with the
    denominator-cleared Gram matrix, which is what makes pair
    classification sign-exact.
    """

    fam: object
    t: Fraction
    base: np.ndarray
    points: tuple
    max_length: int
    chamber_vec: tuple
    base_word: tuple
    lifts: np.ndarray
    ints: np.ndarray
    scale: int
    m_int: tuple

    def index(self):
        """word -> row position, for callers that join on normal forms."""
        return {w: i for i, (w, _) in enumerate(self.points)}


def sample_orbit(fam, t, max_length, base=None, max_steps=None,
                 max_elements=2_000_000, workers=1):
    """Sample the orbit of [iota_t base] over the ball of radius max_length.

    ``base`` is an exact vector in the t-chart; the default is the
    Perron direction, which sits in the chamber interior throughout the
    left segment.  Each orbit point is an exact rational vector, stored
    both in cleared-denominator integers and as a unit float lift.
    """
    t = rational(t)
    st = _session(fam, t)
    if base is None:
        per = perron(fam)
        base = per.v_exact if per.v_exact is not None else tuple(
            Q(float(x)).limit_denominator(10**9) for x in per.v_pf)
    base_vec = tuple(rational(x) for x in base)
    m = gram_matrix(fam, t)
    if pairing(m, base_vec, base_vec) >= 0:
        raise ConfigError("base vector is not timelike at t = %s" % (t,))
    word0, chamber_vec = reduce_to_chamber(fam, t, base_vec, max_steps)
    words = sorted(set(enumerate_ball(fam.graph, max_length,
                                      max_elements=max_elements)),
                   key=lambda w: (len(w), w))
    vecs = _pmap(lambda w: represent(fam, w, t).matvec(base_vec), words, workers)

    scale = 1
    for v in vecs:
        for x in v:
            scale = math.lcm(scale, x.denominator)
    ints_rows = [[int(x * scale) for x in v] for v in vecs]
    mden = 1
    for row in m:
        for x in row:
            mden = math.lcm(mden, x.denominator)
    m_int = tuple(tuple(int(x * mden) for x in row) for row in m)

    iota = st.norm.iota
    lifts = np.array([normalize_lift(st.form, iota @ np.array(v, dtype=float))
                      for v in vecs])
    points = tuple((w, lifts[i]) for i, w in enumerate(words))
    return OrbitSample(fam=fam, t=t, base=lifts[words.index(())],
                       points=points, max_length=max_length,
                       chamber_vec=tuple(chamber_vec), base_word=tuple(word0),
                       lifts=lifts, ints=np.array(ints_rows, dtype=object),
                       scale=scale, m_int=m_int)


def _pair_table(orbit):
    """Integer Gram table S with S[i,j] = <v_i, v_j> up to one positive scale.

    Computed in int64 when a worst-case bound proves that safe, in
    Python integers otherwise; either way the entries are exact.
    """
    cached = getattr(orbit, "_pair_table", None)
    if cached is not None:
        return cached
    k = orbit.fam.k
    vmax = max((max(abs(int(x)) for x in row) for row in orbit.ints), default=1)
    mmax = max(abs(x) for row in orbit.m_int for x in row)
    m_arr = np.array(orbit.m_int, dtype=object)
    v_arr = orbit.ints
    if k * k * vmax * vmax * mmax < 2**62:
        v64 = v_arr.astype(np.int64)
        s = v64 @ np.array(orbit.m_int, dtype=np.int64) @ v64.T
    else:
        s = v_arr @ m_arr @ v_arr.T
    orbit._pair_table = s
    return s


def _spacelike_mask(orbit):
    """Exact boolean matrix of spacelike separation between orbit points.

    The sign of <v,w>^2 - <v,v><w,w> is prescreened in float64 with a
    rigorous rounding cushion; pairs the cushion cannot decide (only
    near-lightlike ones) fall back to arbitrary-precision integers.
    """
    cached = getattr(orbit, "_spacelike", None)
    if cached is not None:
        return cached
    s = _pair_table(orbit)
    sf = s.astype(np.float64)
    diag = np.diag(sf)
    prod = np.outer(diag, diag)
    disc = sf * sf - prod
    cushion = 16.0 * np.finfo(float).eps * (sf * sf + np.abs(prod)) + 1.0
    mask = disc > 0
    und_i, und_j = np.nonzero(np.abs(disc) <= cushion)
    for i, j in zip(und_i.tolist(), und_j.tolist()):
        if i >= j:
            continue
        sij, sii, sjj = int(s[i, j]), int(s[i, i]), int(s[j, j])
        exact = sij * sij - sii * sjj > 0
        mask[i, j] = mask[j, i] = exact
    np.fill_diagonal(mask, False)
    orbit._spacelike = mask
    return mask


def _pair_sign_detail(orbit, i, j):
    """Exact trichotomy for one pair: 'spacelike', 'lightlike' or 'timelike'."""
    s = _pair_table(orbit)
    d = int(s[i, j]) ** 2 - int(s[i, i]) * int(s[j, j])
    return "spacelike" if d > 0 else ("lightlike" if d == 0 else "timelike")


def _jvec(form):
    return np.concatenate([np.ones(form.p), -np.ones(form.q + 1)])


def _lift_pairings(form, lifts):
    """Symmetric float matrix of <x_i, x_j>_J over unit lifts."""
    return (lifts * _jvec(form)) @ lifts.T


# ---------------------------------------------------------------------------
# contraction reports
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class ContractionReport:
    """Outcome of one contraction experiment over sampled orbit pairs.

    For kind "map", after[i] is d(f x, f y) against before[i] = d(x, y);
    for kind "field" it is the first variation of the distance along Z.
    ``fitted`` = (C, C') satisfies after <= C * before + C' for every
    recorded pair: the slope is least squares and the intercept is then
    raised to the worst residual, so the summary never promises more
    than the data shows.  ``max_ratio`` is the extreme of after/before
    over pairs with before >= threshold.
    """

    kind: str
    pair_count: int
    spacelike_count: int
    used_count: int
    threshold: float
    max_ratio: float
    fitted: tuple
    before: np.ndarray
    after: np.ndarray
    pairs: tuple
    words: tuple
    verdict: str

    def worst_pairs(self, n=5):
        """The n recorded pairs with the largest after/before quotient."""
        if not len(self.before):
            return []
        ratio = self.after / np.maximum(self.before, 1e-300)
        order = np.argsort(-ratio, kind="stable")
        out = []
        for idx in order[:n]:
            i, j = self.pairs[idx]
            out.append({
                "pair": [".".join(map(str, self.words[i])),
                         ".".join(map(str, self.words[j]))],
                "before": float(self.before[idx]),
                "after": float(self.after[idx]),
                "ratio": float(ratio[idx]),
            })
        return out

    def to_json(self, config=None):
        cfg = dict(config or {})
        cfg.setdefault("kind", self.kind)
        cfg.setdefault("threshold", self.threshold)
        return {
            "config": cfg,
            "counts": {"pairs": self.pair_count,
                       "spacelike": self.spacelike_count,
                       "used": self.used_count},
            "max_ratio": float(self.max_ratio),
            "fitted_constants": [float(c) for c in self.fitted],
            "worst_pairs": self.worst_pairs(),
            "verdict": self.verdict,
        }

    def csv_rows(self):
        head = ("d_before", "d_after") if self.kind == "map" \
            else ("distance", "first_variation")
        yield head
        for b, a in zip(self.before, self.after):
            yield (float(b), float(a))


def _fit_line(before, after):
    slope, _ = np.polyfit(before, after, 1)
    return float(slope), float(np.max(after - slope * before))


def _gather_records(orbit, d_before):
    """Select exact-spacelike pairs whose float distance is usable."""
    n = len(orbit.points)
    mask = _spacelike_mask(orbit)
    ii, jj = np.triu_indices(n, k=1)
    sel = mask[ii, jj]
    usable = d_before[ii, jj] > 0          # float too close to the cone: drop
    keep = sel & usable
    return ii[keep], jj[keep], int(len(ii)), int(sel.sum())


def estimate_spacelike_lipschitz(fam, t, s, orbit, threshold=1.0, workers=1):
    """Lipschitz statistics of f_{t,s} over spacelike orbit pairs.

    Records (d(x,y), d(fx,fy)) for every exact-spacelike pair of orbit
    points, the max ratio over pairs with d >= threshold, and the
    inequality-tight least squares line.  Verdict "contracting" when the
    max ratio stays below one.

    Raises
    ------
    ConfigError
        Unless t <= s in one segment, the orbit was sampled at t, and at
        least 10 spacelike pairs exist ("orbit too small").
    """
    t, s = rational(t), rational(s)
    if orbit.fam != fam:
        raise ConfigError("orbit belongs to a different graph")
    if orbit.t != t:
        raise ConfigError("orbit was sampled at t = %s, not %s" % (orbit.t, t))
    require_same_segment(fam, t, s)
    if t > s:
        raise ConfigError("need t <= s inside the segment, got t = %s > s = %s"
                          % (t, s))
    st, ss = _session(fam, t), _session(fam, s)

    trans = (gram_matrix(fam, s).inv() @ gram_matrix(fam, t))
    c1 = np.array([float(x) for x in trans.matvec(orbit.chamber_vec)])
    y0 = normalize_lift(ss.form, ss.norm.iota @ c1)
    w0 = orbit.base_word
    rows = _pmap(lambda pt: ss.table.rep(pt[0] + w0) @ y0, orbit.points, workers)
    images = np.array(rows)
    jd_s = _jvec(ss.form)
    images /= np.sqrt(-((images * jd_s) * images).sum(axis=1))[:, None]

    p_t = _lift_pairings(st.form, orbit.lifts)
    p_s = _lift_pairings(ss.form, images)
    d_t = np.arccosh(np.maximum(np.abs(p_t), 1.0))
    d_s = np.arccosh(np.maximum(np.abs(p_s), 1.0))

    ii, jj, pair_count, spacelike_count = _gather_records(orbit, d_t)
    if spacelike_count < 10:
        raise ConfigError("orbit too small: %d spacelike pairs (need 10)"
                          % spacelike_count)
    before, after = d_t[ii, jj], d_s[ii, jj]
    used = before >= threshold
    max_ratio = float(np.max(after[used] / before[used])) if used.any() \
        else float("nan")
    if used.any():
        verdict = "contracting" if max_ratio < 1.0 else "not contracting"
    else:
        verdict = "inconclusive"
    return ContractionReport(
        kind="map", pair_count=pair_count, spacelike_count=spacelike_count,
        used_count=int(used.sum()), threshold=float(threshold),
        max_ratio=max_ratio, fitted=_fit_line(before, after),
        before=before, after=after,
        pairs=tuple(zip(ii.tolist(), jj.tolist())),
        words=tuple(w for w, _ in orbit.points), verdict=verdict)


def estimate_vf_lipschitz(fam, t, orbit, threshold=1.0, field=None, workers=1):
    """First-variation statistics of the deformation field over orbit pairs.

    For each exact-spacelike pair the report records d(x,y) and the
    derivative of the pseudo-distance along the field (Z by default; any
    callable (word, lift) -> tangent vector can stand in, which is how
    the Killing-additivity invariance is exercised).  Verdict
    "contracting" when the worst derivative/distance quotient over pairs
    with d >= threshold is strictly negative.
    """
    t = rational(t)
    if orbit.fam != fam:
        raise ConfigError("orbit belongs to a different graph")
    if orbit.t != t:
        raise ConfigError("orbit was sampled at t = %s, not %s" % (orbit.t, t))
    st = _session(fam, t)
    w0 = orbit.base_word
    if field is None:
        z_rows = _pmap(
            lambda pt: _z_value(st.table, st.w_mat, st.form, pt[0] + w0, pt[1]),
            orbit.points, workers)
    else:
        z_rows = _pmap(lambda pt: np.asarray(field(pt[0] + w0, pt[1]),
                                             dtype=float),
                       orbit.points, workers)
    z = np.array(z_rows)

    jd = _jvec(st.form)
    p = _lift_pairings(st.form, orbit.lifts)
    # first variation, vectorized: with sigma re-signing <x,y> negative and
    # tangency killing the diagonal terms, fv[i,j] = -sigma (A_ij + A_ji)/sh
    a = (z * jd) @ orbit.lifts.T
    with np.errstate(invalid="ignore", divide="ignore"):
        sh = np.sqrt(p * p - 1.0)
        sigma = -np.sign(p)
        fv = -sigma * (a + a.T) / sh
    d_t = np.arccosh(np.maximum(np.abs(p), 1.0))

    n = len(orbit.points)
    mask = _spacelike_mask(orbit)
    ii, jj = np.triu_indices(n, k=1)
    sel = mask[ii, jj]
    stable = np.abs(p[ii, jj]) > 1.0 + LIGHTLIKE_BAND
    keep = sel & stable
    spacelike_count = int(sel.sum())
    if spacelike_count < 10:
        raise ConfigError("orbit too small: %d spacelike pairs (need 10)"
                          % spacelike_count)
    before, after = d_t[ii, jj][keep], fv[ii, jj][keep]
    used = before >= threshold
    max_ratio = float(np.max(after[used] / before[used])) if used.any() \
        else float("nan")
    if used.any():
        verdict = "contracting" if max_ratio < 0.0 else "not contracting"
    else:
        verdict = "inconclusive"
    kept_pairs = tuple(zip(ii[keep].tolist(), jj[keep].tolist()))
    return ContractionReport(
        kind="field", pair_count=int(len(ii)), spacelike_count=spacelike_count,
        used_count=int(used.sum()), threshold=float(threshold),
        max_ratio=max_ratio, fitted=_fit_line(before, after),
        before=before, after=after, pairs=kept_pairs,
        words=tuple(w for w, _ in orbit.points), verdict=verdict)


# ---------------------------------------------------------------------------
# quadric expansion and spacelike escape
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class QuadricReport:
    count: int
    max_residual: float
    min_value: float
    floor: float
    verdict: str

    def to_json(self):
        return {"count": self.count, "max_residual": self.max_residual,
                "min_value": self.min_value, "floor": self.floor,
                "verdict": self.verdict}


def quadric_expansion_check(fam, t, samples, seed=0):
    """Sample unit null vectors of M_t and check the expansion identity.

    A unit vector with <w, M_t w> = 0 satisfies <w, N w> = -<w,w>/t
    identically, and for t < -1 that value is positive; the check draws
    null vectors along random 2-planes (one definite, one not) and
    verifies both facts numerically.  A definite form has no null
    vectors at all and the report says "vacuous".
    """
    t = rational(t)
    if not t < -1:
        raise ConfigError("the expansion check needs t < -1, got %s" % (t,))
    pos, neg = signature_at(fam, t)
    floor = abs(1.0 / float(t)) * (1.0 - 1e-9)
    if neg == 0:
        return QuadricReport(count=0, max_residual=0.0, min_value=float("inf"),
                             floor=floor, verdict="vacuous")
    rng = Random(seed)
    k = fam.k
    mf = gram_matrix(fam, t).to_float()
    nf = fam.n.to_float()
    max_res, min_val = 0.0, float("inf")
    for _ in range(samples):
        while True:
            a = np.array([rng.gauss(0.0, 1.0) for _ in range(k)])
            if a @ mf @ a < 0.0:
                break
        while True:
            b = np.array([rng.gauss(0.0, 1.0) for _ in range(k)])
            if b @ mf @ b > 0.0:
                break
        qaa, qab, qbb = a @ mf @ a, a @ mf @ b, b @ mf @ b
        lam = (-qab + math.copysign(math.sqrt(qab * qab - qbb * qaa),
                                    rng.choice((-1.0, 1.0)))) / qbb
        w = a + lam * b
        w /= np.linalg.norm(w)
        value = float(w @ nf @ w)
        max_res = max(max_res, abs(value + 1.0 / float(t)))
        min_val = min(min_val, value)
    verdict = "pass" if (max_res <= _QUADRIC_TOL and min_val >= floor) \
        else "fail"
    return QuadricReport(count=samples, max_residual=max_res,
                         min_value=min_val, floor=floor, verdict=verdict)


@dataclass(eq=False)
class EscapeReport:
    point_count: int
    checked: int
    min_by_length: tuple
    threshold: int
    witness: tuple | None
    verdict: str

    def to_json(self):
        return {"points": self.point_count, "checked": self.checked,
                "min_by_length": list(self.min_by_length),
                "threshold": self.threshold,
                "witness": list(self.witness) if self.witness else None,
                "verdict": self.verdict}


def spacelike_escape_check(fam, t, orbit):
    """Check that the orbit escapes spacelike from its base point.

    Every orbit point beyond word length 1 must be spacelike-separated
    from the base (exact sign test); the minimum distance over each
    sphere must be nondecreasing beyond the reported threshold length.
    A non-spacelike point makes the verdict "fail" with a witness.
    """
    t = rational(t)
    if orbit.fam != fam:
        raise ConfigError("orbit belongs to a different graph")
    if orbit.t != t:
        raise ConfigError("orbit was sampled at t = %s, not %s" % (orbit.t, t))
    if orbit.max_length < 4:
        raise ConfigError("escape check wants max_length >= 4, got %d"
                          % orbit.max_length)
    st = _session(fam, t)
    mask = _spacelike_mask(orbit)
    base_idx = orbit.index()[()]
    p = _lift_pairings(st.form, orbit.lifts)[base_idx]
    d = np.arccosh(np.maximum(np.abs(p), 1.0))

    witness = None
    checked = 0
    for i, (w, _) in enumerate(orbit.points):
        if len(w) < 2:
            continue
        checked += 1
        if not mask[base_idx, i] and witness is None:
            witness = (".".join(map(str, w)), _pair_sign_detail(orbit, base_idx, i))

    mins = []
    for length in range(1, orbit.max_length + 1):
        sphere = [d[i] if mask[base_idx, i] else 0.0
                  for i, (w, _) in enumerate(orbit.points) if len(w) == length]
        mins.append(min(sphere) if sphere else 0.0)
    threshold = len(mins)
    for pos in range(len(mins) - 1, 0, -1):
        if mins[pos] >= mins[pos - 1]:
            threshold = pos
        else:
            break
    # threshold is 1-based sphere length: nondecreasing for L >= threshold
    verdict = "pass" if witness is None else "fail"
    return EscapeReport(point_count=len(orbit.points), checked=checked,
                        min_by_length=tuple(mins), threshold=threshold,
                        witness=witness, verdict=verdict)


# ---------------------------------------------------------------------------
# properness probes
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class YProbe:
    argmin_words: tuple
    argmin_value: float
    argmin_length: int
    interior: bool


@dataclass(eq=False)
class AffineProbeReport:
    y_count: int
    records: tuple
    gamma_count: int
    equivariance_ok: bool
    verdict: str

    def to_json(self):
        return {
            "y_count": self.y_count,
            "records": [{"argmin_words": [".".join(map(str, w))
                                          for w in r.argmin_words],
                         "argmin_value": r.argmin_value,
                         "argmin_length": r.argmin_length,
                         "interior": r.interior} for r in self.records],
            "gamma_count": self.gamma_count,
            "equivariance_ok": self.equivariance_ok,
            "verdict": self.verdict,
        }


def properness_probe_affine(rep, coc, orbit, y_samples, gammas=None, seed=0,
                            workers=1):
    """Discrete minimizing projection of Killing fields onto the orbit.

    For each Y the probe minimizes ||Z(x) - Y x|| over the orbit, in the
    norm family obtained by orthonormalizing the tangent space at the
    chamber representative once and transporting the frame along the
    group, so the family is equivariant by construction.  It reports the
    argmin set and checks equivariance of the projection under the
    affine action of random group elements: the argmin of gamma . Y over
    the translated orbit must be exactly the translated argmin of Y.

    An argmin that touches the boundary sphere of the sample proves
    nothing; the verdict then says "inconclusive" instead of "pass".
    """
    fam = coc.fam
    if rep.t != coc.norm.t or rep.fam != fam:
        raise ConfigError("normalizer and cocycle table disagree about (graph, t)")
    if orbit.fam != fam:
        raise ConfigError("orbit belongs to a different graph")
    if orbit.t != rep.t:
        raise ConfigError("orbit was sampled at t = %s, not %s"
                          % (orbit.t, rep.t))
    form = rep.form
    w_mat = _chamber_field(rep)
    w0 = orbit.base_word

    chamber_hat = normalize_lift(
        form, rep.iota @ np.array([float(x) for x in orbit.chamber_vec]))
    jd = _jvec(form)
    u_svd, _, _ = np.linalg.svd((jd * chamber_hat).reshape(-1, 1))
    frame0 = u_svd[:, 1:]

    if gammas is None:
        rng = Random(seed)
        gammas = [random_word(fam.graph, rng.randint(1, 3), rng)
                  for _ in range(20)]
    gammas = [tuple(g) for g in gammas]

    def values(prefix, y_mat):
        out = {}
        for w, _ in orbit.points:
            full = prefix + w + w0
            lift = coc.rep(full) @ chamber_hat
            z = _z_value(coc, w_mat, form, full, lift)
            v = z - killing_value(form, y_mat, lift)
            xi = np.linalg.lstsq(coc.rep(full) @ frame0, v, rcond=None)[0]
            out[normal_form(fam.graph, prefix + w)] = float(np.linalg.norm(xi))
        return out

    def argmin_set(vals):
        floor = min(vals.values())
        band = floor + _ARGMIN_TIE * max(1.0, floor)
        return frozenset(w for w, v in vals.items() if v <= band)

    records = []
    equivariance_ok = True
    for y_mat in y_samples:
        y_mat = np.asarray(y_mat, dtype=float)
        vals = values((), y_mat)
        amin = argmin_set(vals)
        lengths = sorted(len(w) for w in amin)
        interior = lengths[-1] < orbit.max_length
        records.append(YProbe(
            argmin_words=tuple(sorted(amin, key=lambda w: (len(w), w))),
            argmin_value=min(vals.values()),
            argmin_length=lengths[-1], interior=interior))
        for g in gammas:
            moved = values(g, affine_act(rep, coc, g, y_mat))
            expected = frozenset(normal_form(fam.graph, g + w) for w in amin)
            if argmin_set(moved) != expected:
                equivariance_ok = False

    if any(not r.interior for r in records):
        verdict = "inconclusive — increase orbit"
    else:
        verdict = "pass" if equivariance_ok else "fail"
    return AffineProbeReport(y_count=len(records), records=tuple(records),
                             gamma_count=len(gammas),
                             equivariance_ok=equivariance_ok, verdict=verdict)


@dataclass(eq=False)
class GroupProbeReport:
    word_count: int
    slope: float
    intercept: float
    proximal_count: int
    max_lambda_excess: float | None
    verdict: str
    records: tuple

    def to_json(self):
        return {
            "word_count": self.word_count, "slope": self.slope,
            "intercept": self.intercept,
            "proximal_count": self.proximal_count,
            "max_lambda_excess": self.max_lambda_excess,
            "verdict": self.verdict,
            "records": [[".".join(map(str, w)), mt, ms, lt, ls, prox]
                        for (w, mt, ms, lt, ls, prox) in self.records],
        }


def properness_probe_group(rep_t, rep_s, words):
    """Eigenvalue-gauge comparison of two parameters on sampled words.

    Scatter of mu_1 (log operator norm) and lambda_1 (log spectral
    radius) under rho*_t against rho*_s; the fitted slope of the mu_1
    cloud must be below one and lambda_1 must not grow pointwise on
    proximal elements, the two necessary conditions the gauge argument
    extracts from a contracting deformation.
    """
    fam = rep_t.fam
    if rep_s.fam != fam:
        raise ConfigError("the two representations belong to different graphs")
    require_same_segment(fam, rep_t.t, rep_s.t)
    if rep_t.t > rep_s.t:
        raise ConfigError("need t <= s inside the segment, got t = %s > s = %s"
                          % (rep_t.t, rep_s.t))
    seen, nfs = set(), []
    for w in words:
        nf = normal_form(fam.graph, tuple(w))
        if nf not in seen:
            seen.add(nf)
            nfs.append(nf)
    nfs.sort(key=lambda w: (len(w), w))
    if len(nfs) < 2:
        raise ConfigError("need at least two distinct words to fit a slope")

    records = []
    for w in nfs:
        g_t = conjugated_rep(fam, rep_t, w)
        g_s = conjugated_rep(fam, rep_s, w)
        records.append((w, mu1(g_t), mu1(g_s),
                        float(eig_log_moduli(g_t)[0]),
                        float(eig_log_moduli(g_s)[0]),
                        bool(is_proximal(g_t))))
    mu_t = np.array([r[1] for r in records])
    mu_s = np.array([r[2] for r in records])
    slope, intercept = np.polyfit(mu_t, mu_s, 1)
    excesses = [r[4] - r[3] for r in records if r[5]]
    max_excess = max(excesses) if excesses else None
    pointwise_ok = max_excess is None or max_excess <= _LAMBDA_TOL
    verdict = "pass" if (slope < 1.0 and pointwise_ok) else "fail"
    return GroupProbeReport(word_count=len(records), slope=float(slope),
                            intercept=float(intercept),
                            proximal_count=len(excesses),
                            max_lambda_excess=max_excess,
                            verdict=verdict, records=tuple(records))


# ---------------------------------------------------------------------------
# Banach projection
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class BanachResult:
    point: np.ndarray
    iterations: int
    bound: int
    displacement: float


def _step_distance(a, b):
    """Hyperbolic distance between nearby Klein-chart points, fine-grained.

    The arccosh pairing formula bottoms out around sqrt(eps): the pairing
    of two unit lifts departs from 1 only at second order in the
    separation, so distances below ~1e-5 collapse into the rounding of
    the pairing.  Convergence thresholds sit far below that, so short
    steps are measured instead by the first-order Klein metric length of
    the chord, which resolves down to float spacing.
    """
    u = b - a
    eu = float(u @ u)
    if eu == 0.0:
        return 0.0
    if eu < 1e-6:
        mid = 0.5 * (a + b)
        r2 = float(mid @ mid)
        mu = float(mid @ u)
        return math.sqrt(eu / (1.0 - r2) + mu * mu / (1.0 - r2) ** 2)
    return hilbert_distance_ball(a, b)


def banach_projection(f, c, g, tol=1e-10, x0=None):
    """Unique fixed point of x -> g^{-1} f(x) on the projective ball model.

    ``f`` must be a C-Lipschitz self-map of the ball (caller-certified,
    c < 1) and ``g`` a J-isometry of the linear model; the iteration is
    then a Banach contraction and settles within

        ceil(log(tol (1-C) / d0) / log C)

    steps, d0 the first displacement.  Consecutive displacements of a
    C-Lipschitz step must themselves contract by C, so a violation beyond
    float noise raises immediately; ten times the budget without
    convergence raises too.  Either way the symptom is C >= 1 (an
    isometry, say, walks its iterates to the ball boundary where the
    displacement measurement itself degrades -- the monitor catches it
    long before that).
    """
    g = np.asarray(g, dtype=float)
    n = g.shape[0] - 1
    form = StandardForm(n, 0)
    if not c < 1.0:
        raise ConfigError("need a certified Lipschitz constant C < 1, got %s"
                          % (c,))
    jmat = form.j
    if float(np.max(np.abs(g.T @ jmat @ g - jmat))) > 1e-8:
        raise ConfigError("g is not a J-isometry of the ball model")
    if tol <= 0:
        raise ConfigError("tol must be positive")
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
    if float(x @ x) >= 1.0:
        raise ConfigError("x0 must be inside the ball")
    prev = x
    prev_disp = None
    bound = 1
    iterations = 0
    while True:
        iterations += 1
        moved = np.linalg.solve(g, np.append(np.asarray(f(x), dtype=float),
                                             1.0))
        x = moved[:n] / moved[n]
        if float(x @ x) >= 1.0:
            raise CertificationError(
                "iterate left the ball at step %d: the map is not a "
                "self-map of H^%d" % (iterations, n))
        disp = _step_distance(prev, x)
        if iterations == 1 and disp > tol and c > 0.0:
            bound = max(1, math.ceil(
                math.log(tol * (1.0 - c) / disp) / math.log(c)))
        if disp < tol:
            return BanachResult(point=x, iterations=iterations, bound=bound,
                                displacement=disp)
        slack = _BANACH_SLACK * (1.0 + float(prev @ prev) + float(x @ x))
        if prev_disp is not None and disp > c * prev_disp + slack:
            raise CertificationError(
                "displacement failed to contract at step %d "
                "(%.3e -> %.3e): the map is not %s-Lipschitz"
                % (iterations, prev_disp, disp, c))
        if iterations >= 10 * bound:
            raise CertificationError(
                "Banach iteration did not settle within 10x the bound "
                "(%d steps): the map is not %s-Lipschitz" % (iterations, c))
        prev, prev_disp = x, disp
