"""Geometry of the standard pseudo-hyperbolic space H^{p,q}.

Points are negative lines in R^{p,q+1} carrying the form

    <v, w> = v_1 w_1 + ... + v_p w_p - v_{p+1} w_{p+1} - ... - v_{p+q+1} w_{p+q+1},

with unit timelike lifts <x,x> = -1.  Two points are spacelike,
lightlike or timelike apart according to |<x,y>| being >1, =1 or <1;
the pseudo-distance arccosh|<x,y>| is positive only across spacelike
pairs and is *not* a metric once q >= 1 (a recorded counterexample
lives in the test suite).

Everything here is float geometry; exactness guarantees live upstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CertificationError

LIGHTLIKE_BAND = 1e-9     # |pairing| within this of 1 counts as lightlike
PROJ_EQUAL_TOL = 1e-12


@dataclass(frozen=True)
class StandardForm:
    """Signature bookkeeping for R^{p,q+1}; the metric has q+1 minus signs."""

    p: int
    q: int

    def __post_init__(self):
        if self.p < 1 or self.q < 0:
            raise ValueError("need p >= 1 and q >= 0")

    @property
    def n(self):
        return self.p + self.q + 1

    @property
    def j(self):
        return np.diag([1.0] * self.p + [-1.0] * (self.q + 1))

    def pairing(self, v, w):
        v = np.asarray(v, dtype=float)
        w = np.asarray(w, dtype=float)
        return float(np.dot(v[:self.p], w[:self.p]) - np.dot(v[self.p:], w[self.p:]))


def normalize_lift(form, v):
    """Scale v onto the hyperboloid <x,x> = -1; errors on non-timelike input."""
    v = np.asarray(v, dtype=float)
    q = form.pairing(v, v)
    if q >= 0:
        raise ValueError("point not in H^{p,q}: <v,v> = %.3e >= 0" % q)
    return v / math.sqrt(-q)


def tangent_projection(form, x_hat, u):
    """Orthogonal projection of u onto the tangent space x_hat^perp.

    Because <x,x> = -1 the projector is u + <u,x> x.
    """
    u = np.asarray(u, dtype=float)
    return u + form.pairing(u, x_hat) * x_hat


def classify_pair(form, x, y, band=LIGHTLIKE_BAND):
    """One of "equal", "spacelike", "lightlike", "timelike".

    Projective equality is decided first (Euclidean angle below 1e-12);
    after that the unit-lift pairing decides, with a +-band around 1
    classified lightlike because the quadric intersection is
    ill-conditioned at tangency.
    """
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    xu = xv / np.linalg.norm(xv)
    yu = yv / np.linalg.norm(yv)
    if min(np.linalg.norm(xu - yu), np.linalg.norm(xu + yu)) <= PROJ_EQUAL_TOL:
        return "equal"
    c = abs(form.pairing(normalize_lift(form, xv), normalize_lift(form, yv)))
    if abs(c - 1.0) <= band:
        return "lightlike"
    return "spacelike" if c > 1.0 else "timelike"


def pseudo_distance(form, x, y):
    """arccosh |<x,y>| across spacelike pairs, zero otherwise."""
    kind = classify_pair(form, x, y)
    if kind != "spacelike":
        return 0.0
    c = abs(form.pairing(normalize_lift(form, x), normalize_lift(form, y)))
    return math.acosh(max(c, 1.0))


# ---------------------------------------------------------------------------
# cross-ratios
# ---------------------------------------------------------------------------

def cross_ratio(a, x, y, b):
    """[a, x, y, b] on collinear parameters, normalized so [0,1,t,inf] = t."""
    return (y - a) * (b - x) / ((x - a) * (b - y))


def cross_ratio_distance(form, x, y):
    """Distance by intersecting the line xy with the boundary quadric.

    Parametrize P(s) = (1-s) x + s y on unit lifts chosen with
    <x,y> < 0; the two real roots of <P,P> = 0 bracket [x,y], and the
    value is (1/2) log [a, x, y, b].  Agrees with pseudo_distance to
    high accuracy on spacelike pairs, by construction of the formula.

    Raises
    ------
    ValueError
        If the pair is not spacelike (no real intersection).
    """
    xh = normalize_lift(form, x)
    yh = normalize_lift(form, y)
    m = form.pairing(xh, yh)
    if m > 0:
        yh = -yh
        m = -m
    if m * m <= 1.0:
        raise ValueError("no real quadric intersection: pair is not spacelike")
    # <P(s),P(s)> = (2+2m) s^2 - (2+2m) s + 1  (note 2+2m < 0 here)
    c2 = 2.0 + 2.0 * m
    disc = math.sqrt(c2 * c2 - 4.0 * c2)
    s_a = (c2 + disc) / (2.0 * c2)     # the root below 0
    s_b = (c2 - disc) / (2.0 * c2)     # the root above 1
    if not (s_a < 0.0 < 1.0 < s_b):
        raise ValueError("quadric roots failed to bracket the segment")
    return 0.5 * math.log(cross_ratio(s_a, 0.0, 1.0, s_b))


# ---------------------------------------------------------------------------
# geodesics and the first variation of the distance
# ---------------------------------------------------------------------------

def geodesic_point(form, x_hat, v, s):
    """cosh(s) x + sinh(s) v: unit-speed spacelike geodesic through x."""
    x_hat = np.asarray(x_hat, dtype=float)
    v = np.asarray(v, dtype=float)
    if abs(form.pairing(v, v) - 1.0) > 1e-10:
        raise ValueError("geodesic direction must be a unit spacelike vector")
    if abs(form.pairing(v, x_hat)) > 1e-8:
        raise ValueError("geodesic direction must be tangent at the base point")
    return math.cosh(s) * x_hat + math.sinh(s) * v


def toward_vector(form, x_hat, y_hat):
    """The unit tangent V at x pointing down the spacelike line to y.

    Lifts are re-signed so <x,y> < 0; then y = cosh(d) x + sinh(d) V.
    Returns (V, d, sign) where sign is -1 if y had to be flipped.
    """
    x_hat = np.asarray(x_hat, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    m = form.pairing(x_hat, y_hat)
    sign = 1.0
    if m > 0:
        y_hat = -y_hat
        m = -m
        sign = -1.0
    if m >= -1.0:
        raise ValueError("toward_vector needs a spacelike pair")
    d = math.acosh(-m)
    v = (y_hat - math.cosh(d) * x_hat) / math.sinh(d)
    return v, d, sign


def first_variation(form, x_hat, y_hat, zx, zy):
    """d/dt of the pseudo-distance along curves with velocities zx, zy.

    For a spacelike pair the derivative is

        - g_x(Z_x, V_x^y) - g_y(Z_y, V_y^x),

    where V_a^b is the unit tangent at a pointing to b along the common
    spacelike geodesic.  Lift signs are re-chosen so <x,y> < 0, and a
    tangent flips together with its base lift, so the result does not
    depend on the lifts handed in.

    Raises
    ------
    ValueError
        On a non-spacelike pair (the distance is not differentiable
        across the lightlike wall).
    """
    x_hat = normalize_lift(form, x_hat)
    y_hat = normalize_lift(form, y_hat)
    zx = np.asarray(zx, dtype=float)
    zy = np.asarray(zy, dtype=float)
    if abs(form.pairing(zx, x_hat)) > 1e-8 or abs(form.pairing(zy, y_hat)) > 1e-8:
        raise ValueError("variation fields must be tangent at their base points")
    m = form.pairing(x_hat, y_hat)
    if m > 0:
        y_hat = -y_hat
        zy = -zy
        m = -m
    if m >= -1.0 - LIGHTLIKE_BAND:
        raise ValueError("first variation needs a spacelike pair")
    d = math.acosh(-m)
    sh = math.sinh(d)
    v_xy = (y_hat - math.cosh(d) * x_hat) / sh
    v_yx = (x_hat - math.cosh(d) * y_hat) / sh
    return -form.pairing(zx, v_xy) - form.pairing(zy, v_yx)


# ---------------------------------------------------------------------------
# Killing fields
# ---------------------------------------------------------------------------

def lie_residual(form, y):
    """max |Y^T J + J Y|: zero exactly on the isometry algebra o(p,q+1)."""
    y = np.asarray(y, dtype=float)
    j = form.j
    return float(np.max(np.abs(y.T @ j + j @ y)))


def killing_value(form, y, x_hat):
    """The Killing field of Y in o(p,q+1) evaluated at x: simply Y x.

    Tangency at x is automatic from Y^T J = -J Y; the invariant is
    checked (1e-9) so garbage matrices fail loudly.
    """
    y = np.asarray(y, dtype=float)
    if lie_residual(form, y) > 1e-9:
        raise ValueError("matrix is not in o(p,q+1) within 1e-9")
    return y @ np.asarray(x_hat, dtype=float)


def random_lie_element(form, rng, scale=1.0):
    """J (A - A^T) for Gaussian A: a uniform-ish sample of o(p,q+1)."""
    n = form.n
    a = np.array([[rng.gauss(0.0, scale) for _ in range(n)] for _ in range(n)])
    return form.j @ (a - a.T)


def plane_isometry(form, i, j, angle):
    """A generator of O(p,q+1): rotation if i,j share a block, else a boost."""
    n = form.n
    g = np.eye(n)
    same_block = (i < form.p) == (j < form.p)
    if same_block:
        c, s = math.cos(angle), math.sin(angle)
        g[i, i] = c
        g[j, j] = c
        g[i, j] = -s
        g[j, i] = s
    else:
        c, s = math.cosh(angle), math.sinh(angle)
        g[i, i] = c
        g[j, j] = c
        g[i, j] = s
        g[j, i] = s
    return g


def random_timelike_lift(form, rng):
    """A random unit timelike lift (rejection sampling on Gaussians)."""
    while True:
        v = np.array([rng.gauss(0.0, 1.0) for _ in range(form.n)])
        if form.pairing(v, v) < -1e-6:
            return normalize_lift(form, v)


def random_spacelike_pair(form, rng, r=None):
    """(x, y, d): unit lifts exactly d apart along a spacelike geodesic."""
    if r is None:
        r = 0.2 + 2.3 * rng.random()
    x = random_timelike_lift(form, rng)
    while True:
        u = np.array([rng.gauss(0.0, 1.0) for _ in range(form.n)])
        w = tangent_projection(form, x, u)
        ww = form.pairing(w, w)
        if ww > 1e-6:
            w = w / math.sqrt(ww)
            break
    return x, math.cosh(r) * x + math.sinh(r) * w, r


# ---------------------------------------------------------------------------
# Hilbert metrics
# ---------------------------------------------------------------------------

def hilbert_distance_ball(x, y, radius=1.0):
    """Hilbert (= Klein hyperbolic) distance inside a round ball."""
    x = np.asarray(x, dtype=float) / radius
    y = np.asarray(y, dtype=float) / radius
    nx2 = float(x @ x)
    ny2 = float(y @ y)
    if nx2 >= 1.0 or ny2 >= 1.0:
        raise ValueError("Hilbert distance needs interior points")
    c = (1.0 - float(x @ y)) / math.sqrt((1.0 - nx2) * (1.0 - ny2))
    return math.acosh(max(c, 1.0))


def hilbert_distance_segment(a, x, y, b, tol=1e-9):
    """(1/2) log [a,x,y,b] for collinear points ordered a, x, y, b."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    b = np.asarray(b, dtype=float)
    d = b - a
    dd = float(d @ d)
    if dd <= 0:
        raise ValueError("degenerate chord")
    scale = math.sqrt(dd)
    sx = float((x - a) @ d) / dd
    sy = float((y - a) @ d) / dd
    for point, s in ((x, sx), (y, sy)):
        resid = np.linalg.norm(point - (a + s * d))
        if resid > tol * max(1.0, scale):
            raise ValueError("points are not collinear within tolerance")
    if not (0.0 < sx <= sy < 1.0):
        if 0.0 < sy <= sx < 1.0:
            raise ValueError("points are ordered a, y, x, b; swap x and y")
        raise ValueError("points are not ordered a, x, y, b on the chord")
    if sx == sy:
        return 0.0
    return 0.5 * math.log(cross_ratio(0.0, sx, sy, 1.0))


def hilbert_distance_polytope(facets, x, y):
    """Hilbert distance in int(P) for P = {z : u.z <= c}, facets = [(u, c)].

    The chord through x and y is cut against every facet (ray-facet
    intersection); the nearest exits on both sides are the boundary
    points a, b of the cross-ratio.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.allclose(x, y):
        return 0.0
    d = y - x
    s_back, s_fwd = -math.inf, math.inf
    for u, c in facets:
        u = np.asarray(u, dtype=float)
        margin = c - float(u @ x)
        if margin <= 0 or c - float(u @ y) <= 0:
            raise ValueError("Hilbert distance needs interior points")
        slope = float(u @ d)
        if slope > 0:
            s_fwd = min(s_fwd, margin / slope)
        elif slope < 0:
            s_back = max(s_back, margin / slope)
    if not (math.isfinite(s_fwd) and math.isfinite(s_back)):
        raise ValueError("polytope does not bound the chord through x, y")
    # boundary parameters relative to x at 0, y at 1
    return 0.5 * math.log(cross_ratio(s_back, 0.0, 1.0, s_fwd))


def spherical_distance(x, y):
    """Angle metric on projective space, in [0, pi/2]."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c = abs(float(x @ y)) / (np.linalg.norm(x) * np.linalg.norm(y))
    return math.acos(min(1.0, max(c, 0.0)))


# ---------------------------------------------------------------------------
# gauges on the group
# ---------------------------------------------------------------------------

def eig_log_moduli(g):
    """log|eigenvalues|, sorted descending."""
    g = np.asarray(g, dtype=float)
    try:
        ev = np.linalg.eigvals(g)
    except np.linalg.LinAlgError as exc:
        raise CertificationError("eigenvalue solver failed: %s" % exc) from exc
    moduli = np.abs(ev)
    if float(np.min(moduli)) <= 0.0:
        raise ValueError("matrix is singular")
    return np.sort(np.log(moduli))[::-1]


def mu1(g):
    """log of the operator norm (largest singular value)."""
    g = np.asarray(g, dtype=float)
    try:
        top = float(np.linalg.svd(g, compute_uv=False)[0])
    except np.linalg.LinAlgError as exc:
        raise CertificationError("SVD failed: %s" % exc) from exc
    return math.log(top)


def is_proximal(g, gap_tol=1e-6):
    lam = eig_log_moduli(g)
    return bool(lam[0] - lam[1] > gap_tol)


def finsler_distance(g, g2):
    """mu1(g^{-1} g2): the max-Finsler distance on the symmetric space."""
    g = np.asarray(g, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    return mu1(np.linalg.solve(g, g2))


# ---------------------------------------------------------------------------
# orbit growth against the top eigenvalue
# ---------------------------------------------------------------------------

_RESCALE_AT = 1e100
_LOG_DIRECT_CAP = 40.0


@dataclass
class OrbitGrowthReport:
    lambda1: float
    n_max: int
    ratios: list = field(default_factory=list)   # (1/n) d(y, g^n y)
    sup_ratio: float = 0.0
    bound: float = 0.0
    bound_ok: bool = False
    final_gap: float = math.nan
    proximal: bool = False


def orbit_growth_check(form, g, y, n_max=60, bound_slack=0.05):
    """Track (1/n) d(y, g^n y) against lambda_1(g).

    The iterates are renormalized whenever the sup-norm passes 1e100,
    with the discarded magnitude kept as a log offset, so the sequence
    survives top eigenvalues around 3 for sixty steps (g^60 y overflows
    doubles around lambda_1 ~ 11 without this).  Distances with
    |pairing| beyond e^40 switch to the asymptotic log(2c) form of
    arccosh, which is exact to double precision there.

    The reported verdict is ``sup_ratio <= lambda1 + bound_slack*(1 +
    lambda1)``; the slack absorbs the subexponential prefactor of the
    growth bound, whose degree is not pinned down.
    """
    g = np.asarray(g, dtype=float)
    y_hat = normalize_lift(form, y)
    j = form.j
    jy = j @ y_hat
    lam1 = float(eig_log_moduli(g)[0])
    report = OrbitGrowthReport(lambda1=lam1, n_max=n_max,
                               proximal=is_proximal(g))
    z = y_hat.copy()
    logscale = 0.0
    for n in range(1, n_max + 1):
        z = g @ z
        big = float(np.max(np.abs(z)))
        if big > _RESCALE_AT:
            z /= big
            logscale += math.log(big)
        pair = float(jy @ z)
        if pair == 0.0:
            dist = 0.0
        else:
            lp = logscale + math.log(abs(pair))
            if lp <= 0.0:
                dist = 0.0            # |pairing| <= 1: not spacelike
            elif lp <= _LOG_DIRECT_CAP:
                dist = math.acosh(math.exp(lp))
            else:
                dist = lp + math.log(2.0)
        report.ratios.append(dist / n)
    report.sup_ratio = max(report.ratios)
    report.bound = lam1 + bound_slack * (1.0 + lam1)
    report.bound_ok = report.sup_ratio <= report.bound
    report.final_gap = abs(report.ratios[-1] - lam1)
    return report
