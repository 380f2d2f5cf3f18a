"""Colored right-angled polytopes and their cosh-ratio contracting maps.

A right-angled polytope in H^p whose faces carry a proper coloring by
m + 1 colors deforms into a family of reflection groups in O(p+m,1):
each wall normal picks up a simplex direction in the color block, scaled
by sinh(t), while the original part is scaled by cosh(t).  Adjacent
walls stay orthogonal for every t because cosh^2 - sinh^2 = 1, so the
group relations survive the deformation, and squeezing the fundamental
polytope of the t-group onto that of the s-group (t <= s) yields an
equivariant self-map of H^{p+m} that contracts distances by
cosh(t)/cosh(s).

Three generators are built here: even k-gons with the parity 2-coloring,
the right-angled 120-cell with its quaternionic 5-coloring, and families
of pairwise disjoint walls (a single color — the affine shadow of that
case in o(2,1) is the classical flat-spacetime construction).
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import CertificationError, ConfigError, ReductionBudgetError
from .hpq import StandardForm, hilbert_distance_ball
from .verify import _pmap

WALL_ORTHO_TOL = 1e-10   # adjacency invariant: |<v_i, v_j>| at right angles
RATIO_SLACK = 1e-6       # empirical-ratio allowance over cosh t / cosh s
_LAST_COORD_TOL = 1e-12
_LIGHT_TOL = 1e-12       # relative floor under which a normal is lightlike
_AXIS_TOL = 1e-7         # float matching of icosahedral 2-fold axes
_NEIGHBOR_TOL = 1e-9     # float band around phi/2 in the pairing spectrum
_DEFAULT_REDUCTION_BUDGET = 256


# ---------------------------------------------------------------------------
# exact Q(sqrt 5) scalars
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Root5:
    """a + b*sqrt(5) with rational a, b; exact field arithmetic.

    Every pairing among the 120-cell normals lives in this field, so
    neighbor detection can compare against phi/2 = (1/4, 1/4) exactly
    instead of thresholding floats.
    """

    a: Fraction
    b: Fraction

    def __add__(self, other):
        return Root5(self.a + other.a, self.b + other.b)

    def __sub__(self, other):
        return Root5(self.a - other.a, self.b - other.b)

    def __neg__(self):
        return Root5(-self.a, -self.b)

    def __mul__(self, other):
        if isinstance(other, Root5):
            return Root5(self.a * other.a + 5 * self.b * other.b,
                         self.a * other.b + self.b * other.a)
        other = Fraction(other)
        return Root5(self.a * other, self.b * other)

    __rmul__ = __mul__

    def sign(self):
        """Exact sign of the real number a + b*sqrt(5)."""
        if self.a == 0 and self.b == 0:
            return 0
        if self.a >= 0 and self.b >= 0:
            return 1
        if self.a <= 0 and self.b <= 0:
            return -1
        # opposite signs: compare a^2 against 5 b^2 on the dominant side
        heavier_a = self.a * self.a > 5 * self.b * self.b
        return 1 if (self.a > 0) == heavier_a else -1

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(5.0)


def root5(a, b=0):
    """Coerce rationals into the field: root5(1, 1) is 1 + sqrt(5)."""
    return Root5(Fraction(a), Fraction(b))


R5_ZERO = root5(0)
R5_ONE = root5(1)
PHI = root5(Fraction(1, 2), Fraction(1, 2))        # the golden ratio
PHI_HALF = root5(Fraction(1, 4), Fraction(1, 4))   # neighbor pairing value


# ---------------------------------------------------------------------------
# colored polytopes
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class ColoredPolytope:
    """Right-angled polytope in H^p with a proper face coloring.

    ``normals`` holds one outward wall vector per face, written
    (w_i, 1) in R^{p,1} — spacelike because the wall meets the ball.
    ``adjacency`` lists the face pairs that intersect (as (i, j) with
    i < j, 0-based), and those must be orthogonal; ``coloring`` assigns
    each face a color in {0..m} that differs across every adjacency.
    """

    p: int
    normals: np.ndarray
    adjacency: frozenset
    coloring: tuple

    @property
    def k(self):
        return self.normals.shape[0]

    @property
    def m(self):
        return max(self.coloring)

    @property
    def form(self):
        return StandardForm(self.p, 0)

    def adjacent(self, i, j):
        return (min(i, j), max(i, j)) in self.adjacency


def validate_polytope(poly, tol=WALL_ORTHO_TOL):
    """Check the shape, right angles and coloring; ConfigError otherwise."""
    v = np.asarray(poly.normals, dtype=float)
    if v.ndim != 2 or v.shape[1] != poly.p + 1 or poly.p < 1:
        raise ConfigError("normals must be a k x (p+1) table, got shape %s "
                          "for p=%s" % (v.shape, poly.p))
    k = v.shape[0]
    if len(poly.coloring) != k:
        raise ConfigError("coloring has %d entries for %d faces"
                          % (len(poly.coloring), k))
    for c in poly.coloring:
        if not isinstance(c, int) or c < 0:
            raise ConfigError("colors must be nonnegative integers, got %r"
                              % (c,))
    for i in range(k):
        if abs(v[i, -1] - 1.0) > _LAST_COORD_TOL:
            raise ConfigError(
                "normal %d must be scaled to last coordinate 1 (got %r)"
                % (i, v[i, -1]))
        sq = float(v[i, :-1] @ v[i, :-1]) - 1.0
        if sq <= 0.0:
            raise ConfigError("wall %d is not spacelike (<v,v> = %.3e); its "
                              "hyperplane misses the ball" % (i, sq))
    for pair in poly.adjacency:
        i, j = pair
        if not (0 <= i < j < k):
            raise ConfigError("adjacency pair %r is out of range" % (pair,))
        prod = float(v[i, :-1] @ v[j, :-1]) - 1.0
        if abs(prod) > tol:
            raise ConfigError(
                "adjacent walls %d and %d are not orthogonal "
                "(<v_i, v_j> = %.3e)" % (i, j, prod))
        if poly.coloring[i] == poly.coloring[j]:
            raise ConfigError(
                "adjacent faces %d and %d share color %d"
                % (i, j, poly.coloring[i]))


def polytope_to_json(poly):
    """Plain-dict form of the polytope: normals, adjacency, coloring."""
    return {
        "p": poly.p,
        "normals": [[float(x) for x in row] for row in poly.normals],
        "adjacency": [list(pair) for pair in sorted(poly.adjacency)],
        "coloring": list(poly.coloring),
    }


def polytope_from_json(data):
    """Rebuild a polytope from :func:`polytope_to_json` output.

    User-supplied tables pass through the same door, so every invariant
    is re-validated before the object escapes.
    """
    try:
        p = int(data["p"])
        normals = np.array(data["normals"], dtype=float)
        adjacency = frozenset((int(i), int(j)) for i, j in data["adjacency"])
        coloring = tuple(int(c) for c in data["coloring"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("malformed polytope table: %s" % exc) from None
    poly = ColoredPolytope(p=p, normals=normals, adjacency=adjacency,
                           coloring=coloring)
    validate_polytope(poly)
    return poly


# ---------------------------------------------------------------------------
# the deformation
# ---------------------------------------------------------------------------

def simplex_directions(m):
    """Vertices u_0 .. u_m of a regular simplex on the unit sphere of R^m.

    Built from the Helmert basis of the hyperplane 1^perp in R^{m+1}:
    vertex i is the centered indicator of coordinate i, rescaled by
    sqrt((m+1)/m) so that <u_i, u_j> = -1/m off the diagonal and 1 on
    it.  m = 0 returns the single empty vector (the one-color case).
    """
    if m < 0:
        raise ConfigError("need m >= 0 colors past the first, got %d" % m)
    if m == 0:
        return np.zeros((1, 0))
    h = np.zeros((m + 1, m))
    for j in range(1, m + 1):
        h[:j, j - 1] = 1.0 / math.sqrt(j * (j + 1))
        h[j, j - 1] = -j / math.sqrt(j * (j + 1))
    return math.sqrt((m + 1.0) / m) * h


@dataclass(eq=False)
class DeformedNormals:
    """Wall normals of the deformed group at parameter t, in R^{p+m,1}.

    Row i is (cosh(t) w_i, sqrt(m) sinh(t) u_{color(i)}, 1): the original
    direction stretched by cosh while the color block opens up with sinh.
    Adjacent rows are orthogonal for every t, so reflecting in them
    represents the same right-angled group.
    """

    poly: ColoredPolytope
    t: float
    vectors: np.ndarray

    @property
    def form(self):
        return StandardForm(self.poly.p + self.poly.m, 0)

    @cached_property
    def generators(self):
        form = self.form
        return tuple(reflection_in_normal(v, form) for v in self.vectors)

    @cached_property
    def pairing_rows(self):
        # <x, v_i> for all i at once is pairing_rows @ x
        return self.vectors @ self.form.j


def deformed_normals(poly, t):
    """Deform the polytope's walls by t; validates the polytope first."""
    validate_polytope(poly)
    t = float(t)
    m = poly.m
    u = simplex_directions(m)
    root_m = math.sqrt(m)
    k = poly.k
    vectors = np.zeros((k, poly.p + m + 1))
    for i in range(k):
        vectors[i, :poly.p] = math.cosh(t) * poly.normals[i, :-1]
        vectors[i, poly.p:-1] = root_m * math.sinh(t) * u[poly.coloring[i]]
        vectors[i, -1] = 1.0
    return DeformedNormals(poly=poly, t=t, vectors=vectors)


def reflection_in_normal(v, form):
    """Orthogonal reflection x -> x - 2 <x,v>/<v,v> v; needs <v,v> > 0."""
    v = np.asarray(v, dtype=float)
    q = form.pairing(v, v)
    if q <= _LIGHT_TOL * float(v @ v):
        kind = "lightlike" if abs(q) <= _LIGHT_TOL * float(v @ v) \
            else "timelike"
        raise ConfigError("cannot reflect in a %s vector (<v,v> = %.3e)"
                          % (kind, q))
    return np.eye(form.n) - (2.0 / q) * np.outer(v, form.j @ v)


def rep_from_normals(dn, word):
    """Product of deformed reflections in word order; generators are 1-based
    (generator i reflects in ``dn.vectors[i - 1]``)."""
    out = np.eye(dn.form.n)
    for g in word:
        if not 1 <= g <= dn.poly.k:
            raise ConfigError("word letter %r is not a face index in 1..%d"
                              % (g, dn.poly.k))
        out = out @ dn.generators[g - 1]
    return out


# ---------------------------------------------------------------------------
# the contracting map
# ---------------------------------------------------------------------------

def chart_action(g, x):
    """Apply a linear map of R^{n,1} to a point of the affine chart."""
    x = np.asarray(x, dtype=float)
    moved = np.asarray(g, dtype=float) @ np.append(x, 1.0)
    return moved[:-1] / moved[-1]


def _reduce_to_polytope(dn, x_hat, max_steps):
    """Reflect x_hat into the fundamental polytope, greedily.

    While some wall pairing is positive, reflect along the smallest
    violating index (1-based, recorded in order): on return
    ``rep_from_normals(dn, word) @ inside`` is the input point again, up
    to the per-step rescaling that pins the last coordinate to 1.
    """
    word = []
    for _ in range(max_steps + 1):
        pairings = dn.pairing_rows @ x_hat
        hit = next((i for i, q in enumerate(pairings) if q > 0.0), None)
        if hit is None:
            return tuple(word), x_hat
        x_hat = dn.generators[hit] @ x_hat
        x_hat = x_hat / x_hat[-1]
        word.append(hit + 1)
    raise ReductionBudgetError(
        "point not reduced within budget (%d steps); the deformed group "
        "may not be discrete at t = %s" % (max_steps, dn.t))


def _squeeze_diagonal(p, m, t, s):
    d = np.ones(p + m + 1)
    d[:p] = math.cosh(t) / math.cosh(s)
    d[p:p + m] = math.sinh(t) / math.sinh(s)
    return d


def _push_through(dn_t, dn_s, diag, x, max_steps):
    word, y_hat = _reduce_to_polytope(dn_t, np.append(x, 1.0), max_steps)
    z = diag * y_hat
    for g in reversed(word):
        z = dn_s.generators[g - 1] @ z
    return z[:-1] / z[-1]


def lipschitz_map(poly, t, s, x, max_steps=None):
    """The equivariant cosh(t)/cosh(s)-Lipschitz self-map of H^{p+m}.

    ``x`` is a point of the Klein ball in R^{p+m}.  The point is reduced
    into the fundamental polytope of the t-group by reflections, squeezed
    by the diagonal map diag(cosh t/cosh s, .., sinh t/sinh s, ..) that
    carries that polytope onto the s-group's one, and pushed back out by
    the matching word in the s-group.  t = s short-circuits to the
    identity, anchoring the smooth family.
    """
    t, s = float(t), float(s)
    if not 0.0 < t <= s:
        raise ConfigError("need 0 < t <= s, got t=%s, s=%s" % (t, s))
    x = np.asarray(x, dtype=float)
    n = poly.p + poly.m
    if x.shape != (n,):
        raise ConfigError("point has shape %s, expected (%d,)"
                          % (x.shape, n))
    if float(x @ x) >= 1.0:
        raise ConfigError("point is not inside the Klein ball")
    if s == t:
        return x.copy()
    if max_steps is None:
        max_steps = _DEFAULT_REDUCTION_BUDGET
    dn_t = deformed_normals(poly, t)
    dn_s = deformed_normals(poly, s)
    diag = _squeeze_diagonal(poly.p, poly.m, t, s)
    return _push_through(dn_t, dn_s, diag, x, max_steps)


# ---------------------------------------------------------------------------
# builders: even k-gons
# ---------------------------------------------------------------------------

def _kgon_circumradius(k, tol=1e-13):
    """Circumradius of the regular k-gon with right interior angles.

    Bisection on the angle equation cosh(R) tan(pi/k) = 1 (half the
    interior angle of the inscribed right triangle equals pi/4 exactly
    when that product is 1); monotone in R, so the bracket is easy.
    """
    tan_k = math.tan(math.pi / k)

    def gap(radius):
        return math.cosh(radius) * tan_k - 1.0

    lo, hi = 1e-9, 1.0
    while gap(hi) < 0.0:
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gap(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def build_kgon(k):
    """Regular right-angled k-gon in H^2 with the parity 2-coloring.

    Walls face the directions 2 pi i / k at the inradius; consecutive
    walls meet at right angles, everything else is ultraparallel.  Odd k
    is rejected not because the polygon is missing (right-angled k-gons
    exist from k = 5 up) but because an odd cycle has no proper
    2-coloring; k = 4 and below have no right-angled polygon at all.
    """
    if k % 2 != 0:
        raise ConfigError(
            "k must be even: the sides form a k-cycle and an odd cycle "
            "has no alternating 2-coloring (the k=%d polygon itself "
            "exists from k=5 on)" % k)
    if k < 6:
        raise ConfigError("no hyperbolic right-angled %d-gon exists; "
                          "need k >= 6" % k)
    big_r = _kgon_circumradius(k)
    inradius = math.atanh(math.tanh(big_r) * math.cos(math.pi / k))
    reach = 1.0 / math.tanh(inradius)
    normals = np.ones((k, 3))
    for i in range(k):
        theta = 2.0 * math.pi * i / k
        normals[i, 0] = reach * math.cos(theta)
        normals[i, 1] = reach * math.sin(theta)
    adjacency = frozenset({(i, i + 1) for i in range(k - 1)} | {(0, k - 1)})
    poly = ColoredPolytope(p=2, normals=normals, adjacency=adjacency,
                           coloring=tuple(i % 2 for i in range(k)))
    validate_polytope(poly)
    return poly


# ---------------------------------------------------------------------------
# builders: the 120-cell
# ---------------------------------------------------------------------------

def _even_permutations():
    for perm in itertools.permutations(range(4)):
        inversions = sum(1 for i in range(4) for j in range(i + 1, 4)
                         if perm[i] > perm[j])
        if inversions % 2 == 0:
            yield perm


def cell120_quaternions():
    """The 120 unit quaternions dual to the cells, exactly in Q(sqrt 5).

    Sign changes and even coordinate permutations of three seed vectors:
    (0,0,0,1), (1,1,1,1)/2 and (0, 1/(2 phi), 1/2, phi/2).  Orbit sizes
    8 + 16 + 96; the result is sorted by exact coordinate comparison so
    the indexing is reproducible.
    """
    half = Fraction(1, 2)
    seeds = [
        (R5_ZERO, R5_ZERO, R5_ZERO, R5_ONE),
        (root5(half), root5(half), root5(half), root5(half)),
        (R5_ZERO, root5(Fraction(-1, 4), Fraction(1, 4)),
         root5(half), PHI_HALF),
    ]
    points = set()
    for seed in seeds:
        for perm in _even_permutations():
            arranged = tuple(seed[p] for p in perm)
            for signs in itertools.product((1, -1), repeat=4):
                points.add(tuple(s * c for s, c in zip(signs, arranged)))
    return tuple(sorted(points))


def _q5_dot(x, y):
    out = R5_ZERO
    for a, b in zip(x, y):
        out = out + a * b
    return out


def _qmul(x, y):
    # works for Root5 and float coordinates alike; real part first
    xw, xa, xb, xc = x
    yw, ya, yb, yc = y
    return (xw * yw - xa * ya - xb * yb - xc * yc,
            xw * ya + xa * yw + xb * yc - xc * yb,
            xw * yb - xa * yc + xb * yw + xc * ya,
            xw * yc + xa * yb - xb * ya + xc * yw)


def _qconj(x):
    return (x[0], -x[1], -x[2], -x[3])


def _icosahedral_axes(quats):
    """The 15 two-fold axes: purely imaginary members, one per +- pair."""
    axes = []
    for q in quats:
        if abs(q[0]) > _AXIS_TOL:
            continue
        v = np.array(q[1:], dtype=float)
        for c in v:
            if abs(c) > _AXIS_TOL:
                if c < 0.0:
                    v = -v
                break
        if not any(np.max(np.abs(v - a)) < _AXIS_TOL for a in axes):
            axes.append(v)
    if len(axes) != 15:
        raise CertificationError(
            "expected 15 two-fold axes among the quaternions, found %d"
            % len(axes))
    axes.sort(key=lambda a: tuple(a))
    return axes


def _axis_triples(axes):
    """Partition the axes into 5 orthogonal triples, labeled 0..4.

    Orthogonality among two-fold axes happens exactly within the triples
    (each axis has two perpendicular partners), so the triples are the
    connected components of the orthogonality graph.  Labels follow the
    lexicographically smallest member, which makes symbol 0 — and with
    it every color below — independent of input order.
    """
    neighbors = [[j for j in range(15) if j != i
                  and abs(float(axes[i] @ axes[j])) < _AXIS_TOL]
                 for i in range(15)]
    if any(len(nb) != 2 for nb in neighbors):
        raise CertificationError(
            "two-fold axes do not pair off into orthogonal triples; the "
            "input is not the 120-cell's normal set")
    seen = set()
    triples = []
    for i in range(15):
        if i in seen:
            continue
        component = {i}
        frontier = [i]
        while frontier:
            for j in neighbors[frontier.pop()]:
                if j not in component:
                    component.add(j)
                    frontier.append(j)
        seen |= component
        triples.append(sorted(component))
    if sorted(len(c) for c in triples) != [3, 3, 3, 3, 3]:
        raise CertificationError("orthogonality components are not five "
                                 "triples: %s" % [len(c) for c in triples])
    triples.sort(key=lambda c: min(tuple(axes[i]) for i in c))
    return triples


def _match_axis(axes, v):
    for c in v:
        if abs(c) > _AXIS_TOL:
            if c < 0.0:
                v = -v
            break
    for i, a in enumerate(axes):
        if np.max(np.abs(v - a)) < _AXIS_TOL:
            return i
    raise CertificationError(
        "conjugated axis %s does not land back on the axis set: the "
        "rotation is not icosahedral" % (np.round(v, 6),))


def five_color_quaternions(quats):
    """Color each unit quaternion by where its rotation sends symbol 0.

    The five symbols are the orthogonal triples of two-fold axes;
    conjugation x -> w x w^-1 permutes them, and the color of w is the
    triple that the rotation carries triple 0 onto.  Neighbors differ by
    an order-5 rotation, which displaces every symbol, so the coloring
    is automatically proper on the neighbor graph.
    """
    fq = [tuple(float(c) for c in q) for q in quats]
    axes = _icosahedral_axes(fq)
    triples = _axis_triples(axes)
    triple_of = {i: label for label, members in enumerate(triples)
                 for i in members}
    colors = []
    for w in fq:
        images = []
        for members in triples:
            a = axes[members[0]]
            moved = _qmul(_qmul(w, (0.0, a[0], a[1], a[2])), _qconj(w))
            images.append(triple_of[_match_axis(axes, np.array(moved[1:]))])
        if sorted(images) != [0, 1, 2, 3, 4]:
            raise CertificationError(
                "conjugation by %s does not permute the five axis triples "
                "(images %s)" % (np.round(w, 6), images))
        inversions = sum(1 for i in range(5) for j in range(i + 1, 5)
                         if images[i] > images[j])
        if inversions % 2 != 0:
            raise CertificationError(
                "permutation %s induced by %s is odd, hence not in A_5"
                % (tuple(images), np.round(w, 6)))
        colors.append(images[0])
    return tuple(colors)


def build_120cell(exact=True):
    """The hyperbolic right-angled 120-cell with its 5-colored walls.

    The 120 outward unit normals w_i of the Euclidean 120-cell (equally:
    the icosian unit quaternions) are scaled by r = sqrt(2/phi), which
    is exactly the size at which neighboring walls (pairing phi/2)
    become orthogonal in R^{4,1}: r^2 phi/2 - 1 = 0.  With ``exact``
    the neighbor graph is decided by field arithmetic in Q(sqrt 5);
    otherwise by a float band around phi/2.
    """
    quats = cell120_quaternions()
    n = len(quats)
    if exact:
        for q in quats:
            if _q5_dot(q, q) != R5_ONE:
                raise CertificationError("quaternion %s is not unit" % (q,))
        adjacency = frozenset(
            (i, j) for i in range(n) for j in range(i + 1, n)
            if _q5_dot(quats[i], quats[j]) == PHI_HALF)
    else:
        target = float(PHI_HALF)
        floats = np.array([[float(c) for c in q] for q in quats])
        gram = floats @ floats.T
        adjacency = frozenset(
            (i, j) for i in range(n) for j in range(i + 1, n)
            if abs(gram[i, j] - target) < _NEIGHBOR_TOL)
    coloring = five_color_quaternions(quats)
    reach = math.sqrt(2.0 / float(PHI))
    normals = np.ones((n, 5))
    for i, q in enumerate(quats):
        normals[i, :4] = reach * np.array([float(c) for c in q])
    poly = ColoredPolytope(p=4, normals=normals, adjacency=adjacency,
                           coloring=coloring)
    validate_polytope(poly)
    return poly


def five_color_120cell(poly):
    """Recover the quaternionic 5-coloring from a 120-cell's normals."""
    if poly.p != 4 or poly.k != 120:
        raise ConfigError("the quaternionic coloring needs the 120 facet "
                          "normals in R^{4,1}, got k=%d, p=%d"
                          % (poly.k, poly.p))
    units = []
    for row in np.asarray(poly.normals, dtype=float):
        w = row[:4]
        units.append(tuple(w / math.sqrt(float(w @ w))))
    return five_color_quaternions(units)


# ---------------------------------------------------------------------------
# sweeps and the single-color demonstration
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class RatioSweep:
    """Empirical Lipschitz ratios of the squeeze map over random pairs."""

    t: float
    s: float
    bound: float
    pairs: int
    max_ratio: float
    verdict: str

    def to_json(self):
        return {
            "t": self.t,
            "s": self.s,
            "bound": float(self.bound),
            "pairs": self.pairs,
            "max_ratio": float(self.max_ratio),
            "verdict": self.verdict,
        }


def _ball_point(rng, n, radius):
    while True:
        v = np.array([rng.gauss(0.0, 1.0) for _ in range(n)])
        sq = float(v @ v)
        if sq > 0.0:
            return v * (radius * rng.random() ** (1.0 / n) / math.sqrt(sq))


def lipschitz_ratio_sweep(poly, t, s, pairs=10000, seed=0, radius=0.98,
                          min_distance=1e-3, max_steps=None, workers=1):
    """Measure d(f x, f y) / d(x, y) over random pairs in the ball.

    Pairs closer than ``min_distance`` are redrawn — at that separation
    the quotient is float noise, not geometry.  The verdict compares the
    worst ratio against cosh(t)/cosh(s) plus ``RATIO_SLACK``.
    """
    t, s = float(t), float(s)
    if not 0.0 < t <= s:
        raise ConfigError("need 0 < t <= s, got t=%s, s=%s" % (t, s))
    if max_steps is None:
        max_steps = _DEFAULT_REDUCTION_BUDGET
    dn_t = deformed_normals(poly, t)
    dn_s = deformed_normals(poly, s)
    diag = _squeeze_diagonal(poly.p, poly.m, t, s)
    n = poly.p + poly.m
    rng = random.Random(seed)
    sampled = []
    for _ in range(pairs):
        while True:
            x = _ball_point(rng, n, radius)
            y = _ball_point(rng, n, radius)
            d = hilbert_distance_ball(x, y)
            if d >= min_distance:
                sampled.append((x, y, d))
                break

    def ratio(item):
        x, y, d = item
        fx = _push_through(dn_t, dn_s, diag, x, max_steps)
        fy = _push_through(dn_t, dn_s, diag, y, max_steps)
        return hilbert_distance_ball(fx, fy) / d

    ratios = _pmap(ratio, sampled, workers)
    bound = math.cosh(t) / math.cosh(s)
    max_ratio = max(ratios) if ratios else 0.0
    verdict = "contracting" if max_ratio <= bound + RATIO_SLACK \
        else "not contracting"
    return RatioSweep(t=t, s=s, bound=bound, pairs=pairs,
                      max_ratio=max_ratio, verdict=verdict)


def deformation_cocycle(poly, t):
    """Generator values of the derivative cocycle d/ds rho_s rho_t^{-1}.

    The normal moves with velocity (sinh t w_i, sqrt(m) cosh t u, 0), and
    differentiating the reflection formula gives, per generator,
    u_i = R_i'(t) R_i(t) — a J-antisymmetric matrix, i.e. an element of
    o(p+m,1).
    """
    dn = deformed_normals(poly, t)
    t = float(t)
    m = poly.m
    u = simplex_directions(m)
    root_m = math.sqrt(m)
    jmat = dn.form.j
    out = []
    for i in range(poly.k):
        v = dn.vectors[i]
        vdot = np.zeros_like(v)
        vdot[:poly.p] = math.sinh(t) * poly.normals[i, :-1]
        vdot[poly.p:-1] = root_m * math.cosh(t) * u[poly.coloring[i]]
        q = float(v @ jmat @ v)
        qdot = 2.0 * float(vdot @ jmat @ v)
        bmat = np.outer(v, jmat @ v)
        bdot = np.outer(vdot, jmat @ v) + np.outer(v, jmat @ vdot)
        rdot = -2.0 * bdot / q + 2.0 * bmat * (qdot / q ** 2)
        out.append(rdot @ dn.generators[i])
    return out


def build_disjoint_walls(k, p=2, spread=None):
    """k pairwise ultraparallel walls in H^p, all carrying color 0.

    The walls face the directions 2 pi i / k in the first two
    coordinates at common chart distance ``spread`` from the origin.
    Consecutive walls stay disjoint exactly when that distance exceeds
    cos(pi/k); the default sits halfway between the tangency bound and
    the ball boundary.  The reflections generate a free product of k
    two-element groups.
    """
    if k < 2:
        raise ConfigError("need at least two walls, got k=%d" % k)
    if p < 2:
        raise ConfigError("the wall circle needs p >= 2, got p=%d" % p)
    tangency = math.cos(math.pi / k)
    if spread is None:
        spread = 0.5 * (tangency + 1.0)
    if not tangency < spread < 1.0:
        raise ConfigError("spread must lie in (%.6f, 1) for k=%d walls to "
                          "stay disjoint, got %s" % (tangency, k, spread))
    reach = 1.0 / spread
    normals = np.zeros((k, p + 1))
    for i in range(k):
        theta = 2.0 * math.pi * i / k
        normals[i, 0] = reach * math.cos(theta)
        normals[i, 1] = reach * math.sin(theta)
        normals[i, -1] = 1.0
    poly = ColoredPolytope(p=p, normals=normals, adjacency=frozenset(),
                           coloring=(0,) * k)
    validate_polytope(poly)
    return poly


def _check_walls_disjoint(poly):
    v = np.asarray(poly.normals, dtype=float)
    jmat = poly.form.j
    gram = v @ jmat @ v.T
    norms = np.sqrt(np.diag(gram))
    for i in range(poly.k):
        for j in range(i + 1, poly.k):
            if abs(gram[i, j]) <= norms[i] * norms[j]:
                raise ConfigError(
                    "walls %d and %d are not disjoint (normalized pairing "
                    "%.6f)" % (i, j, gram[i, j] / (norms[i] * norms[j])))


@dataclass(eq=False)
class MargulisReport:
    """Single-color pipeline run: walls, cocycle residual, contraction."""

    k: int
    p: int
    t: float
    s: float
    bound: float
    max_ratio: float
    lie_dim: int
    cocycle_residual: float
    verdict: str

    def to_json(self):
        return {
            "k": self.k,
            "p": self.p,
            "t": self.t,
            "s": self.s,
            "bound": float(self.bound),
            "max_ratio": float(self.max_ratio),
            "lie_dim": self.lie_dim,
            "cocycle_residual": float(self.cocycle_residual),
            "verdict": self.verdict,
        }


def margulis_demo(k, t=0.3, s=0.4, p=2, pairs=2000, seed=0, poly=None,
                  workers=1):
    """The m = 0 pipeline: disjoint walls, one color, affine shadow.

    Builds (or accepts) k pairwise disjoint walls in H^p, runs the
    cosh-ratio squeeze between parameters t and s, and differentiates
    the family at t to produce the generator cocycle in o(p,1) — for
    p = 2 the classical flat three-dimensional picture.  The report
    carries the empirical contraction verdict and how far the cocycle
    values are from J-antisymmetry.
    """
    if poly is None:
        poly = build_disjoint_walls(k, p)
    else:
        validate_polytope(poly)
        k, p = poly.k, poly.p
    if poly.m != 0:
        raise ConfigError("the demonstration is the single-color case; "
                          "got colors up to %d" % poly.m)
    _check_walls_disjoint(poly)
    sweep = lipschitz_ratio_sweep(poly, t, s, pairs=pairs, seed=seed,
                                  workers=workers)
    jmat = poly.form.j
    residual = 0.0
    for mat in deformation_cocycle(poly, t):
        ju = jmat @ mat
        residual = max(residual, float(np.max(np.abs(ju + ju.T))))
    n = poly.form.n
    return MargulisReport(
        k=k, p=p, t=float(t), s=float(s), bound=sweep.bound,
        max_ratio=sweep.max_ratio, lie_dim=n * (n - 1) // 2,
        cocycle_residual=residual, verdict=sweep.verdict)
