import math
import random
from collections import Counter
from fractions import Fraction as Q
from functools import lru_cache

import numpy as np
import pytest

from racgaff.coloring import (
    PHI,
    PHI_HALF,
    R5_ONE,
    R5_ZERO,
    RATIO_SLACK,
    ColoredPolytope,
    Root5,
    build_120cell,
    build_disjoint_walls,
    build_kgon,
    cell120_quaternions,
    chart_action,
    deformation_cocycle,
    deformed_normals,
    five_color_120cell,
    five_color_quaternions,
    lipschitz_map,
    lipschitz_ratio_sweep,
    margulis_demo,
    polytope_from_json,
    polytope_to_json,
    rep_from_normals,
    reflection_in_normal,
    root5,
    simplex_directions,
    validate_polytope,
)
from racgaff.errors import CertificationError, ConfigError, \
    ReductionBudgetError
from racgaff.hpq import StandardForm, hilbert_distance_ball
from racgaff.verify import banach_projection


@lru_cache(maxsize=None)
def hexagon():
    return build_kgon(6)


@lru_cache(maxsize=None)
def cell120():
    return build_120cell()


def qmul(x, y):
    """Independent quaternion product (real part first) for oracles."""
    xw, xa, xb, xc = x
    yw, ya, yb, yc = y
    return (xw * yw - xa * ya - xb * yb - xc * yc,
            xw * ya + xa * yw + xb * yc - xc * yb,
            xw * yb - xa * yc + xb * yw + xc * ya,
            xw * yc + xa * yb - xb * ya + xc * yw)


def random_word(rng, length, k):
    word = []
    for _ in range(length):
        g = rng.randint(1, k)
        while word and g == word[-1]:
            g = rng.randint(1, k)
        word.append(g)
    return tuple(word)


# ---------------------------------------------------------------------------
# exact Q(sqrt 5) scalars
# ---------------------------------------------------------------------------

def test_root5_golden_identities():
    assert PHI * PHI == PHI + R5_ONE
    assert 2 * PHI_HALF == PHI
    assert abs(float(PHI) - (1.0 + math.sqrt(5.0)) / 2.0) < 1e-15
    assert PHI * root5(-1) + PHI * PHI == R5_ONE


def test_root5_exact_sign():
    # 9 - 4 sqrt5 and 2 - sqrt5 straddle zero in opposite directions:
    # 81 > 80 but 4 < 5, invisible to float-free same-sign shortcuts
    assert root5(9, -4).sign() == 1
    assert root5(-9, 4).sign() == -1
    assert root5(2, -1).sign() == -1
    assert root5(-2, 1).sign() == 1
    assert R5_ZERO.sign() == 0
    assert root5(2, -1) < R5_ZERO < root5(9, -4)
    assert Root5(Q(0), Q(1)).sign() == 1


# ---------------------------------------------------------------------------
# simplex directions
# ---------------------------------------------------------------------------

def test_simplex_directions_two_colors():
    u = simplex_directions(1)
    assert u.shape == (2, 1)
    assert np.allclose(u, [[1.0], [-1.0]], atol=1e-14)


def test_simplex_directions_gram():
    u = simplex_directions(4)
    gram = u @ u.T
    assert np.max(np.abs(np.diag(gram) - 1.0)) < 1e-12
    off_diagonal = ~np.eye(5, dtype=bool)
    assert np.max(np.abs(gram[off_diagonal] + 0.25)) < 1e-12
    assert np.max(np.abs(u.sum(axis=0))) < 1e-12


def test_simplex_directions_one_color_is_empty():
    assert simplex_directions(0).shape == (1, 0)
    with pytest.raises(ConfigError, match="m >= 0"):
        simplex_directions(-1)


# ---------------------------------------------------------------------------
# the hexagon and other k-gons
# ---------------------------------------------------------------------------

def test_hexagon_shape_and_coloring():
    hexg = hexagon()
    assert hexg.k == 6 and hexg.p == 2 and hexg.m == 1
    assert hexg.coloring == (0, 1, 0, 1, 0, 1)
    assert hexg.adjacent(0, 1) and hexg.adjacent(5, 0)
    assert not hexg.adjacent(0, 2) and not hexg.adjacent(0, 3)
    assert len(hexg.adjacency) == 6


def test_hexagon_consecutive_walls_orthogonal():
    v = hexagon().normals
    for i in range(6):
        prod = float(v[i, :2] @ v[(i + 1) % 6, :2]) - 1.0
        assert abs(prod) < 1e-13


def test_hexagon_side_length_oracle():
    # vertex of walls 0 and 1 sits at angle pi/6 and chart radius tanh(R)
    # recovered from the normals; the right-angled hexagon has side
    # length acosh(2), an exact classical value
    hexg = hexagon()
    reach = float(np.linalg.norm(hexg.normals[0, :2]))
    tanh_big_r = (1.0 / reach) / math.cos(math.pi / 6.0)
    verts = [tanh_big_r * np.array([math.cos(math.pi * (2 * i + 1) / 6.0),
                                    math.sin(math.pi * (2 * i + 1) / 6.0)])
             for i in range(2)]
    for wall in (0, 1):
        assert abs(float(verts[0] @ hexg.normals[wall, :2]) - 1.0) < 1e-12
    side = hilbert_distance_ball(verts[0], verts[1])
    assert abs(math.cosh(side) - 2.0) < 1e-10


def test_hexagon_non_adjacent_walls_ultraparallel():
    hexg = hexagon()
    v = hexg.normals
    jmat = StandardForm(2, 0).j
    gram = v @ jmat @ v.T
    norms = np.sqrt(np.diag(gram))
    spread = []
    for i in range(6):
        for j in range(i + 1, 6):
            if not hexg.adjacent(i, j):
                spread.append(abs(gram[i, j]) / (norms[i] * norms[j]))
    assert min(spread) > 1.0
    assert abs(min(spread) - 2.0) < 1e-10   # next-nearest pairs


def test_kgon_rejects_bad_k():
    with pytest.raises(ConfigError, match="alternating 2-coloring"):
        build_kgon(7)
    with pytest.raises(ConfigError, match="need k >= 6"):
        build_kgon(4)
    build_kgon(8)


# ---------------------------------------------------------------------------
# polytope validation and serialization
# ---------------------------------------------------------------------------

def perturbed(poly, **changes):
    fields = {"p": poly.p, "normals": poly.normals.copy(),
              "adjacency": poly.adjacency, "coloring": poly.coloring}
    fields.update(changes)
    return ColoredPolytope(**fields)


def test_validate_catches_each_defect():
    hexg = hexagon()
    bad = hexg.normals.copy()
    bad[0, -1] = 1.1
    with pytest.raises(ConfigError, match="last coordinate 1"):
        validate_polytope(perturbed(hexg, normals=bad))
    bad = hexg.normals.copy()
    bad[2, :2] *= 0.5
    with pytest.raises(ConfigError, match="not spacelike"):
        validate_polytope(perturbed(hexg, normals=bad))
    bad = hexg.normals.copy()
    bad[1, 0] += 1e-3
    with pytest.raises(ConfigError, match="not orthogonal"):
        validate_polytope(perturbed(hexg, normals=bad))
    with pytest.raises(ConfigError, match="share color"):
        validate_polytope(perturbed(hexg, coloring=(0,) * 6))
    with pytest.raises(ConfigError, match="out of range"):
        validate_polytope(perturbed(hexg, adjacency=frozenset({(0, 99)})))
    with pytest.raises(ConfigError, match="entries for"):
        validate_polytope(perturbed(hexg, coloring=(0, 1)))
    with pytest.raises(ConfigError, match="nonnegative integers"):
        validate_polytope(perturbed(hexg, coloring=(0.0, 1, 0, 1, 0, 1)))
    with pytest.raises(ConfigError, match="k x"):
        validate_polytope(perturbed(hexg, p=3))


def test_json_roundtrip_exact():
    hexg = hexagon()
    data = polytope_to_json(hexg)
    back = polytope_from_json(data)
    assert back.p == hexg.p
    assert np.array_equal(back.normals, hexg.normals)
    assert back.adjacency == hexg.adjacency
    assert back.coloring == hexg.coloring


def test_from_json_rejects_malformed():
    with pytest.raises(ConfigError, match="malformed polytope table"):
        polytope_from_json({"p": 2, "normals": [[1, 0, 1]]})
    with pytest.raises(ConfigError, match="malformed polytope table"):
        polytope_from_json({"p": 2, "normals": "what", "adjacency": [],
                            "coloring": []})


# ---------------------------------------------------------------------------
# the deformation
# ---------------------------------------------------------------------------

def test_deformation_at_zero_pads_the_normals():
    hexg = hexagon()
    dn = deformed_normals(hexg, 0.0)
    assert dn.vectors.shape == (6, 4)
    assert np.array_equal(dn.vectors[:, :2], hexg.normals[:, :2])
    assert np.all(dn.vectors[:, 2] == 0.0)
    assert np.all(dn.vectors[:, 3] == 1.0)


def test_adjacent_deformed_pairs_stay_orthogonal():
    rng = random.Random(5)
    for poly in (hexagon(), cell120()):
        jmat = None
        for _ in range(10):
            t = rng.uniform(0.01, 2.0)
            dn = deformed_normals(poly, t)
            if jmat is None:
                jmat = dn.form.j
            gram = dn.vectors @ jmat @ dn.vectors.T
            worst = max(abs(gram[i, j]) for i, j in poly.adjacency)
            assert worst < 1e-12


def test_deformed_self_pairing_tracks_the_wall_size():
    # <v_t, v_t> = (1+m) sinh^2 t + cosh^2 t <v, v>: the wall stays
    # spacelike for every t, with room growing in t
    rng = random.Random(6)
    for poly in (hexagon(), build_disjoint_walls(3)):
        m = poly.m
        jmat_flat = poly.form.j
        for _ in range(5):
            t = rng.uniform(0.05, 1.5)
            dn = deformed_normals(poly, t)
            jmat = dn.form.j
            for i in range(poly.k):
                have = float(dn.vectors[i] @ jmat @ dn.vectors[i])
                flat = float(poly.normals[i] @ jmat_flat @ poly.normals[i])
                want = (1 + m) * math.sinh(t) ** 2 \
                    + math.cosh(t) ** 2 * flat
                assert abs(have - want) < 1e-12


def test_deformed_reflections_are_involutions():
    dn = deformed_normals(hexagon(), 0.7)
    for r in dn.generators:
        assert np.max(np.abs(r @ r - np.eye(4))) < 1e-11


def test_adjacent_deformed_reflections_commute():
    dn = deformed_normals(hexagon(), 0.7)
    for i, j in hexagon().adjacency:
        ri, rj = dn.generators[i], dn.generators[j]
        assert np.max(np.abs(ri @ rj - rj @ ri)) < 1e-10


def test_reflection_fixes_the_orthogonal_complement():
    form = StandardForm(2, 0)
    v = np.array([2.0, 0.0, 1.0])
    r = reflection_in_normal(v, form)
    fixed = np.array([0.0, 1.0, 0.0])
    assert np.max(np.abs(r @ fixed - fixed)) < 1e-14
    assert np.max(np.abs(r @ v + v)) < 1e-14


def test_reflection_rejects_degenerate_normals():
    form = StandardForm(2, 0)
    with pytest.raises(ConfigError, match="lightlike"):
        reflection_in_normal(np.array([1.0, 0.0, 1.0]), form)
    with pytest.raises(ConfigError, match="timelike"):
        reflection_in_normal(np.array([0.3, 0.0, 1.0]), form)


def test_rep_from_normals_letters_are_one_based():
    dn = deformed_normals(hexagon(), 0.4)
    assert np.array_equal(rep_from_normals(dn, (1,)), dn.generators[0])
    word = rep_from_normals(dn, (1, 2))
    assert np.allclose(word, dn.generators[0] @ dn.generators[1])
    for bad in (0, 7):
        with pytest.raises(ConfigError, match="face index"):
            rep_from_normals(dn, (bad,))


# ---------------------------------------------------------------------------
# the contracting map
# ---------------------------------------------------------------------------

def test_lipschitz_map_identity_at_equal_parameters():
    x = np.array([0.2, -0.1, 0.3])
    out = lipschitz_map(hexagon(), 0.4, 0.4, x)
    assert np.array_equal(out, x)
    assert out is not x


def test_lipschitz_map_validates_inputs():
    hexg = hexagon()
    with pytest.raises(ConfigError, match="0 < t <= s"):
        lipschitz_map(hexg, 0.5, 0.4, np.zeros(3))
    with pytest.raises(ConfigError, match="0 < t <= s"):
        lipschitz_map(hexg, 0.0, 0.4, np.zeros(3))
    with pytest.raises(ConfigError, match="expected"):
        lipschitz_map(hexg, 0.3, 0.4, np.zeros(2))
    with pytest.raises(ConfigError, match="inside the Klein ball"):
        lipschitz_map(hexg, 0.3, 0.4, np.array([0.8, 0.7, 0.0]))


def test_reduction_budget_is_enforced():
    with pytest.raises(ReductionBudgetError, match="not reduced within"):
        lipschitz_map(hexagon(), 0.3, 0.4, np.array([0.8, 0.0, 0.0]),
                      max_steps=0)


def test_lipschitz_map_is_equivariant():
    # f(rho_t(w) x) = rho_s(w) f(x): the reduction word cancels the
    # group element, so the residual is pure float dust
    hexg = hexagon()
    t, s = 0.3, 0.4
    dn_t = deformed_normals(hexg, t)
    dn_s = deformed_normals(hexg, s)
    rng = random.Random(11)
    worst = 0.0
    for _ in range(60):
        word = random_word(rng, rng.randint(1, 4), 6)
        gt = rep_from_normals(dn_t, word)
        gs = rep_from_normals(dn_s, word)
        x = np.array([rng.uniform(-0.45, 0.45) for _ in range(3)])
        lhs = lipschitz_map(hexg, t, s, chart_action(gt, x))
        rhs = chart_action(gs, lipschitz_map(hexg, t, s, x))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    assert worst < 1e-9


def test_lipschitz_map_contracts_at_the_stated_ratio():
    sweep = lipschitz_ratio_sweep(hexagon(), 0.3, 0.4, pairs=500, seed=7)
    assert sweep.verdict == "contracting"
    assert sweep.bound == pytest.approx(math.cosh(0.3) / math.cosh(0.4))
    assert sweep.max_ratio <= sweep.bound + RATIO_SLACK
    assert sweep.max_ratio > 0.9   # the bound is nearly attained


def test_ratio_sweep_is_deterministic():
    a = lipschitz_ratio_sweep(hexagon(), 0.3, 0.4, pairs=60, seed=3)
    b = lipschitz_ratio_sweep(hexagon(), 0.3, 0.4, pairs=60, seed=3)
    assert a.to_json() == b.to_json()
    assert set(a.to_json()) == {"t", "s", "bound", "pairs", "max_ratio",
                                "verdict"}


def test_sweep_rejects_bad_parameters():
    with pytest.raises(ConfigError, match="0 < t <= s"):
        lipschitz_ratio_sweep(hexagon(), -0.1, 0.4, pairs=2)


# ---------------------------------------------------------------------------
# the 120-cell
# ---------------------------------------------------------------------------

def test_120cell_counts():
    poly = cell120()
    assert poly.k == 120 and poly.p == 4 and poly.m == 4
    assert len(poly.adjacency) == 720
    degree = Counter()
    for i, j in poly.adjacency:
        degree[i] += 1
        degree[j] += 1
    assert set(degree.values()) == {12}
    assert sorted(Counter(poly.coloring).values()) == [24] * 5


def test_120cell_quaternions_are_exact_units():
    quats = cell120_quaternions()
    assert len(quats) == 120
    for q in quats[:10] + quats[-10:]:
        norm = q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]
        assert norm == R5_ONE


def test_120cell_neighbors_turn_by_order_five():
    # w_i^-1 w_j for adjacent walls has real part phi/2 = cos(pi/5)
    # exactly, so its fifth power is -1 on the nose
    quats = cell120_quaternions()
    poly = cell120()
    minus_one = (root5(-1), R5_ZERO, R5_ZERO, R5_ZERO)
    for i, j in sorted(poly.adjacency)[:25]:
        qi, qj = quats[i], quats[j]
        step = qmul((qi[0], -qi[1], -qi[2], -qi[3]), qj)
        assert step[0] == PHI_HALF
        power = step
        for _ in range(4):
            power = qmul(power, step)
        assert power == minus_one


def test_120cell_wall_scale_makes_neighbors_orthogonal():
    poly = cell120()
    reach_sq = float(poly.normals[0, :4] @ poly.normals[0, :4])
    assert abs(reach_sq - 2.0 / float(PHI)) < 1e-12
    i, j = min(poly.adjacency)
    prod = float(poly.normals[i, :4] @ poly.normals[j, :4]) - 1.0
    assert abs(prod) < 1e-12


def test_120cell_float_build_matches_exact():
    fast = build_120cell(exact=False)
    poly = cell120()
    assert fast.adjacency == poly.adjacency
    assert fast.coloring == poly.coloring


def test_five_coloring_recovered_from_normals():
    poly = cell120()
    assert five_color_120cell(poly) == poly.coloring
    with pytest.raises(ConfigError, match="120 facet"):
        five_color_120cell(hexagon())


def test_five_coloring_rejects_non_icosahedral_input():
    quats = [tuple(float(c) for c in q) for q in cell120_quaternions()]
    quats[3] = (0.6, 0.8, 0.0, 0.0)
    with pytest.raises(CertificationError):
        five_color_quaternions(quats)


def test_120cell_squeeze_contracts():
    sweep = lipschitz_ratio_sweep(cell120(), 0.3, 0.4, pairs=150, seed=2)
    assert sweep.verdict == "contracting"
    assert sweep.max_ratio <= sweep.bound + RATIO_SLACK


# ---------------------------------------------------------------------------
# the derivative cocycle
# ---------------------------------------------------------------------------

def test_cocycle_lands_in_the_lie_algebra():
    for poly in (hexagon(), build_disjoint_walls(3)):
        jmat = deformed_normals(poly, 0.3).form.j
        for u in deformation_cocycle(poly, 0.3):
            ju = jmat @ u
            assert np.max(np.abs(ju + ju.T)) < 1e-9


def test_cocycle_matches_finite_differences():
    poly = hexagon()
    t, h = 0.3, 1e-5
    plus = deformed_normals(poly, t + h)
    minus = deformed_normals(poly, t - h)
    here = deformed_normals(poly, t)
    for i, u in enumerate(deformation_cocycle(poly, t)):
        fd = (plus.generators[i] - minus.generators[i]) / (2.0 * h)
        assert np.max(np.abs(u - fd @ here.generators[i])) < 1e-8


# ---------------------------------------------------------------------------
# disjoint walls and the single-color demonstration
# ---------------------------------------------------------------------------

def test_disjoint_walls_builder_validates():
    walls = build_disjoint_walls(3)
    assert walls.k == 3 and walls.m == 0 and walls.adjacency == frozenset()
    with pytest.raises(ConfigError, match="at least two"):
        build_disjoint_walls(1)
    with pytest.raises(ConfigError, match="p >= 2"):
        build_disjoint_walls(4, p=1)
    with pytest.raises(ConfigError, match="spread must lie in"):
        build_disjoint_walls(3, spread=0.3)


def test_single_color_squeeze_is_plain_scaling_at_the_origin():
    # m = 0 squeezes the whole chart by cosh t / cosh s, so tiny
    # segments at the origin contract by exactly that ratio
    walls = build_disjoint_walls(2)
    t, s, eps = 0.3, 0.4, 1e-4
    x = np.array([eps, 0.0])
    y = np.array([-eps, 0.0])
    ratio = hilbert_distance_ball(lipschitz_map(walls, t, s, x),
                                  lipschitz_map(walls, t, s, y)) \
        / hilbert_distance_ball(x, y)
    assert abs(ratio - math.cosh(t) / math.cosh(s)) < 1e-7


def test_margulis_demo_report():
    report = margulis_demo(3, pairs=300, seed=1)
    assert report.verdict == "contracting"
    assert report.k == 3 and report.p == 2
    assert report.lie_dim == 3
    assert report.cocycle_residual < 1e-9
    assert report.bound == pytest.approx(math.cosh(0.3) / math.cosh(0.4))
    assert report.max_ratio <= report.bound + RATIO_SLACK
    data = report.to_json()
    assert set(data) == {"k", "p", "t", "s", "bound", "max_ratio",
                         "lie_dim", "cocycle_residual", "verdict"}
    assert data == margulis_demo(3, pairs=300, seed=1).to_json()


def test_margulis_demo_rejects_unsuitable_walls():
    with pytest.raises(ConfigError, match="single-color"):
        margulis_demo(6, poly=hexagon())
    reach = 1.0 / 0.4   # below the k=3 tangency spread of 1/2
    crossing = ColoredPolytope(
        p=2,
        normals=np.array([[reach * math.cos(2.0 * math.pi * i / 3.0),
                           reach * math.sin(2.0 * math.pi * i / 3.0),
                           1.0] for i in range(3)]),
        adjacency=frozenset(),
        coloring=(0, 0, 0))
    with pytest.raises(ConfigError, match="not disjoint"):
        margulis_demo(3, poly=crossing)


# ---------------------------------------------------------------------------
# fixed points of twisted maps
# ---------------------------------------------------------------------------

def test_twisted_fixed_point_sits_at_the_origin():
    # fix(f . rho_t(w), rho_s(w)) = fix(f) = 0 by equivariance; the
    # banach iterate lands there from a cold start
    hexg = hexagon()
    t, s = 0.3, 0.4
    c = math.cosh(t) / math.cosh(s)
    word = (1, 2, 3)
    gt = rep_from_normals(deformed_normals(hexg, t), word)
    gs = rep_from_normals(deformed_normals(hexg, s), word)

    def twisted(x):
        return lipschitz_map(hexg, t, s, chart_action(gt, x))

    res = banach_projection(twisted, c, gs,
                            x0=np.array([0.3, -0.2, 0.1]))
    assert float(np.linalg.norm(res.point)) < 1e-8
    assert res.iterations <= res.bound
