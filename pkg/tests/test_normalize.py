import random
from fractions import Fraction as Q

import numpy as np
import pytest

from racgaff.coxeter import random_word
from racgaff.errors import CertificationError, ConfigError
from racgaff.gram import GramFamily, gram_matrix, represent
from racgaff.hpq import eig_log_moduli, random_lie_element
from racgaff.normalize import (
    CocycleTable,
    IOTA_CONVENTION,
    affine_act,
    build_normalizer,
    cocycle,
    conjugated_rep,
    killing_form_signature,
    right_left_act,
)

FREE3 = GramFamily.preset("free(3)")
PENT = GramFamily.preset("cycle(5)")
HEX = GramFamily.preset("cycle(6)")
COMP3 = GramFamily.preset("complete2(3)")

# signature of M_t on each side of the pentagon's exceptional root -phi,
# plus the hexagon left of its root at -1
FROZEN_SIGNATURES = [
    (FREE3, Q(-2), (2, 1)),
    (PENT, Q(-5, 2), (2, 3)),
    (PENT, Q(-6, 5), (4, 1)),
    (HEX, Q(-21, 20), (4, 2)),
]


# ---------------------------------------------------------------------------
# the normalizer itself
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("fam,t,sig", FROZEN_SIGNATURES)
def test_build_normalizer_congruence(fam, t, sig):
    norm = build_normalizer(fam, t)
    assert norm.signature == sig
    mt = gram_matrix(fam, t).to_float()
    assert np.max(np.abs(norm.iota.T @ norm.j @ norm.iota - mt)) < 1e-10
    assert np.max(np.abs(norm.iota @ norm.iota_inv - np.eye(fam.k))) < 1e-11
    assert norm.form.p == sig[0]
    assert norm.form.q == sig[1] - 1


def test_build_normalizer_trivial_graph():
    # no infinite edges: N = 0, M_t = Id for every t, nothing to normalize
    norm = build_normalizer(COMP3, Q(-7, 3))
    assert np.array_equal(norm.iota, np.eye(3))
    assert np.array_equal(norm.iota_dot, np.zeros((3, 3)))
    assert norm.signature == (3, 0)
    with pytest.raises(ConfigError, match="positive definite"):
        norm.form


def test_build_normalizer_rejects_near_exceptional():
    near_phi = Q(-16180339887498949, 10 ** 16)
    with pytest.raises(CertificationError, match="exceptional"):
        build_normalizer(PENT, near_phi)
    with pytest.raises(CertificationError, match="exceptional"):
        build_normalizer(HEX, Q(-1))


def test_normalizer_smooth_in_t():
    t = Q(-2)
    norm = build_normalizer(FREE3, t)
    errs = []
    for h in (Q(1, 100), Q(1, 200), Q(1, 400)):
        step = build_normalizer(FREE3, t + h)
        errs.append(np.max(np.abs(step.iota - norm.iota - float(h) * norm.iota_dot)))
    assert 3.2 < errs[0] / errs[1] < 4.8       # O(h^2) remainder
    assert 3.2 < errs[1] / errs[2] < 4.8


@pytest.mark.parametrize("fam,t", [(FREE3, Q(-2)), (PENT, Q(-6, 5))])
def test_iota_dot_matches_finite_differences(fam, t):
    h = Q(1, 10 ** 6)
    norm = build_normalizer(fam, t)
    plus = build_normalizer(fam, t + h)
    minus = build_normalizer(fam, t - h)
    fd = (plus.iota - minus.iota) / (2.0 * float(h))
    assert np.max(np.abs(fd - norm.iota_dot)) < 1e-6


# ---------------------------------------------------------------------------
# the conjugated representation
# ---------------------------------------------------------------------------

def test_conjugated_rep_identity():
    norm = build_normalizer(FREE3, Q(-6, 5))
    assert np.array_equal(conjugated_rep(FREE3, norm, ()), np.eye(3))


def test_conjugated_rep_lands_in_o_pq():
    rng = random.Random(3)
    for fam, t, count in [(FREE3, Q(-21, 20), 200), (PENT, Q(-11, 10), 60)]:
        norm = build_normalizer(fam, t)
        j = norm.j
        for _ in range(count):
            w = random_word(fam.graph, rng.randrange(0, 9), rng)
            g = conjugated_rep(fam, norm, w)
            assert np.max(np.abs(g.T @ j @ g - j)) < 1e-9


def test_conjugated_rep_preserves_eigenvalue_moduli():
    rng = random.Random(7)
    norm = build_normalizer(FREE3, Q(-6, 5))
    for _ in range(40):
        w = random_word(FREE3.graph, rng.randrange(1, 7), rng)
        lam_plain = eig_log_moduli(represent(FREE3, tuple(w), norm.t).to_float())
        lam_conj = eig_log_moduli(conjugated_rep(FREE3, norm, w))
        assert np.max(np.abs(lam_plain - lam_conj)) < 1e-8


# ---------------------------------------------------------------------------
# cocycles
# ---------------------------------------------------------------------------

def test_cocycle_identity_word_is_zero():
    norm = build_normalizer(FREE3, Q(-6, 5))
    assert np.array_equal(cocycle(FREE3, norm, ()), np.zeros((3, 3)))
    # (1,1) reduces to the identity, so the table maps it to zero too
    tab = CocycleTable(FREE3, norm)
    assert np.array_equal(tab.u((1, 1)), np.zeros((3, 3)))


@pytest.mark.parametrize("fam,t", [
    (FREE3, Q(-6, 5)), (PENT, Q(-6, 5)), (HEX, Q(-5, 4)),
])
def test_cocycle_values_and_identity(fam, t):
    norm = build_normalizer(fam, t)
    tab = CocycleTable(fam, norm)
    j = norm.j
    rng = random.Random(11)
    for _ in range(30):
        w1 = random_word(fam.graph, rng.randrange(0, 7), rng)
        w2 = random_word(fam.graph, rng.randrange(0, 7), rng)
        u1, u2 = tab.u(w1), tab.u(w2)
        u12 = tab.u(tuple(w1) + tuple(w2))
        for u in (u1, u2, u12):
            assert np.max(np.abs(u.T @ j + j @ u)) < 1e-9
        b1 = tab.rep(w1)
        b1_inv = tab.rep(tuple(reversed(w1)))
        assert np.max(np.abs(u12 - u1 - b1 @ u2 @ b1_inv)) < 1e-9


def test_cocycle_inverse_formula():
    norm = build_normalizer(PENT, Q(-6, 5))
    tab = CocycleTable(PENT, norm)
    rng = random.Random(13)
    for _ in range(20):
        w = tuple(random_word(PENT.graph, rng.randrange(1, 7), rng))
        w_inv = w[::-1]
        b = tab.rep(w)
        b_inv = tab.rep(w_inv)
        assert np.max(np.abs(tab.u(w_inv) + b_inv @ tab.u(w) @ b)) < 1e-9


def test_cocycle_matches_finite_difference_flow():
    # u(w) is also the Richardson-extrapolated derivative of the flow
    # tau -> rho*_tau(w) rho*_t(w)^{-1} at tau = t
    fam, t, h = FREE3, Q(-3, 2), Q(1, 10 ** 6)
    norm = build_normalizer(fam, t)

    def flow_derivative(w, step):
        ahead = build_normalizer(fam, t + step)
        b_next = conjugated_rep(fam, ahead, w)
        b_inv = conjugated_rep(fam, norm, tuple(reversed(w)))
        return (b_next @ b_inv - np.eye(fam.k)) / float(step)

    for w in [(1,), (1, 2), (3, 1, 2), (2, 3, 1, 2)]:
        d_h = flow_derivative(w, h)
        d_half = flow_derivative(w, h / 2)
        richardson = 2.0 * d_half - d_h
        assert np.max(np.abs(richardson - cocycle(fam, norm, w))) < 1e-5


def test_cocycle_table_caches_by_normal_form():
    norm = build_normalizer(FREE3, Q(-6, 5))
    tab = CocycleTable(FREE3, norm)
    u1 = tab.u((1, 2, 2, 3))       # reduces to (1, 3)
    u2 = tab.u((1, 3))
    assert u1 is u2
    assert len(tab._u) == 1


def test_cocycle_table_rejects_foreign_normalizer():
    norm = build_normalizer(FREE3, Q(-6, 5))
    with pytest.raises(ConfigError, match="different graph"):
        CocycleTable(PENT, norm)


def test_cocycle_export_shape():
    norm = build_normalizer(FREE3, Q(-6, 5))
    tab = CocycleTable(FREE3, norm)
    tab.u(())
    tab.u((1, 3, 2))
    tab.u((2,))
    doc = tab.to_json()
    assert doc["t"] == "-6/5"
    assert doc["signature"] == [2, 1]
    assert doc["graph"] == FREE3.graph.digest()
    assert doc["iota_convention"] == IOTA_CONVENTION
    assert sorted(doc["entries"]) == ["", "1.3.2", "2"]
    assert list(doc["entries"]) == ["", "2", "1.3.2"]   # short words first
    for flat in doc["entries"].values():
        assert len(flat) == 9
        assert all(isinstance(x, float) for x in flat)


# ---------------------------------------------------------------------------
# the affine action on o(p,q+1)
# ---------------------------------------------------------------------------

def test_affine_act_identity():
    norm = build_normalizer(FREE3, Q(-6, 5))
    tab = CocycleTable(FREE3, norm)
    rng = random.Random(17)
    y = random_lie_element(norm.form, rng)
    assert np.array_equal(affine_act(norm, tab, (), y), y)


def test_affine_act_composition_law():
    norm = build_normalizer(PENT, Q(-6, 5))
    tab = CocycleTable(PENT, norm)
    rng = random.Random(19)
    for _ in range(20):
        w1 = tuple(random_word(PENT.graph, rng.randrange(0, 6), rng))
        w2 = tuple(random_word(PENT.graph, rng.randrange(0, 6), rng))
        y = random_lie_element(norm.form, rng)
        once = affine_act(norm, tab, w1 + w2, y)
        twice = affine_act(norm, tab, w1, affine_act(norm, tab, w2, y))
        assert np.max(np.abs(once - twice)) < 1e-8


def test_affine_act_preserves_killing_form_of_differences():
    norm = build_normalizer(FREE3, Q(-21, 20))
    tab = CocycleTable(FREE3, norm)
    rng = random.Random(23)
    for _ in range(25):
        w = tuple(random_word(FREE3.graph, rng.randrange(0, 6), rng))
        y1 = random_lie_element(norm.form, rng)
        y2 = random_lie_element(norm.form, rng)
        d_before = y1 - y2
        d_after = affine_act(norm, tab, w, y1) - affine_act(norm, tab, w, y2)
        assert abs(np.trace(d_after @ d_after)
                   - np.trace(d_before @ d_before)) < 1e-8


def test_affine_act_rejects_mismatched_table():
    norm = build_normalizer(FREE3, Q(-6, 5))
    other = build_normalizer(FREE3, Q(-11, 10))
    tab = CocycleTable(FREE3, norm)
    with pytest.raises(ConfigError, match="disagree"):
        affine_act(other, tab, (1,), np.zeros((3, 3)))


# ---------------------------------------------------------------------------
# the trace form on o(p,q+1)
# ---------------------------------------------------------------------------

def _trace_form_signature(p, q):
    """Numeric oracle: diagonalize the trace form on a basis of o(p,q+1)."""
    n = p + q + 1
    j = np.diag([1.0] * p + [-1.0] * (q + 1))
    basis = []
    for a in range(n):
        for b in range(a + 1, n):
            e = np.zeros((n, n))
            e[a, b] = 1.0
            e[b, a] = -1.0
            basis.append(j @ e)
    gram = np.array([[np.trace(x @ y) for y in basis] for x in basis])
    ev = np.linalg.eigvalsh(gram)
    assert np.min(np.abs(ev)) > 1e-9          # nondegenerate
    return (int(np.sum(ev > 0)), int(np.sum(ev < 0)))


def test_killing_form_signature_frozen():
    assert killing_form_signature(3, 0) == (3, 3)
    assert killing_form_signature(2, 2) == (6, 4)


def test_killing_form_signature_dimension():
    for p in range(1, 7):
        for q in range(0, 7):
            pp, qq = killing_form_signature(p, q)
            n = p + q + 1
            assert pp + qq == n * (n - 1) // 2


@pytest.mark.parametrize("p,q", [(2, 0), (2, 1), (2, 2), (3, 1)])
def test_killing_form_signature_against_trace_form(p, q):
    assert killing_form_signature(p, q) == _trace_form_signature(p, q)


def test_killing_form_signature_validates():
    with pytest.raises(ConfigError):
        killing_form_signature(0, 2)


# ---------------------------------------------------------------------------
# the right-and-left action on O(p,q+1)
# ---------------------------------------------------------------------------

def test_right_left_act_basics():
    norm_t = build_normalizer(FREE3, Q(-21, 20))
    norm_s = build_normalizer(FREE3, Q(-11, 10))
    rng = random.Random(29)
    g = conjugated_rep(FREE3, norm_t, (1, 2))
    assert np.array_equal(right_left_act(norm_t, norm_s, (), g), g)

    j = norm_t.j
    for _ in range(20):
        w1 = tuple(random_word(FREE3.graph, rng.randrange(0, 4), rng))
        w2 = tuple(random_word(FREE3.graph, rng.randrange(0, 4), rng))
        once = right_left_act(norm_t, norm_s, w1 + w2, g)
        twice = right_left_act(norm_t, norm_s, w1,
                               right_left_act(norm_t, norm_s, w2, g))
        assert np.max(np.abs(once - twice)) < 1e-8
        assert np.max(np.abs(once.T @ j @ once - j)) < 1e-8


def test_right_left_act_rejects_signature_mismatch():
    norm_t = build_normalizer(PENT, Q(-6, 5))      # (4, 1)
    norm_s = build_normalizer(PENT, Q(-5, 2))      # (2, 3)
    with pytest.raises(ConfigError, match="signature mismatch"):
        right_left_act(norm_t, norm_s, (1,), np.eye(5))


def test_right_left_act_rejects_different_graphs():
    norm_t = build_normalizer(FREE3, Q(-6, 5))
    norm_s = build_normalizer(PENT, Q(-6, 5))
    with pytest.raises(ConfigError, match="different graphs"):
        right_left_act(norm_t, norm_s, (1,), np.eye(3))
