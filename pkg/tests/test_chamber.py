import random
from fractions import Fraction as Q

import numpy as np
import pytest

from racgaff import ReductionBudgetError
from racgaff.chamber import (
    default_budget,
    in_delta,
    in_omega,
    in_sigma,
    reduce_to_chamber,
)
from racgaff.coxeter import normal_form, random_word
from racgaff.gram import GramFamily, dual_vertices, gram_matrix, pairing, represent

FREE3 = GramFamily.preset("free(3)")
PENT = GramFamily.preset("cycle(5)")
ONES3 = (Q(1), Q(1), Q(1))
ONES5 = tuple([Q(1)] * 5)


# ---------------------------------------------------------------------------
# membership
# ---------------------------------------------------------------------------

def test_perron_vector_is_interior():
    assert in_delta(FREE3, Q(-2), ONES3, strict=True)
    assert in_sigma(FREE3, Q(-2), ONES3, strict=True)
    assert in_delta(PENT, Q(-5, 2), ONES5, strict=True)


def test_dual_vertex_is_boundary():
    e1 = dual_vertices(FREE3, Q(-2))[0]
    assert e1 == (Q(-1, 9), Q(2, 9), Q(2, 9))
    assert in_delta(FREE3, Q(-2), e1)
    assert not in_delta(FREE3, Q(-2), e1, strict=True)
    # the vertex got truncated away: a negative coordinate
    assert not in_sigma(FREE3, Q(-2), e1)


def test_negated_perron_vector_outside():
    assert not in_delta(FREE3, Q(-2), tuple(-x for x in ONES3))


def test_truncated_chamber_is_timelike():
    # every nonzero point of Sigma has <v,v>_t < 0, checked exactly
    rng = random.Random(101)
    cases = [(FREE3, Q(-2), ONES3), (PENT, Q(-5, 2), ONES5),
             (GramFamily.preset("cycle(6)"), Q(-3, 2), tuple([Q(1)] * 6))]
    total = 0
    for fam, t, center in cases:
        m = gram_matrix(fam, t)
        accepted = 0
        while accepted < 3400:
            v = tuple(c + Q(rng.randint(-100, 100), 400) for c in center)
            if all(x >= 0 for x in v) and in_delta(fam, t, v):
                assert pairing(m, v, v) < 0
                accepted += 1
        total += accepted
    assert total >= 10000


# ---------------------------------------------------------------------------
# reduction
# ---------------------------------------------------------------------------

def test_reduce_fixed_point():
    word, red = reduce_to_chamber(FREE3, Q(-2), ONES3)
    assert word == () and red == ONES3


def test_reduce_orbit_roundtrip_exact():
    rng = random.Random(7)
    for fam, t, base in ((FREE3, Q(-2), ONES3), (PENT, Q(-5, 2), ONES5)):
        for _ in range(30):
            w = random_word(fam.graph, rng.randint(1, 8), rng)
            nf = normal_form(fam.graph, w)
            v = represent(fam, w, t).matvec(base)
            word, red = reduce_to_chamber(fam, t, v)
            assert red == base
            assert represent(fam, word, t).matvec(red) == v
            # geodesic retracing: one reflection per letter
            assert len(word) == len(nf)


def test_reduce_is_equivariant_on_interior_points():
    rng = random.Random(19)
    t = Q(-5, 2)
    for _ in range(15):
        w = random_word(PENT.graph, rng.randint(1, 6), rng)
        v = represent(PENT, w, t).matvec(ONES5)
        _, red1 = reduce_to_chamber(PENT, t, v)
        g = random_word(PENT.graph, 3, rng)
        _, red2 = reduce_to_chamber(PENT, t, represent(PENT, g, t).matvec(v))
        assert red1 == red2 == ONES5


def test_reduce_budget_error():
    with pytest.raises(ReductionBudgetError, match="not reduced within budget"):
        reduce_to_chamber(FREE3, Q(-2), tuple(-x for x in ONES3), max_steps=50)


def test_reduce_float_track():
    rng = random.Random(3)
    w = random_word(FREE3.graph, 5, rng)
    v = represent(FREE3, w, Q(-2)).to_float() @ np.ones(3)
    word, red = reduce_to_chamber(FREE3, Q(-2), tuple(v))
    assert np.allclose(red, [1.0, 1.0, 1.0], atol=1e-9)
    assert len(word) == len(normal_form(FREE3.graph, w))


def test_default_budget_scales():
    assert default_budget(FREE3, 8) == 110


# ---------------------------------------------------------------------------
# the orbit domain
# ---------------------------------------------------------------------------

def test_omega_contains_orbit_of_interior():
    rng = random.Random(23)
    for _ in range(20):
        w = random_word(FREE3.graph, rng.randint(0, 8), rng)
        v = represent(FREE3, w, Q(-2)).matvec(ONES3)
        assert in_omega(FREE3, Q(-2), v) is True


def test_omega_rejects_truncated_vertex():
    e1 = dual_vertices(FREE3, Q(-2))[0]
    assert in_omega(FREE3, Q(-2), e1) is False


def test_omega_rejects_spacelike_exactly():
    e1 = (Q(1), Q(0), Q(0))       # <e1,e1>_t = 1 > 0 for every t
    assert in_omega(FREE3, Q(-2), e1) is False
    lightlike_ish = (Q(0), Q(0), Q(0))
    assert in_omega(FREE3, Q(-2), lightlike_ish) is False


def test_omega_undetermined_on_budget_exhaustion():
    v = tuple(-x for x in ONES3)  # timelike but in the opposite cone
    assert in_omega(FREE3, Q(-2), v, max_steps=40) is None
