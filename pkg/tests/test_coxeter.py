import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from racgaff import ConfigError
from racgaff.coxeter import (
    CoxeterGraph,
    enumerate_ball,
    enumerate_sphere,
    normal_form,
    random_word,
    reduce_word,
    word_length,
)

PENTAGON_INF_EDGES = {frozenset(p) for p in [(1, 3), (1, 4), (2, 4), (2, 5), (3, 5)]}


def brute_canonical(graph, word):
    """Exhaustive rewriting closure; the oracle for the word problem."""
    seen = {tuple(word)}
    frontier = [tuple(word)]
    while frontier:
        w = frontier.pop()
        for i in range(len(w) - 1):
            a, b = w[i], w[i + 1]
            if a == b:
                nw = w[:i] + w[i + 2:]
            elif graph.commutes(a, b):
                nw = w[:i] + (b, a) + w[i + 2:]
            else:
                continue
            if nw not in seen:
                seen.add(nw)
                frontier.append(nw)
    shortest = min(len(w) for w in seen)
    return min(w for w in seen if len(w) == shortest)


def random_graph_and_word(seed, max_k=5, max_len=6):
    rng = random.Random(seed)
    k = rng.randint(3, max_k)
    pairs = [(i, j) for i in range(1, k + 1) for j in range(i + 1, k + 1)]
    edges = [p for p in pairs if rng.random() < 0.5]
    g = CoxeterGraph(k, edges)
    w = tuple(rng.randint(1, k) for _ in range(rng.randint(0, max_len)))
    return g, w


# ---------------------------------------------------------------------------
# graphs and presets
# ---------------------------------------------------------------------------

def test_preset_free():
    g = CoxeterGraph.preset("free(3)")
    assert g.k == 3
    assert len(g.edges) == 3
    assert g.order(1, 2) == math.inf
    assert g.is_irreducible()


def test_preset_cycle_is_pentagon_complement():
    g = CoxeterGraph.preset("cycle(5)")
    assert g.edges == PENTAGON_INF_EDGES
    assert g.order(1, 2) == 2          # consecutive sides commute
    assert g.order(1, 3) == math.inf
    assert g.is_irreducible()


def test_preset_complete2_is_reducible():
    g = CoxeterGraph.preset("complete2(4)")
    assert not g.edges
    assert not g.is_irreducible()


def test_preset_errors():
    with pytest.raises(ConfigError):
        CoxeterGraph.preset("wedge(3)")
    with pytest.raises(ConfigError):
        CoxeterGraph.preset("cycle(2)")


def test_cycle4_splits():
    # complement of a 4-cycle is two disjoint diagonals
    g = CoxeterGraph.preset("cycle(4)")
    assert g.edges == {frozenset((1, 3)), frozenset((2, 4))}
    assert not g.is_irreducible()


def test_order_table_invariants():
    g = CoxeterGraph.preset("cycle(5)")
    for i in range(1, 6):
        assert g.order(i, i) == 1
        for j in range(1, 6):
            assert g.order(i, j) == g.order(j, i)
            if i != j:
                assert g.order(i, j) in (2, math.inf)


def test_single_generator_graph():
    g = CoxeterGraph(1)
    assert g.is_irreducible()
    assert g.order(1, 1) == 1


def test_graph_validation():
    with pytest.raises(ConfigError):
        CoxeterGraph(0)
    with pytest.raises(ConfigError):
        CoxeterGraph(3, [(1, 1)])
    with pytest.raises(ConfigError):
        CoxeterGraph(3, [(1, 4)])
    with pytest.raises(ConfigError):
        CoxeterGraph(3, [(1, 2, 3)])


def test_json_roundtrip_and_digest():
    g = CoxeterGraph.preset("cycle(5)")
    g2 = CoxeterGraph.from_json(g.to_json())
    assert g == g2
    assert g.digest() == g2.digest()
    assert g.digest() != CoxeterGraph.preset("free(5)").digest()
    with pytest.raises(ConfigError):
        CoxeterGraph.from_json({"infinite_edges": []})


def test_n_matrix_pentagon():
    n = CoxeterGraph.preset("cycle(5)").n_matrix()
    assert n.is_symmetric()
    assert n[0, 2] == 1 and n[0, 1] == 0 and n[0, 0] == 0
    assert sum(sum(row) for row in n.rows) == 10     # 5 edges, twice


def test_regularity():
    assert CoxeterGraph.preset("cycle(5)").is_regular()
    assert CoxeterGraph.preset("free(4)").is_regular()
    assert not CoxeterGraph(3, [(1, 2)]).is_regular()


# ---------------------------------------------------------------------------
# normal forms
# ---------------------------------------------------------------------------

def test_normal_form_basics():
    free3 = CoxeterGraph.preset("free(3)")
    pent = CoxeterGraph.preset("cycle(5)")
    assert normal_form(free3, [1, 1]) == ()
    assert normal_form(pent, [2, 1]) == (1, 2)       # sides 1,2 commute
    assert normal_form(free3, [1, 2, 1, 2]) == (1, 2, 1, 2)
    assert normal_form(pent, [1, 3, 1]) == (1, 3, 1)  # blocked, no cancel


def test_reduce_word_cancels_through_commuting_block():
    pent = CoxeterGraph.preset("cycle(5)")
    # 2 commutes with 1, so [1,2,1] = [2]
    assert reduce_word(pent, [1, 2, 1]) == (2,)
    assert word_length(pent, [1, 2, 1]) == 1


@pytest.mark.parametrize("seed", range(60))
def test_normal_form_matches_bruteforce(seed):
    g, w = random_graph_and_word(seed)
    assert normal_form(g, w) == brute_canonical(g, w)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_normal_form_idempotent(seed):
    g, w = random_graph_and_word(seed)
    nf = normal_form(g, w)
    assert normal_form(g, nf) == nf


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_reduce_word_output_is_reduced(seed):
    g, w = random_graph_and_word(seed)
    red = reduce_word(g, w)
    assert len(brute_canonical(g, red)) == len(red)


def test_word_validation():
    g = CoxeterGraph.preset("free(3)")
    with pytest.raises(ConfigError):
        normal_form(g, [1, 4])


# ---------------------------------------------------------------------------
# sphere enumeration
# ---------------------------------------------------------------------------

def test_sphere_free3_counts():
    g = CoxeterGraph.preset("free(3)")
    assert enumerate_sphere(g, 0) == [()]
    for L in range(1, 6):
        assert len(enumerate_sphere(g, L)) == 3 * 2 ** (L - 1)


def test_sphere_pentagon_length2():
    g = CoxeterGraph.preset("cycle(5)")
    sphere = enumerate_sphere(g, 2)
    # independent count: dedup all 25 two-letter words by brute force
    brute = {brute_canonical(g, (a, b)) for a in range(1, 6) for b in range(1, 6)}
    brute = {w for w in brute if len(w) == 2}
    assert set(sphere) == brute
    assert len(sphere) == 15


def test_sphere_growth_bound():
    g = CoxeterGraph.preset("cycle(5)")
    prev = 1
    for L in range(1, 6):
        cur = len(enumerate_sphere(g, L))
        assert cur <= g.k * prev
        prev = cur


def test_sphere_entries_are_canonical_and_sorted():
    g = CoxeterGraph.preset("cycle(5)")
    sphere = enumerate_sphere(g, 3)
    assert sphere == sorted(sphere)
    for w in sphere:
        assert normal_form(g, w) == w
        assert len(w) == 3


def test_sphere_budget_error():
    g = CoxeterGraph.preset("free(3)")
    with pytest.raises(ConfigError, match="length 3"):
        enumerate_sphere(g, 10, max_elements=22)   # 1+3+6+12 = 22 < +24


def test_ball_enumeration():
    g = CoxeterGraph.preset("free(3)")
    ball = enumerate_ball(g, 3)
    assert len(ball) == 1 + 3 + 6 + 12
    lengths = [len(w) for w in ball]
    assert lengths == sorted(lengths)


def test_random_word_range():
    g = CoxeterGraph.preset("cycle(5)")
    rng = random.Random(7)
    w = random_word(g, 40, rng)
    assert len(w) == 40
    assert set(w) <= set(range(1, 6))
