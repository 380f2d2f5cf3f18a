"""The fundamental simplex, its truncation, and reduction to the chamber.

The chamber of the reflection action at parameter t is

    Delta = {v : <v, e_i>_t <= 0 for every generator i},

a simplex with vertices the dual vectors e'_i(t); its truncation Sigma
keeps only the part with non-negative coordinates.  Reduction walks an
orbit point back into Delta by greedily reflecting along the smallest
violated wall, which retraces the word geodesically, one letter per
step.

All membership tests are exact on rational input; float vectors take a
parallel numpy path with no tolerance fudging (the caller owns the
rounding story there).
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

import numpy as np

from functools import lru_cache

from .errors import ReductionBudgetError
from .exact import rational, to_longdouble
from .gram import gram_matrix, pairing

Q = Fraction


class ReducedPoint(NamedTuple):
    word: tuple        # generators applied, in application order
    coords: tuple      # the point moved into the chamber


def _is_float_vector(v):
    return any(isinstance(x, (float, np.floating)) for x in v)


@lru_cache(maxsize=256)
def _gram_ld(fam, t):
    m = gram_matrix(fam, t)
    return np.array([[to_longdouble(x) for x in row] for row in m.rows])


def _coerce(fam, t, v):
    """Return (vector, pairings_fn) on the exact or a float track.

    Float input stays in whatever precision it arrived in: a vector with
    any longdouble entry walks against a longdouble Gram matrix, plain
    floats against float64.
    """
    v = tuple(v)
    if len(v) != fam.k:
        raise ValueError("vector has length %d, expected %d" % (len(v), fam.k))
    if _is_float_vector(v):
        if any(isinstance(x, np.longdouble) for x in v):
            mhi = _gram_ld(fam, t)
            return (tuple(np.longdouble(x) for x in v),
                    lambda w: tuple(mhi @ np.array(w, dtype=np.longdouble)))
        mf = gram_matrix(fam, t).to_float()
        return tuple(float(x) for x in v), lambda w: tuple(mf @ np.array(w))
    m = gram_matrix(fam, t)
    return tuple(rational(x) for x in v), m.matvec


def in_delta(fam, t, v, strict=False):
    """Membership in the chamber: every wall pairing <v, e_i>_t <= 0.

    ``strict`` asks for the interior instead.  Exact for rational v.
    """
    t = rational(t)
    v, pair_all = _coerce(fam, t, v)
    prs = pair_all(v)
    return all(p < 0 for p in prs) if strict else all(p <= 0 for p in prs)


def in_sigma(fam, t, v, strict=False):
    """Membership in the truncated chamber: in Delta and coordinates >= 0."""
    t = rational(t)
    v, pair_all = _coerce(fam, t, v)
    prs = pair_all(v)
    if strict:
        return all(p < 0 for p in prs) and all(x > 0 for x in v)
    return all(p <= 0 for p in prs) and all(x >= 0 for x in v)


def default_budget(fam, length_bound=16):
    """10 x (word length bound + k): reduction of a genuine orbit point
    needs exactly the word length, so this is a wide margin."""
    return 10 * (length_bound + fam.k)


def reduce_to_chamber(fam, t, v, max_steps=None):
    """Greedy reflection of ``v`` into the chamber.

    While some wall pairing is positive, reflect along the smallest
    violating index.  On success returns ``ReducedPoint(word, coords)``
    with ``represent(word) @ coords == v`` (exactly, for rational input),
    so ``word`` is a reduction transcript of the group element carrying
    the chamber to the point.

    Raises
    ------
    ReductionBudgetError
        After ``max_steps`` reflections (default :func:`default_budget`);
        the usual cause is a point outside the cone the group moves.
    """
    t = rational(t)
    if max_steps is None:
        max_steps = default_budget(fam)
    v, pair_all = _coerce(fam, t, v)
    coords = list(v)
    word = []
    for _ in range(max_steps + 1):
        prs = pair_all(coords)
        hit = next((i for i, p in enumerate(prs) if p > 0), None)
        if hit is None:
            return ReducedPoint(tuple(word), tuple(coords))
        # the reflection G_i only moves coordinate i: v_i -= 2 <v, e_i>_t
        coords[hit] = coords[hit] - 2 * prs[hit]
        word.append(hit + 1)
    raise ReductionBudgetError(
        "point not reduced within budget (%d steps)" % max_steps)


def in_omega(fam, t, v, max_steps=None):
    """Three-valued test for the orbit domain Int(Gamma . Sigma).

    Returns True/False when the budgeted reduction settles the question
    and None ("undetermined") when it does not.  Points that are not
    timelike are rejected outright -- the domain lives strictly inside
    the negative cone -- and that pre-check is exact for rational input,
    budget-free.
    """
    t = rational(t)
    vv = tuple(v)
    if _is_float_vector(vv):
        mf = gram_matrix(fam, t).to_float()
        arr = np.array([float(x) for x in vv])
        q = float(arr @ mf @ arr)
    else:
        q = pairing(gram_matrix(fam, t), vv, vv)
    if q >= 0:
        return False
    try:
        _, reduced = reduce_to_chamber(fam, t, vv, max_steps)
    except ReductionBudgetError:
        return None
    return in_sigma(fam, t, reduced, strict=True)
