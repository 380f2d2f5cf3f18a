"""Right-angled Coxeter presentations and the word problem.

A presentation is a graph on generators 1..k whose edges carry the
label ∞; every unlisted off-diagonal pair commutes (label 2).  Words
are tuples of generator indices.  The canonical form of a word is the
ShortLex-least representative of its commutation class, computed by a
single stack pass (deletion of cancelling pairs) followed by a greedy
linearization of the heap of pieces.
"""

from __future__ import annotations

import hashlib
import json
import math
import re

from .errors import ConfigError
from .exact import QMatrix

_PRESET_RE = re.compile(r"^(free|cycle|complete2)\((\d+)\)$")

DEFAULT_SPHERE_BUDGET = 2_000_000


class CoxeterGraph:
    """A right-angled Coxeter presentation.

    Parameters
    ----------
    k : int
        Number of generators, indexed 1..k.
    infinite_edges : iterable of pairs
        The pairs {i, j} with m(i, j) = ∞.  Everything else off the
        diagonal commutes.
    """

    __slots__ = ("k", "edges")

    def __init__(self, k, infinite_edges=()):
        if not isinstance(k, int) or k < 1:
            raise ConfigError("generator count must be a positive integer, got %r" % (k,))
        edges = set()
        for pair in infinite_edges:
            pair = tuple(pair)
            if len(pair) != 2:
                raise ConfigError("edge %r is not a pair" % (pair,))
            i, j = pair
            if not (isinstance(i, int) and isinstance(j, int)):
                raise ConfigError("edge %r has non-integer endpoints" % (pair,))
            if i == j:
                raise ConfigError("self-loop on generator %d" % i)
            if not (1 <= i <= k and 1 <= j <= k):
                raise ConfigError("edge %r out of range 1..%d" % (pair, k))
            edges.add(frozenset(pair))
        self.k = k
        self.edges = frozenset(edges)

    # -- presentation table --------------------------------------------------

    def order(self, i, j):
        """The Coxeter exponent m(i, j): 1, 2 or math.inf."""
        self._check_gen(i)
        self._check_gen(j)
        if i == j:
            return 1
        return math.inf if frozenset((i, j)) in self.edges else 2

    def commutes(self, i, j):
        return i != j and frozenset((i, j)) not in self.edges

    def neighbors(self, i):
        """Generators joined to i by an ∞-edge, sorted."""
        self._check_gen(i)
        return tuple(sorted(j for j in range(1, self.k + 1)
                            if frozenset((i, j)) in self.edges))

    def _check_gen(self, i):
        if not (isinstance(i, int) and 1 <= i <= self.k):
            raise ConfigError("generator index %r out of range 1..%d" % (i, self.k))

    def n_matrix(self):
        """The 0/1 matrix N with N[i][j] = 1 iff m(i+1, j+1) = ∞."""
        return QMatrix([[1 if frozenset((i, j)) in self.edges else 0
                         for j in range(1, self.k + 1)]
                        for i in range(1, self.k + 1)])

    def is_irreducible(self):
        """True iff the ∞-edge graph is connected (single-vertex counts)."""
        seen = {1}
        frontier = [1]
        while frontier:
            i = frontier.pop()
            for j in self.neighbors(i):
                if j not in seen:
                    seen.add(j)
                    frontier.append(j)
        return len(seen) == self.k

    def degrees(self):
        return tuple(len(self.neighbors(i)) for i in range(1, self.k + 1))

    def is_regular(self):
        degs = self.degrees()
        return len(set(degs)) <= 1

    # -- serialization -------------------------------------------------------

    def to_json(self):
        return {"k": self.k,
                "infinite_edges": sorted(sorted(e) for e in self.edges)}

    @classmethod
    def from_json(cls, data):
        if not isinstance(data, dict) or "k" not in data:
            raise ConfigError("graph JSON must be an object with a 'k' field")
        return cls(data["k"], data.get("infinite_edges", ()))

    @classmethod
    def preset(cls, name):
        """Build one of the named families: free(k), cycle(k), complete2(k)."""
        m = _PRESET_RE.match(name.replace(" ", ""))
        if not m:
            raise ConfigError("unknown preset %r (expected free(k), cycle(k) "
                              "or complete2(k))" % (name,))
        kind, k = m.group(1), int(m.group(2))
        if kind == "free":
            edges = [(i, j) for i in range(1, k + 1) for j in range(i + 1, k + 1)]
        elif kind == "complete2":
            edges = []
        else:
            if k < 3:
                raise ConfigError("cycle(k) needs k >= 3, got %d" % k)
            ring = {frozenset((i, i % k + 1)) for i in range(1, k + 1)}
            edges = [(i, j) for i in range(1, k + 1) for j in range(i + 1, k + 1)
                     if frozenset((i, j)) not in ring]
        return cls(k, edges)

    def digest(self):
        """Short stable content hash, for report metadata."""
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def __eq__(self, other):
        return (isinstance(other, CoxeterGraph)
                and self.k == other.k and self.edges == other.edges)

    def __hash__(self):
        return hash((self.k, self.edges))

    def __repr__(self):
        return "CoxeterGraph(k=%d, infinite_edges=%s)" % (
            self.k, sorted(sorted(e) for e in self.edges))


# ---------------------------------------------------------------------------
# the word problem
# ---------------------------------------------------------------------------

def check_word(graph, word):
    word = tuple(word)
    for g in word:
        graph._check_gen(g)
    return word


def reduce_word(graph, word):
    """A reduced word equal to ``word`` in the group.

    Single left-to-right stack pass: each incoming letter walks down
    over letters it commutes with; if it meets its own copy the pair
    cancels, otherwise it settles on top of the first blocker.  The
    stack never contains a cancellable pair, so the output is reduced.
    """
    word = check_word(graph, word)
    out = []
    for g in word:
        i = len(out) - 1
        while i >= 0 and out[i] != g and graph.commutes(g, out[i]):
            i -= 1
        if i >= 0 and out[i] == g:
            del out[i]
        else:
            out.append(g)
    return tuple(out)


def normal_form(graph, word):
    """Canonical ShortLex-least representative of the element of ``word``.

    Two words map to equal normal forms iff they define the same group
    element.  The commutation class of the reduced word is linearized
    greedily: at each step emit the smallest generator whose earlier
    dependencies (equal letters and non-commuting letters) are spent.
    """
    red = reduce_word(graph, word)
    n = len(red)
    if n <= 1:
        return red
    deps = [set() for _ in range(n)]
    for i in range(n):
        for j in range(i):
            if red[j] == red[i] or not graph.commutes(red[i], red[j]):
                deps[i].add(j)
    avail = sorted((i for i in range(n) if not deps[i]),
                   key=lambda p: (red[p], p))
    out = []
    done = [False] * n
    while avail:
        pick = avail.pop(0)
        done[pick] = True
        out.append(red[pick])
        for i in range(n):
            if not done[i] and pick in deps[i]:
                deps[i].discard(pick)
                if not deps[i]:
                    avail.append(i)
        avail.sort(key=lambda p: (red[p], p))
    return tuple(out)


def word_length(graph, word):
    return len(reduce_word(graph, word))


def enumerate_sphere(graph, length, max_elements=DEFAULT_SPHERE_BUDGET):
    """All group elements of word length exactly ``length``, as normal forms.

    Breadth-first over generator appends with normal-form dedup.  The
    result is sorted (ShortLex), so enumeration order is deterministic.

    Raises
    ------
    ConfigError
        If the number of stored elements exceeds ``max_elements``; the
        message reports the last completed length.
    """
    if length < 0:
        raise ConfigError("sphere length must be >= 0")
    sphere = {()}
    total = 1
    for lvl in range(1, length + 1):
        nxt = set()
        for w in sphere:
            for g in range(1, graph.k + 1):
                nf = normal_form(graph, w + (g,))
                if len(nf) == lvl:
                    nxt.add(nf)
        total += len(nxt)
        if total > max_elements:
            raise ConfigError(
                "sphere enumeration exceeded the element budget (%d) after "
                "completing length %d" % (max_elements, lvl - 1))
        sphere = nxt
    return sorted(sphere)


def enumerate_ball(graph, radius, max_elements=DEFAULT_SPHERE_BUDGET):
    """All elements of word length ≤ radius, sorted by (length, letters)."""
    out = []
    sphere = {()}
    total = 1
    out.extend(sorted(sphere))
    for lvl in range(1, radius + 1):
        nxt = set()
        for w in sphere:
            for g in range(1, graph.k + 1):
                nf = normal_form(graph, w + (g,))
                if len(nf) == lvl:
                    nxt.add(nf)
        total += len(nxt)
        if total > max_elements:
            raise ConfigError(
                "ball enumeration exceeded the element budget (%d) after "
                "completing length %d" % (max_elements, lvl - 1))
        sphere = nxt
        out.extend(sorted(sphere))
    return out


def random_word(graph, length, rng):
    """Uniform random word (not necessarily reduced) of the given length."""
    return tuple(rng.randrange(1, graph.k + 1) for _ in range(length))
