"""Interval-graph combinatorics: connectivity, the lace prescription,
compatible edges, and lace enumeration.

A graph on an integer interval [a, b] is a set of edges (s, t) with
a <= s < t <= b.  It is connected when a and b are endpoints of edges and
every interior point c is strictly covered by some edge (s < c < t); this
is interval covering, not path connectivity.  A lace is a minimally
connected graph.  The prescription lace_of maps any connected graph to a
unique lace inside it, and an edge is compatible with a lace L when
adding it and re-applying the prescription returns L again.
"""

from dataclasses import dataclass
from functools import lru_cache


def _check_edges(a, b, edges):
    for s, t in edges:
        if not (a <= s < t <= b):
            raise ValueError(f"edge ({s},{t}) not inside [{a},{b}]")


@dataclass(frozen=True)
class IntervalGraph:
    """Edge set on an integer interval [a, b], stored sorted."""

    a: int
    b: int
    edges: tuple

    def __post_init__(self):
        if self.a >= self.b:
            raise ValueError("interval needs a < b")
        srt = tuple(sorted(set(map(tuple, self.edges))))
        _check_edges(self.a, self.b, srt)
        object.__setattr__(self, "edges", srt)


@dataclass(frozen=True)
class Lace:
    """A minimally connected interval graph with its edges in lace order."""

    a: int
    b: int
    edges: tuple  # ordered (s_1 t_1, ..., s_N t_N), increasing t

    @property
    def size(self) -> int:
        return len(self.edges)

    def as_graph(self) -> IntervalGraph:
        return IntervalGraph(self.a, self.b, self.edges)


def is_connected(g: IntervalGraph) -> bool:
    """Interval connectivity of Definition-style covering."""
    return edges_connected(g.a, g.b, g.edges)


def edges_connected(a: int, b: int, edges) -> bool:
    """Same as is_connected but on a bare edge iterable."""
    if not edges:
        return False
    has_a = any(s == a for s, t in edges)
    has_b = any(t == b for s, t in edges)
    if not (has_a and has_b):
        return False
    # every interior integer c (and hence every interior real point,
    # since edges have integer ends) must satisfy s < c < t for some edge;
    # gaps between touching edges (..., c), (c, ...) also disconnect, and
    # those are caught because no edge then covers c strictly
    for c in range(a + 1, b):
        if not any(s < c < t for s, t in edges):
            return False
    # also reject a "touching" split like (a,c),(c,b): covered above since
    # c itself is strictly covered by neither
    return True


def lace_of(g: IntervalGraph) -> Lace:
    """The lace prescribed inside a connected graph.

    t1 is the largest t with (a, t) an edge; after that each t_{i+1} is
    the largest t reachable by an edge starting before t_i, and s_{i+1}
    the smallest such start.  Terminates when t hits b.
    """
    edges = prescribe(g.a, g.b, g.edges)
    return Lace(g.a, g.b, edges)


def prescribe(a: int, b: int, edges) -> tuple:
    """Lace edges prescribed from a connected edge set; raises if not connected."""
    edges = tuple(edges)
    if not edges_connected(a, b, edges):
        raise ValueError("lace prescription requires a connected graph")
    t1 = max(t for s, t in edges if s == a)
    out = [(a, t1)]
    t_cur = t1
    while t_cur != b:
        candidates = [(s, t) for s, t in edges if s < t_cur and t > t_cur]
        t_next = max(t for s, t in candidates)
        s_next = min(s for s, t in candidates if t == t_next)
        out.append((s_next, t_next))
        t_cur = t_next
    return tuple(out)


def compatible_edges(lace: Lace) -> frozenset:
    """Edges not in the lace whose addition re-prescribes the same lace.

    Computed by direct re-prescription of L + {e} for every candidate
    edge on the interval; the definition is the ground truth, so no
    closed-form interval criterion is used.
    """
    return _compatible_cached(lace.a, lace.b, lace.edges)


@lru_cache(maxsize=200_000)
def _compatible_cached(a: int, b: int, lace_edges: tuple) -> frozenset:
    in_lace = set(lace_edges)
    out = []
    for s in range(a, b):
        for t in range(s + 1, b + 1):
            if (s, t) in in_lace:
                continue
            if prescribe(a, b, lace_edges + ((s, t),)) == lace_edges:
                out.append((s, t))
    return frozenset(out)


def enumerate_laces(a: int, b: int, n_edges: int) -> list:
    """All laces on [a, b] with exactly n_edges edges.

    Generates the ordered endpoint sequences directly: s_1 = a < s_2,
    s_{l+1} < t_l <= s_{l+2}, s_N < t_{N-1} < t_N = b, with every t
    strictly increasing.  For n_edges = 1 the single lace is {(a, b)}.
    """
    if n_edges < 1 or b - a < 1:
        raise ValueError("need n_edges >= 1 and b > a")
    if n_edges == 1:
        return [Lace(a, b, ((a, b),))]
    out = []

    def extend(edges, s_lo, s_hi, t_last):
        # next edge (s, t): s in [s_lo, s_hi), t in (t_last, b]
        depth = len(edges) + 1
        for s in range(s_lo, s_hi):
            for t in range(t_last + 1, b + 1):
                if depth == n_edges:
                    if t == b:
                        out.append(Lace(a, b, edges + ((s, t),)))
                elif t < b:
                    extend(edges + ((s, t),), t_last, t, t)

    for t1 in range(a + 1, b):
        extend(((a, t1),), a + 1, t1, t1)
    return out


def count_laces(a: int, b: int, n_edges: int) -> int:
    return len(enumerate_laces(a, b, n_edges))


def total_lace_count(n: int) -> int:
    """Number of laces of any size on [0, n]."""
    if n < 1:
        return 0
    total = 0
    k = 1
    while True:
        c = count_laces(0, n, k)
        if c == 0 and k > 1:
            break
        total += c
        k += 1
        if k > n:  # each extra edge raises the last t strictly
            break
    return total


def laces_within(by_s: dict, n: int) -> list:
    """All laces on [0, n] whose edges all lie in a given pair set.

    by_s maps a start time s to an increasing list of end times t with
    (s, t) an admitted pair.  Only laces whose last edge ends exactly at
    n are produced, which is all of them since t_N = b.  This is the
    output-sensitive search used by the enumeration kernels, where the
    pair set is the coincidence set of one walk.
    """
    out = []
    ts0 = by_s.get(0)
    if not ts0:
        return out

    def extend(edges, s_lo, s_hi, t_last):
        for s in range(s_lo, s_hi):
            ts = by_s.get(s)
            if not ts:
                continue
            for t in ts:
                if t <= t_last:
                    continue
                if t == n:
                    out.append(edges + ((s, t),))
                elif t < n:
                    extend(edges + ((s, t),), t_last, t, t)

    for t1 in ts0:
        if t1 == n:
            out.append(((0, n),))
        elif t1 < n:
            extend(((0, t1),), 1, t1, t1)
    return out
