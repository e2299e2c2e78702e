"""Brute-force ground truth at tiny scale.

Nothing here uses cut vertices, fine actions or the pair searches; only
Stallings folding (to normalize subgroups) and the fact that Whitehead
automorphisms generate the automorphism group.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations
from math import gcd
from typing import Iterable

from .graphs import LabeledGraph, SubgroupPresentation, canonical_graph, rose, spanning_basis, unpointed_core
from .words import (
    Automorphism,
    CyclicWord,
    Word,
    cyclic_reduce,
    exponent_sums,
    whitehead_automorphisms,
    words_of_length,
)

MAX_ORACLE_RANK = 3
MAX_ORACLE_RADIUS = 6
MAX_ORACLE_EDGES = 6


@dataclass(frozen=True)
class AutomorphismBall:
    rank: int
    radius: int
    elements: frozenset  # of Automorphism


def enumerate_automorphisms(rank: int, radius: int) -> AutomorphismBall:
    """All products of at most ``radius`` Whitehead automorphisms, deduplicated."""
    if rank > MAX_ORACLE_RANK or radius > MAX_ORACLE_RADIUS:
        raise ValueError(f"oracle guard: rank <= {MAX_ORACLE_RANK} and radius <= {MAX_ORACLE_RADIUS}")
    gens = list(whitehead_automorphisms(rank))
    ident = Automorphism.identity(rank)
    seen = {ident}
    frontier = [ident]
    for _ in range(radius):
        nxt = []
        for f in frontier:
            for phi in gens:
                g = f.then(phi)
                if g not in seen:
                    seen.add(g)
                    nxt.append(g)
        frontier = nxt
    return AutomorphismBall(rank, radius, frozenset(seen))


def abelian_gcd(w: Word) -> int:
    g = 0
    for e in exponent_sums(w.letters, w.rank):
        g = gcd(g, e)
    return g


def abelianization_allows_primitive(w: Word) -> bool:
    """Necessary condition: exponent sums of a primitive element have gcd 1."""
    return abelian_gcd(w) == 1


def oracle_is_primitive(w: Word, radius: int = MAX_ORACLE_RADIUS, max_length: int | None = None) -> bool | None:
    """``True`` if some product of at most ``radius`` Whitehead automorphisms
    sends the class of ``w`` to a letter; ``None`` (unknown) otherwise.

    The orbit is explored breadth-first on cyclic words, discarding words
    longer than ``max_length`` (default: the cyclic length plus 2).
    """
    if radius > MAX_ORACLE_RADIUS:
        raise ValueError("oracle guard: radius too large")
    start = cyclic_reduce(w)[0]
    if len(start) == 0:
        return None
    if len(start) == 1:
        return True
    limit = len(start) + 2 if max_length is None else max_length
    gens = list(whitehead_automorphisms(w.rank))
    seen = {start}
    frontier = [start]
    for _ in range(radius):
        nxt = []
        for c in frontier:
            for phi in gens:
                d = phi(c)
                if len(d) == 1:
                    return True
                if len(d) <= limit and d not in seen:
                    seen.add(d)
                    nxt.append(d)
        frontier = nxt
    return None


# ---------------------------------------------------------------------------
# free factor classes and inclusion

def _core_of(words: Iterable[Word], rank: int) -> LabeledGraph:
    return canonical_graph(unpointed_core(SubgroupPresentation(rank, tuple(words))))


def enumerate_factor_classes(rank: int, max_edges: int, slack: int = 2) -> list[LabeledGraph]:
    """Canonical cores of all proper free factor classes with at most ``max_edges`` edges.

    Closure of the standard factors under Whitehead automorphisms applied to
    generator words, passing through cores of up to ``max_edges + slack`` edges.
    """
    if rank > MAX_ORACLE_RANK:
        raise ValueError("oracle guard: rank too large")
    if max_edges + slack > MAX_ORACLE_EDGES:
        raise ValueError(f"oracle guard: at most {MAX_ORACLE_EDGES} core edges")
    autos = list(whitehead_automorphisms(rank))
    seen: dict[LabeledGraph, tuple[Word, ...]] = {}
    queue: deque = deque()
    for k in range(1, rank):
        for labels in _subsets(rank, k):
            g = rose(rank, labels).with_basepoint(None)
            g = canonical_graph(g)
            if g not in seen:
                seen[g] = tuple(Word(rank, (l,)) for l in labels)
                queue.append(g)
    bound = max_edges + slack
    while queue:
        g = queue.popleft()
        gens = seen[g]
        for phi in autos:
            img = tuple(phi(w) for w in gens)
            h = _core_of(img, rank)
            if h.num_edges <= bound and h not in seen:
                seen[h] = tuple(spanning_basis(h.with_basepoint(0)))
                queue.append(h)
    out = [g for g in seen if g.num_edges <= max_edges]
    out.sort(key=lambda g: (g.num_edges, g.num_vertices, g.edges))
    return out


def _subsets(rank: int, k: int):
    return [list(c) for c in combinations(range(1, rank + 1), k)]


def oracle_includes(small: LabeledGraph, big: LabeledGraph) -> bool:
    """Whether some vertex map sends every edge of ``small`` onto an equally
    labeled, equally oriented edge of ``big``; plain backtracking."""
    edge_set = set(big.edges)
    order = list(range(small.num_vertices))
    assign: dict[int, int] = {}

    def consistent(v: int) -> bool:
        for s, t, lab in small.edges:
            if s in assign and t in assign and (v in (s, t)):
                if (assign[s], assign[t], lab) not in edge_set:
                    return False
        return True

    def back(i: int) -> bool:
        if i == len(order):
            return True
        v = order[i]
        for u in range(big.num_vertices):
            assign[v] = u
            if consistent(v) and back(i + 1):
                return True
            del assign[v]
        return False

    return back(0)


def closed_cycles(g: LabeledGraph, max_length: int) -> set[CyclicWord]:
    """Cyclic words read along closed reduced cycles of ``g`` up to a length.

    A cyclic word is read on such a cycle exactly when its conjugacy class
    meets the subgroup carried by ``g``.
    """
    star: list[list[tuple[int, int]]] = [[] for _ in range(g.num_vertices)]
    for s, t, lab in g.edges:
        star[s].append((lab, t))
        star[t].append((-lab, s))
    out: set[CyclicWord] = set()

    def walk(start: int, v: int, path: list[int]) -> None:
        if path and v == start and path[0] != -path[-1]:
            out.add(CyclicWord(g.rank, tuple(path)))
        if len(path) == max_length:
            return
        for lab, u in star[v]:
            if path and lab == -path[-1]:
                continue
            path.append(lab)
            walk(start, u, path)
            path.pop()

    for v in range(g.num_vertices):
        walk(v, v, [])
    return out


class FactorTable:
    """Bounded piece of the free factor complex: classes and inclusions."""

    def __init__(self, rank: int, max_edges: int, slack: int = 2):
        self.rank = rank
        self.max_edges = max_edges
        self.classes = enumerate_factor_classes(rank, max_edges, slack)
        self.index = {g: i for i, g in enumerate(self.classes)}
        ranks = [g.euler_rank() for g in self.classes]
        self.adj: list[set[int]] = [set() for _ in self.classes]
        cyclic_ids: dict[CyclicWord, int | None] = {}
        for j, big in enumerate(self.classes):
            if ranks[j] < 2:
                continue
            # rank-1 classes inside: cycles of big with at most max_edges letters
            for c in closed_cycles(big, max_edges):
                if c not in cyclic_ids:
                    cyclic_ids[c] = self.index.get(_core_of([c.as_word()], rank))
                i = cyclic_ids[c]
                if i is not None and ranks[i] == 1:
                    self._link(i, j)
            for i, small in enumerate(self.classes):
                if 1 < ranks[i] < ranks[j] and small.labels_used() <= big.labels_used():
                    if oracle_includes(small, big):
                        self._link(i, j)

    def _link(self, i: int, j: int) -> None:
        self.adj[i].add(j)
        self.adj[j].add(i)

    def distances_from(self, i: int, max_depth: int | None = None) -> dict[int, int]:
        """Breadth-first distances from class ``i``, optionally cut at a depth."""
        dist = {i: 0}
        queue = deque([i])
        while queue:
            u = queue.popleft()
            if max_depth is not None and dist[u] >= max_depth:
                continue
            for v in self.adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist

    def image_index(self, phi: Automorphism, i: int) -> int | None:
        """Index of the image class under ``phi``, if it lies in the table."""
        basis = spanning_basis(self.classes[i].with_basepoint(0))
        return self.index.get(_core_of([phi(w) for w in basis], self.rank))

    def distance(self, g1: LabeledGraph, g2: LabeledGraph) -> int | None:
        i, j = self.index.get(canonical_graph(g1)), self.index.get(canonical_graph(g2))
        if i is None or j is None:
            return None
        return self.distances_from(i).get(j)


def orbit_distances(table: FactorTable, sources: list[int], radius: int = 1,
                    max_depth: int = 3) -> list[list[int | None]]:
    """Table distances between ``sources``, minimized over an automorphism ball.

    Automorphisms are isometries of the complex, so moving both ends by the
    same automorphism lets paths through classes larger than the table bound
    be seen inside it.  Entries above ``max_depth`` are ``None``.
    """
    ball = enumerate_automorphisms(table.rank, radius).elements
    actions = set()
    for phi in ball:
        actions.add(tuple(table.image_index(phi, i) for i in sources))
    n = len(sources)
    best: list[list[int | None]] = [[None] * n for _ in range(n)]
    for a, image in enumerate(actions):
        for i in range(n):
            if image[i] is None:
                continue
            dist = table.distances_from(image[i], max_depth)
            row = best[i]
            for j in range(n):
                d = dist.get(image[j]) if image[j] is not None else None
                if d is not None and (row[j] is None or d < row[j]):
                    row[j] = d
    return best


def oracle_distance(g1: LabeledGraph, g2: LabeledGraph, complexity_bound: int,
                    radius: int = 1, slack: int = 0) -> int | None:
    """Distance through classes with at most ``complexity_bound`` core edges,
    after moving both ends by automorphisms in a small ball; ``None`` if no
    path of length at most 3 is seen."""
    table = FactorTable(g1.rank, complexity_bound, slack)
    ends = [table.index.get(canonical_graph(g1)), table.index.get(canonical_graph(g2))]
    if None in ends:
        raise ValueError("oracle guard: inputs exceed the complexity bound")
    return orbit_distances(table, ends, radius)[0][1]


def cyclic_words_up_to(rank: int, length: int) -> list[CyclicWord]:
    """Distinct conjugacy classes of nontrivial words up to a length."""
    out = set()
    for n in range(1, length + 1):
        for tup in words_of_length(rank, n, cyclic=True):
            out.add(CyclicWord(rank, tup))
    return sorted(out, key=lambda c: (len(c), c.letters))
