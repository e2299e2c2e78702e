"""Labeled graphs over the rose R_n: Stallings folding, core graphs, pullbacks.

Vertices are dense integers ``0 .. num_vertices - 1``; an edge is a triple
``(source, target, label)`` with ``label`` a generator index.  Reading an edge
forwards spells ``x_label``, backwards ``x_label^-1``; the letters at a vertex
(``L(v)``) are the letters read when leaving it.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

from .words import Letter, Word, free_reduce, letter_key, letter_name


@dataclass(frozen=True)
class LabeledGraph:
    rank: int
    num_vertices: int
    edges: tuple[tuple[int, int, int], ...] = ()
    basepoint: int | None = None

    def __post_init__(self):
        edges = tuple(tuple(e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        for s, t, lab in edges:
            if not (0 <= s < self.num_vertices and 0 <= t < self.num_vertices):
                raise ValueError(f"edge endpoint out of range: {(s, t, lab)}")
            if not 1 <= lab <= self.rank:
                raise ValueError(f"edge label {lab} out of range for rank {self.rank}")
        if self.basepoint is not None and not 0 <= self.basepoint < self.num_vertices:
            raise ValueError("basepoint is not a vertex")

    # -- incidence -------------------------------------------------------

    @cached_property
    def star(self) -> tuple[tuple[tuple[Letter, int, int], ...], ...]:
        """Per vertex: ``(letter, edge index, far endpoint)`` for each half-edge."""
        star: list[list] = [[] for _ in range(self.num_vertices)]
        for i, (s, t, lab) in enumerate(self.edges):
            star[s].append((lab, i, t))
            star[t].append((-lab, i, s))
        return tuple(tuple(sorted(x, key=lambda h: (letter_key(h[0]), h[1]))) for x in star)

    @cached_property
    def step(self) -> tuple[dict, ...]:
        """Per vertex: letter -> far endpoint.  Meaningful for folded graphs."""
        return tuple({l: u for l, _, u in hs} for hs in self.star)

    def letters_at(self, v: int) -> frozenset:
        return frozenset(l for l, _, _ in self.star[v])

    def degree(self, v: int) -> int:
        return len(self.star[v])

    def labels_used(self) -> frozenset:
        return frozenset(lab for _, _, lab in self.edges)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def euler_rank(self) -> int:
        """Rank of pi_1 for a connected graph: |E| - |V| + 1."""
        return len(self.edges) - self.num_vertices + 1

    def size(self) -> tuple[int, int]:
        return self.num_vertices, len(self.edges)

    def is_folded(self) -> bool:
        return all(len({l for l, _, _ in hs}) == len(hs) for hs in self.star)

    def is_core(self) -> bool:
        return all(len(hs) >= 2 for hs in self.star)

    def components(self) -> list[list[int]]:
        seen = [False] * self.num_vertices
        comps = []
        for v in range(self.num_vertices):
            if seen[v]:
                continue
            seen[v] = True
            comp, queue = [], [v]
            while queue:
                u = queue.pop()
                comp.append(u)
                for _, _, w in self.star[u]:
                    if not seen[w]:
                        seen[w] = True
                        queue.append(w)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return self.num_vertices > 0 and len(self.components()) == 1

    def with_basepoint(self, v: int | None) -> "LabeledGraph":
        return LabeledGraph(self.rank, self.num_vertices, self.edges, v)

    def read(self, start: int, letters: Sequence[Letter]) -> int | None:
        """End vertex of the path spelling ``letters`` from ``start`` (folded graphs)."""
        v = start
        for l in letters:
            v = self.step[v].get(l)
            if v is None:
                return None
        return v

    def contains(self, w: Word) -> bool:
        """Membership of ``w`` in the subgroup carried by a folded pointed graph."""
        if self.basepoint is None:
            raise ValueError("membership needs a basepoint")
        return self.read(self.basepoint, w.letters) == self.basepoint

    def subgraph(self, edge_ids: Sequence[int], keep_basepoint: bool = False) -> "LabeledGraph":
        """Subgraph spanned by the given edges, vertices renumbered in order."""
        verts = sorted({v for i in edge_ids for v in self.edges[i][:2]}
                       | ({self.basepoint} if keep_basepoint and self.basepoint is not None else set()))
        index = {v: k for k, v in enumerate(verts)}
        edges = tuple((index[self.edges[i][0]], index[self.edges[i][1]], self.edges[i][2])
                      for i in sorted(edge_ids))
        bp = index.get(self.basepoint) if keep_basepoint else None
        return LabeledGraph(self.rank, len(verts), edges, bp)

    def to_dot(self, name: str = "G") -> str:
        lines = [f"digraph {name} {{"]
        for v in range(self.num_vertices):
            shape = "doublecircle" if v == self.basepoint else "circle"
            lines.append(f'  v{v} [shape={shape}, label="{v}"];')
        for s, t, lab in self.edges:
            lines.append(f'  v{s} -> v{t} [label="x{lab}", tooltip="{letter_name(lab, self.rank)}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SubgroupPresentation:
    rank: int
    generators: tuple[Word, ...]

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        for g in gens:
            if g.rank != self.rank:
                raise ValueError("generator rank mismatch")
            if g.is_trivial():
                raise ValueError("trivial generators are not allowed")

    @classmethod
    def parse(cls, texts: Sequence[str], rank: int) -> "SubgroupPresentation":
        return cls(rank, tuple(Word.parse(t, rank) for t in texts))

    def __str__(self) -> str:
        return "<" + ", ".join(str(g) for g in self.generators) + ">"


# ---------------------------------------------------------------------------
# construction and folding

def graph_from_words(gens: SubgroupPresentation) -> LabeledGraph:
    """Bouquet of subdivided loops at basepoint 0, loop i spelling generator i."""
    if not gens.generators:
        raise ValueError("empty generator list: trivial subgroup has no graph")
    edges = []
    n = 1
    for w in gens.generators:
        prev = 0
        for k, l in enumerate(w.letters):
            if k == len(w) - 1:
                nxt = 0
            else:
                nxt = n
                n += 1
            edges.append((prev, nxt, l) if l > 0 else (nxt, prev, -l))
            prev = nxt
    return LabeledGraph(gens.rank, n, tuple(edges), 0)


@dataclass(frozen=True)
class FoldStep:
    vertex: int          # representative (original id) of the common endpoint
    letter: Letter       # letter read from ``vertex`` along both edges
    edges: tuple[int, int]
    rank_preserving: bool

    @property
    def label(self) -> int:
        return abs(self.letter)


@dataclass(frozen=True)
class FoldTrace:
    steps: tuple[FoldStep, ...]
    vertex_map: tuple[int, ...]
    intermediate: tuple[LabeledGraph, ...] = field(default=(), compare=False)

    def label_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for s in self.steps:
            counts[s.label] = counts.get(s.label, 0) + 1
        return counts

    def rank_preserving_count(self) -> int:
        return sum(1 for s in self.steps if s.rank_preserving)


class _Folder:
    """Mutable folding state; vertices keep original ids, merged into the smaller."""

    def __init__(self, g: LabeledGraph):
        self.g = g
        self.parent = list(range(g.num_vertices))
        self.src = [e[0] for e in g.edges]
        self.tgt = [e[1] for e in g.edges]
        self.alive = [True] * len(g.edges)
        self.inc: list[dict] = [{} for _ in range(g.num_vertices)]
        self.pending: set = set()
        for i, (s, t, lab) in enumerate(g.edges):
            self._attach(s, lab, i)
            self._attach(t, -lab, i)

    def find(self, v: int) -> int:
        while self.parent[v] != v:
            self.parent[v] = self.parent[self.parent[v]]
            v = self.parent[v]
        return v

    def _attach(self, v: int, letter: Letter, e: int) -> None:
        lst = self.inc[v].setdefault(letter, [])
        lst.append(e)
        if len(lst) > 1:
            self.pending.add((v, letter))

    def _far(self, e: int, letter: Letter) -> int:
        return self.find(self.tgt[e] if letter > 0 else self.src[e])

    def candidates(self) -> list:
        live = [(v, l) for v, l in self.pending
                if self.parent[v] == v and len(self.inc[v].get(l, ())) > 1]
        self.pending = set(live)
        return live

    def fold(self, v: int, letter: Letter, e1: int, e2: int) -> FoldStep:
        u1, u2 = self._far(e1, letter), self._far(e2, letter)
        self.alive[e2] = False
        s2, t2 = self.find(self.src[e2]), self.find(self.tgt[e2])
        lab = abs(letter)
        self.inc[s2][lab].remove(e2)
        self.inc[t2][-lab].remove(e2)
        if u1 != u2:
            keep, drop = min(u1, u2), max(u1, u2)
            self.parent[drop] = keep
            for l, lst in self.inc[drop].items():
                for e in lst:
                    self._attach(keep, l, e)
            self.inc[drop] = {}
        return FoldStep(v, letter, (e1, e2), u1 != u2)

    def snapshot(self) -> tuple[LabeledGraph, list[int]]:
        reps = sorted({self.find(v) for v in range(self.g.num_vertices)})
        index = {r: k for k, r in enumerate(reps)}
        edges = tuple((index[self.find(self.src[i])], index[self.find(self.tgt[i])], self.g.edges[i][2])
                      for i in range(len(self.alive)) if self.alive[i])
        vmap = [index[self.find(v)] for v in range(self.g.num_vertices)]
        bp = self.g.basepoint
        return LabeledGraph(self.g.rank, len(reps), edges, None if bp is None else vmap[bp]), vmap


def fold(g: LabeledGraph, rng: random.Random | None = None,
         keep_intermediate: bool = False) -> tuple[LabeledGraph, FoldTrace]:
    """Fold ``g`` completely, recording every identification.

    Without ``rng`` the next fold is the one at the lowest vertex, lowest
    label, outgoing before incoming, using the two lowest edge ids.  With an
    ``rng`` both the fold and the edge pair are drawn at random.
    """
    f = _Folder(g)
    steps = []
    snaps = []
    while True:
        cands = f.candidates()
        if not cands:
            break
        if rng is None:
            v, l = min(cands, key=lambda c: (c[0], abs(c[1]), c[1] < 0))
            lst = sorted(f.inc[v][l])
            e1, e2 = lst[0], lst[1]
        else:
            v, l = rng.choice(sorted(cands))
            e1, e2 = rng.sample(sorted(f.inc[v][l]), 2)
        steps.append(f.fold(v, l, e1, e2))
        if keep_intermediate:
            snaps.append(f.snapshot()[0])
    out, vmap = f.snapshot()
    return out, FoldTrace(tuple(steps), tuple(vmap), tuple(snaps))


def folded(g: LabeledGraph) -> LabeledGraph:
    return fold(g)[0]


def _prune(g: LabeledGraph, protect: int | None) -> LabeledGraph:
    inc: list[list[tuple[int, int]]] = [[] for _ in range(g.num_vertices)]
    for i, (s, t, _) in enumerate(g.edges):
        inc[s].append((i, t))
        inc[t].append((i, s))
    deg = [len(x) for x in inc]
    alive_e = [True] * g.num_edges
    alive_v = [True] * g.num_vertices
    queue = [v for v in range(g.num_vertices) if deg[v] <= 1 and v != protect]
    while queue:
        v = queue.pop()
        if not alive_v[v] or v == protect or deg[v] > 1:
            continue
        alive_v[v] = False
        for e, u in inc[v]:
            if alive_e[e]:
                alive_e[e] = False
                deg[v] -= 1
                deg[u] -= 1
                if u != protect and deg[u] <= 1 and alive_v[u]:
                    queue.append(u)
    keep = [i for i in range(g.num_edges) if alive_e[i]]
    if not keep:
        raise ValueError("graph is a tree: the trivial subgroup has no core graph")
    return g.subgraph(keep, keep_basepoint=protect is not None)


def core(g: LabeledGraph) -> LabeledGraph:
    """Unpointed core: repeatedly delete valence-1 vertices."""
    return _prune(g, None)


def pointed_core(g: LabeledGraph) -> LabeledGraph:
    if g.basepoint is None:
        raise ValueError("pointed core needs a basepoint")
    return _prune(g, g.basepoint)


def subgroup_core(gens: SubgroupPresentation) -> LabeledGraph:
    """The pointed core graph of the subgroup generated by ``gens``."""
    return pointed_core(folded(graph_from_words(gens)))


def unpointed_core(gens: SubgroupPresentation) -> LabeledGraph:
    return core(folded(graph_from_words(gens)))


# ---------------------------------------------------------------------------
# pullback and morphisms

def pullback(g1: LabeledGraph, g2: LabeledGraph) -> LabeledGraph:
    """Fibre product over R_n; vertex (u, v) has id ``u * |V2| + v``."""
    if g1.rank != g2.rank:
        raise ValueError("rank mismatch")
    n2 = g2.num_vertices
    by_label: dict[int, list] = {}
    for s, t, lab in g2.edges:
        by_label.setdefault(lab, []).append((s, t))
    edges = []
    for s1, t1, lab in g1.edges:
        for s2, t2 in by_label.get(lab, ()):
            edges.append((s1 * n2 + s2, t1 * n2 + t2, lab))
    bp = None
    if g1.basepoint is not None and g2.basepoint is not None:
        bp = g1.basepoint * n2 + g2.basepoint
    return LabeledGraph(g1.rank, g1.num_vertices * n2, tuple(edges), bp)


def cyclic_components(g: LabeledGraph) -> list[list[int]]:
    """Components (as vertex lists) carrying a nontrivial cycle."""
    out = []
    for comp in g.components():
        cset = set(comp)
        e = sum(1 for s, _, _ in g.edges if s in cset)
        if e >= len(comp):
            out.append(comp)
    return out


def has_nontrivial_cycle(g: LabeledGraph) -> bool:
    return bool(cyclic_components(g))


def component_graph(g: LabeledGraph, comp: Sequence[int]) -> LabeledGraph:
    cset = set(comp)
    return g.subgraph([i for i, (s, _, _) in enumerate(g.edges) if s in cset])


def _propagate(small: LabeledGraph, big: LabeledGraph, seed: int, image: int) -> tuple[int, ...] | None:
    vmap = [-1] * small.num_vertices
    vmap[seed] = image
    queue = [seed]
    while queue:
        v = queue.pop()
        for l, _, u in small.star[v]:
            w = big.step[vmap[v]].get(l)
            if w is None:
                return None
            if vmap[u] == -1:
                vmap[u] = w
                queue.append(u)
            elif vmap[u] != w:
                return None
    return tuple(vmap)


def find_label_morphisms(small: LabeledGraph, big: LabeledGraph, *, first_only: bool = False) -> list[tuple[int, ...]]:
    """All label-preserving maps ``small -> big`` as vertex maps.

    Both graphs must be folded and ``small`` connected: the image of vertex 0
    determines the whole map, so each vertex of ``big`` is tried as a seed.
    """
    if small.rank != big.rank or small.num_vertices == 0:
        return []
    out = []
    for target in range(big.num_vertices):
        m = _propagate(small, big, 0, target)
        if m is not None:
            out.append(m)
            if first_only:
                break
    return out


def has_label_morphism(small: LabeledGraph, big: LabeledGraph) -> bool:
    return bool(find_label_morphisms(small, big, first_only=True))


def _numbering(g: LabeledGraph, start: int) -> list[int]:
    num = [-1] * g.num_vertices
    num[start] = 0
    order = [start]
    k = 0
    while k < len(order):
        v = order[k]
        k += 1
        for _, _, u in g.star[v]:  # star is sorted by letter
            if num[u] == -1:
                num[u] = len(order)
                order.append(u)
    return num


def _code(g: LabeledGraph, num: list[int]) -> tuple:
    return (g.num_vertices,) + tuple(sorted((num[s], lab, num[t]) for s, t, lab in g.edges))


def canonical_form(g: LabeledGraph) -> tuple:
    """Isomorphism invariant of a connected folded graph (basepoint respected if set)."""
    starts = [g.basepoint] if g.basepoint is not None else range(g.num_vertices)
    best = None
    for s in starts:
        c = _code(g, _numbering(g, s))
        if best is None or c < best:
            best = c
    if g.basepoint is not None:
        best = best + ("*",)
    return best


def canonical_graph(g: LabeledGraph) -> LabeledGraph:
    """Relabel a connected folded graph into its canonical vertex numbering."""
    starts = [g.basepoint] if g.basepoint is not None else range(g.num_vertices)
    best, best_num = None, None
    for s in starts:
        num = _numbering(g, s)
        c = _code(g, num)
        if best is None or c < best:
            best, best_num = c, num
    edges = tuple(sorted((best_num[s], best_num[t], lab) for s, t, lab in g.edges))
    bp = None if g.basepoint is None else best_num[g.basepoint]
    return LabeledGraph(g.rank, g.num_vertices, edges, bp)


def graphs_isomorphic(g1: LabeledGraph, g2: LabeledGraph) -> bool:
    """Label- and orientation-preserving isomorphism of connected folded graphs."""
    if g1.rank != g2.rank or g1.size() != g2.size():
        return False
    return canonical_form(g1) == canonical_form(g2)


# ---------------------------------------------------------------------------
# bases and subgraphs

def spanning_basis(g: LabeledGraph) -> list[Word]:
    """Free basis of pi_1(g, basepoint): one generator per non-tree edge."""
    if g.basepoint is None:
        raise ValueError("spanning basis needs a basepoint")
    path: list = [None] * g.num_vertices
    tree_edges = set()
    path[g.basepoint] = ()
    queue = deque([g.basepoint])
    while queue:
        v = queue.popleft()
        for l, e, u in g.star[v]:
            if path[u] is None:
                path[u] = path[v] + (l,)
                tree_edges.add(e)
                queue.append(u)
    gens = []
    for i, (s, t, lab) in enumerate(g.edges):
        if i in tree_edges or path[s] is None:
            continue
        back = tuple(-l for l in reversed(path[t]))
        gens.append(free_reduce(path[s] + (lab,) + back, g.rank))
    return gens


def connected_edge_sets(g: LabeledGraph, max_size: int | None = None) -> Iterator[frozenset]:
    """Every nonempty edge set spanning a connected subgraph, each exactly once.

    Each set is generated from its least edge; an edge once skipped at some
    branch is banned below it, which rules out duplicates.
    """
    nbrs = [set() for _ in range(g.num_edges)]
    for hs in g.star:
        ids = {e for _, e, _ in hs}
        for e in ids:
            nbrs[e] |= ids
    for root in range(g.num_edges):
        def grow(current: frozenset, ext: list, banned: frozenset):
            yield current
            if max_size is not None and len(current) >= max_size:
                return
            for i, e in enumerate(ext):
                new_banned = banned | frozenset(ext[:i + 1])
                new_ext = ext[i + 1:] + sorted(
                    u for u in nbrs[e]
                    if u > root and u not in current and u not in new_banned and u not in ext)
                yield from grow(current | {e}, new_ext, new_banned)
        start = frozenset([root])
        yield from grow(start, sorted(u for u in nbrs[root] if u > root), start)


def core_subgraphs(g: LabeledGraph, max_edges: int | None = None) -> Iterator[LabeledGraph]:
    """Connected subgraphs in which every vertex has valence at least 2."""
    for es in connected_edge_sets(g, max_edges):
        deg: dict[int, int] = {}
        for i in es:
            s, t, _ = g.edges[i]
            deg[s] = deg.get(s, 0) + 1
            deg[t] = deg.get(t, 0) + 1
        if all(d >= 2 for d in deg.values()):
            yield g.subgraph(sorted(es))


def rose(rank: int, labels: Sequence[int]) -> LabeledGraph:
    return LabeledGraph(rank, 1, tuple((0, 0, lab) for lab in sorted(labels)), 0)


def cycle_graph(w: Sequence[Letter], rank: int) -> LabeledGraph:
    """The cycle reading a cyclically reduced word, basepoint at its start."""
    n = len(w)
    edges = []
    for i, l in enumerate(w):
        j = (i + 1) % n
        edges.append((i, j, l) if l > 0 else (j, i, -l))
    return LabeledGraph(rank, n, tuple(edges), 0)


def read_letters_along(g: LabeledGraph, start: int, letters: Sequence[Letter]) -> list[int]:
    """Vertices visited while reading ``letters`` in a folded graph."""
    out = [start]
    v = start
    for l in letters:
        v = g.step[v][l]
        out.append(v)
    return out
