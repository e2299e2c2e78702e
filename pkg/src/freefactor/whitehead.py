"""Whitehead graphs, cut vertices, and Whitehead automorphisms acting on core graphs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .graphs import LabeledGraph, core, fold, pointed_core
from .words import (
    CyclicWord,
    Letter,
    WhiteheadAutomorphism,
    all_letters,
    inverse,
    letter_key,
    letter_name,
)

MISSING_INVERSE = "missing-inverse-component"
ARTICULATION = "articulation"


def _arc(p: Letter, q: Letter) -> tuple[Letter, Letter]:
    return (p, q) if letter_key(p) <= letter_key(q) else (q, p)


@dataclass(frozen=True)
class WhiteheadGraph:
    """Multigraph on the 2n letters; ``arcs`` is a sorted multiset of pairs."""

    rank: int
    arcs: tuple[tuple[Letter, Letter], ...]

    def __post_init__(self):
        arcs = tuple(sorted((_arc(p, q) for p, q in self.arcs),
                            key=lambda a: (letter_key(a[0]), letter_key(a[1]))))
        object.__setattr__(self, "arcs", arcs)

    def adjacency(self) -> dict[Letter, list[Letter]]:
        adj: dict[Letter, list[Letter]] = {l: [] for l in all_letters(self.rank)}
        for p, q in self.arcs:
            adj[p].append(q)
            adj[q].append(p)
        return adj

    def degree(self, letter: Letter) -> int:
        return sum((p == letter) + (q == letter) for p, q in self.arcs)

    def arc_set(self) -> frozenset:
        return frozenset(self.arcs)

    def components(self, removed: Letter | None = None) -> list[frozenset]:
        adj = self.adjacency()
        seen = set() if removed is None else {removed}
        out = []
        for l in all_letters(self.rank):
            if l in seen:
                continue
            comp = {l}
            seen.add(l)
            stack = [l]
            while stack:
                u = stack.pop()
                for w in adj[u]:
                    if w not in seen:
                        seen.add(w)
                        comp.add(w)
                        stack.append(w)
            out.append(frozenset(comp))
        return out

    def component_of(self, letter: Letter) -> frozenset:
        return next(c for c in self.components() if letter in c)

    def to_dot(self, name: str = "W") -> str:
        lines = [f"graph {name} {{"]
        for l in all_letters(self.rank):
            lines.append(f'  {_dot_name(l)} [label="{letter_name(l, self.rank)}"];')
        for p, q in self.arcs:
            lines.append(f"  {_dot_name(p)} -- {_dot_name(q)};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _dot_name(l: Letter) -> str:
    return f"x{l}" if l > 0 else f"X{-l}"


def whitehead_graph_of_word(w: CyclicWord) -> WhiteheadGraph:
    """One arc from the inverse of each letter to its cyclic successor."""
    n = len(w)
    if n == 0:
        raise ValueError("the trivial word has no Whitehead graph")
    arcs = [(inverse(w[i]), w[(i + 1) % n]) for i in range(n)]
    return WhiteheadGraph(w.rank, tuple(arcs))


def whitehead_graph_of_graph(g: LabeledGraph) -> WhiteheadGraph:
    """Union over vertices of the complete graph on the letters at the vertex."""
    arcs = []
    for v in range(g.num_vertices):
        ls = sorted(g.letters_at(v), key=letter_key)
        for i in range(len(ls)):
            for j in range(i + 1, len(ls)):
                arcs.append((ls[i], ls[j]))
    return WhiteheadGraph(g.rank, tuple(arcs))


@dataclass(frozen=True)
class CutVertexWitness:
    vertex: Letter
    kind: str
    component: frozenset

    def __post_init__(self):
        if not self.component:
            raise ValueError("cut vertex component must be nonempty")
        if self.vertex in self.component or inverse(self.vertex) in self.component:
            raise ValueError("component must avoid the cut vertex and its inverse")


def _least(c: Iterable[Letter]) -> int:
    return min(letter_key(l) for l in c)


def find_cut_vertex(wg: WhiteheadGraph) -> CutVertexWitness | None:
    """Cut vertex and the letter set A it yields, or ``None``.

    Letters are scanned x1, X1, x2, ...; a letter whose component misses its
    inverse wins over any articulation point.  For an articulation point the
    smallest piece avoiding the inverse is taken, ties broken by least letter.
    """
    letters = all_letters(wg.rank)
    comps = wg.components()
    comp_of = {l: c for c in comps for l in c}
    for a in letters:
        c = comp_of[a]
        if inverse(a) not in c and len(c) > 1:
            return CutVertexWitness(a, MISSING_INVERSE, c - {a})
    for a in letters:
        c = comp_of[a]
        if len(c) <= 2:
            continue
        pieces = [p for p in wg.components(removed=a) if p <= c]
        if len(pieces) < 2:
            continue
        ok = [p for p in pieces if inverse(a) not in p]
        best = min(ok, key=lambda p: (len(p), _least(p)))
        return CutVertexWitness(a, ARTICULATION, best)
    return None


def automorphism_from_witness(wit: CutVertexWitness, rank: int) -> WhiteheadAutomorphism:
    return WhiteheadAutomorphism(rank, wit.vertex, frozenset(wit.component))


# ---------------------------------------------------------------------------
# subdivision and fine actions

@dataclass(frozen=True)
class Subdivision:
    """Subdivided graph; old vertices keep their ids, ``edge_map[i]`` is the
    new id of the edge carrying the original label of old edge ``i``."""

    graph: LabeledGraph
    edge_map: tuple[int, ...]
    old_vertices: int


def _half_edge(u: int, v: int, letter: Letter) -> tuple[int, int, int]:
    """Edge read as ``letter`` when walking from u to v."""
    return (u, v, letter) if letter > 0 else (v, u, -letter)


def subdivide_with_map(phi: WhiteheadAutomorphism, g: LabeledGraph) -> Subdivision:
    if phi.rank != g.rank:
        raise ValueError("rank mismatch between automorphism and graph")
    a = phi.acting
    n = g.num_vertices
    edges = []
    edge_map = []
    for s, t, lab in g.edges:
        front = lab in phi.acted_on
        back = -lab in phi.acted_on
        u = s
        if front:
            edges.append(_half_edge(s, n, a))
            u = n
            n += 1
        w = t
        tail = None
        if back:
            tail = _half_edge(n, t, inverse(a))
            w = n
            n += 1
        edge_map.append(len(edges))
        edges.append((u, w, lab))
        if tail is not None:
            edges.append(tail)
    bp = g.basepoint
    return Subdivision(LabeledGraph(g.rank, n, tuple(edges), bp), tuple(edge_map), g.num_vertices)


def subdivide(phi: WhiteheadAutomorphism, g: LabeledGraph) -> LabeledGraph:
    """Rewrite each edge so that it spells the image of its label under ``phi``."""
    return subdivide_with_map(phi, g).graph


def apply_whitehead_to_subgroup(phi: WhiteheadAutomorphism, core_h: LabeledGraph) -> LabeledGraph:
    """Unpointed core of the image subgroup."""
    return core(fold(subdivide(phi, core_h).with_basepoint(None))[0])


def apply_whitehead_pointed(phi: WhiteheadAutomorphism, pcore: LabeledGraph) -> LabeledGraph:
    """Pointed core of the image subgroup; ``pcore`` carries a basepoint."""
    return pointed_core(fold(subdivide(phi, pcore))[0])


@dataclass(frozen=True)
class TrichotomyReport:
    cases: tuple[str, ...]
    acting_edges: tuple[int, ...]   # per case-III vertex, the edge it reads the acting letter along

    @property
    def case_iii_count(self) -> int:
        return sum(1 for c in self.cases if c == "III")

    def vertices(self, case: str) -> list[int]:
        return [v for v, c in enumerate(self.cases) if c == case]


def classify_vertex(phi: WhiteheadAutomorphism, letters: frozenset) -> str | None:
    a, A = phi.acting, phi.acted_on
    if not letters & A:
        return "I"
    if letters <= A:
        return "II"
    if a in letters and letters <= A | {a}:
        return "III"
    return None


def trichotomy(phi: WhiteheadAutomorphism, core_h: LabeledGraph) -> TrichotomyReport | None:
    """Per-vertex case of a fine action, or ``None`` if the action is not fine."""
    cases = []
    acting_edges = []
    for v in range(core_h.num_vertices):
        letters = core_h.letters_at(v)
        c = classify_vertex(phi, letters)
        if c is None:
            return None
        if inverse(phi.acting) in letters and c != "I":
            raise AssertionError("a vertex reading the inverse acting letter must be case I")
        if c == "III":
            es = [e for l, e, _ in core_h.star[v] if l == phi.acting]
            if len(es) != 1:
                raise AssertionError("case III vertex must read the acting letter exactly once")
            acting_edges.append(es[0])
        cases.append(c)
    return TrichotomyReport(tuple(cases), tuple(acting_edges))


def collapse_quotient(phi: WhiteheadAutomorphism, core_h: LabeledGraph,
                      report: TrichotomyReport) -> LabeledGraph:
    """Contract the acting-letter edge at every case-III vertex."""
    if len(report.cases) != core_h.num_vertices:
        raise ValueError("trichotomy report does not match the graph")
    parent = list(range(core_h.num_vertices))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    dropped = set(report.acting_edges)
    for e in report.acting_edges:
        s, t, _ = core_h.edges[e]
        rs, rt = find(s), find(t)
        if rs == rt:
            raise ValueError("contracted edge closes a loop")
        parent[max(rs, rt)] = min(rs, rt)
    reps = sorted({find(v) for v in range(core_h.num_vertices)})
    index = {r: k for k, r in enumerate(reps)}
    edges = tuple((index[find(s)], index[find(t)], lab)
                  for i, (s, t, lab) in enumerate(core_h.edges) if i not in dropped)
    bp = None if core_h.basepoint is None else index[find(core_h.basepoint)]
    return LabeledGraph(core_h.rank, len(reps), edges, bp)


def whitehead_step_graph(core_h: LabeledGraph) -> WhiteheadAutomorphism | None:
    """Automorphism read off a cut vertex of the core graph's Whitehead graph."""
    wit = find_cut_vertex(whitehead_graph_of_graph(core_h))
    if wit is None:
        return None
    return automorphism_from_witness(wit, core_h.rank)
