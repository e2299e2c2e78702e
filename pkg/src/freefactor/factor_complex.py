"""Distances in the complex of free factors.

A vertex is a conjugacy class of proper free factors, stored as its canonical
unpointed core graph.  Distances 0 to 3 are decided exactly.  Distance 4 is
decided when one of the two factors has rank n - 1; otherwise only the
half of the question reachable through the pair search is answered.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .algorithms import is_free_factor_graph
from .graphs import (
    LabeledGraph,
    SubgroupPresentation,
    canonical_graph,
    component_graph,
    core,
    core_subgraphs,
    cyclic_components,
    has_label_morphism,
    pullback,
    spanning_basis,
    unpointed_core,
)
from .whitehead import apply_whitehead_to_subgroup
from .words import WhiteheadAutomorphism, Word, class_level_automorphisms, compose

DEFAULT_STATE_CAP = 10 ** 6


def default_state_cap() -> int:
    value = os.environ.get("FREEFACTOR_STATE_CAP")
    return int(value) if value else DEFAULT_STATE_CAP


class StateCapExceeded(RuntimeError):
    def __init__(self, explored: int):
        super().__init__(f"state cap exceeded after {explored} pair states")
        self.explored = explored


@dataclass(frozen=True)
class FactorClass:
    """Conjugacy class of a free factor; equality is isomorphism of cores."""

    rank: int
    core: LabeledGraph
    factor_rank: int
    generators: tuple[Word, ...] = field(default=(), compare=False, repr=False)

    def describe(self) -> list[str]:
        return [str(g) for g in self.generators]

    def __str__(self) -> str:
        return "[<" + ", ".join(self.describe()) + ">]"

    @property
    def is_proper(self) -> bool:
        return self.factor_rank < self.rank


def class_of_graph(g: LabeledGraph, *, validate: bool = True) -> FactorClass:
    """Class of the subgroup carried by a connected core graph."""
    c = canonical_graph(core(g.with_basepoint(None)))
    if validate and not is_free_factor_graph(c)[0]:
        raise ValueError("the subgroup is not a free factor")
    gens = tuple(spanning_basis(c.with_basepoint(0)))
    return FactorClass(c.rank, c, c.euler_rank(), gens)


def class_of(gens: SubgroupPresentation) -> FactorClass:
    return class_of_graph(unpointed_core(gens))


def _check(c1: FactorClass, c2: FactorClass) -> None:
    if c1.rank != c2.rank:
        raise ValueError("rank mismatch")


def _check_complex(c1: FactorClass, c2: FactorClass) -> None:
    _check(c1, c2)
    if c1.rank < 3:
        raise ValueError("distances are only computed in rank at least 3")
    if not (c1.is_proper and c2.is_proper):
        raise ValueError("vertices of the complex are proper free factors")


def distance_zero(c1: FactorClass, c2: FactorClass) -> bool:
    _check(c1, c2)
    return c1.core == c2.core


def distance_one(c1: FactorClass, c2: FactorClass) -> bool:
    """Inclusion up to conjugacy in either direction, for distinct classes."""
    _check(c1, c2)
    if c1.core == c2.core:
        return False
    return has_label_morphism(c1.core, c2.core) or has_label_morphism(c2.core, c1.core)


def _labels(*graphs: LabeledGraph) -> frozenset:
    out: frozenset = frozenset()
    for g in graphs:
        out |= g.labels_used()
    return out


def _pullback_back(steps: Sequence[WhiteheadAutomorphism], rank: int, labels: Iterable[int]) -> FactorClass:
    """Class of psi(<x_s : s in labels>) with psi undoing ``steps``."""
    psi = compose([phi.inverse() for phi in reversed(steps)], rank)
    words = tuple(psi(Word(rank, (s,))) for s in sorted(labels))
    return class_of(SubgroupPresentation(rank, words))


def intersection_classes(c1: FactorClass, c2: FactorClass) -> list[FactorClass]:
    """Classes of the nontrivial intersections of conjugates of two factors."""
    pb = pullback(c1.core, c2.core)
    return [class_of_graph(core(component_graph(pb, comp))) for comp in cyclic_components(pb)]


def _common_subfactor(c1: FactorClass, c2: FactorClass) -> FactorClass | None:
    for j in intersection_classes(c1, c2):
        if j != c1 and j != c2:
            return j
    return None


class SearchMemo:
    """Facts about pair states that stay true across searches.

    Graphs are interned as small integers so states hash cheaply.  A state is
    dead once a search has exhausted everything reachable from it without
    meeting a goal, and good once it lies on a path to a goal.  Keys carry
    the edge bounds and the search mode, since both shape the moves.
    """

    def __init__(self) -> None:
        self.ids: dict[LabeledGraph, int] = {}
        self.graphs: list[LabeledGraph] = []
        self.labels: list[frozenset] = []
        self.num_edges: list[int] = []
        self.sizes: list[tuple[int, int]] = []
        self.images_of: dict[int, list[int]] = {}
        self.subgraphs: dict[tuple[int, int], tuple[int, ...]] = {}
        self.dead: set = set()
        self.good: dict = {}

    def intern(self, g: LabeledGraph) -> int:
        """Id of a graph already in canonical form."""
        gid = self.ids.get(g)
        if gid is None:
            gid = self.ids[g] = len(self.graphs)
            self.graphs.append(g)
            self.labels.append(g.labels_used())
            self.num_edges.append(g.num_edges)
            self.sizes.append(g.size())
        return gid

    def images(self, gid: int) -> list[int]:
        """Ids of the images of graph ``gid`` under each class-level automorphism."""
        out = self.images_of.get(gid)
        if out is None:
            g = self.graphs[gid]
            out = [self.intern(canonical_graph(apply_whitehead_to_subgroup(phi, g)))
                   for phi in class_level_automorphisms(g.rank)]
            self.images_of[gid] = out
        return out


def _shrink_step(memo: SearchMemo, a: int, b: int):
    (va, ea), (vb, eb) = memo.sizes[a], memo.sizes[b]
    autos = class_level_automorphisms(memo.graphs[a].rank)
    for phi, a2, b2 in zip(autos, memo.images(a), memo.images(b)):
        (va2, ea2), (vb2, eb2) = memo.sizes[a2], memo.sizes[b2]
        if va2 + vb2 < va + vb and ea2 + eb2 < ea + eb:
            return phi, a2, b2
    return None


def common_superfactor(c1: FactorClass, c2: FactorClass,
                       memo: SearchMemo | None = None) -> FactorClass | None:
    """A proper free factor containing conjugates of both, if one exists."""
    _check(c1, c2)
    memo = SearchMemo() if memo is None else memo
    a, b = memo.intern(c1.core), memo.intern(c2.core)
    steps: list[WhiteheadAutomorphism] = []
    while True:
        used = memo.labels[a] | memo.labels[b]
        if len(used) < c1.rank:
            return _pullback_back(steps, c1.rank, used)
        nxt = _shrink_step(memo, a, b)
        if nxt is None:
            return None
        phi, a, b = nxt
        steps.append(phi)


def _distance_two(c1: FactorClass, c2: FactorClass,
                  memo: SearchMemo | None = None) -> FactorClass | None:
    j = _common_subfactor(c1, c2)
    if j is not None:
        return j
    return common_superfactor(c1, c2, memo)


def distance_two(c1: FactorClass, c2: FactorClass) -> bool:
    """Nontrivial intersection or a common proper superfactor, up to conjugacy."""
    _check_complex(c1, c2)
    return _distance_two(c1, c2) is not None


# ---------------------------------------------------------------------------
# pair-state search

class PairSearch:
    """Breadth-first search over pairs of bounded core graphs.

    With ``subgraph_first`` false, the first coordinate follows the image of
    the first factor exactly while the second may pass to any connected core
    subgraph; with it true both coordinates may.  A goal state uses only a
    proper subset of the labels.
    """

    def __init__(self, rank: int, state_cap: int | None = None, memo: SearchMemo | None = None):
        self.rank = rank
        self.state_cap = default_state_cap() if state_cap is None else state_cap
        self.autos = class_level_automorphisms(rank)
        self.memo = SearchMemo() if memo is None else memo
        self.explored = 0

    def subgraphs(self, gid: int, bound: int) -> tuple[int, ...]:
        key = (gid, bound)
        out = self.memo.subgraphs.get(key)
        if out is None:
            seen: dict[int, None] = {}
            for s in core_subgraphs(self.memo.graphs[gid], bound):
                seen[self.memo.intern(canonical_graph(s))] = None
            out = self.memo.subgraphs[key] = tuple(seen)
        return out

    def run(self, first: LabeledGraph, second: LabeledGraph, subgraph_first: bool):
        """Return ``(automorphisms, final pair)`` for a path to a goal, or ``None``."""
        memo = self.memo
        bound_a, bound_b = first.num_edges, second.num_edges
        mode = (subgraph_first, bound_a, bound_b)
        dead, good, labels = memo.dead, memo.good, memo.labels
        first_id = memo.intern(canonical_graph(first))
        second_id = memo.intern(canonical_graph(second))
        starts_a = self.subgraphs(first_id, bound_a) if subgraph_first else (first_id,)
        starts_b = self.subgraphs(second_id, bound_b)
        num_edges = memo.num_edges
        parent: dict = {}
        queue: deque = deque()

        def visit(st, link):
            """Record a new state; return a finished answer if it settles the search."""
            parent[st] = link
            known = good.get((mode, st))
            if known is not None:
                return self._finish(mode, parent, st, known)
            self._count()
            if len(labels[st[0]] | labels[st[1]]) < self.rank:
                return self._finish(mode, parent, st, ((), st))
            queue.append(st)
            return None

        for a in starts_a:
            for b in starts_b:
                st = (a, b)
                if st in parent or (mode, st) in dead:
                    continue
                done = visit(st, None)
                if done is not None:
                    return done
        while queue:
            st = queue.popleft()
            a, b = st
            for k, (ia, ib) in enumerate(zip(memo.images(a), memo.images(b))):
                if subgraph_first:
                    cs = self.subgraphs(ia, bound_a)
                else:
                    if num_edges[ia] > bound_a:
                        continue
                    cs = (ia,)
                if not cs:
                    continue
                ds = self.subgraphs(ib, bound_b)
                for c in cs:
                    for d in ds:
                        nxt = (c, d)
                        if nxt in parent or (mode, nxt) in dead:
                            continue
                        done = visit(nxt, (st, k))
                        if done is not None:
                            return done
        dead.update((mode, st) for st in parent)
        return None

    def _count(self) -> None:
        self.explored += 1
        if self.explored > self.state_cap:
            raise StateCapExceeded(self.explored)

    def _finish(self, mode, parent: dict, st, known):
        """Join the path to ``st`` with the known route from ``st`` to a goal."""
        suffix, final = known
        steps = list(suffix)
        chain = [st]
        while parent[st] is not None:
            st, k = parent[st]
            steps.insert(0, k)
            chain.append(st)
        # each state on the path is now known to reach ``final``
        for i, node in enumerate(reversed(chain)):
            self.memo.good.setdefault((mode, node), (tuple(steps[i:]), final))
        graphs = self.memo.graphs
        return [self.autos[k] for k in steps], (graphs[final[0]], graphs[final[1]])


def _theta_chain(search: PairSearch, h: FactorClass, k: FactorClass) -> list[FactorClass] | None:
    """Chain h - I - J - k with h, J inside I and J inside k."""
    found = search.run(h.core, k.core, subgraph_first=False)
    if found is None:
        return None
    steps, (a, b) = found
    i = _pullback_back(steps, h.rank, _labels(a, b))
    j = _common_subfactor(i, k)
    if j is None:
        raise AssertionError("pair search reached a goal but no intermediate factor exists")
    return [h, i, j, k]


def _distance_three(c1: FactorClass, c2: FactorClass, search: PairSearch) -> list[FactorClass] | None:
    chain = _theta_chain(search, c1, c2)
    if chain is not None:
        return chain
    chain = _theta_chain(search, c2, c1)
    return None if chain is None else chain[::-1]


def distance_three(c1: FactorClass, c2: FactorClass, state_cap: int | None = None) -> bool:
    _check_complex(c1, c2)
    return _distance_three(c1, c2, PairSearch(c1.rank, state_cap)) is not None


def _distance_four_first(c1: FactorClass, c2: FactorClass, search: PairSearch) -> list[FactorClass] | None:
    """Chain c1 - J1 - J2 - J3 - c2 with J1, J3 inside J2 and J1 in c1, J3 in c2."""
    found = search.run(c1.core, c2.core, subgraph_first=True)
    if found is None:
        return None
    steps, (a, b) = found
    j2 = _pullback_back(steps, c1.rank, _labels(a, b))
    j1 = _common_subfactor(c1, j2)
    j3 = _common_subfactor(j2, c2)
    if j1 is None or j3 is None:
        raise AssertionError("pair search reached a goal but no intermediate factor exists")
    return [c1, j1, j2, j3, c2]


def distance_four_partial(c1: FactorClass, c2: FactorClass, state_cap: int | None = None) -> bool | None:
    """True or false when decidable, ``None`` when the answer is out of reach.

    Assumes distances up to 3 are already excluded.
    """
    _check_complex(c1, c2)
    search = PairSearch(c1.rank, state_cap)
    if _distance_four_first(c1, c2, search) is not None:
        return True
    if c1.rank - 1 in (c1.factor_rank, c2.factor_rank):
        return False
    return None


# ---------------------------------------------------------------------------
# the ladder

@dataclass
class DistanceResult:
    value: int | None = None
    greater_than: int | None = None
    inapplicable: bool = False
    resource_limited: bool = False
    witnesses: list[FactorClass] = field(default_factory=list)
    states_explored: int = 0

    @property
    def decided(self) -> bool:
        return self.value is not None or (self.greater_than is not None and not self.resource_limited)

    def to_json(self) -> dict:
        if self.value is not None:
            d: object = self.value
        elif self.inapplicable:
            d = "inapplicable"
        else:
            d = {"greaterThan": self.greater_than}
        return {
            "distance": d,
            "witnesses": [c.describe() for c in self.witnesses],
            "statesExplored": self.states_explored,
            "resourceLimited": self.resource_limited,
        }


def validate_chain(chain: Sequence[FactorClass]) -> bool:
    """Each consecutive pair is a distinct pair related by inclusion."""
    return all(distance_one(chain[i], chain[i + 1]) for i in range(len(chain) - 1))


def distance(c1: FactorClass, c2: FactorClass, *, state_cap: int | None = None,
             max_level: int = 4, memo: SearchMemo | None = None) -> DistanceResult:
    """Run the ladder 0, 1, 2, 3, 4 and stop at the first level that holds.

    Passing one ``memo`` to many calls lets later searches reuse earlier ones.
    """
    _check_complex(c1, c2)
    if distance_zero(c1, c2):
        return DistanceResult(0, witnesses=[c1])
    if distance_one(c1, c2):
        return DistanceResult(1, witnesses=[c1, c2])
    memo = SearchMemo() if memo is None else memo
    middle = _distance_two(c1, c2, memo)
    if middle is not None:
        return DistanceResult(2, witnesses=[c1, middle, c2])
    if max_level < 3:
        return DistanceResult(greater_than=2)
    search = PairSearch(c1.rank, state_cap, memo)
    try:
        chain = _distance_three(c1, c2, search)
    except StateCapExceeded as exc:
        return DistanceResult(greater_than=2, resource_limited=True, states_explored=exc.explored)
    if chain is not None:
        return DistanceResult(3, witnesses=chain, states_explored=search.explored)
    if max_level < 4:
        return DistanceResult(greater_than=3, states_explored=search.explored)
    try:
        chain = _distance_four_first(c1, c2, search)
    except StateCapExceeded as exc:
        return DistanceResult(greater_than=3, resource_limited=True, states_explored=exc.explored)
    if chain is not None:
        return DistanceResult(4, witnesses=chain, states_explored=search.explored)
    if c1.rank - 1 in (c1.factor_rank, c2.factor_rank):
        return DistanceResult(greater_than=4, states_explored=search.explored)
    return DistanceResult(greater_than=3, inapplicable=True, states_explored=search.explored)
