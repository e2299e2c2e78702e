"""Decision procedures with replayable certificates.

Primitivity of words and the free-factor property of subgroups are decided by
greedy Whitehead reduction.  Relative steps fix a standard factor
``<x1, ..., xk>``, and the witness search looks for elements that are
primitive in a subgroup but not in the ambient group.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass, field
from typing import Sequence, Union

from .graphs import (
    LabeledGraph,
    SubgroupPresentation,
    canonical_graph,
    graphs_isomorphic,
    rose,
    spanning_basis,
    subgroup_core,
    unpointed_core,
)
from .whitehead import (
    apply_whitehead_pointed,
    apply_whitehead_to_subgroup,
    automorphism_from_witness,
    find_cut_vertex,
    trichotomy,
    whitehead_graph_of_graph,
    whitehead_graph_of_word,
)
from .words import (
    CyclicWord,
    Letter,
    ParseError,
    WhiteheadAutomorphism,
    Word,
    all_letters,
    conjugation_identity,
    cyclic_reduce,
    free_reduce,
    is_fine_on_word,
    letter_key,
    letter_name,
    parse_letters,
    whitehead_automorphisms,
)


class HypothesisError(ValueError):
    """The input does not satisfy the hypotheses a procedure relies on."""


class InternalInvariantError(AssertionError):
    """A property guaranteed by the theory failed; indicates a bug."""


Terminal = Union[CyclicWord, LabeledGraph]


@dataclass(frozen=True)
class Certificate:
    """Whitehead automorphisms to apply in order, and the object they reach."""

    rank: int
    steps: tuple[WhiteheadAutomorphism, ...]
    terminal: Terminal

    def to_text(self) -> str:
        lines = [str(phi) for phi in self.steps]
        if isinstance(self.terminal, CyclicWord):
            lines.append(str(self.terminal))
        else:
            labels = sorted(self.terminal.labels_used())
            lines.append("<" + ",".join(letter_name(l, self.rank) for l in labels) + ">")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, rank: int) -> "Certificate":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not lines:
            raise ParseError("empty certificate", text, 0)
        steps = tuple(WhiteheadAutomorphism.parse(ln, rank) for ln in lines[:-1])
        last = lines[-1]
        m = re.fullmatch(r"<([^>]*)>", last)
        if m:
            labels = [abs(l) for l in parse_letters(m.group(1).replace(",", " "), rank)]
            terminal: Terminal = rose(rank, labels)
        else:
            terminal = CyclicWord.parse(last, rank)
        return cls(rank, steps, terminal)

    def verify(self, target: Union[Word, SubgroupPresentation]) -> bool:
        """Replay on ``target`` checking strict decrease at every step."""
        try:
            if isinstance(target, SubgroupPresentation):
                if not isinstance(self.terminal, LabeledGraph):
                    return False
                g = unpointed_core(target)
                for phi in self.steps:
                    h = apply_whitehead_to_subgroup(phi, g)
                    if not (h.num_vertices < g.num_vertices and h.num_edges < g.num_edges):
                        return False
                    g = h
                return g.num_vertices == 1 and graphs_isomorphic(
                    g.with_basepoint(None), self.terminal.with_basepoint(None))
            if not isinstance(self.terminal, CyclicWord):
                return False
            cyc = cyclic_reduce(target)[0]
            for phi in self.steps:
                nxt = phi(cyc)
                if len(nxt) >= len(cyc):
                    return False
                cyc = nxt
            return len(cyc) == 1 and cyc == self.terminal
        except ValueError:
            return False


# ---------------------------------------------------------------------------
# primitivity

def whitehead_step(w: CyclicWord) -> tuple[WhiteheadAutomorphism, CyclicWord] | None:
    """One length-reducing Whitehead move read off a cut vertex, or ``None``."""
    if len(w) < 2:
        raise ValueError("whitehead_step needs cyclic length at least 2")
    wit = find_cut_vertex(whitehead_graph_of_word(w))
    if wit is None:
        return None
    phi = automorphism_from_witness(wit, w.rank)
    image = phi(w)
    if len(image) >= len(w):
        raise InternalInvariantError(f"{phi} does not shorten {w}")
    if not is_fine_on_word(phi, w):
        raise InternalInvariantError(f"{phi} is not fine on {w}")
    return phi, image


def is_primitive(w: Word) -> tuple[bool, Certificate | None]:
    """Decide whether ``w`` belongs to some basis of the ambient free group."""
    if w.is_trivial():
        raise ValueError("the trivial word is not primitive and has no Whitehead graph")
    cyc = cyclic_reduce(w)[0]
    steps = []
    while len(cyc) > 1:
        res = whitehead_step(cyc)
        if res is None:
            return False, None
        phi, cyc = res
        steps.append(phi)
    return True, Certificate(w.rank, tuple(steps), cyc)


# ---------------------------------------------------------------------------
# free factors

@dataclass(frozen=True)
class FactorStep:
    automorphism: WhiteheadAutomorphism
    before: LabeledGraph
    after: LabeledGraph
    case_iii_count: int


@dataclass
class FreeFactorRun:
    is_free_factor: bool
    certificate: Certificate | None
    steps: list[FactorStep] = field(default_factory=list)
    reason: str = ""


def free_factor_run(gens: SubgroupPresentation) -> FreeFactorRun:
    """Greedy reduction of the core graph, keeping every intermediate graph.

    A step whose automorphism is not fine, or fine but not shrinking, shows
    the subgroup is not a free factor: for free factors both hold.
    """
    g = unpointed_core(gens)
    return free_factor_run_graph(g)


def free_factor_run_graph(g: LabeledGraph) -> FreeFactorRun:
    g = g.with_basepoint(None)
    steps: list[FactorStep] = []
    while g.num_vertices > 1:
        wit = find_cut_vertex(whitehead_graph_of_graph(g))
        if wit is None:
            return FreeFactorRun(False, None, steps, "no cut vertex")
        phi = automorphism_from_witness(wit, g.rank)
        report = trichotomy(phi, g)
        if report is None:
            return FreeFactorRun(False, None, steps, f"{phi} does not act finely")
        p = report.case_iii_count
        h = apply_whitehead_to_subgroup(phi, g)
        if p == 0:
            return FreeFactorRun(False, None, steps, f"{phi} acts by conjugation")
        if (g.num_vertices - h.num_vertices, g.num_edges - h.num_edges) != (p, p):
            raise InternalInvariantError("fine action did not shrink the core by the case III count")
        steps.append(FactorStep(phi, g, h, p))
        g = h
    terminal = canonical_graph(g)
    cert = Certificate(g.rank, tuple(s.automorphism for s in steps), terminal)
    return FreeFactorRun(True, cert, steps, "reached a rose")


def is_free_factor(gens: SubgroupPresentation) -> tuple[bool, Certificate | None]:
    run = free_factor_run(gens)
    return run.is_free_factor, run.certificate


def is_free_factor_graph(g: LabeledGraph) -> tuple[bool, Certificate | None]:
    run = free_factor_run_graph(g)
    return run.is_free_factor, run.certificate


# ---------------------------------------------------------------------------
# relative steps

def _fixes_prefix(phi: WhiteheadAutomorphism, k: int) -> bool:
    return all(phi.image(i) == (i,) for i in range(1, k + 1))


def _standard_generators(k: int, rank: int) -> list[Word]:
    return [Word(rank, (i,)) for i in range(1, k + 1)]


def _relative_candidate(core_k: LabeledGraph) -> WhiteheadAutomorphism | None:
    """Automorphism from a cut vertex, flipped so the basepoint is in case I."""
    wit = find_cut_vertex(whitehead_graph_of_graph(core_k))
    if wit is None:
        return None
    phi = automorphism_from_witness(wit, core_k.rank)
    report = trichotomy(phi, core_k)
    if report is not None and report.cases[core_k.basepoint] != "I":
        phi = conjugation_identity(phi)[1]
    return phi


def _word_step_ok(phi: WhiteheadAutomorphism, w: Word, k: int) -> bool:
    return (_fixes_prefix(phi, k) and len(phi(w)) < len(w)
            and is_fine_on_word(phi, w, cyclic=False))


def relative_whitehead_step(w: Word, k: int) -> WhiteheadAutomorphism:
    """A Whitehead automorphism fixing x1..xk that shortens ``w``.

    The automorphism comes from the core graph of ``<x1, ..., xk, w>``.  When
    ``w`` begins or ends with a letter of the fixed factor, folding can swallow
    the path of ``w`` into the fixed loops; then the first Whitehead
    automorphism (in the standard enumeration order) satisfying the three
    required properties is returned instead.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if k >= w.rank:
        raise ValueError("k must be smaller than the rank")
    if len(w) < 2:
        raise HypothesisError("w must not be a single letter")
    gens = SubgroupPresentation(w.rank, tuple(_standard_generators(k, w.rank)) + (w,))
    core_k = subgroup_core(gens)
    if core_k.num_vertices > 1:
        phi = _relative_candidate(core_k)
        if phi is not None and _word_step_ok(phi, w, k):
            return phi
    for phi in whitehead_automorphisms(w.rank):
        if _word_step_ok(phi, w, k):
            return phi
    raise HypothesisError(f"no Whitehead automorphism fixing x1..x{k} shortens {w}")


def _subgroup_step_ok(phi: WhiteheadAutomorphism, bcore: LabeledGraph, k: int) -> bool:
    if not _fixes_prefix(phi, k):
        return False
    report = trichotomy(phi, bcore)
    if report is None or report.cases[bcore.basepoint] != "I":
        return False
    image = apply_whitehead_pointed(phi, bcore)
    return image.num_vertices < bcore.num_vertices and image.num_edges < bcore.num_edges


def relative_whitehead_step_subgroup(gens: SubgroupPresentation, k: int) -> WhiteheadAutomorphism:
    """Subgroup version: shrinks the pointed core while fixing x1..xk."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if k >= gens.rank:
        raise ValueError("k must be smaller than the rank")
    bcore = subgroup_core(gens)
    if bcore.num_vertices < 2:
        raise HypothesisError("the pointed core must have at least two vertices")
    joined = SubgroupPresentation(gens.rank, tuple(_standard_generators(k, gens.rank)) + gens.generators)
    core_k = subgroup_core(joined)
    if core_k.num_vertices > 1:
        phi = _relative_candidate(core_k)
        if phi is not None and _subgroup_step_ok(phi, bcore, k):
            return phi
    for phi in whitehead_automorphisms(gens.rank):
        if _subgroup_step_ok(phi, bcore, k):
            return phi
    raise HypothesisError("no Whitehead automorphism fixing the standard factor shrinks the pointed core")


# ---------------------------------------------------------------------------
# witnesses

def build_z_word(k: int, rank: int | None = None) -> Word:
    """(x1 x1)(x2 x2)...(xk xk) followed by x1 (xi xj)(xi xj^-1) for i < j."""
    if k < 1:
        raise ValueError("k must be at least 1")
    rank = k if rank is None else rank
    raw: list[Letter] = []
    for i in range(1, k + 1):
        raw += [i, i]
    for i in range(1, k + 1):
        for j in range(i + 1, k + 1):
            raw += [1, i, j, i, -j]
    return free_reduce(raw, rank)


@dataclass(frozen=True)
class WitnessResult:
    outcome: str                      # "free-factor", "witness" or "inconclusive"
    search_bound: int
    witness: Word | None = None
    h_word: tuple[Letter, ...] | None = None
    basis: tuple[Word, ...] = ()
    candidates_checked: int = 0
    certificate: Certificate | None = None


def _substitute(h_letters: Sequence[Letter], basis: Sequence[Word], rank: int) -> Word:
    raw: list[Letter] = []
    for l in h_letters:
        b = basis[abs(l) - 1]
        raw.extend(b.letters if l > 0 else b.inverse().letters)
    return free_reduce(raw, rank)


def primitive_classes(rank: int, max_length: int):
    """Conjugacy classes of primitive elements of F_rank, shortest first.

    Every primitive cyclic word reduces to a letter through strictly
    shortening Whitehead moves, so expanding from the letters and discarding
    anything longer than ``max_length`` reaches them all; a heap keyed by
    (length, letters) yields them in that order.
    """
    autos = list(whitehead_automorphisms(rank))
    start = [CyclicWord(rank, (l,)) for l in all_letters(rank)]
    seen = set(start)
    heap = [(1, tuple(letter_key(x) for x in c.letters), c) for c in start]
    heapq.heapify(heap)
    while heap:
        _, _, c = heapq.heappop(heap)
        yield c
        for phi in autos:
            d = phi(c)
            if len(d) <= max_length and d not in seen:
                seen.add(d)
                heapq.heappush(heap, (len(d), tuple(letter_key(x) for x in d.letters), d))


def find_nonprimitive_witness(gens: SubgroupPresentation, max_length: int = 12) -> WitnessResult:
    """Search for an element primitive in H but not in the ambient group."""
    ok, cert = is_free_factor(gens)
    if ok:
        return WitnessResult("free-factor", max_length, certificate=cert)
    basis = tuple(spanning_basis(subgroup_core(gens)))
    r = len(basis)
    checked = 0
    for c in primitive_classes(r, max_length):
        checked += 1
        elem = _substitute(c.letters, basis, gens.rank)
        if not is_primitive(elem)[0]:
            return WitnessResult("witness", max_length, elem, c.letters, basis, checked)
    return WitnessResult("inconclusive", max_length, basis=basis, candidates_checked=checked)

