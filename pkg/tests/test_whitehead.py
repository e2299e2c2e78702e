import random
from collections import Counter

from hypothesis import given, settings
from hypothesis import strategies as st

from freefactor.algorithms import free_factor_run
from freefactor.graphs import (
    LabeledGraph,
    SubgroupPresentation,
    core,
    fold,
    graphs_isomorphic,
    spanning_basis,
    subgroup_core,
    unpointed_core,
)
from freefactor.whitehead import (
    ARTICULATION,
    MISSING_INVERSE,
    WhiteheadGraph,
    apply_whitehead_pointed,
    apply_whitehead_to_subgroup,
    automorphism_from_witness,
    collapse_quotient,
    find_cut_vertex,
    subdivide,
    subdivide_with_map,
    trichotomy,
    whitehead_graph_of_graph,
    whitehead_graph_of_word,
)
from freefactor.words import (
    CyclicWord,
    WhiteheadAutomorphism,
    Word,
    all_letters,
    inverse,
    random_whitehead,
)

RANK4_EXAMPLE = ["tyXX", "xYxzt"]


def sub(gens, rank):
    return SubgroupPresentation.parse(gens, rank)


def arcs(text_pairs, rank):
    return Counter(tuple(sorted((CyclicWord.parse(a, rank)[0], CyclicWord.parse(b, rank)[0]),
                                key=lambda l: 2 * abs(l) - (l > 0))) for a, b in text_pairs)


def brute_has_cut_vertex(wg: WhiteheadGraph) -> bool:
    """Direct reading of the definition, with its own component search."""
    letters = all_letters(wg.rank)
    edges = [(p, q) for p, q in wg.arcs]

    def comps(removed):
        parent = {l: l for l in letters if l != removed}

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x
        for p, q in edges:
            if removed in (p, q):
                continue
            parent[find(p)] = find(q)
        groups = {}
        for l in parent:
            groups.setdefault(find(l), set()).add(l)
        return list(groups.values())

    full = comps(None)
    for v in letters:
        c = next(g for g in full if v in g)
        if len(c) == 1:
            continue
        if inverse(v) not in c:
            return True
        pieces = [g for g in comps(v) if g <= c]
        if len(pieces) >= 2:
            return True
    return False


def test_word_graph_of_xy():
    wg = whitehead_graph_of_word(CyclicWord.parse("xy", 2))
    assert Counter(wg.arcs) == arcs([("X", "y"), ("Y", "x")], 2)


def test_word_graph_seven_letter_example():
    wg = whitehead_graph_of_word(CyclicWord(3, Word.parse("xyxyxYz", 3).letters))
    expected = [("X", "y"), ("Y", "x"), ("X", "y"), ("Y", "x"), ("X", "Y"), ("y", "z"), ("Z", "x")]
    assert len(wg.arcs) == 7
    assert Counter(wg.arcs) == arcs(expected, 3)


def test_word_graph_length_one():
    wg = whitehead_graph_of_word(CyclicWord.parse("x", 2))
    assert wg.arcs == ((1, -1),)


def test_rose_graph_is_complete():
    wg = whitehead_graph_of_graph(unpointed_core(sub(["x", "y", "z"], 3)))
    assert len(wg.arcs) == 15
    assert find_cut_vertex(wg) is None


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), min_size=2, max_size=10))
def test_graph_of_cycle_matches_word(raw):
    w = Word(3, tuple(raw)) if all(raw[i] != -raw[i + 1] for i in range(len(raw) - 1)) else None
    if w is None or raw[0] == -raw[-1]:
        return
    cyc = CyclicWord(3, w.letters)
    n = len(cyc)
    if any(n % p == 0 and cyc.letters == cyc.letters[:p] * (n // p) for p in range(1, n)):
        return  # proper powers share the core of their root
    g = unpointed_core(SubgroupPresentation(3, (w,)))
    assert Counter(whitehead_graph_of_graph(g).arcs) == Counter(whitehead_graph_of_word(cyc).arcs)


def test_cut_vertex_of_xy():
    wit = find_cut_vertex(whitehead_graph_of_word(CyclicWord.parse("xy", 2)))
    assert wit.vertex == 1 and wit.kind == MISSING_INVERSE
    phi = automorphism_from_witness(wit, 2)
    assert len(phi(CyclicWord.parse("xy", 2))) == 1


def test_commutator_has_no_cut_vertex():
    assert find_cut_vertex(whitehead_graph_of_word(CyclicWord.parse("xyXY", 2))) is None


def test_cut_vertex_agrees_with_brute_force():
    rng = random.Random(5)
    letters = [1, -1, 2, -2, 3, -3]
    seen = 0
    while seen < 300:
        raw = [rng.choice(letters) for _ in range(rng.randint(2, 9))]
        if any(raw[i] == -raw[(i + 1) % len(raw)] for i in range(len(raw))):
            continue
        seen += 1
        wg = whitehead_graph_of_word(CyclicWord(3, tuple(raw)))
        wit = find_cut_vertex(wg)
        assert (wit is not None) == brute_has_cut_vertex(wg)
        if wit is not None and wit.kind == ARTICULATION:
            assert inverse(wit.vertex) not in wit.component


def test_rank_four_example_automorphism():
    g = unpointed_core(sub(RANK4_EXAMPLE, 4))
    wit = find_cut_vertex(whitehead_graph_of_graph(g))
    phi = automorphism_from_witness(wit, 4)
    assert phi == WhiteheadAutomorphism.parse("({y,Z,t,T},x)", 4)


def test_subdivision_of_single_edges():
    phi = WhiteheadAutomorphism.parse("({y,Z,t,T},x)", 4)
    spelled = {}
    for lab in range(1, 5):
        g = LabeledGraph(4, 2, ((0, 1, lab),), 0)
        s = subdivide(phi, g)
        # read the unique path from 0 to 1
        path, v, used = [], 0, set()
        while v != 1:
            l, e, u = next(h for h in s.star[v] if h[1] not in used)
            used.add(e)
            path.append(l)
            v = u
        spelled[lab] = str(Word(4, tuple(path)))
    assert spelled == {1: "x", 2: "xy", 3: "zX", 4: "xtX"}


def test_subdivision_inverse_acting_letter():
    phi = WhiteheadAutomorphism.parse("({y},X)", 2)
    g = LabeledGraph(2, 2, ((0, 1, 2),), 0)
    s = subdivide(phi, g)
    assert s.size() == (3, 2)
    # reading X from 0 means an x-edge pointing into 0
    assert (2, 0, 1) in s.edges


def test_subdivision_bookkeeping():
    g = unpointed_core(sub(RANK4_EXAMPLE, 4))
    phi = WhiteheadAutomorphism.parse("({y,Z,t,T},x)", 4)
    res = subdivide_with_map(phi, g)
    assert res.old_vertices == g.num_vertices
    for i, e in enumerate(res.edge_map):
        assert res.graph.edges[e][2] == g.edges[i][2]
    assert res.graph.num_edges == g.num_edges + sum(
        (lab in phi.acted_on) + (-lab in phi.acted_on) for _, _, lab in g.edges)


def test_empty_set_changes_nothing():
    g = unpointed_core(sub(RANK4_EXAMPLE, 4))
    phi = WhiteheadAutomorphism(4, 1, frozenset())
    assert subdivide(phi, g) == g
    assert graphs_isomorphic(apply_whitehead_to_subgroup(phi, g), g)
    report = trichotomy(phi, g)
    assert set(report.cases) == {"I"}


def test_acting_generator_is_fixed():
    g = unpointed_core(sub(["x"], 2))
    phi = WhiteheadAutomorphism.parse("({y},x)", 2)
    assert graphs_isomorphic(apply_whitehead_to_subgroup(phi, g), g)


def test_rank_four_example_pipeline():
    g = unpointed_core(sub(RANK4_EXAMPLE, 4))
    phi = WhiteheadAutomorphism.parse("({y,Z,t,T},x)", 4)
    report = trichotomy(phi, g)
    assert report is not None and report.case_iii_count == 2
    image = apply_whitehead_to_subgroup(phi, g)
    assert image.size() == (5, 6)
    direct = unpointed_core(SubgroupPresentation(4, tuple(phi(w) for w in sub(RANK4_EXAMPLE, 4).generators)))
    assert graphs_isomorphic(image, direct)
    assert graphs_isomorphic(collapse_quotient(phi, g, report), image)
    _, trace = fold(subdivide(phi, g))
    assert all(s.label == 1 and s.rank_preserving for s in trace.steps)


def test_rose_is_not_fine():
    g = unpointed_core(sub(["x", "y"], 2))
    assert trichotomy(WhiteheadAutomorphism.parse("({y},x)", 2), g) is None


def test_collapse_with_no_case_three_is_identity():
    g = unpointed_core(sub(["xy"], 3))
    phi = WhiteheadAutomorphism.parse("({z},x)", 3)
    report = trichotomy(phi, g)
    assert report.case_iii_count == 0
    assert collapse_quotient(phi, g, report) == g


def test_collapse_shortens_cycle():
    g = unpointed_core(sub(["xy"], 2))
    phi = WhiteheadAutomorphism.parse("({Y},x)", 2)
    report = trichotomy(phi, g)
    assert report.case_iii_count == 1
    q = collapse_quotient(phi, g, report)
    assert q.size() == (1, 1)
    assert graphs_isomorphic(q, apply_whitehead_to_subgroup(phi, g))


def random_factor(rng, rank):
    k = rng.randint(1, rank - 1)
    gens = [Word(rank, (i,)) for i in range(1, k + 1)]
    for _ in range(rng.randint(1, 6)):
        phi = random_whitehead(rank, rng)
        gens = [phi(w) for w in gens]
    return SubgroupPresentation(rank, tuple(gens))


def test_quotient_and_only_acting_folds_on_random_factors():
    rng = random.Random(17)
    for _ in range(40):
        h = random_factor(rng, rng.randint(2, 4))
        for step in free_factor_run(h).steps:
            phi, g = step.automorphism, step.before
            report = trichotomy(phi, g)
            assert graphs_isomorphic(collapse_quotient(phi, g, report), step.after)
            _, trace = fold(subdivide(phi, g))
            assert all(s.label == abs(phi.acting) and s.rank_preserving for s in trace.steps)


def _image_core(pcore, words):
    """Core of the subgraph traced by reading ``words`` from the basepoint."""
    used = set()
    for w in words:
        v = pcore.basepoint
        for l in w.letters:
            e = next(e for ll, e, _ in pcore.star[v] if ll == l)
            used.add(e)
            v = pcore.step[v][l]
    return core(pcore.subgraph(sorted(used)))


def test_fine_actions_restrict_to_subgroups_and_images_shrink():
    rng = random.Random(23)
    checked = 0
    for _ in range(60):
        h = random_factor(rng, rng.randint(3, 4))
        run = free_factor_run(h)
        if not run.steps:
            continue
        phi = run.steps[0].automorphism
        pcore = subgroup_core(h)
        basis = spanning_basis(pcore)
        if len(basis) < 2:
            continue
        k_words = rng.sample(basis, rng.randint(1, len(basis) - 1))
        sub_k = _image_core(pcore, k_words)
        assert trichotomy(phi, sub_k) is not None
        image_h = apply_whitehead_pointed(phi, pcore)
        image_k = _image_core(image_h, [phi(w) for w in k_words])
        assert image_k.num_edges <= sub_k.num_edges
        checked += 1
    assert checked > 10


def test_whitehead_graph_arcs_grow_under_folding():
    rng = random.Random(29)
    for _ in range(40):
        nv = rng.randint(2, 5)
        edges = tuple((rng.randrange(nv), rng.randrange(nv), rng.randint(1, 3)) for _ in range(rng.randint(2, 7)))
        g = LabeledGraph(3, nv, edges, 0)
        _, trace = fold(g, keep_intermediate=True)
        prev = whitehead_graph_of_graph(g).arc_set()
        for h in trace.intermediate:
            cur = whitehead_graph_of_graph(h).arc_set()
            assert prev <= cur
            prev = cur
