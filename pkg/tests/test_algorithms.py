import random

import pytest

from freefactor.algorithms import (
    Certificate,
    HypothesisError,
    build_z_word,
    find_nonprimitive_witness,
    free_factor_run,
    is_free_factor,
    is_primitive,
    primitive_classes,
    relative_whitehead_step,
    relative_whitehead_step_subgroup,
    whitehead_step,
)
from freefactor.graphs import SubgroupPresentation, subgroup_core
from freefactor.oracle import abelianization_allows_primitive, oracle_is_primitive
from freefactor.whitehead import (
    apply_whitehead_pointed,
    find_cut_vertex,
    trichotomy,
    whitehead_graph_of_word,
)
from freefactor.words import (
    CyclicWord,
    Word,
    compose,
    is_fine_on_word,
    random_whitehead,
)


def sub(gens, rank):
    return SubgroupPresentation.parse(gens, rank)


def w(text, rank):
    return Word.parse(text, rank)


@pytest.mark.parametrize("text,rank,expected", [
    ("x", 2, True),
    ("xy", 2, True),
    ("xyXY", 2, False),
    ("xx", 2, False),
    ("xyxyxYz", 3, True),
    ("xyxYXz", 3, True),
    ("xxyy", 2, False),
    ("xyz", 4, True),
])
def test_is_primitive_examples(text, rank, expected):
    verdict, cert = is_primitive(w(text, rank))
    assert verdict is expected
    if expected:
        assert cert.verify(w(text, rank))
        assert len(cert.terminal) == 1


def test_trivial_word_rejected():
    with pytest.raises(ValueError):
        is_primitive(Word.identity(2))


def test_whitehead_step_guards_length_one():
    with pytest.raises(ValueError):
        whitehead_step(CyclicWord.parse("x", 2))


def test_whitehead_step_reduces_xy_to_a_letter():
    phi, image = whitehead_step(CyclicWord.parse("xy", 2))
    assert len(image) == 1
    assert is_fine_on_word(phi, CyclicWord.parse("xy", 2))


def test_commutator_step_absent():
    assert whitehead_step(CyclicWord.parse("xyXY", 2)) is None


def test_primitivity_agrees_with_oracles_small():
    rng = random.Random(2)
    letters = [1, -1, 2, -2]
    for _ in range(150):
        raw = [rng.choice(letters) for _ in range(rng.randint(1, 5))]
        word = Word(2, tuple(raw)) if all(raw[i] != -raw[i + 1] for i in range(len(raw) - 1)) else None
        if word is None:
            continue
        verdict, _ = is_primitive(word)
        if verdict:
            assert abelianization_allows_primitive(word)
            assert oracle_is_primitive(word) is True
        else:
            assert oracle_is_primitive(word, radius=4) is None


def test_certificate_text_round_trip():
    word = w("xxyxyxYz", 3)
    _, cert = is_primitive(word)
    again = Certificate.from_text(cert.to_text(), 3)
    assert again == cert
    assert again.verify(word)
    assert not again.verify(w("xyXY", 3))


def test_tampered_certificate_fails():
    word = w("xxyxyxYz", 3)
    _, cert = is_primitive(word)
    lines = cert.to_text().splitlines()
    bad = Certificate.from_text("\n".join(lines[1:]), 3)
    assert not bad.verify(word)


@pytest.mark.parametrize("gens,rank,expected", [
    (["x", "y"], 3, True),
    (["y", "xyX"], 2, False),
    (["tyXX", "xYxzt"], 4, True),
    (["xx"], 2, False),
    (["xyXY"], 2, False),
    (["xy", "xY"], 2, False),
    (["xyX", "z"], 3, True),
])
def test_is_free_factor_examples(gens, rank, expected):
    h = sub(gens, rank)
    verdict, cert = is_free_factor(h)
    assert verdict is expected
    if expected:
        assert cert.verify(h)
        assert Certificate.from_text(cert.to_text(), rank).verify(h)


def test_rank_four_example_first_step():
    run = free_factor_run(sub(["tyXX", "xYxzt"], 4))
    assert str(run.steps[0].automorphism) == "({y,Z,t,T},x)"
    assert run.steps[0].case_iii_count == 2


def test_free_factor_basis_elements_are_primitive():
    rng = random.Random(9)
    for _ in range(30):
        rank = rng.randint(2, 4)
        k = rng.randint(1, rank - 1)
        gens = [Word(rank, (i,)) for i in range(1, k + 1)]
        for _ in range(rng.randint(1, 5)):
            phi = random_whitehead(rank, rng)
            gens = [phi(g) for g in gens]
        assert is_free_factor(SubgroupPresentation(rank, tuple(gens)))[0]
        for g in gens:
            assert is_primitive(g)[0]


def _random_relative_instance(rng, rank, k):
    """w = theta^-1(x_{k+1}) for theta a product of automorphisms fixing x1..xk."""
    autos = []
    while len(autos) < rng.randint(1, 5):
        phi = random_whitehead(rank, rng)
        if all(phi.image(i) == (i,) for i in range(1, k + 1)):
            autos.append(phi)
    return compose(autos, rank)(Word(rank, (k + 1,)))


def test_relative_step_examples():
    phi = relative_whitehead_step(w("yx", 2), 1)
    assert phi.image(1) == (1,)
    assert len(phi(w("yx", 2))) == 1
    with pytest.raises(ValueError):
        relative_whitehead_step(w("yx", 2), 0)


def test_relative_step_properties_random():
    rng = random.Random(31)
    done = 0
    while done < 60:
        rank = rng.randint(2, 4)
        k = rng.randint(1, rank - 1)
        word = _random_relative_instance(rng, rank, k)
        if len(word) < 2:
            continue
        done += 1
        phi = relative_whitehead_step(word, k)
        assert all(phi.image(i) == (i,) for i in range(1, k + 1))
        assert len(phi(word)) < len(word)
        assert is_fine_on_word(phi, word, cyclic=False)


def test_relative_subgroup_step_example():
    h = sub(["yzY"], 3)
    phi = relative_whitehead_step_subgroup(h, 1)
    assert str(phi) == "({z,Z},Y)"
    bcore = subgroup_core(h)
    report = trichotomy(phi, bcore)
    assert report.cases[bcore.basepoint] == "I"
    assert apply_whitehead_pointed(phi, bcore).size() < bcore.size()


def test_relative_subgroup_step_needs_two_vertices():
    with pytest.raises(HypothesisError):
        relative_whitehead_step_subgroup(sub(["z"], 3), 1)


def test_build_z_word():
    assert str(build_z_word(1)) == "xx"
    assert str(build_z_word(2)) == "xxyyxxyxY"
    with pytest.raises(ValueError):
        build_z_word(0)
    for k in (1, 2, 3, 4):
        z = build_z_word(k)
        wg = whitehead_graph_of_word(CyclicWord(k, z.letters))
        assert find_cut_vertex(wg) is None
        assert not is_primitive(z)[0]


def test_primitive_classes_are_primitive_and_sorted():
    seen = list(primitive_classes(2, 5))
    assert [len(c) for c in seen] == sorted(len(c) for c in seen)
    assert all(is_primitive(c.as_word())[0] for c in seen)
    # every primitive class of length <= 5 in F2 appears
    from freefactor.oracle import cyclic_words_up_to
    expected = {c for c in cyclic_words_up_to(2, 5) if is_primitive(c.as_word())[0]}
    assert set(seen) == expected


@pytest.mark.parametrize("gens,witness", [
    (["y", "xyX"], "yxyX"),
    (["xx"], "xx"),
])
def test_witness_examples(gens, witness):
    res = find_nonprimitive_witness(sub(gens, 2))
    assert res.outcome == "witness"
    assert str(res.witness) == witness
    assert not is_primitive(res.witness)[0]


def test_witness_for_free_factor():
    res = find_nonprimitive_witness(sub(["x", "y"], 2))
    assert res.outcome == "free-factor"
    assert res.certificate.verify(sub(["x", "y"], 2))
