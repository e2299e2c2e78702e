import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freefactor.words import (
    CyclicWord,
    ParseError,
    WhiteheadAutomorphism,
    Word,
    apply_whitehead_to_word,
    class_level_automorphisms,
    compose,
    conjugation_identity,
    cyclic_reduce,
    format_letters,
    free_reduce,
    is_fine_on_word,
    marked_cyclic_reduce,
    marked_free_reduce,
    parse_letters,
    whitehead_automorphisms,
)


def raw_words(rank, max_len=12):
    letters = [l for i in range(1, rank + 1) for l in (i, -i)]
    return st.lists(st.sampled_from(letters), max_size=max_len)


def test_parse_compact_and_verbose_agree():
    assert parse_letters("xYz", 3) == [1, -2, 3]
    assert parse_letters("x1 x2^-1 x3", 3) == [1, -2, 3]
    assert parse_letters("aBc", 3) == [1, -2, 3]
    assert parse_letters("1", 3) == []


def test_parse_large_rank_uses_alphabet():
    assert parse_letters("aZ", 26) == [1, -26]
    assert format_letters([1, -26], 26) == "aZ"


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as exc:
        parse_letters("xyw", 3)
    assert exc.value.position == 2


def test_parse_rejects_out_of_range_generator():
    with pytest.raises(ParseError):
        parse_letters("x4", 3)


def test_word_must_be_reduced():
    with pytest.raises(ValueError):
        Word(2, (1, -1))
    assert Word.parse("xX", 2).is_trivial()


def test_word_arithmetic():
    x, y = Word.generator(1, 2), Word.generator(2, 2)
    assert str(x * y * x.inverse()) == "xyX"
    assert (x * y * x.inverse() * y.inverse()).inverse() == y * x * y.inverse() * x.inverse()
    assert str(x ** -3) == "XXX"
    assert str(x ** 0) == "1"


def test_cyclic_reduce_returns_conjugator():
    w = Word.parse("xyzYX", 3)
    cyc, c = cyclic_reduce(w)
    assert str(cyc) == "z"
    assert c * cyc.as_word() * c.inverse() == w


@given(raw_words(3))
def test_cyclic_reduce_identity(raw):
    w = free_reduce(raw, 3)
    cyc, c = cyclic_reduce(w)
    assert c * cyc.as_word() * c.inverse() == w
    assert len(cyc) == w.cyclic_length()


def test_cyclic_word_canonical_rotation():
    assert CyclicWord.parse("yx", 2) == CyclicWord.parse("xy", 2)
    assert CyclicWord.parse("xyXY", 2) == CyclicWord.parse("YxyX", 2)
    with pytest.raises(ValueError):
        CyclicWord(2, (1, 2, -1))


def test_whitehead_images():
    phi = WhiteheadAutomorphism.parse("({y,Z,t,T},x)", 4)
    assert phi.image(2) == (1, 2)
    assert phi.image(3) == (3, -1)
    assert phi.image(4) == (1, 4, -1)
    assert phi.image(1) == (1,)
    assert str(phi) == "({y,Z,t,T},x)"


def test_whitehead_rejects_acting_letter_in_set():
    with pytest.raises(ValueError):
        WhiteheadAutomorphism(2, 1, frozenset({-1}))


@settings(max_examples=60)
@given(raw_words(3), st.integers(0, 10 ** 6))
def test_inverse_automorphism_undoes(raw, seed):
    rng = random.Random(seed)
    autos = list(whitehead_automorphisms(3))
    phi = rng.choice(autos)
    w = free_reduce(raw, 3)
    assert phi.inverse()(phi(w)) == w


@settings(max_examples=60)
@given(raw_words(3), st.integers(0, 10 ** 6))
def test_conjugation_identity(raw, seed):
    phi = random.Random(seed).choice(list(whitehead_automorphisms(3)))
    a, psi = conjugation_identity(phi)
    w = free_reduce(raw, 3)
    aw = Word(3, (a,))
    assert phi(w) == aw * psi(w) * aw.inverse()


def test_compose_applies_first_element_first():
    p = WhiteheadAutomorphism.parse("({y},x)", 2)
    q = WhiteheadAutomorphism.parse("({x},y)", 2)
    w = Word.parse("xy", 2)
    assert compose([p, q])(w) == q(p(w))


def test_class_level_count_rank2():
    autos = list(whitehead_automorphisms(2))
    assert len(autos) == 4 * 3
    # inner ones (x by x or y) dropped, partners identified
    assert len(class_level_automorphisms(2)) == (12 - 4) // 2


def test_marked_reduction_with_one_survivor():
    phi = WhiteheadAutomorphism.parse("({X},y)", 3)
    w = Word.parse("xyxyxYz", 3)
    marked = apply_whitehead_to_word(phi, w)
    assert str(marked) == "x [Y] y x [Y] y x [Y] Y z"
    cyc, survivors = marked_cyclic_reduce(marked)
    assert str(cyc) == "xxxYYz"
    assert survivors == 1
    assert not is_fine_on_word(phi, CyclicWord(3, w.letters))


def test_marked_reduction_prefers_inserted():
    # y -> xy on Xy: the inserted x cancels the original X
    phi = WhiteheadAutomorphism.parse("({y},x)", 2)
    w = Word.parse("Xy", 2)
    reduced, survivors = marked_free_reduce(apply_whitehead_to_word(phi, w))
    assert str(reduced) == "y"
    assert survivors == 0


@given(raw_words(3))
def test_marked_reduction_matches_plain_reduction(raw):
    w = free_reduce(raw, 3)
    for phi in list(whitehead_automorphisms(3))[::7]:
        marked = apply_whitehead_to_word(phi, w)
        assert marked_free_reduce(marked)[0] == phi(w)
        if not w.is_trivial():
            cyc = cyclic_reduce(w)[0]
            assert marked_cyclic_reduce(apply_whitehead_to_word(phi, cyc))[0] == phi(cyc)


def test_fine_linear_versus_cyclic():
    phi = WhiteheadAutomorphism.parse("({Y},x)", 2)
    w = Word.parse("xy", 2)
    assert str(phi(w)) == "xyX"
    assert str(phi(CyclicWord(2, w.letters))) == "y"
    assert not is_fine_on_word(phi, w, cyclic=False)
    assert is_fine_on_word(phi, CyclicWord(2, w.letters))
