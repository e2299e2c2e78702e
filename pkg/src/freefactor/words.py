"""Words in a free group and Whitehead automorphisms acting on them.

Letters are nonzero integers: ``i`` stands for the generator ``x_i`` and
``-i`` for its inverse.  Generators are numbered from 1 to the rank.

Text syntax
-----------
Compact words use one character per letter, uppercase meaning inverse.
For rank at most 4 the letters are ``x y z t`` (``a b c d`` are accepted
as synonyms); for larger ranks they are ``a`` .. ``z``.  A verbose form
``x1 x2^-1 x3`` is accepted as well.  Whitehead automorphisms are written
``({y,Z,t,T},x)``: the braces list the acted-on set, the last symbol is the
acting letter.
"""

from __future__ import annotations

import itertools
import re
import string
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence, Union

Letter = int

MAX_TEXT_RANK = 26
SHORT_ALPHABET = "xyzt"


class ParseError(ValueError):
    """Raised on malformed word or automorphism text."""

    def __init__(self, message: str, text: str = "", position: int | None = None):
        self.text = text
        self.position = position
        if position is not None:
            message = f"{message} at position {position}\n  {text}\n  {' ' * position}^"
        super().__init__(message)


# ---------------------------------------------------------------------------
# letters and text

def inverse(letter: Letter) -> Letter:
    return -letter


def letter_key(letter: Letter) -> int:
    """Sort key realising the order x1 < X1 < x2 < X2 < ..."""
    return 2 * abs(letter) - (letter > 0)


def all_letters(rank: int) -> list[Letter]:
    """The 2n letters in canonical order."""
    return [s * i for i in range(1, rank + 1) for s in (1, -1)]


def check_letter(letter: Letter, rank: int) -> None:
    if not isinstance(letter, int) or letter == 0 or abs(letter) > rank:
        raise ValueError(f"letter {letter!r} out of range for rank {rank}")


def alphabet(rank: int) -> str:
    if rank <= len(SHORT_ALPHABET):
        return SHORT_ALPHABET[:rank]
    if rank > MAX_TEXT_RANK:
        raise ValueError(f"text syntax supports rank <= {MAX_TEXT_RANK}")
    return string.ascii_lowercase[:rank]


def letter_name(letter: Letter, rank: int) -> str:
    if rank > MAX_TEXT_RANK:
        return f"x{abs(letter)}" + ("^-1" if letter < 0 else "")
    ch = alphabet(rank)[abs(letter) - 1]
    return ch if letter > 0 else ch.upper()


def format_letters(letters: Iterable[Letter], rank: int) -> str:
    text = "".join(letter_name(l, rank) for l in letters)
    return text or "1"


def _char_table(rank: int) -> dict[str, Letter]:
    table: dict[str, Letter] = {}
    names = [alphabet(rank)]
    if rank <= len(SHORT_ALPHABET):
        names.append(string.ascii_lowercase[:rank])
    for name in names:
        for i, ch in enumerate(name, start=1):
            table[ch] = i
            table[ch.upper()] = -i
    return table


_VERBOSE = re.compile(r"\s*x(\d+)(?:\^(-?\d+))?\s*")


def parse_letters(text: str, rank: int) -> list[Letter]:
    """Parse compact (``xYz``) or verbose (``x1 x2^-1``) word text, unreduced."""
    stripped = text.strip()
    if stripped in ("", "1", "e"):
        return []
    if re.fullmatch(r"(\s*x\d+(\^-?\d+)?\s*)+", stripped) and (
        rank > len(SHORT_ALPHABET) or re.search(r"\d", stripped)
    ):
        out: list[Letter] = []
        pos = 0
        while pos < len(text):
            m = _VERBOSE.match(text, pos)
            if not m or m.end() == pos:
                if text[pos:].strip() == "":
                    break
                raise ParseError("unexpected character", text, pos)
            gen = int(m.group(1))
            if not 1 <= gen <= rank:
                raise ParseError(f"generator x{gen} out of range for rank {rank}", text, m.start(1) - 1)
            power = int(m.group(2)) if m.group(2) is not None else 1
            out.extend([gen if power > 0 else -gen] * abs(power))
            pos = m.end()
        return out
    table = _char_table(rank)
    out = []
    for pos, ch in enumerate(text):
        if ch.isspace() or ch in "()*·.":
            continue
        if ch not in table:
            raise ParseError(f"unknown letter {ch!r} for rank {rank}", text, pos)
        out.append(table[ch])
    return out


# ---------------------------------------------------------------------------
# reduction

def reduce_letters(letters: Iterable[Letter]) -> list[Letter]:
    stack: list[Letter] = []
    for l in letters:
        if stack and stack[-1] == -l:
            stack.pop()
        else:
            stack.append(l)
    return stack


def is_reduced(letters: Sequence[Letter]) -> bool:
    return all(letters[i] != -letters[i + 1] for i in range(len(letters) - 1))


def is_cyclically_reduced(letters: Sequence[Letter]) -> bool:
    return is_reduced(letters) and (len(letters) < 2 or letters[0] != -letters[-1])


def _peel(letters: Sequence[Letter]) -> int:
    """Number of conjugating letters stripped from each end of a reduced word."""
    i, j = 0, len(letters) - 1
    while i < j and letters[i] == -letters[j]:
        i += 1
        j -= 1
    return i


def least_rotation(letters: Sequence[Letter]) -> int:
    """Offset of the lexicographically least rotation under ``letter_key``."""
    n = len(letters)
    if n < 2:
        return 0
    keys = [letter_key(l) for l in letters]
    doubled = keys + keys
    best = 0
    for i in range(1, n):
        if doubled[i:i + n] < doubled[best:best + n]:
            best = i
    return best


@dataclass(frozen=True)
class Word:
    """A freely reduced word in F_rank."""

    rank: int
    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        letters = tuple(self.letters)
        object.__setattr__(self, "letters", letters)
        for l in letters:
            check_letter(l, self.rank)
        if not is_reduced(letters):
            raise ValueError(f"word {letters} is not freely reduced")

    @classmethod
    def parse(cls, text: str, rank: int) -> "Word":
        return free_reduce(parse_letters(text, rank), rank)

    @classmethod
    def identity(cls, rank: int) -> "Word":
        return cls(rank, ())

    @classmethod
    def generator(cls, i: int, rank: int) -> "Word":
        return cls(rank, (i,))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __getitem__(self, item):
        return self.letters[item]

    def __mul__(self, other: "Word") -> "Word":
        if other.rank != self.rank:
            raise ValueError("rank mismatch")
        return free_reduce(self.letters + other.letters, self.rank)

    def __pow__(self, k: int) -> "Word":
        base = self if k >= 0 else self.inverse()
        return free_reduce(base.letters * abs(k), self.rank)

    def inverse(self) -> "Word":
        return Word(self.rank, tuple(-l for l in reversed(self.letters)))

    def is_trivial(self) -> bool:
        return not self.letters

    def cyclic_length(self) -> int:
        return len(self.letters) - 2 * _peel(self.letters)

    def __str__(self) -> str:
        return format_letters(self.letters, self.rank)


@dataclass(frozen=True)
class CyclicWord:
    """A cyclically reduced word up to rotation, stored in canonical rotation."""

    rank: int
    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        letters = tuple(self.letters)
        for l in letters:
            check_letter(l, self.rank)
        if not is_cyclically_reduced(letters):
            raise ValueError(f"word {letters} is not cyclically reduced")
        r = least_rotation(letters)
        object.__setattr__(self, "letters", letters[r:] + letters[:r])

    @classmethod
    def parse(cls, text: str, rank: int) -> "CyclicWord":
        return cyclic_reduce(Word.parse(text, rank))[0]

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __getitem__(self, item):
        return self.letters[item]

    def as_word(self) -> Word:
        return Word(self.rank, self.letters)

    def inverse(self) -> "CyclicWord":
        return CyclicWord(self.rank, tuple(-l for l in reversed(self.letters)))

    def __str__(self) -> str:
        return format_letters(self.letters, self.rank)


def free_reduce(raw: Iterable[Letter], rank: int) -> Word:
    raw = list(raw)
    for l in raw:
        check_letter(l, rank)
    return Word(rank, tuple(reduce_letters(raw)))


def cyclic_reduce(w: Word) -> tuple[CyclicWord, Word]:
    """Split ``w`` as ``conjugator * cyclic * conjugator^-1``."""
    k = _peel(w.letters)
    middle = w.letters[k:len(w.letters) - k]
    r = least_rotation(middle)
    conj = free_reduce(w.letters[:k] + middle[:r], w.rank)
    return CyclicWord(w.rank, middle), conj


WordLike = Union[Word, CyclicWord]


# ---------------------------------------------------------------------------
# automorphisms

@dataclass(frozen=True)
class WhiteheadAutomorphism:
    """The Whitehead automorphism ``(A, a)``.

    ``acting`` is fixed; a letter ``b`` outside ``{a, a^-1}`` is sent to
    ``a b`` when ``b`` is in ``A`` and gets ``a^-1`` appended when ``b^-1`` is
    in ``A``.  The acting letter is never a member of ``acted_on``.
    """

    rank: int
    acting: Letter
    acted_on: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "acted_on", frozenset(self.acted_on))
        check_letter(self.acting, self.rank)
        for l in self.acted_on:
            check_letter(l, self.rank)
        if self.acting in self.acted_on or -self.acting in self.acted_on:
            raise ValueError("acted-on set may not contain the acting letter or its inverse")

    @classmethod
    def parse(cls, text: str, rank: int) -> "WhiteheadAutomorphism":
        m = re.fullmatch(r"\s*\(\s*\{([^}]*)\}\s*,\s*(\S+?)\s*\)\s*", text)
        if not m:
            raise ParseError("expected ({letters},a)", text, 0)
        acted = parse_letters(m.group(1).replace(",", " "), rank)
        acting = parse_letters(m.group(2), rank)
        if len(acting) != 1:
            raise ParseError("acting part must be a single letter", text, m.start(2))
        return cls(rank, acting[0], frozenset(acted))

    def image(self, letter: Letter) -> tuple[Letter, ...]:
        a = self.acting
        if letter == a or letter == -a:
            return (letter,)
        out = (letter,)
        if letter in self.acted_on:
            out = (a,) + out
        if -letter in self.acted_on:
            out = out + (-a,)
        return out

    def is_identity(self) -> bool:
        return not self.acted_on

    def is_inner(self) -> bool:
        """True when (A, a) is conjugation by ``a`` (every other letter acted on)."""
        others = set(all_letters(self.rank)) - {self.acting, -self.acting}
        return self.acted_on == others

    def inverse(self) -> "WhiteheadAutomorphism":
        return invert_whitehead(self)

    def __call__(self, w):
        if isinstance(w, CyclicWord):
            return cyclic_reduce(self(w.as_word()))[0]
        letters = [l for b in w for l in self.image(b)]
        return free_reduce(letters, self.rank)

    def as_automorphism(self) -> "Automorphism":
        return Automorphism(self.rank, tuple(
            Word(self.rank, tuple(reduce_letters(self.image(i)))) for i in range(1, self.rank + 1)))

    def __str__(self) -> str:
        acted = sorted(self.acted_on, key=letter_key)
        names = ",".join(letter_name(l, self.rank) for l in acted)
        return f"({{{names}}},{letter_name(self.acting, self.rank)})"


def whitehead_automorphisms(rank: int, *, include_identity: bool = False) -> Iterator[WhiteheadAutomorphism]:
    """Every pair (A, a), in a fixed order: acting letter first, then A by bitmask."""
    letters = all_letters(rank)
    for a in letters:
        others = [l for l in letters if l != a and l != -a]
        for mask in range(1 << len(others)):
            if mask == 0 and not include_identity:
                continue
            acted = frozenset(others[i] for i in range(len(others)) if mask >> i & 1)
            yield WhiteheadAutomorphism(rank, a, acted)


@lru_cache(maxsize=None)
def class_level_automorphisms(rank: int) -> tuple[WhiteheadAutomorphism, ...]:
    """Whitehead automorphisms up to inner factors.

    ``(A, a)`` and ``(A^c - {a, a^-1}, a^-1)`` differ by conjugation, so on
    conjugacy classes only one of each pair is needed; identity and inner
    automorphisms are dropped.
    """
    seen = set()
    out = []
    letters = set(all_letters(rank))
    for phi in whitehead_automorphisms(rank):
        if phi.is_inner():
            continue
        partner_set = frozenset(letters - phi.acted_on - {phi.acting, -phi.acting})
        key = min((phi.acting, phi.acted_on), (-phi.acting, partner_set),
                  key=lambda p: (letter_key(p[0]), sorted(letter_key(l) for l in p[1])))
        if key in seen:
            continue
        seen.add(key)
        out.append(phi)
    return tuple(out)


def invert_whitehead(phi: WhiteheadAutomorphism) -> WhiteheadAutomorphism:
    return WhiteheadAutomorphism(phi.rank, -phi.acting, phi.acted_on)


def conjugation_identity(phi: WhiteheadAutomorphism) -> tuple[Letter, WhiteheadAutomorphism]:
    """Return ``(a, psi)`` with ``phi(w) = a psi(w) a^-1`` for every word ``w``."""
    a = phi.acting
    rest = frozenset(set(all_letters(phi.rank)) - phi.acted_on - {a, -a})
    return a, WhiteheadAutomorphism(phi.rank, -a, rest)


@dataclass(frozen=True)
class Automorphism:
    """An endomorphism of F_rank given by the images of the basis."""

    rank: int
    images: tuple[Word, ...]

    def __post_init__(self):
        if len(self.images) != self.rank:
            raise ValueError("need one image per generator")

    @classmethod
    def identity(cls, rank: int) -> "Automorphism":
        return cls(rank, tuple(Word(rank, (i,)) for i in range(1, rank + 1)))

    def image(self, letter: Letter) -> tuple[Letter, ...]:
        w = self.images[abs(letter) - 1]
        return w.letters if letter > 0 else w.inverse().letters

    def __call__(self, w):
        if isinstance(w, CyclicWord):
            return cyclic_reduce(self(w.as_word()))[0]
        return free_reduce([l for b in w for l in self.image(b)], self.rank)

    def then(self, other) -> "Automorphism":
        """The composite that applies ``self`` first, then ``other``."""
        return Automorphism(self.rank, tuple(other(w) for w in self.images))

    def is_identity(self) -> bool:
        return self == Automorphism.identity(self.rank)

    def __str__(self) -> str:
        return ", ".join(f"{letter_name(i + 1, self.rank)}->{w}" for i, w in enumerate(self.images))


def compose(sequence: Sequence[WhiteheadAutomorphism], rank: int | None = None) -> Automorphism:
    """Automorphism obtained by applying ``sequence[0]`` first, then the rest in order."""
    if rank is None:
        if not sequence:
            raise ValueError("rank required for an empty sequence")
        rank = sequence[0].rank
    result = Automorphism.identity(rank)
    for phi in sequence:
        if phi.rank != rank:
            raise ValueError("rank mismatch in composition")
        result = result.then(phi)
    return result


# ---------------------------------------------------------------------------
# letter-by-letter application with insertion marks

@dataclass(frozen=True)
class MarkedString:
    """An unreduced string where letters added by an automorphism are flagged."""

    rank: int
    symbols: tuple[tuple[Letter, bool], ...]

    def letters(self) -> tuple[Letter, ...]:
        return tuple(l for l, _ in self.symbols)

    def inserted_count(self) -> int:
        return sum(1 for _, ins in self.symbols if ins)

    def __str__(self) -> str:
        parts = []
        for l, ins in self.symbols:
            name = letter_name(l, self.rank)
            parts.append(f"[{name}]" if ins else name)
        return " ".join(parts)


def apply_whitehead_to_word(phi: WhiteheadAutomorphism, w: WordLike) -> MarkedString:
    if phi.rank != w.rank:
        raise ValueError("rank mismatch")
    a = phi.acting
    out = []
    for b in w:
        if b == a or b == -a:
            out.append((b, False))
            continue
        if b in phi.acted_on:
            out.append((a, True))
        out.append((b, False))
        if -b in phi.acted_on:
            out.append((-a, True))
    return MarkedString(phi.rank, tuple(out))


def _marked_stack(symbols: Sequence[tuple[Letter, bool]]) -> list[tuple[Letter, bool]]:
    # seen[k]: letters that occupied stack slot k (as originals) and were cancelled
    # while slots below k stayed intact; any of them may stand in for a later
    # occupant of slot k, so an inserted newcomer is consumed in its place.
    stack: list[tuple[Letter, bool]] = []
    seen: list[set] = [set()]
    for letter, inserted in symbols:
        if stack and stack[-1][0] == -letter:
            top, top_inserted = stack.pop()
            seen.pop()
            if not top_inserted:
                seen[-1].add(top)
            continue
        if inserted and letter in seen[-1]:
            inserted = False
        stack.append((letter, inserted))
        seen.append(set())
    return stack


def marked_free_reduce(s: MarkedString) -> tuple[Word, int]:
    """Free reduction that cancels inserted occurrences in preference to originals.

    Returns the reduced word and the number of inserted letters that survive.
    """
    stack = _marked_stack(s.symbols)
    return Word(s.rank, tuple(l for l, _ in stack)), sum(1 for _, ins in stack if ins)


def _cyclic_survivors(symbols: Sequence[tuple[Letter, bool]]) -> tuple[list[Letter], int]:
    stack = _marked_stack(symbols)
    i, j = 0, len(stack) - 1
    while i < j and stack[i][0] == -stack[j][0]:
        i += 1
        j -= 1
    core = stack[i:j + 1]
    return [l for l, _ in core], sum(1 for _, ins in core if ins)


def marked_cyclic_reduce(s: MarkedString) -> tuple[CyclicWord, int]:
    """Cyclic reduction of a marked string, consuming inserted letters first.

    The linear pass is repeated from every rotation point (stopping early once
    nothing inserted survives) and the smallest survivor count is reported.
    """
    symbols = s.symbols
    letters, best = _cyclic_survivors(symbols)
    for r in range(1, len(symbols)):
        if best == 0:
            break
        _, count = _cyclic_survivors(symbols[r:] + symbols[:r])
        best = min(best, count)
    return CyclicWord(s.rank, tuple(letters)), best


def is_fine_on_word(phi: WhiteheadAutomorphism, w: WordLike, *, cyclic: bool | None = None) -> bool:
    """Whether every letter inserted by ``phi`` cancels during reduction.

    The cyclic variant (default for :class:`CyclicWord`) uses cyclic
    reduction; the linear variant (default for :class:`Word`) uses free
    reduction only, as needed by the relative Whitehead step.
    """
    if cyclic is None:
        cyclic = isinstance(w, CyclicWord)
    s = apply_whitehead_to_word(phi, w)
    if cyclic:
        return marked_cyclic_reduce(s)[1] == 0
    return marked_free_reduce(s)[1] == 0


def exponent_sums(letters: Iterable[Letter], rank: int) -> list[int]:
    sums = [0] * rank
    for l in letters:
        sums[abs(l) - 1] += 1 if l > 0 else -1
    return sums


def random_whitehead(rank: int, rng) -> WhiteheadAutomorphism:
    """A uniformly random non-identity Whitehead automorphism."""
    letters = all_letters(rank)
    while True:
        a = rng.choice(letters)
        acted = frozenset(l for l in letters if l not in (a, -a) and rng.random() < 0.5)
        if acted:
            return WhiteheadAutomorphism(rank, a, acted)


def words_of_length(rank: int, length: int, *, cyclic: bool = False) -> Iterator[tuple[Letter, ...]]:
    """All reduced (or cyclically reduced) letter tuples of a given length."""
    letters = all_letters(rank)
    for tup in itertools.product(letters, repeat=length):
        if cyclic and not is_cyclically_reduced(tup):
            continue
        if not cyclic and not is_reduced(tup):
            continue
        yield tup
