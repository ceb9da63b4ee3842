"""Words in a free group and finite presentations.

Letters are signed integers: +i is the i-th generator, -i its inverse
(1-based). The text format maps a..z to 1..26 and A..Z to -1..-26, so
``abAB`` is the commutator of the first two generators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .errors import MalformedWordError, PresentationParseError


@dataclass(frozen=True)
class Word:
    """A word over signed generator indices; the empty word is the identity."""

    letters: tuple[int, ...] = ()

    def __post_init__(self):
        letters = tuple(int(x) for x in self.letters)
        for x in letters:
            if x == 0:
                raise MalformedWordError("letter 0 is not in the signed alphabet")
        object.__setattr__(self, "letters", letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __getitem__(self, i):
        return self.letters[i]

    def __mul__(self, other: "Word") -> "Word":
        return free_reduce(Word(self.letters + other.letters))

    def inverse(self) -> "Word":
        return Word(tuple(-x for x in reversed(self.letters)))

    def is_reduced(self) -> bool:
        return all(a != -b for a, b in zip(self.letters, self.letters[1:]))

    def is_cyclically_reduced(self) -> bool:
        if not self.is_reduced():
            return False
        return len(self.letters) < 2 or self.letters[0] != -self.letters[-1]

    def max_letter(self) -> int:
        return max((abs(x) for x in self.letters), default=0)

    @classmethod
    def from_string(cls, text: str) -> "Word":
        letters = []
        for ch in text:
            if "a" <= ch <= "z":
                letters.append(ord(ch) - ord("a") + 1)
            elif "A" <= ch <= "Z":
                letters.append(-(ord(ch) - ord("A") + 1))
            else:
                raise MalformedWordError(f"unknown generator letter {ch!r}")
        return cls(tuple(letters))

    def __str__(self) -> str:
        out = []
        for x in self.letters:
            if abs(x) > 26:
                return " ".join(str(y) for y in self.letters)
            out.append(chr(ord("a") + x - 1) if x > 0 else chr(ord("A") - x - 1))
        return "".join(out)

    def __repr__(self) -> str:
        return f"Word({str(self)!r})"


def check_alphabet(w: Word, n_generators: int) -> None:
    """Raise unless every letter of w is within the n-generator alphabet."""
    if w.max_letter() > n_generators:
        raise MalformedWordError(
            f"letter index {w.max_letter()} exceeds alphabet of {n_generators} generators"
        )


def free_reduce(w: Word) -> Word:
    """Unique freely reduced form of w; idempotent, never lengthens."""
    out: list[int] = []
    for x in w.letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return Word(tuple(out))


def cyclic_reduce(w: Word) -> Word:
    """A cyclically reduced conjugate of w, of minimal length over rotations."""
    letters = list(free_reduce(w).letters)
    while len(letters) >= 2 and letters[0] == -letters[-1]:
        letters = letters[1:-1]
    return Word(tuple(letters))


@dataclass(frozen=True)
class Presentation:
    """Generators and cyclically reduced relators; k caches the longest relator."""

    n_generators: int
    relators: tuple[Word, ...] = ()

    def __post_init__(self):
        if self.n_generators < 1:
            raise MalformedWordError("a presentation needs at least one generator")
        object.__setattr__(self, "relators", tuple(self.relators))
        for rel in self.relators:
            if len(rel) == 0:
                raise MalformedWordError("empty relator")
            check_alphabet(rel, self.n_generators)
            if not rel.is_cyclically_reduced():
                raise MalformedWordError(f"relator {rel} is not cyclically reduced")

    @property
    def k(self) -> int:
        return max((len(r) for r in self.relators), default=0)

    @property
    def is_free(self) -> bool:
        return not self.relators


def parse_presentation(text: str) -> Presentation:
    """Parse the line format: ``gens <n>`` then ``rel <word>`` lines.

    ``#`` starts a comment line and ``;`` separates directives within a
    line. Relators are normalized by free then cyclic reduction; a relator
    that reduces to nothing is an error.
    """
    n_generators = None
    relators = []
    lines = [
        seg
        for raw in text.splitlines()
        for seg in raw.split("#", 1)[0].split(";")
    ]
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(None, 1)
        keyword = parts[0]
        if keyword == "gens":
            if n_generators is not None:
                raise PresentationParseError(f"line {lineno}: duplicate gens line")
            try:
                n_generators = int(parts[1])
            except (IndexError, ValueError):
                raise PresentationParseError(f"line {lineno}: expected 'gens <n>'")
            if n_generators < 1:
                raise PresentationParseError(f"line {lineno}: need at least one generator")
        elif keyword == "rel":
            if n_generators is None:
                raise PresentationParseError(f"line {lineno}: rel before gens")
            if len(parts) < 2:
                raise PresentationParseError(f"line {lineno}: empty rel line")
            try:
                word = Word.from_string(parts[1])
            except MalformedWordError as exc:
                raise PresentationParseError(f"line {lineno}: {exc}")
            if word.max_letter() > n_generators:
                raise PresentationParseError(
                    f"line {lineno}: generator beyond the declared {n_generators}"
                )
            word = cyclic_reduce(free_reduce(word))
            if len(word) == 0:
                raise PresentationParseError(f"line {lineno}: relator reduces to the empty word")
            relators.append(word)
        else:
            raise PresentationParseError(f"line {lineno}: unknown directive {keyword!r}")
    if n_generators is None:
        raise PresentationParseError("missing gens line")
    return Presentation(n_generators, tuple(relators))


def random_word(rng, n_generators: int, length: int) -> Word:
    """Uniform word (not necessarily reduced) for property tests."""
    alphabet = [s for i in range(1, n_generators + 1) for s in (i, -i)]
    return Word(tuple(rng.choice(alphabet) for _ in range(length)))
