"""Free-word algebra over a symmetrized generator alphabet.

Words are stored in written (composition) order: the last letter acts first,
matching how reports print them.  All enumeration orders are canonical and
deterministic: letters compare by (generator position, sign) with the positive
sign first, words by length then lexicographically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .generators import GeneratorSet, Letter


@dataclass(frozen=True)
class Word:
    """A freely reduced word; build through :func:`reduce_letters`."""

    letters: tuple[Letter, ...] = ()

    def __len__(self):
        return len(self.letters)

    def __bool__(self):
        return bool(self.letters)

    def __repr__(self):
        return f"Word({self.text!r})"

    @property
    def text(self) -> str:
        """Compact text form, e.g. ``f g^-1 f``; the empty word prints as 1."""
        if not self.letters:
            return "1"
        return " ".join(l.text for l in self.letters)

    def is_positive(self) -> bool:
        return all(l.sign > 0 for l in self.letters)


EMPTY = Word()


def reduce_letters(seq, S: GeneratorSet | None = None) -> Word:
    """Freely reduce a letter sequence; the unique normal form of the word."""
    stack: list[Letter] = []
    for raw in seq:
        letter = Letter(*raw)
        if S is not None and letter.gen not in S:
            raise DomainError(f"unknown generator id {letter.gen!r}")
        if stack and stack[-1].gen == letter.gen and stack[-1].sign == -letter.sign:
            stack.pop()
        else:
            stack.append(letter)
    return Word(tuple(stack))


def invert(w: Word) -> Word:
    return Word(tuple(l.inverse() for l in reversed(w.letters)))


def concat_reduce(w1: Word, w2: Word) -> Word:
    """The reduced product w1 * w2 (w2 acts first)."""
    stack = list(w1.letters)
    for letter in w2.letters:
        if stack and stack[-1].gen == letter.gen and stack[-1].sign == -letter.sign:
            stack.pop()
        else:
            stack.append(letter)
    return Word(tuple(stack))


def suffixes(w: Word) -> list[Word]:
    """The suffixes of lengths 1..n; these act first under application."""
    return [Word(w.letters[-k:]) for k in range(1, len(w.letters) + 1)]


def word_to_text(w: Word) -> str:
    return w.text


def word_from_text(text: str, S: GeneratorSet | None = None) -> Word:
    text = text.strip()
    if text in ("", "1"):
        return EMPTY
    letters = []
    for tok in text.split():
        if tok.endswith("^-1"):
            letters.append(Letter(tok[:-3], -1))
        else:
            letters.append(Letter(tok, 1))
    return reduce_letters(letters, S)


def word_key(w: Word, S: GeneratorSet):
    """Canonical sort key: length first, then letter indices."""
    return (len(w.letters), tuple(S.letter_index(l) for l in w.letters))


# -- enumeration ---------------------------------------------------------------

def enumerate_sphere(S: GeneratorSet, n: int, prefix: Word | None = None):
    """Yield every freely reduced word of length n exactly once, in canonical
    lexicographic order.  ``prefix`` restricts the stream to one fixed-prefix
    block, which makes the stream restartable and chunkable.
    """
    if n < 0:
        raise DomainError("sphere radius must be nonnegative")
    k = len(S.alphabet)
    base = list((prefix or EMPTY).letters)
    if len(base) > n:
        return
    if prefix is not None and reduce_letters(base).letters != tuple(base):
        raise DomainError("prefix must be reduced")
    if len(base) == n:
        yield Word(tuple(base))
        return
    # Iterative DFS over letter indices with last-letter exclusion.
    idx = [0] * (n - len(base))
    depth = 0
    letters = list(S.alphabet)

    def blocked(d, j):
        if d > 0:
            prev = letters[idx[d - 1]]
        elif base:
            prev = base[-1]
        else:
            return False
        return letters[j] == prev.inverse()

    while True:
        j = idx[depth]
        if j >= k:
            if depth == 0:
                return
            depth -= 1
            idx[depth] += 1
            continue
        if blocked(depth, j):
            idx[depth] += 1
            continue
        if depth == len(idx) - 1:
            yield Word(tuple(base) + tuple(letters[i] for i in idx))
            idx[depth] += 1
        else:
            depth += 1
            idx[depth] = 0


def enumerate_ball(S: GeneratorSet, n: int):
    """All reduced words of length 0..n, shortest first."""
    for m in range(n + 1):
        yield from enumerate_sphere(S, m)


def enumerate_positive(pair: tuple[str, str], max_len: int):
    """All inverse-free words over two symbols, lengths 1..max_len.

    Exactly 2^(max_len+1) - 2 words, shortest first and lexicographic within
    each length (first symbol < second symbol).
    """
    if max_len < 1:
        raise DomainError("max_len must be at least 1")
    a, b = (Letter(pair[0], 1), Letter(pair[1], 1))
    for length in range(1, max_len + 1):
        for bits in range(1 << length):
            letters = tuple(b if (bits >> (length - 1 - i)) & 1 else a
                            for i in range(length))
            yield Word(letters)


def positive_count(max_len: int) -> int:
    return (1 << (max_len + 1)) - 2


# -- vectorized level arrays ---------------------------------------------------

@dataclass(frozen=True)
class SphereLevel:
    """Sphere words of one length as flat arrays.

    ``letter[i]`` is the leading (leftmost) letter index of word i and
    ``parent[i]`` its suffix's row in the previous level.  Row order is the
    canonical lexicographic order, so indices double as tie-breakers.
    """

    n: int
    letter: np.ndarray
    parent: np.ndarray

    @property
    def size(self) -> int:
        return len(self.letter)


def sphere_levels(S: GeneratorSet, n_max: int, cap: int | None = None):
    """Level arrays for spheres 0..n_max (level 0 is the empty word).

    Stops early when the cumulative word count would exceed ``cap``; callers
    treat a short list as a partial enumeration.
    """
    k = len(S.alphabet)
    levels = [SphereLevel(0, np.array([-1], dtype=np.int8),
                          np.array([-1], dtype=np.int64))]
    total = 1
    for n in range(1, n_max + 1):
        prev = levels[-1]
        if n == 1:
            letter = np.arange(k, dtype=np.int8)
            parent = np.zeros(k, dtype=np.int64)
        else:
            parts_l, parts_p = [], []
            prev_first = prev.letter
            for s in range(k):
                ok = np.nonzero(prev_first != (s ^ 1))[0]
                parts_l.append(np.full(len(ok), s, dtype=np.int8))
                parts_p.append(ok.astype(np.int64))
            letter = np.concatenate(parts_l)
            parent = np.concatenate(parts_p)
        if cap is not None and total + len(letter) > cap:
            break
        levels.append(SphereLevel(n, letter, parent))
        total += len(letter)
    return levels


def level_word(levels, n: int, idx: int, S: GeneratorSet) -> Word:
    """Reconstruct the word at (level n, row idx)."""
    letters = []
    for m in range(n, 0, -1):
        lev = levels[m]
        letters.append(S.alphabet[int(lev.letter[idx])])
        idx = int(lev.parent[idx])
    return Word(tuple(letters))


def sphere_size(rank: int, n: int) -> int:
    """Reduced-word count of length n over a rank-``rank`` symmetric alphabet."""
    if n == 0:
        return 1
    k = 2 * rank
    return k * (k - 1) ** (n - 1)


@dataclass(frozen=True)
class BallStats:
    """Sphere sizes up to radius n and the n-th root growth estimate."""

    n: int
    sphere_sizes: tuple[int, ...]
    omega_estimate: float


def growth_stats(S: GeneratorSet, n: int) -> BallStats:
    sizes = tuple(sphere_size(len(S.generators), m) for m in range(n + 1))
    ball = sum(sizes)
    return BallStats(n=n, sphere_sizes=sizes,
                     omega_estimate=ball ** (1.0 / n) if n else 1.0)
