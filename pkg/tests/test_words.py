"""Free-word algebra: reduction, enumeration, counting, serialization."""

import itertools

import numpy as np
import pytest

import diffeolab as dl
from diffeolab.generators import Letter, build_pp
from diffeolab.words import (EMPTY, Word, concat_reduce, enumerate_positive,
                             enumerate_sphere, invert, level_word,
                             positive_count, reduce_letters, sphere_levels,
                             sphere_size, suffixes, word_from_text)

S = build_pp()
F, FI, G, GI = S.alphabet
RNG = np.random.default_rng(77)


def random_word(max_len=14):
    letters = []
    for _ in range(int(RNG.integers(0, max_len + 1))):
        letters.append(S.alphabet[int(RNG.integers(4))])
    return reduce_letters(letters)


def test_reduce_examples():
    assert reduce_letters([F, FI]) is not None
    assert reduce_letters([F, FI]).letters == ()
    assert reduce_letters([F, G, GI, F]).letters == (F, F)
    assert reduce_letters([F, G]).letters == (F, G)


def test_reduce_idempotent_and_unknown_id():
    w = reduce_letters([F, G, GI, FI, G])
    assert reduce_letters(w.letters).letters == w.letters
    with pytest.raises(dl.DomainError):
        reduce_letters([Letter("zz", 1)], S)


def test_invert_and_concat():
    w = reduce_letters([F, GI])
    assert invert(w).letters == (G, FI)
    assert concat_reduce(Word((F,)), Word((FI, G))).letters == (G,)
    assert concat_reduce(EMPTY, w).letters == w.letters
    for _ in range(10_000):
        w = random_word()
        assert concat_reduce(w, invert(w)).letters == ()


def test_suffixes():
    assert [w.letters for w in suffixes(reduce_letters([F, G]))] == [(G,), (F, G)]
    assert suffixes(EMPTY) == []
    w = reduce_letters([F, F, GI])
    assert [x.text for x in suffixes(w)] == ["g^-1", "f g^-1", "f f g^-1"]


def brute_sphere(n):
    """Oracle: filter all letter tuples for free reduction."""
    out = []
    for tup in itertools.product(range(4), repeat=n):
        if all(tup[i + 1] != (tup[i] ^ 1) for i in range(n - 1)):
            out.append(tuple(S.alphabet[j] for j in tup))
    return out


@pytest.mark.parametrize("n", [0, 1, 2, 3, 5])
def test_sphere_matches_brute_force(n):
    got = [w.letters for w in enumerate_sphere(S, n)]
    assert got == brute_sphere(n)


def test_sphere_counts():
    assert sum(1 for _ in enumerate_sphere(S, 0)) == 1
    assert sum(1 for _ in enumerate_sphere(S, 1)) == 4
    assert sum(1 for _ in enumerate_sphere(S, 2)) == 12
    for n in range(1, 11):
        assert sphere_size(2, n) == 4 * 3 ** (n - 1)


def test_sphere_enumeration_counts_match_formula():
    for n in range(0, 11):
        assert sum(1 for _ in enumerate_sphere(S, n)) == sphere_size(2, n)


def test_sphere_levels_agree_with_stream():
    levels = sphere_levels(S, 5)
    for n in range(6):
        stream = list(enumerate_sphere(S, n))
        assert levels[n].size == len(stream)
        for idx in range(levels[n].size):
            assert level_word(levels, n, idx, S).letters == stream[idx].letters


def test_prefix_blocks_partition_sphere():
    n = 4
    whole = list(enumerate_sphere(S, n))
    chunks = []
    for p in enumerate_sphere(S, 2):
        chunks.extend(enumerate_sphere(S, n, prefix=p))
    assert [w.letters for w in chunks] == [w.letters for w in whole]


def test_enumeration_deterministic():
    a = [w.text for w in enumerate_sphere(S, 6)]
    b = [w.text for w in enumerate_sphere(S, 6)]
    assert a == b


def test_positive_counts_exact():
    # 2 + 4 + ... + 2^k, checked by full enumeration up to k = 20
    assert [w.text for w in enumerate_positive(("a", "b"), 1)] == ["a", "b"]
    assert sum(1 for _ in enumerate_positive(("a", "b"), 3)) == 14
    assert positive_count(10) == 2046
    assert sum(1 for _ in enumerate_positive(("a", "b"), 10)) == 2046
    for k in range(1, 21):
        assert positive_count(k) == 2 ** (k + 1) - 2
    assert sum(1 for _ in enumerate_positive(("a", "b"), 20)) == positive_count(20)


def test_positive_words_are_positive_and_ordered():
    seen = list(enumerate_positive(("f", "g"), 6))
    assert all(w.is_positive() for w in seen)
    lens = [len(w) for w in seen]
    assert lens == sorted(lens)


def test_serialization_round_trip():
    assert word_from_text("f g^-1 f").text == "f g^-1 f"
    assert word_from_text("1").letters == ()
    assert EMPTY.text == "1"
    for _ in range(2000):
        w = random_word()
        assert word_from_text(w.text, S).letters == w.letters


def test_growth_stats():
    stats = dl.growth_stats(S, 10)
    assert stats.sphere_sizes[0] == 1
    assert stats.sphere_sizes[2] == 12
    assert 2.9 < stats.omega_estimate < 3.5
