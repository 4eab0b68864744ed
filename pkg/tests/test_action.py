"""Word application: orbit traces, chain rule, certified distances, probes."""

import math

import numpy as np
import pytest

import diffeolab as dl
from diffeolab.action import GridSpec, apply_word, c0_dist_to_id, c1_dist_to_id, \
    min_deriv_gap_ball, min_displacement_ball, probe_ball, word_deriv_bounds, \
    word_values
from diffeolab.generators import Letter, build_pp, mobius, polybump
from diffeolab.words import EMPTY, Word, reduce_letters

PP = build_pp()
SMOOTH = dl.GeneratorSet([mobius("f", 1.6), polybump("g", 1.2)])
RNG = np.random.default_rng(4242)


def random_word(S, max_len, rng):
    letters = []
    n = int(rng.integers(1, max_len + 1))
    for _ in range(n):
        cands = [a for a in S.alphabet
                 if not letters or a != letters[-1].inverse()]
        letters.append(cands[int(rng.integers(len(cands)))])
    return reduce_letters(letters)


def test_empty_word_identity():
    tr = apply_word(EMPTY, 0.3, PP)
    assert tr.points == (0.3,)
    assert tr.chain_product == 1.0


def test_single_mobius_trace():
    S = dl.GeneratorSet([mobius("f", 2.0)])
    tr = apply_word(Word((Letter("f", 1),)), 0.5, S)
    assert tr.value == pytest.approx(2.0 / 3.0, abs=1e-15)
    assert tr.chain_product == pytest.approx(8.0 / 9.0, rel=1e-15)


def test_domain_error():
    with pytest.raises(dl.DomainError):
        apply_word(EMPTY, 1.2, PP)


def test_chain_rule_against_finite_differences():
    worst_fd = worst_prod = 0.0
    for _ in range(1000):
        w = random_word(SMOOTH, 12, RNG)
        x = float(RNG.uniform(0.02, 0.98))
        tr = apply_word(w, x, SMOOTH)
        h = 1e-6
        fd = (apply_word(w, x + h, SMOOTH).value
              - apply_word(w, x - h, SMOOTH).value) / (2 * h)
        worst_fd = max(worst_fd, abs(tr.chain_product - fd) / abs(fd))
        prod = math.prod(tr.letter_derivs)
        worst_prod = max(worst_prod,
                         abs(tr.chain_product - prod) / abs(prod))
    assert worst_fd <= 1e-6
    assert worst_prod <= 1e-12


def test_long_chain_product_pairwise():
    # pairwise reduction kicks in above 32 letters and must stay consistent
    letters = (Letter("f", 1),) * 40
    tr = apply_word(Word(letters), 0.37, SMOOTH)
    assert tr.chain_product == pytest.approx(math.prod(tr.letter_derivs),
                                             rel=1e-13)


def test_monotone_transport():
    for _ in range(200):
        w = random_word(PP, 10, RNG)
        x, y = sorted(RNG.uniform(0.0, 1.0, 2))
        if x == y:
            continue
        assert apply_word(w, x, PP).value < apply_word(w, y, PP).value


def test_c0_empty_word():
    est = c0_dist_to_id(EMPTY, GridSpec(1000), PP)
    assert est.grid_max == 0.0
    assert est.certified_bound <= 0.001


def test_c0_mobius_oracle():
    # dense-scan oracle: sup of x(1-x)/(1+x) is 3 - 2 sqrt(2)
    S = dl.GeneratorSet([mobius("f", 2.0)])
    w = Word((Letter("f", 1),))
    est = c0_dist_to_id(w, GridSpec(4000), S)
    xs = np.linspace(0.0, 1.0, 10**6 + 1)
    dense = float(np.max(np.abs(word_values(w, xs, S) - xs)))
    assert dense == pytest.approx(3.0 - 2.0 * math.sqrt(2.0), abs=1e-12)
    assert est.grid_max <= dense <= est.certified_bound
    assert est.certified_bound - est.grid_max == pytest.approx(1 / 4000, abs=1e-15)


def test_c0_certified_sound_random_words():
    xs = np.linspace(0.0, 1.0, 100_001)
    for _ in range(25):
        w = random_word(PP, 9, RNG)
        est = c0_dist_to_id(w, GridSpec(500), PP)
        dense = float(np.max(np.abs(word_values(w, xs, PP) - xs)))
        assert dense <= est.certified_bound


def test_c1_empty_and_mobius():
    est = c1_dist_to_id(EMPTY, GridSpec(1000), PP)
    assert est.grid_max == 0.0 and est.certified_bound <= 1e-3
    S = dl.GeneratorSet([mobius("f", 2.0)])
    est = c1_dist_to_id(Word((Letter("f", 1),)), GridSpec(4000), S)
    # sup|f - id| + sup|f' - 1| with the derivative gap attained at 0
    assert est.grid_max == pytest.approx(1.0 + 3.0 - 2.0 * math.sqrt(2.0), abs=1e-6)
    assert est.certified_bound >= est.grid_max


def test_c1_blend_near_identity():
    f = PP["f"]
    b = dl.blend("fb", f, 0.01)
    S = dl.GeneratorSet([b])
    est = c1_dist_to_id(Word((Letter("fb", 1),)), GridSpec(2000), S)
    assert est.certified_bound < 0.1


def test_c1_requires_finite_lip():
    import dataclasses
    f = dataclasses.replace(mobius("f", 1.2), der_lip=math.nan)
    S = dl.GeneratorSet([f])
    with pytest.raises(dl.PreconditionError):
        c1_dist_to_id(Word((Letter("f", 1),)), GridSpec(100), S)


def test_word_deriv_bounds_sound():
    for _ in range(100):
        w = random_word(PP, 6, RNG)
        inf, sup, lip = word_deriv_bounds(w, PP)
        xs = np.linspace(0.0, 1.0, 2001)
        _, ds = dl.action.word_values_derivs(w, xs, PP)
        assert np.min(ds) >= inf - 1e-9
        assert np.max(ds) <= sup + 1e-9
        quot = np.abs(np.diff(ds)) / np.diff(xs)
        assert np.max(quot) <= lip * (1 + 1e-9) + 1e-9


def test_min_displacement_mobius():
    S = dl.GeneratorSet([mobius("f", 2.0)])
    rep = min_displacement_ball(S, 1, 0.5)
    assert rep.min_displacement == pytest.approx(1.0 / 6.0, abs=1e-12)
    assert rep.argmin_displacement.text == "f"
    with pytest.raises(dl.PreconditionError):
        min_displacement_ball(S, 1, 0.0)


def test_min_deriv_gap_mobius_fixed_point():
    # multiplier at the fixed endpoint is lambda^k, so the gap is 0.5 at k=-1
    S = dl.GeneratorSet([mobius("f", 2.0)])
    rep = min_deriv_gap_ball(S, 3, 0.0)
    assert rep.min_deriv_gap == pytest.approx(0.5, abs=1e-14)
    assert rep.argmin_deriv_gap.text == "f^-1"


def test_probe_empty_ball_rejected():
    with pytest.raises(dl.PreconditionError):
        probe_ball(PP, 0, 0.5)


def test_probe_monotone_in_radius():
    rep = probe_ball(PP, 5, 0.37)
    disp = [r[1] for r in rep.rows]
    gap = [r[2] for r in rep.rows]
    assert disp == sorted(disp, reverse=True)
    assert gap == sorted(gap, reverse=True)


def test_probe_degenerate_flagged():
    # endpoint-flat pair: every derivative gap at 0 is exactly zero
    S = dl.GeneratorSet([polybump("a", 1.0), polybump("b", -0.5)])
    rep = min_deriv_gap_ball(S, 2, 0.0)
    assert rep.min_deriv_gap == 0.0
    assert rep.degenerate_deriv_gap
    assert rep.zero_deriv_gap_words == 16


def test_probe_cap_partial():
    rep = probe_ball(PP, 8, 0.5, cap=50)
    assert not rep.complete
    assert rep.n == 8 and len(rep.rows) < 8


def test_probe_thread_count_invariant():
    a = probe_ball(PP, 5, 0.41, threads=1)
    b = probe_ball(PP, 5, 0.41, threads=8)
    assert a.min_displacement == b.min_displacement
    assert a.min_deriv_gap == b.min_deriv_gap
    assert a.rows == b.rows
