"""Flattening pipeline: escape search, case analysis, pigeonhole iteration,
and the end-to-end run on the reference pair."""

import numpy as np
import pytest

import diffeolab as dl
from diffeolab.action import word_values
from diffeolab.certify import Interval
from diffeolab.generators import build_pp, mobius
from diffeolab.zassenhaus import (FlattenParams, choose_case, find_escape_word,
                                  flatten, pigeonhole_bound)

PP = build_pp()
F, G = PP.generators
CERT = dl.check_pingpong(F, G, dl.Interval(*dl.PP_I), dl.Interval(*dl.PP_J))


def test_escape_trivial_when_inside():
    assert find_escape_word(PP, 0.95, Interval(0.9, 1.0)).letters == ()


def test_escape_reaches_zone():
    w = find_escape_word(PP, 0.1, Interval(0.9, 1.0))
    assert len(w) >= 1
    assert 0.9 <= dl.apply_word(w, 0.1, PP).value <= 1.0


def test_escape_cap_exhausted():
    with pytest.raises(dl.CapExhausted) as exc:
        find_escape_word(PP, 0.5, Interval(0.999999, 1.0), cap=3)
    assert 0.0 < exc.value.best < 0.999999


def test_choose_case_one():
    # f(z) <= g(f(z)): keep (f, g) as they are
    f, g = mobius("f", 2.0), mobius("g", 1.5)
    c = choose_case(f, g, 0.5)
    assert c.case == 1
    assert c.alpha.text == "f" and c.beta.text == "g" and c.z0 == 0.5


def test_choose_case_two():
    # g pulls f(z) back below f(z) but not below z
    f, g = mobius("f", 2.0), mobius("g", 0.9)
    c = choose_case(f, g, 0.5)
    assert c.case == 2
    assert c.alpha.text == "g f" and c.beta.text == "f" and c.z0 == 0.5


def test_choose_case_three():
    # g f pushes z strictly down: invert the composition
    f, g = mobius("f", 2.0), mobius("g", 0.25)
    c = choose_case(f, g, 0.5)
    assert c.case == 3
    assert c.alpha.text == "f^-1 g^-1" and c.beta.text == "g^-1"
    assert c.z0 == pytest.approx(1.0 / 3.0, abs=1e-15)


def test_choose_case_needs_upward_f():
    f, g = mobius("f", 0.5), mobius("g", 2.0)
    with pytest.raises(dl.PreconditionError):
        choose_case(f, g, 0.5)
    c = choose_case(f, g, 0.5, sign=-1)
    assert c.case in (1, 2, 3)


def test_pigeonhole_bound_iteration():
    assert pigeonhole_bound(2.0, 3, 1.01, 5, 0.1) == 156


def test_pigeonhole_bound_trivial():
    # epsilon above M^(2m+4) is satisfied at the first level
    assert pigeonhole_bound(2.0, 3, 1.01, 5, 2000.0) == 1


def test_pigeonhole_bound_no_decay():
    with pytest.raises(dl.PreconditionError):
        pigeonhole_bound(2.0, 3, 2.0 ** (1.0 / 10.0), 5, 0.1)


def test_flatten_invalid_certificate_rejected():
    from diffeolab.generators import spline
    f2 = spline("g", [(0.0, 0.0), (0.1, 0.251), (0.9, 0.349), (1.0, 1.0)])
    bad = dl.check_pingpong(F, f2, dl.Interval(*dl.PP_I), dl.Interval(*dl.PP_J))
    assert not bad.valid
    with pytest.raises(dl.PreconditionError):
        flatten(F, f2, bad, 0.5)


def test_flatten_reference_run():
    rep = flatten(F, G, CERT, 0.5)
    assert rep.status == "success"
    assert rep.v is not None and len(rep.v) > 0
    assert rep.c0.certified_bound < 1.0
    assert rep.g1.text != rep.g2.text
    # enumerated candidate counts follow 2^(n+1) - 2
    for row in rep.rows:
        assert row.candidates == 2 ** (row.n + 1) - 2
    # audit columns are clean
    assert rep.lemma1_violations == 0
    assert rep.suffix_violations == 0
    assert rep.theta_audit_violations == 0
    assert rep.lemma1_min_slack >= -1e-12
    assert rep.theoretical_n is not None and rep.theoretical_n > rep.n_used
    assert rep.nontrivial_point is not None and rep.nontrivial_point[1] > 0


def test_flatten_accepted_word_verified_densely():
    rep = flatten(F, G, CERT, 0.5)
    xs = np.linspace(0.0, 1.0, 100_001)
    dense = float(np.max(np.abs(word_values(rep.v, xs, PP) - xs)))
    assert dense <= rep.c0.certified_bound
    assert dense < 1.0


def test_flatten_cap_exhausted_on_tiny_level_budget():
    rep = flatten(F, G, CERT, 0.2, FlattenParams(0.2, n_max=1))
    assert rep.status == "cap_exhausted"
    assert rep.best_v is not None
    assert rep.best_certified >= 0.4


def test_flatten_best_certified_monotone():
    rep = flatten(F, G, CERT, 0.2)
    best = [row.best_certified for row in rep.rows]
    assert best == sorted(best, reverse=True)
