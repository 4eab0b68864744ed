"""Interval transport search: push a base interval through every reduced word
and look for one orbit point landing inside another word's interval.

Transporting an interval through one more letter rescales its length by at
least the letter's derivative infimum, so with all generators inside the
epsilon-ball each transition obeys |s(D_w)| >= (1 - 10 eps) |D_w|; the per
level sums of transported lengths then dominate ((1 - 10 eps) lambda)^n |D|
whenever the sphere count exceeds lambda^n.  An overlap pair (g1, g2) with
g2(x0) inside g1(D) pulls back to g1^-1 g2(x0) inside D itself.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..action import GridSpec, apply_word, c1_dist_to_id, word_values
from ..certify import Interval
from ..errors import DomainError, PreconditionError
from ..generators import GeneratorSet, Letter
from ..words import Word, concat_reduce, invert, level_word, sphere_levels


@dataclass(frozen=True)
class TransportParams:
    x0: float
    delta_len: float
    epsilon: float
    lam: float
    n_max: int = 12
    word_cap: int = 4_000_000
    time_budget_s: float | None = None

    @property
    def delta(self) -> Interval:
        return Interval(self.x0, self.x0 + self.delta_len)


@dataclass(frozen=True)
class TransportRow:
    n: int
    sphere_words: int
    sum_lengths: float
    lower_bound: float
    bound_applicable: bool
    bound_ok: bool
    transition_violations: int


@dataclass
class TransportReport:
    status: str                       # found | not_found | time_budget | cap
    x0: float
    delta: Interval
    epsilon: float
    lam: float
    rows: list[TransportRow] = field(default_factory=list)
    n_found: int | None = None
    g1: Word | None = None
    g2: Word | None = None
    g2_x0: float = math.nan
    delta_g1: Interval | None = None
    pullback: float = math.nan
    pullback_in_delta: bool = False
    distinctness: str = ""            # distinct_by_normal_form | separated_on_grid | ...
    separation: float = math.nan


def _check_ball(S: GeneratorSet, epsilon: float) -> None:
    grid = GridSpec(4000)
    for g in S.generators:
        est = c1_dist_to_id(Word((Letter(g.id, 1),)), grid, S)
        if est.certified_bound > epsilon:
            raise PreconditionError(
                f"generator {g.id!r} is not within the {epsilon:g}-ball "
                f"(certified {est.certified_bound:g})")


def interval_transport_search(S: GeneratorSet, params: TransportParams,
                              nf=None) -> TransportReport:
    """Run the per-level transport sums and the overlap pair search.

    ``nf`` optionally maps a word to an exact group normal form; when given,
    pairs equal as group elements are skipped in favor of the canonically
    first pair with distinct forms, and distinctness is certified by the
    form.  Without it, distinctness falls back to grid separation.
    """
    delta = params.delta
    if not (0.0 < delta.lo and delta.hi < 1.0):
        raise DomainError("base interval must sit inside (0, 1)")
    _check_ball(S, params.epsilon)
    factor = max(1.0 - 10.0 * params.epsilon, 0.0)
    deadline = (time.monotonic() + params.time_budget_s
                if params.time_budget_s else None)

    report = TransportReport(status="not_found", x0=params.x0, delta=delta,
                             epsilon=params.epsilon, lam=params.lam)
    levels = sphere_levels(S, params.n_max, cap=params.word_cap)
    if len(levels) != params.n_max + 1:
        report.status = "cap_exhausted"

    lo = np.array([delta.lo])
    hi = np.array([delta.hi])
    lengths = np.array([delta.length])
    all_lo = [lo.copy()]
    all_hi = [hi.copy()]
    found = None
    for m in range(1, len(levels)):
        if deadline and time.monotonic() > deadline:
            report.status = "time_budget"
            break
        lev = levels[m]
        new_lo = np.empty(lev.size)
        new_hi = np.empty(lev.size)
        for s, letter in enumerate(S.alphabet):
            rows = np.nonzero(lev.letter == s)[0]
            if not len(rows):
                continue
            gmap = S[letter.gen]
            if letter.sign > 0:
                new_lo[rows] = gmap.value(lo[lev.parent[rows]])
                new_hi[rows] = gmap.value(hi[lev.parent[rows]])
            else:
                new_lo[rows] = gmap.inverse(lo[lev.parent[rows]])
                new_hi[rows] = gmap.inverse(hi[lev.parent[rows]])
        new_len = new_hi - new_lo
        violations = int(np.count_nonzero(
            new_len < factor * lengths[lev.parent] - 1e-15))
        total = float(np.sum(new_len))
        bound = (factor * params.lam) ** m * delta.length
        applicable = lev.size >= params.lam ** m
        report.rows.append(TransportRow(
            n=m, sphere_words=lev.size, sum_lengths=total, lower_bound=bound,
            bound_applicable=applicable,
            bound_ok=(total > bound) or not applicable,
            transition_violations=violations))
        lo, hi, lengths = new_lo, new_hi, new_len
        all_lo.append(lo)
        all_hi.append(hi)
        if found is None:
            found = _find_overlap(all_lo, all_hi, nf, levels, S)
    if found is not None:
        j_lev, j_idx, i_lev, i_idx, certified = found
        g1 = level_word(levels, i_lev, i_idx, S)
        g2 = level_word(levels, j_lev, j_idx, S)
        report.status = "found"
        report.n_found = max(i_lev, j_lev)
        report.g1, report.g2 = g1, g2
        report.g2_x0 = float(all_lo[j_lev][j_idx])
        report.delta_g1 = Interval(float(all_lo[i_lev][i_idx]),
                                   float(all_hi[i_lev][i_idx]))
        pull = apply_word(concat_reduce(invert(g1), g2), params.x0, S).value
        report.pullback = pull
        report.pullback_in_delta = delta.lo - 1e-12 <= pull <= delta.hi + 1e-12
        if certified:
            report.distinctness = "distinct_by_normal_form"
        else:
            xs = np.linspace(0.0, 1.0, 513)
            sep = float(np.max(np.abs(word_values(g1, xs, S)
                                      - word_values(g2, xs, S))))
            report.separation = sep
            report.distinctness = ("separated_on_grid" if sep >= 1e-9
                                   else "possibly_equal_as_maps")
    return report


def _find_overlap(all_lo, all_hi, nf, levels, S):
    """Earliest canonical pair with point-in-interval overlap.

    Candidate j supplies the point g_j(x0); candidate i supplies the
    interval.  With a normal form available the scan prefers pairs distinct
    as group elements and only falls back to a word-distinct pair when no
    such pair exists yet.
    """
    flat_lo = np.concatenate(all_lo)
    flat_hi = np.concatenate(all_hi)
    offsets = np.cumsum([0] + [len(a) for a in all_lo])
    pts = flat_lo
    order_lo = np.sort(flat_lo)
    order_hi = np.sort(flat_hi)
    cnt = (np.searchsorted(order_lo, pts, side="right")
           - np.searchsorted(order_hi, pts, side="left"))
    covered = np.nonzero(cnt >= 2)[0]

    def locate(g_idx):
        lev = int(np.searchsorted(offsets, g_idx, side="right")) - 1
        return lev, int(g_idx - offsets[lev])

    fallback = None
    for j_count, j in enumerate(covered):
        if j_count >= 64 and fallback is not None:
            break
        p = pts[j]
        cands = np.nonzero((flat_lo <= p) & (flat_hi >= p))[0]
        j_lev, j_idx = locate(j)
        nf_j = nf(level_word(levels, j_lev, j_idx, S)) if nf else None
        for i in cands:
            if i == j:
                continue
            i_lev, i_idx = locate(int(i))
            if nf is None:
                return j_lev, j_idx, i_lev, i_idx, False
            nf_i = nf(level_word(levels, i_lev, i_idx, S))
            if nf_i != nf_j:
                return j_lev, j_idx, i_lev, i_idx, True
            if fallback is None:
                fallback = (j_lev, j_idx, i_lev, i_idx, False)
    return fallback
