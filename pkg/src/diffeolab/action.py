"""Applying words to points: orbit traces, certified distances, ball probes.

Words act suffix-first: for ``W = h_n ... h_1`` the letter ``h_1`` (rightmost
in the written form) is applied first.  The chain-rule product of the
per-letter derivatives along the orbit equals the derivative of the composite
at the start point.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PreconditionError
from .generators import GeneratorSet, letter_bounds
from .words import Word, level_word, sphere_levels

#: Orbit points may leave [0, 1] by at most this much before it is an error.
CLAMP_TOL = 1e-12

_PARALLEL_MIN = 1 << 16


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid 0, 1/N, ..., 1 with step tau = 1/N."""

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("grid needs at least 2 subintervals")

    @property
    def tau(self) -> float:
        return 1.0 / self.n

    def points(self) -> np.ndarray:
        return np.arange(self.n + 1, dtype=float) / self.n

    def interior_points(self) -> np.ndarray:
        return np.arange(1, self.n, dtype=float) / self.n


@dataclass(frozen=True)
class OrbitTrace:
    """Pointwise orbit of one word with per-letter derivatives."""

    x0: float
    points: tuple[float, ...]          # y_0 .. y_n
    letter_derivs: tuple[float, ...]   # h'_{k+1}(y_k)
    chain_product: float               # = W'(x0)
    clamped: bool = False

    @property
    def value(self) -> float:
        return self.points[-1]


def _pairwise_product(vals):
    """Product with pairwise reduction; used for chains longer than 32."""
    vals = list(vals)
    if len(vals) <= 32:
        return math.prod(vals)
    while len(vals) > 1:
        half = [vals[i] * vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            half.append(vals[-1])
        vals = half
    return vals[0]


def apply_word(w: Word, x: float, S: GeneratorSet) -> OrbitTrace:
    """Apply ``w`` to ``x`` letter by letter, recording the full trace."""
    if not 0.0 <= x <= 1.0:
        raise DomainError("point outside [0, 1]")
    y = float(x)
    pts = [y]
    derivs = []
    clamped = False
    for letter in reversed(w.letters):
        g = S[letter.gen]
        y, d = (g.value(y), g.deriv(y)) if letter.sign > 0 else _inv_step(g, y)
        if y < 0.0 or y > 1.0:
            if y < -CLAMP_TOL or y > 1.0 + CLAMP_TOL:
                raise DomainError(f"orbit left [0,1] by more than {CLAMP_TOL}")
            y = min(max(y, 0.0), 1.0)
            clamped = True
        pts.append(y)
        derivs.append(d)
    return OrbitTrace(x0=float(x), points=tuple(pts),
                      letter_derivs=tuple(derivs),
                      chain_product=_pairwise_product(derivs) if derivs else 1.0,
                      clamped=clamped)


def _inv_step(g, y):
    pre = g.inverse(y)
    return pre, 1.0 / g.deriv(pre)


def word_values(w: Word, xs: np.ndarray, S: GeneratorSet) -> np.ndarray:
    """Vectorized w(xs); points are clipped to [0,1] after each letter."""
    ys = np.asarray(xs, dtype=float).copy()
    for letter in reversed(w.letters):
        g = S[letter.gen]
        ys = g.value(ys) if letter.sign > 0 else g.inverse(ys)
        np.clip(ys, 0.0, 1.0, out=ys)
    return ys


def word_values_derivs(w: Word, xs: np.ndarray, S: GeneratorSet):
    """Vectorized (w(xs), w'(xs)); derivative by sequential chain product."""
    ys = np.asarray(xs, dtype=float).copy()
    ds = np.ones_like(ys)
    for letter in reversed(w.letters):
        g = S[letter.gen]
        if letter.sign > 0:
            ds *= g.deriv(ys)
            ys = g.value(ys)
        else:
            ys = g.inverse(ys)
            ds /= g.deriv(ys)
        np.clip(ys, 0.0, 1.0, out=ys)
    return ys, ds


def word_deriv_bounds(w: Word, S: GeneratorSet) -> tuple[float, float, float]:
    """Certified (inf, sup, lip) for the composite derivative.

    Folds letters outermost-last with
    Lip((g o f)') <= lip_g * sup_f^2 + sup_g * lip_f.
    """
    inf, sup, lip = 1.0, 1.0, 0.0
    for letter in reversed(w.letters):
        g_inf, g_sup, g_lip = letter_bounds(S[letter.gen], letter.sign)
        lip = g_lip * sup * sup + g_sup * lip
        inf *= g_inf
        sup *= g_sup
    return inf, sup, lip


@dataclass(frozen=True)
class SupEstimate:
    """Grid maximum plus a certified upper bound for the true sup."""

    grid_max: float
    certified_bound: float
    grid: GridSpec
    argmax_x: float = math.nan


def c0_dist_to_id(w: Word, grid: GridSpec, S: GeneratorSet) -> SupEstimate:
    """Sup displacement |w(x) - x|, certified by monotonicity alone.

    For monotone w and x in [x_i, x_{i+1}] the displacement is squeezed
    between the neighboring grid displacements shifted by tau, so the true
    sup never exceeds grid_max + tau.
    """
    xs = grid.points()
    disp = np.abs(word_values(w, xs, S) - xs)
    k = int(np.argmax(disp))
    return SupEstimate(grid_max=float(disp[k]),
                       certified_bound=float(disp[k]) + grid.tau,
                       grid=grid, argmax_x=float(xs[k]))


def c1_dist_to_id(w: Word, grid: GridSpec, S: GeneratorSet) -> SupEstimate:
    """C^1 distance to the identity: sup|w - id| + sup|w' - 1|.

    The certified bound adds tau for the value part (monotone squeeze) and
    tau * Lip(w') for the derivative part.
    """
    for letter in w.letters:
        if not math.isfinite(S[letter.gen].der_lip):
            raise PreconditionError(f"generator {letter.gen!r} lacks a finite der_lip")
    xs = grid.points()
    ys, ds = word_values_derivs(w, xs, S)
    disp = np.abs(ys - xs)
    gap = np.abs(ds - 1.0)
    grid_max = float(np.max(disp) + np.max(gap))
    lip = word_deriv_bounds(w, S)[2]
    return SupEstimate(grid_max=grid_max,
                       certified_bound=grid_max + grid.tau * (1.0 + lip),
                       grid=grid,
                       argmax_x=float(xs[int(np.argmax(disp + gap))]))


# -- ball probes ---------------------------------------------------------------

@dataclass(frozen=True)
class ProbeReport:
    """Minimum displacement / derivative gap over a ball of reduced words.

    ``min_*`` are literal minima over all nontrivial words.  Because group
    elements supported away from x0 act trivially there, the strictly
    positive evidence lives in ``min_positive_*`` together with the count of
    words fixing x0 to within ``ZERO_TOL``; ``degenerate_*`` flags a minimum
    at the noise level.  Per-radius rows record the running minima, which
    are non-increasing in n by construction.
    """

    x0: float
    n: int
    complete: bool
    min_displacement: float | None = None
    argmin_displacement: Word | None = None
    min_positive_displacement: float | None = None
    zero_displacement_words: int = 0
    min_deriv_gap: float | None = None
    argmin_deriv_gap: Word | None = None
    min_positive_deriv_gap: float | None = None
    zero_deriv_gap_words: int = 0
    rows: tuple = ()

    @property
    def degenerate_displacement(self) -> bool:
        return (self.min_displacement is not None
                and self.min_displacement <= ZERO_TOL)

    @property
    def degenerate_deriv_gap(self) -> bool:
        return (self.min_deriv_gap is not None
                and self.min_deriv_gap <= ZERO_TOL)


def _chunked_letter_apply(S, letter, xs, threads):
    g = S[letter.gen]
    if threads <= 1 or len(xs) < _PARALLEL_MIN:
        if letter.sign > 0:
            return g.value(xs), g.deriv(xs)
        pre = g.inverse(xs)
        return pre, 1.0 / g.deriv(pre)
    bounds = np.linspace(0, len(xs), threads + 1).astype(int)

    def work(k):
        part = xs[bounds[k]:bounds[k + 1]]
        if letter.sign > 0:
            return g.value(part), g.deriv(part)
        pre = g.inverse(part)
        return pre, 1.0 / g.deriv(pre)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(work, range(threads)))
    return (np.concatenate([p[0] for p in parts]),
            np.concatenate([p[1] for p in parts]))


#: Words whose probe value falls at or below this act trivially at x0 for all
#: practical purposes (pure rounding residue of exact cancellations).
ZERO_TOL = 1e-13


class _MinTracker:
    """Running minimum with canonical (level, index) argmin.

    Values at or below ``ZERO_TOL`` count as trivially-acting words; the
    positive floor is the smallest value strictly above that noise level.
    """

    def __init__(self):
        self.value = math.inf
        self.where = None
        self.zero_count = 0
        self.min_positive = math.inf

    def update(self, vals: np.ndarray, n: int):
        zero = vals <= ZERO_TOL
        self.zero_count += int(np.count_nonzero(zero))
        if not np.all(zero):
            self.min_positive = min(self.min_positive,
                                    float(np.min(vals[~zero])))
        k = int(np.argmin(vals))
        if vals[k] < self.value:
            self.value = float(vals[k])
            self.where = (n, k)


def probe_ball(S: GeneratorSet, n: int, x0: float, *, displacement=True,
               deriv_gap=True, cap: int = 4_000_000, threads: int = 1) -> ProbeReport:
    """Exact minima over every nontrivial reduced word of length <= n.

    Evaluation walks sphere levels with vectorized letter application; workers
    only split array chunks, so results are independent of ``threads``.
    """
    if n < 1:
        raise PreconditionError("ball probe needs radius n >= 1")
    if displacement and not 0.0 < x0 < 1.0:
        raise PreconditionError("displacement probe needs x0 in (0, 1)")
    if not 0.0 <= x0 <= 1.0:
        raise DomainError("x0 outside [0, 1]")
    levels = sphere_levels(S, n, cap=cap)
    complete = len(levels) == n + 1
    vals = np.array([x0])
    ders = np.array([1.0])
    disp_t, gap_t = _MinTracker(), _MinTracker()
    rows = []
    for m in range(1, len(levels)):
        lev = levels[m]
        new_vals = np.empty(lev.size)
        new_ders = np.empty(lev.size)
        for s, letter in enumerate(S.alphabet):
            rows_s = np.nonzero(lev.letter == s)[0]
            if not len(rows_s):
                continue
            v, d = _chunked_letter_apply(S, letter, vals[lev.parent[rows_s]], threads)
            new_vals[rows_s] = np.clip(v, 0.0, 1.0)
            new_ders[rows_s] = d * ders[lev.parent[rows_s]]
        vals, ders = new_vals, new_ders
        if displacement:
            disp_t.update(np.abs(vals - x0), m)
        if deriv_gap:
            gap_t.update(np.abs(ders - 1.0), m)
        rows.append((m,
                     disp_t.value if displacement else None,
                     gap_t.value if deriv_gap else None))

    def emit(track, on):
        if not on or track.where is None:
            return None, None, None, 0
        argmin = level_word(levels, track.where[0], track.where[1], S)
        pos = None if math.isinf(track.min_positive) else track.min_positive
        return track.value, argmin, pos, track.zero_count

    d_val, d_arg, d_pos, d_zero = emit(disp_t, displacement)
    g_val, g_arg, g_pos, g_zero = emit(gap_t, deriv_gap)
    return ProbeReport(x0=x0, n=n, complete=complete,
                       min_displacement=d_val, argmin_displacement=d_arg,
                       min_positive_displacement=d_pos,
                       zero_displacement_words=d_zero,
                       min_deriv_gap=g_val, argmin_deriv_gap=g_arg,
                       min_positive_deriv_gap=g_pos,
                       zero_deriv_gap_words=g_zero,
                       rows=tuple(rows))


def min_displacement_ball(S: GeneratorSet, n: int, x0: float, *,
                          cap: int = 4_000_000, threads: int = 1) -> ProbeReport:
    """Minimum of |g(x0) - x0| over nontrivial words of length <= n."""
    return probe_ball(S, n, x0, displacement=True, deriv_gap=False,
                      cap=cap, threads=threads)


def min_deriv_gap_ball(S: GeneratorSet, n: int, x0: float, *,
                       cap: int = 4_000_000, threads: int = 1) -> ProbeReport:
    """Minimum of |g'(x0) - 1| over nontrivial words of length <= n."""
    return probe_ball(S, n, x0, displacement=False, deriv_gap=True,
                      cap=cap, threads=threads)
