"""Exactly differentiable orientation-preserving diffeomorphisms of [0, 1].

Four families are provided:

* ``mobius(lam)``: x -> lam*x / ((1-x) + lam*x), with closed-form derivative
  lam/den^2 and closed-form inverse ``mobius(1/lam)``.
* ``polybump(c)``: x -> x + c*x^2*(1-x)^2, flat at both endpoints
  (f'(0) = f'(1) = 1); monotone for |c| < 5.
* ``spline(...)``: monotone C^1 piecewise-cubic Hermite through pinned knots.
  Interior slopes come from the Fritsch-Carlson limiter unless explicitly
  pinned; end slopes are always pinned.
* ``blend(base, t)``: knot-wise convex combination of a spline with the
  identity; ``t = 0`` reproduces the identity map exactly.

All maps fix 0 and 1 exactly in binary64 (the formulas avoid cancellation at
the endpoints), are strictly increasing, and carry certified global derivative
bounds: ``der_inf <= f' <= der_sup`` and ``|f'(y)-f'(z)| <= der_lip*|y-z|``.
Closed-form bounds are analytic; spline bounds come from exact per-segment
extrema of the derivative quadratic, so any dense sample must respect them.

Maps are immutable after construction and all evaluations are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConstructionError, DomainError, NumericError

#: Absolute tolerance accepted from the numeric inverse (splines, polybump).
INVERSE_TOL = 1e-12


class Letter(NamedTuple):
    """One symbol of the symmetrized alphabet: a generator id and a sign."""

    gen: str
    sign: int

    def inverse(self) -> "Letter":
        return Letter(self.gen, -self.sign)

    @property
    def text(self) -> str:
        return self.gen if self.sign > 0 else f"{self.gen}^-1"


def _as_array(x):
    a = np.asarray(x, dtype=float)
    return a, (a.ndim == 0)


def _check_domain(a, lo=0.0, hi=1.0, what="x"):
    if np.any(a < lo) or np.any(a > hi):
        raise DomainError(f"{what} outside [{lo}, {hi}]")


@dataclass(frozen=True)
class _SplineData:
    """Hermite segment data: value = ys[i] + s*(ms[i] + s*(c2[i] + s*c3[i]))."""

    xs: np.ndarray
    ys: np.ndarray
    ms: np.ndarray
    c2: np.ndarray
    c3: np.ndarray


def _fritsch_carlson_slopes(xs, ys, end_slopes, pins=None):
    """Knot slopes for a monotone cubic Hermite interpolant.

    Interior slopes start from secant averages and are shrunk onto the
    Fritsch-Carlson circle (alpha^2 + beta^2 <= 9) per segment.  Pinned slopes
    (both ends, plus any index listed in ``pins``) are never rescaled; if a
    pinned slope violates the circle the construction fails.
    """
    n = len(xs)
    h = np.diff(xs)
    delta = np.diff(ys) / h
    if np.any(delta <= 0):
        raise ConstructionError("knot values must be strictly increasing")
    m = np.empty(n)
    pinned = np.zeros(n, dtype=bool)
    pinned[0] = pinned[-1] = True
    m[0], m[-1] = end_slopes
    for i in range(1, n - 1):
        m[i] = 0.5 * (delta[i - 1] + delta[i])
    for i, slope in (pins or {}).items():
        if not 0 < i < n - 1:
            raise ConstructionError("slope pin index out of range")
        m[i] = slope
        pinned[i] = True
    if np.any(m < 0):
        raise ConstructionError("negative knot slope")
    for i in range(n - 1):
        a = m[i] / delta[i]
        b = m[i + 1] / delta[i]
        r = math.hypot(a, b)
        if r > 3.0:
            if pinned[i] and pinned[i + 1]:
                raise ConstructionError("pinned slopes violate monotonicity limiter")
            t = 3.0 / r
            if not pinned[i]:
                m[i] = t * a * delta[i]
            if not pinned[i + 1]:
                m[i + 1] = t * b * delta[i]
            # Re-check: with one side pinned the other may still be too steep.
            a = m[i] / delta[i]
            b = m[i + 1] / delta[i]
            if math.hypot(a, b) > 3.0 * (1 + 1e-12):
                raise ConstructionError("pinned slope too steep for monotonicity")
    return m


def _spline_from_knots(xs, ys, ms):
    h = np.diff(xs)
    delta = np.diff(ys) / h
    c2 = (3 * delta - 2 * ms[:-1] - ms[1:]) / h
    c3 = (ms[:-1] + ms[1:] - 2 * delta) / (h * h)
    return _SplineData(xs=xs, ys=ys, ms=ms, c2=c2, c3=c3)


def _segment_deriv_extrema(d: _SplineData, i: int, s_lo: float, s_hi: float):
    """Exact min/max of the derivative quadratic of segment i on [s_lo, s_hi]."""
    m, a2, a3 = d.ms[i], d.c2[i], d.c3[i]

    def dv(s):
        return m + s * (2 * a2 + 3 * a3 * s)

    cands = [dv(s_lo), dv(s_hi)]
    if a3 != 0.0:
        s_star = -a2 / (3 * a3)
        if s_lo < s_star < s_hi:
            cands.append(dv(s_star))
    return min(cands), max(cands)


def _segment_lip(d: _SplineData, i: int, s_lo: float, s_hi: float) -> float:
    # Second derivative is linear in s; extremes sit at the ends.
    return max(abs(2 * d.c2[i] + 6 * d.c3[i] * s_lo),
               abs(2 * d.c2[i] + 6 * d.c3[i] * s_hi))


@dataclass(eq=False)
class GeneratorMap:
    """One orientation-preserving diffeomorphism of [0, 1] fixing 0 and 1.

    ``der_inf``/``der_sup`` bound the derivative globally and ``der_lip``
    bounds its Lipschitz constant; all three are certified over-estimates.
    """

    id: str
    family: str
    params: dict
    der_inf: float
    der_sup: float
    der_lip: float
    _spline: _SplineData | None = field(default=None, repr=False)

    # -- evaluation ---------------------------------------------------------

    def value(self, x):
        a, scalar = _as_array(x)
        _check_domain(a)
        v = self._value(a)
        return float(v) if scalar else v

    def deriv(self, x):
        a, scalar = _as_array(x)
        _check_domain(a)
        v = self._deriv(a)
        return float(v) if scalar else v

    def inverse(self, y):
        a, scalar = _as_array(y)
        _check_domain(a, what="y")
        v = self._inverse(a)
        return float(v) if scalar else v

    def _value(self, a):
        fam = self.family
        if fam == "mobius":
            lam = self.params["lam"]
            return lam * a / ((1.0 - a) + lam * a)
        if fam == "polybump":
            c = self.params["c"]
            t = a * (1.0 - a)
            return a + c * t * t
        return _spline_value(self._spline, a)

    def _deriv(self, a):
        fam = self.family
        if fam == "mobius":
            lam = self.params["lam"]
            den = (1.0 - a) + lam * a
            return lam / (den * den)
        if fam == "polybump":
            c = self.params["c"]
            return 1.0 + 2.0 * c * a * (1.0 - a) * (1.0 - 2.0 * a)
        return _spline_deriv(self._spline, a)

    def _inverse(self, a):
        fam = self.family
        if fam == "mobius":
            lam = self.params["lam"]
            inv = 1.0 / lam
            return inv * a / ((1.0 - a) + inv * a)
        if fam == "polybump":
            return _invert_monotone(self._value, self._deriv, a,
                                    np.zeros_like(a), np.ones_like(a))
        return _spline_inverse(self._spline, a)

    # -- certified local analysis -------------------------------------------

    def deriv_range_on(self, lo: float, hi: float) -> tuple[float, float]:
        """Certified (min, max) of the derivative over [lo, hi]."""
        if not 0.0 <= lo <= hi <= 1.0:
            raise DomainError("bad interval")
        if self.family == "mobius":
            d = sorted((float(self._deriv(np.float64(lo))),
                        float(self._deriv(np.float64(hi)))))
            return d[0], d[1]
        if self.family == "polybump":
            pts = [lo, hi]
            for r in ((3 - math.sqrt(3)) / 6, (3 + math.sqrt(3)) / 6):
                if lo < r < hi:
                    pts.append(r)
            vals = [float(self._deriv(np.float64(p))) for p in pts]
            return min(vals), max(vals)
        return _spline_deriv_range(self._spline, lo, hi)

    def deriv_lipschitz_on(self, lo: float, hi: float) -> float:
        """Certified Lipschitz bound for the derivative over [lo, hi]."""
        if not 0.0 <= lo <= hi <= 1.0:
            raise DomainError("bad interval")
        if self.family == "mobius":
            lam = self.params["lam"]
            den_min = min((1.0 - lo) + lam * lo, (1.0 - hi) + lam * hi)
            return 2.0 * lam * abs(lam - 1.0) / den_min ** 3
        if self.family == "polybump":
            c = abs(self.params["c"])
            # |u'(x)| = |1 - 6x + 6x^2| <= 1 on [0, 1].
            return 2.0 * c
        return _spline_lip_range(self._spline, lo, hi)

    def value_bracket(self, lo: float, hi: float) -> tuple[float, float]:
        """Certified bracket of the image of [lo, hi].

        For splines the bracket is rounded outward to the pinned knot values,
        which are exact by construction; closed forms evaluate directly.
        """
        if not 0.0 <= lo <= hi <= 1.0:
            raise DomainError("bad interval")
        if self._spline is None:
            return (float(self._value(np.float64(lo))),
                    float(self._value(np.float64(hi))))
        xs, ys = self._spline.xs, self._spline.ys
        i = int(np.searchsorted(xs, lo, side="right")) - 1
        j = int(np.searchsorted(xs, hi, side="left"))
        return float(ys[max(i, 0)]), float(ys[min(j, len(ys) - 1)])


def _spline_value(d: _SplineData, a):
    i = np.clip(np.searchsorted(d.xs, a, side="right") - 1, 0, len(d.xs) - 2)
    s = a - d.xs[i]
    v = d.ys[i] + s * (d.ms[i] + s * (d.c2[i] + s * d.c3[i]))
    # Right endpoint must be exact; interior knots already are (s == 0).
    return np.where(a == d.xs[-1], d.ys[-1], v)


def _spline_deriv(d: _SplineData, a):
    i = np.clip(np.searchsorted(d.xs, a, side="right") - 1, 0, len(d.xs) - 2)
    s = a - d.xs[i]
    v = d.ms[i] + s * (2 * d.c2[i] + 3 * d.c3[i] * s)
    return np.where(a == d.xs[-1], d.ms[-1], v)


def _spline_inverse(d: _SplineData, y):
    i = np.clip(np.searchsorted(d.ys, y, side="right") - 1, 0, len(d.ys) - 2)
    lo = d.xs[i].copy()
    hi = d.xs[i + 1].copy()
    x = _invert_monotone(lambda t: _spline_value(d, t),
                         lambda t: _spline_deriv(d, t), y, lo, hi)
    # Exact pinned-knot hits must come back exactly.
    hit = y == d.ys[i]
    x = np.where(hit, d.xs[i], x)
    return np.where(y == d.ys[-1], d.xs[-1], x)


def _invert_monotone(value_fn, deriv_fn, y, lo, hi,
                     bisect_steps=22, newton_steps=4):
    """Safeguarded bisection plus Newton polish for a monotone map."""
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    for _ in range(bisect_steps):
        mid = 0.5 * (lo + hi)
        below = value_fn(mid) < y
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    x = 0.5 * (lo + hi)
    for _ in range(newton_steps):
        step = (value_fn(x) - y) / deriv_fn(x)
        x = np.clip(x - step, lo, hi)
    resid = np.abs(value_fn(x) - y)
    if np.any(resid > INVERSE_TOL):
        raise NumericError(f"inverse did not converge (residual {np.max(resid):g})")
    return x


# -- family constructors ------------------------------------------------------

def mobius(gid: str, lam: float) -> GeneratorMap:
    if not lam > 0:
        raise DomainError("mobius parameter must be positive")
    sup, inf = (lam, 1.0 / lam) if lam >= 1.0 else (1.0 / lam, lam)
    lip = 2.0 * lam * (lam - 1.0) if lam >= 1.0 else 2.0 * (1.0 - lam) / (lam * lam)
    return GeneratorMap(gid, "mobius", {"lam": float(lam)}, inf, sup, lip)


def polybump(gid: str, c: float) -> GeneratorMap:
    if not abs(c) < 5.0:
        raise DomainError("polybump parameter must satisfy |c| < 5")
    # max |d/dx x^2(1-x)^2| = 2*max|x(1-x)(1-2x)| = sqrt(3)/9 on [0, 1].
    dev = abs(c) * math.sqrt(3.0) / 9.0
    return GeneratorMap(gid, "polybump", {"c": float(c)},
                        1.0 - dev, 1.0 + dev, 2.0 * abs(c))


def spline(gid: str, knots, end_slopes=(1.0, 1.0), slope_pins=None,
           family: str = "spline") -> GeneratorMap:
    """Monotone cubic Hermite diffeomorphism through ``knots``.

    ``knots`` must start at (0, 0) and end at (1, 1).  ``slope_pins`` maps
    interior knot indices to fixed slopes (used by constructions that need
    identity segments); unpinned interior slopes follow Fritsch-Carlson.
    """
    xs = np.array([k[0] for k in knots], dtype=float)
    ys = np.array([k[1] for k in knots], dtype=float)
    if len(xs) < 2 or xs[0] != 0.0 or ys[0] != 0.0 or xs[-1] != 1.0 or ys[-1] != 1.0:
        raise ConstructionError("knots must run from (0,0) to (1,1)")
    if np.any(np.diff(xs) <= 0):
        raise ConstructionError("knot abscissae must be strictly increasing")
    ms = _fritsch_carlson_slopes(xs, ys, end_slopes, slope_pins)
    data = _spline_from_knots(xs, ys, ms)
    inf, sup, lip = math.inf, -math.inf, 0.0
    for i in range(len(xs) - 1):
        h = xs[i + 1] - xs[i]
        d_lo, d_hi = _segment_deriv_extrema(data, i, 0.0, h)
        if d_lo <= 0.0:
            raise ConstructionError(f"segment {i} is not strictly monotone")
        inf, sup = min(inf, d_lo), max(sup, d_hi)
        lip = max(lip, _segment_lip(data, i, 0.0, h))
    return GeneratorMap(gid, family, {"knots": tuple(map(tuple, knots)),
                                      "end_slopes": tuple(end_slopes)},
                        inf, sup, lip, _spline=data)


def blend(gid: str, base: GeneratorMap, t: float) -> GeneratorMap:
    """Knot-wise convex blend of a spline with the identity (t=0 -> identity)."""
    if base._spline is None:
        raise ConstructionError("blend requires a spline-backed base map")
    if not 0.0 <= t <= 1.0:
        raise DomainError("blend weight must lie in [0, 1]")
    xs = base._spline.xs
    ys = (1.0 - t) * xs + t * base._spline.ys
    ends = (1.0 - t + t * base._spline.ms[0], 1.0 - t + t * base._spline.ms[-1])
    return spline(gid, list(zip(xs, ys)), end_slopes=ends, family="blend")


def _spline_deriv_range(d: _SplineData, lo: float, hi: float):
    i0 = max(int(np.searchsorted(d.xs, lo, side="right")) - 1, 0)
    i1 = min(int(np.searchsorted(d.xs, hi, side="left")), len(d.xs) - 1)
    out_lo, out_hi = math.inf, -math.inf
    for i in range(i0, max(i1, i0 + 1)):
        h = d.xs[i + 1] - d.xs[i]
        s_lo = max(lo - d.xs[i], 0.0)
        s_hi = min(hi - d.xs[i], h)
        if s_lo > s_hi:
            continue
        a, b = _segment_deriv_extrema(d, i, s_lo, s_hi)
        out_lo, out_hi = min(out_lo, a), max(out_hi, b)
    return out_lo, out_hi


def _spline_lip_range(d: _SplineData, lo: float, hi: float) -> float:
    i0 = max(int(np.searchsorted(d.xs, lo, side="right")) - 1, 0)
    i1 = min(int(np.searchsorted(d.xs, hi, side="left")), len(d.xs) - 1)
    out = 0.0
    for i in range(i0, max(i1, i0 + 1)):
        h = d.xs[i + 1] - d.xs[i]
        s_lo = max(lo - d.xs[i], 0.0)
        s_hi = min(hi - d.xs[i], h)
        if s_lo <= s_hi:
            out = max(out, _segment_lip(d, i, s_lo, s_hi))
    return out


def global_bounds(g: GeneratorMap) -> tuple[float, float, float]:
    """(der_inf, der_sup, der_lip) as certified by construction."""
    return g.der_inf, g.der_sup, g.der_lip


def letter_bounds(g: GeneratorMap, sign: int) -> tuple[float, float, float]:
    """(inf, sup, lip) for the generator or its inverse as a letter."""
    if sign > 0:
        return g.der_inf, g.der_sup, g.der_lip
    return (1.0 / g.der_sup, 1.0 / g.der_inf,
            g.der_lip / g.der_inf ** 3)


def letter_value(g: GeneratorMap, sign: int, x):
    return g.value(x) if sign > 0 else g.inverse(x)


def letter_value_deriv(g: GeneratorMap, sign: int, x):
    """Value and derivative of the letter at x (one inverse solve for sign -1)."""
    if sign > 0:
        return g.value(x), g.deriv(x)
    pre = g.inverse(x)
    return pre, 1.0 / g.deriv(pre)


class GeneratorSet:
    """A finite symmetric generating set with its certified constants.

    ``alphabet`` lists letters in canonical order: generators in the given
    order, positive sign before negative.  Two derivative-sum conventions are
    kept because downstream estimates disagree on a factor of two:
    ``m_sum`` is the largest over generator pairs of the sum of their
    derivative sups, and ``m_double`` is twice that.  ``lip_max`` bounds the
    derivative Lipschitz constant over all letters, inverses included.
    """

    def __init__(self, generators):
        gens = tuple(generators)
        if not gens:
            raise ConstructionError("empty generator set")
        ids = [g.id for g in gens]
        if len(set(ids)) != len(ids):
            raise ConstructionError("duplicate generator ids")
        self.generators = gens
        self._by_id = {g.id: g for g in gens}
        self.alphabet = tuple(Letter(g.id, s) for g in gens for s in (1, -1))
        sups = sorted((g.der_sup for g in gens), reverse=True)
        self.m_sum = sups[0] + (sups[1] if len(sups) > 1 else sups[0])
        self.m_double = 2.0 * self.m_sum
        self.lip_max = max(letter_bounds(g, s)[2] for g in gens for s in (1, -1))

    def __len__(self):
        return len(self.generators)

    def __getitem__(self, gid: str) -> GeneratorMap:
        try:
            return self._by_id[gid]
        except KeyError:
            raise DomainError(f"unknown generator id {gid!r}") from None

    def __contains__(self, gid: str) -> bool:
        return gid in self._by_id

    def letter_index(self, letter: Letter) -> int:
        try:
            return self.alphabet.index(Letter(*letter))
        except ValueError:
            raise DomainError(f"letter {letter!r} not in alphabet") from None

    def apply_letter(self, letter: Letter, x):
        return letter_value(self[letter.gen], letter.sign, x)

    def apply_letter_deriv(self, letter: Letter, x):
        return letter_value_deriv(self[letter.gen], letter.sign, x)


# -- reference configuration --------------------------------------------------

#: Ping-pong intervals used by the built-in reference pair.
PP_I = (0.25, 0.35)
PP_J = (0.65, 0.75)


def build_pp() -> GeneratorSet:
    """Built-in reference ping-pong pair `pp`.

    f compresses [0.1, 0.9] into (0.251, 0.349) and g into (0.651, 0.749);
    both have unit end slopes so the flattening pipeline applies to them.
    """
    f = spline("f", [(0.0, 0.0), (0.1, 0.251), (0.9, 0.349), (1.0, 1.0)])
    g = spline("g", [(0.0, 0.0), (0.1, 0.651), (0.9, 0.749), (1.0, 1.0)])
    return GeneratorSet([f, g])
