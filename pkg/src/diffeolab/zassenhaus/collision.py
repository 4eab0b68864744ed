"""Derivative collision search: bucket sphere words by value at a base point,
sub-bucket by log derivative, and pull back a colliding pair.

A pair in the same value bucket of width lambda^-n satisfies the closeness
condition star-1; a pair in the same log-derivative sub-bucket of width
log(1 + C1) has derivative ratio inside (1 - C1, 1 + C1), which is star-2.
Pulling g2(x0) back through g1^-1 multiplies derivative errors letter by
letter, each step bounded by 1 + M L^(k+1) / lambda^n where M bounds the
derivative Lipschitz constants of the letters and L = 1 + epsilon; the audit
re-checks every step of that chain and the final derivative of V = g1^-1 g2
must land inside (1 - C, 1 + C).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..action import GridSpec, apply_word, c1_dist_to_id
from ..errors import DomainError, PreconditionError
from ..generators import GeneratorSet, Letter
from ..words import Word, concat_reduce, invert, level_word, sphere_levels


def _bracket_n1(eta: float, c1: float, cap: int = 10_000_000) -> int | None:
    """Smallest n with 1 - C1 < (1 - eta^-n)^n and (1 + eta^-n)^n < 1 + C1,
    stable for all larger n (the log bounds decay once n exceeds 1/log eta).
    """
    start = max(int(math.ceil(1.0 / math.log(eta))), 1)
    n = start
    while n <= cap:
        t = eta ** float(-n)
        if t < 1.0:
            lo = n * math.log1p(-t)
            hi = n * math.log1p(t)
            if lo > math.log1p(-c1) and hi < math.log1p(c1):
                return n
        n += max(n // 8, 1)
    return None


@dataclass(frozen=True)
class CollisionParams:
    """Search constants; ``validate`` enforces the compatibility inequalities."""

    x0: float
    c: float
    lam: float
    epsilon: float
    c1: float | None = None
    lam1: float | None = None
    lam2: float | None = None
    eta: float | None = None
    n_max: int = 14
    word_cap: int = 4_000_000
    time_budget_s: float | None = None

    @property
    def big_l(self) -> float:
        return 1.0 + self.epsilon

    def resolved(self) -> "CollisionParams":
        """Fill derived defaults from (x0, c, lam, epsilon)."""
        c1 = self.c1
        if c1 is None:
            c1 = 0.9 * min(1.0 - math.sqrt(1.0 - self.c),
                           math.sqrt(1.0 + self.c) - 1.0)
        eta = self.eta
        if eta is None:
            eta = 0.5 * (1.0 + self.lam / (1.0 + self.epsilon))
        lam1 = self.lam1
        if lam1 is None:
            lam1 = 1.05 * self.lam * (1.0 + self.epsilon) / (1.0 - self.epsilon)
        lam2 = self.lam2 if self.lam2 is not None else 1.05 * lam1
        return CollisionParams(x0=self.x0, c=self.c, lam=self.lam,
                               epsilon=self.epsilon, c1=c1, lam1=lam1,
                               lam2=lam2, eta=eta, n_max=self.n_max,
                               word_cap=self.word_cap,
                               time_budget_s=self.time_budget_s)

    def validate(self) -> None:
        if not 0.0 < self.x0 < 1.0:
            raise PreconditionError("x0 must lie in (0, 1)")
        if not 0.0 < self.epsilon < 1.0:
            raise PreconditionError("epsilon must lie in (0, 1)")
        if not 0.0 < self.c < 1.0:
            raise PreconditionError("C must lie in (0, 1)")
        if None in (self.c1, self.lam1, self.lam2, self.eta):
            raise PreconditionError("parameters not resolved")
        if not 1.0 < self.eta < self.lam / (1.0 + self.epsilon):
            raise PreconditionError("need 1 < eta < lambda / (1 + epsilon)")
        if not ((1.0 + self.epsilon) / (1.0 - self.epsilon)
                < self.lam1 / self.lam):
            raise PreconditionError(
                "need (1+eps)/(1-eps) < lambda1 / lambda")
        if not 1.0 < self.lam < self.lam1 < self.lam2:
            raise PreconditionError("need 1 < lambda < lambda1 < lambda2")
        if not (1.0 - self.c < (1.0 - self.c1) ** 2
                and (1.0 + self.c1) ** 2 < 1.0 + self.c):
            raise PreconditionError(
                "need 1 - C < (1 - C1)^2 and (1 + C1)^2 < 1 + C")


@dataclass(frozen=True)
class CollisionRow:
    n: int
    sphere_words: int
    value_buckets: int
    max_bucket: int
    pair_found: bool


@dataclass
class CollisionReport:
    status: str                        # found | not_found | time_budget | cap
    params: CollisionParams
    n1: int | None
    rows: list[CollisionRow] = field(default_factory=list)
    n_found: int | None = None
    j: int | None = None
    g1: Word | None = None
    g2: Word | None = None
    g1_x0: float = math.nan
    g2_x0: float = math.nan
    star1_gap: float = math.nan
    star1_bound: float = math.nan
    deriv_ratio: float = math.nan
    v: Word | None = None
    v_deriv: float = math.nan
    audit_steps: int = 0
    audit_violations: int = 0
    chain_rel_err: float = math.nan
    distinctness: str = ""


def _check_ball(S: GeneratorSet, epsilon: float) -> None:
    grid = GridSpec(4000)
    for g in S.generators:
        est = c1_dist_to_id(Word((Letter(g.id, 1),)), grid, S)
        if est.certified_bound > epsilon:
            raise PreconditionError(
                f"generator {g.id!r} is not within the {epsilon:g}-ball "
                f"(certified {est.certified_bound:g})")


def _bucket_pair(vals, logds, width_v, width_d, nf_of_idx):
    """Earliest same-(value, derivative)-bucket pair, preferring distinct
    normal forms; returns (i1, i2, certified) or None."""
    j = np.floor(vals / width_v).astype(np.int64)
    sub = np.floor(logds / width_d).astype(np.int64)
    order = np.lexsort((np.arange(len(vals)), sub, j))
    jj, ss = j[order], sub[order]
    fallback = None
    k = 0
    while k < len(jj):
        end = k
        while end + 1 < len(jj) and jj[end + 1] == jj[k] and ss[end + 1] == ss[k]:
            end += 1
        if end > k:
            members = order[k:end + 1]
            if nf_of_idx is None:
                return int(members[0]), int(members[1]), False
            first_nf = nf_of_idx(int(members[0]))
            for other in members[1:]:
                if nf_of_idx(int(other)) != first_nf:
                    return int(members[0]), int(other), True
            if fallback is None:
                fallback = (int(members[0]), int(members[1]), False)
        k = end + 1
    return fallback


def derivative_collision_search(S: GeneratorSet, params: CollisionParams,
                                nf=None) -> CollisionReport:
    """Level-by-level bucket search for a star-1/star-2 pair.

    Accepts the first pair whose pulled-back derivative lands in
    (1 - C, 1 + C); pairs failing that final containment are skipped.  With a
    normal form available, pairs distinct as group elements are preferred and
    the report certifies distinctness through it.
    """
    params = params.resolved()
    params.validate()
    _check_ball(S, params.epsilon)
    n1 = _bracket_n1(params.eta, params.c1)
    report = CollisionReport(status="not_found", params=params, n1=n1)
    deadline = (time.monotonic() + params.time_budget_s
                if params.time_budget_s else None)
    levels = sphere_levels(S, params.n_max, cap=params.word_cap)
    if len(levels) != params.n_max + 1:
        report.status = "cap_exhausted"
    width_d = math.log1p(params.c1)
    big_m = S.lip_max

    vals = np.array([params.x0])
    logds = np.array([0.0])
    for m in range(1, len(levels)):
        if deadline and time.monotonic() > deadline:
            report.status = "time_budget"
            break
        lev = levels[m]
        new_vals = np.empty(lev.size)
        new_logd = np.empty(lev.size)
        for s, letter in enumerate(S.alphabet):
            rows = np.nonzero(lev.letter == s)[0]
            if not len(rows):
                continue
            gmap = S[letter.gen]
            src = vals[lev.parent[rows]]
            if letter.sign > 0:
                new_vals[rows] = gmap.value(src)
                new_logd[rows] = logds[lev.parent[rows]] + np.log(gmap.deriv(src))
            else:
                pre = gmap.inverse(src)
                new_vals[rows] = pre
                new_logd[rows] = logds[lev.parent[rows]] - np.log(gmap.deriv(pre))
        vals, logds = new_vals, new_logd
        width_v = params.lam ** float(-m)
        j_keys = np.floor(vals / width_v).astype(np.int64)
        _, counts = np.unique(j_keys, return_counts=True)
        nf_cache: dict[int, object] = {}

        def nf_of_idx(i, _m=m, _lev_cache=nf_cache):
            if i not in _lev_cache:
                _lev_cache[i] = nf(level_word(levels, _m, i, S))
            return _lev_cache[i]

        pair = _bucket_pair(vals, logds, width_v, width_d,
                            nf_of_idx if nf else None)
        accepted = False
        if pair is not None:
            i1, i2, certified = pair
            accepted = _verify_pair(report, S, levels, m, i1, i2, vals,
                                    certified, big_m)
        report.rows.append(CollisionRow(
            n=m, sphere_words=lev.size, value_buckets=len(counts),
            max_bucket=int(np.max(counts)), pair_found=accepted))
        if accepted:
            report.status = "found"
            break
    return report


def _verify_pair(report, S, levels, n, i1, i2, vals, certified, big_m) -> bool:
    params = report.params
    g1 = level_word(levels, n, i1, S)
    g2 = level_word(levels, n, i2, S)
    t1 = apply_word(g1, params.x0, S)
    t2 = apply_word(g2, params.x0, S)
    gap = abs(t1.value - t2.value)
    bound = params.lam ** float(-n)
    ratio = t1.chain_product / t2.chain_product
    if gap > bound or not (1.0 - params.c1 < ratio < 1.0 + params.c1):
        return False
    v = concat_reduce(invert(g1), g2)
    tv = apply_word(v, params.x0, S)
    if not (1.0 - params.c < tv.chain_product < 1.0 + params.c):
        return False

    # Termwise pull-back audit along W = g1^-1 from both orbit starts.
    w = invert(g1)
    ty = apply_word(w, t1.value, S)
    tz = apply_word(w, t2.value, S)
    steps = violations = 0
    big_l = params.big_l
    for k, (dy, dz) in enumerate(zip(ty.letter_derivs, tz.letter_derivs)):
        r = dy / dz
        err = big_m * big_l ** (k + 1) * bound
        steps += 1
        if not (1.0 - err <= r <= 1.0 + err):
            violations += 1
    # Chain identity: V'(x0) equals (g1^-1)'(g2(x0)) * g2'(x0).
    rhs = tz.chain_product * t2.chain_product
    rel = abs(tv.chain_product - rhs) / abs(rhs)

    report.n_found = n
    report.j = int(math.floor(t1.value / bound))
    report.g1, report.g2 = g1, g2
    report.g1_x0, report.g2_x0 = t1.value, t2.value
    report.star1_gap, report.star1_bound = gap, bound
    report.deriv_ratio = ratio
    report.v, report.v_deriv = v, tv.chain_product
    report.audit_steps, report.audit_violations = steps, violations
    report.chain_rel_err = rel
    report.distinctness = ("distinct_by_normal_form" if certified
                           else "word_distinct_only")
    return True
