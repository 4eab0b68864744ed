"""Flattening pipeline: drive a free pair toward a nontrivial word that is
certifiably close to the identity in sup distance.

Stages, in order:

1. Pick a grid of N subintervals with 1/N < epsilon and a derivative budget
   theta_N strictly below 2^(1/2N).
2. Scan for a zone width delta near the right endpoint on which every letter
   keeps its derivative inside (1/theta_N, theta_N).
3. Best-first search for an escape word W sending x_1 = 1/N into the zone
   (slightly deepened so the case maps below stay inside it).
4. Case analysis at z = W(x_1) yields words alpha, beta whose positive words
   never pull z0 back below z0, so the whole candidate family
   h = (U beta alpha) W maps every grid point into [z0, 1].
5. Enumerate candidates level by level (|U| = 1, 2, ...), bucket the value
   vectors (h(x_1), ..., h(x_{N-1})) at width base^-n, pull back the closest
   same-bucket pair and accept once the certified sup displacement of
   V = h1^-1 h2 drops below 2 epsilon.

The candidate search set is P_n = {U beta alpha : 1 <= |U| <= n}, so level n
holds exactly 2^(n+1) - 2 candidates; reports record this convention, the
audit columns (every candidate value at z0 and at z), and both the empirical
level reached and the astronomically larger level the a-priori pigeonhole
estimate would demand.
"""

from __future__ import annotations

import heapq
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..action import GridSpec, SupEstimate, apply_word, c0_dist_to_id, word_values
from ..certify import Interval, PingPongCertificate, scan_endpoint_delta
from ..errors import CapExhausted, DomainError, PreconditionError
from ..generators import GeneratorMap, GeneratorSet, Letter
from ..words import EMPTY, Word, concat_reduce, invert

AUDIT_TOL = 1e-12

_PARALLEL_MIN = 1 << 16


@dataclass(frozen=True)
class FlattenParams:
    """Caps and overrides for one flattening run."""

    epsilon: float
    n_max: int = 22
    candidate_cap: int = 1 << 21
    escape_cap: int = 1_000_000
    grid_n: int | None = None
    bucket_base: float | None = None
    time_budget_s: float | None = None


@dataclass(frozen=True)
class FlattenRow:
    n: int
    candidates: int
    buckets: int
    best_certified: float
    status: str


@dataclass
class FlattenReport:
    status: str                      # success | cap_exhausted | time_budget
    epsilon: float
    grid_n: int
    theta_n: float
    delta: float
    swapped: bool
    case: int
    alpha: Word
    beta: Word
    z0: float
    z: float
    w: Word
    m: int
    rows: list[FlattenRow] = field(default_factory=list)
    candidates_total: int = 0
    n_used: int | None = None
    g1: Word | None = None
    g2: Word | None = None
    v: Word | None = None
    c0: SupEstimate | None = None
    best_certified: float = math.inf
    best_v: Word | None = None
    lemma1_violations: int = 0
    suffix_violations: int = 0
    lemma1_min_slack: float = math.inf
    theta_audit_checked: int = 0
    theta_audit_violations: int = 0
    theoretical_n: int | None = None
    nontrivial_point: tuple[float, float] | None = None
    notes: tuple[str, ...] = ()


def find_escape_word(S: GeneratorSet, start: float, zone: Interval,
                     cap: int = 1_000_000) -> Word:
    """Best-first search for a reduced word sending ``start`` into ``zone``.

    Priority is the distance from the image point to the zone; ties break by
    word length and then insertion order, so the result is deterministic.
    Raises :class:`CapExhausted` (carrying the best point reached) when the
    expansion budget runs out.
    """
    if not 0.0 < start < 1.0:
        raise PreconditionError("start must lie in (0, 1)")
    if not (0.0 < zone.lo and zone.hi <= 1.0):
        raise PreconditionError("target zone must sit inside (0, 1]")

    def dist(p):
        return max(zone.lo - p, p - zone.hi, 0.0)

    if dist(start) == 0.0:
        return EMPTY
    letters = S.alphabet
    # nodes[i] = (letter index applied to reach node i, parent node)
    nodes = [(-1, -1)]
    points = [start]
    heap = [(dist(start), 0, 0)]
    seen = {start}
    best = (dist(start), 0)
    counter = 0
    expansions = 0
    while heap:
        d, _, node = heapq.heappop(heap)
        if expansions >= cap:
            break
        expansions += 1
        last = nodes[node][0]
        p = points[node]
        for j, letter in enumerate(letters):
            if last >= 0 and j == (last ^ 1):
                continue
            q = float(S.apply_letter(letter, p))
            if q in seen:
                continue
            seen.add(q)
            nodes.append((j, node))
            points.append(q)
            counter += 1
            dq = dist(q)
            if dq == 0.0:
                out = []
                k = len(nodes) - 1
                while k > 0:
                    out.append(letters[nodes[k][0]])
                    k = nodes[k][1]
                return Word(tuple(out))
            if dq < best[0]:
                best = (dq, len(nodes) - 1)
            heapq.heappush(heap, (dq, counter, len(nodes) - 1))
    raise CapExhausted("escape search cap exhausted",
                       best=points[best[1]])


@dataclass(frozen=True)
class CaseChoice:
    case: int
    alpha: Word
    beta: Word
    z0: float


def choose_case(f: GeneratorMap, g: GeneratorMap, z: float,
                sign: int = 1) -> CaseChoice:
    """Pick (alpha, beta, z0) with z0 <= alpha(z0) <= beta(alpha(z0)).

    Requires f^sign(z) >= z (the caller swaps the pair to its inverses when
    that fails).  Ties resolve toward the lowest-numbered case.
    """
    F = Word((Letter(f.id, sign),))
    G = Word((Letter(g.id, sign),))
    fz = f.value(z) if sign > 0 else f.inverse(z)
    if fz < z:
        raise PreconditionError("choose_case needs f(z) >= z; swap the pair")
    gfz = g.value(fz) if sign > 0 else g.inverse(fz)
    if fz <= gfz:
        choice = CaseChoice(1, F, G, z)
    elif z <= gfz:
        choice = CaseChoice(2, concat_reduce(G, F), F, z)
    else:
        choice = CaseChoice(3, invert(concat_reduce(G, F)), invert(G), gfz)
    s2 = GeneratorSet([f, g])
    a_z0 = apply_word(choice.alpha, choice.z0, s2).value
    ba_z0 = apply_word(choice.beta, a_z0, s2).value
    if not (choice.z0 <= a_z0 + AUDIT_TOL and a_z0 <= ba_z0 + AUDIT_TOL):
        raise PreconditionError("case choice failed the monotone step check")
    return choice


def pigeonhole_bound(M: float, m: int, theta_n: float, N: int,
                     epsilon: float, cap: int = 10_000_000) -> int:
    """Smallest n with M^(2m+4) * theta_N^n * 2^(-n/2N) < epsilon.

    Direct iteration in log space; fails when theta_N >= 2^(1/2N) since the
    left side then never decays below any positive epsilon.
    """
    if M < 1.0 or m < 0 or N < 1 or epsilon <= 0:
        raise DomainError("bad pigeonhole parameters")
    if theta_n >= 2.0 ** (1.0 / (2 * N)):
        raise PreconditionError("theta_N must be strictly below 2^(1/2N)")
    step = math.log(theta_n) - math.log(2.0) / (2 * N)
    if step >= 0.0:
        raise PreconditionError("theta_N must be strictly below 2^(1/2N)")
    lhs = (2 * m + 4) * math.log(M)
    target = math.log(epsilon)
    n = 1
    while lhs + n * step >= target:
        n += 1
        if n > cap:
            raise CapExhausted("pigeonhole iteration cap exceeded", best=None)
    return n


def _apply_word_rows(w: Word, rows: np.ndarray, S: GeneratorSet,
                     threads: int) -> np.ndarray:
    if threads <= 1 or rows.size < _PARALLEL_MIN:
        return word_values(w, rows, S)
    bounds = np.linspace(0, len(rows), threads + 1).astype(int)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(
            lambda k: word_values(w, rows[bounds[k]:bounds[k + 1]], S),
            range(threads)))
    return np.concatenate(parts)


def _decode_candidate(level: int, idx: int, alpha: Word, beta: Word) -> Word:
    """Candidate word U beta alpha for row ``idx`` of level ``level``."""
    symbols = []
    size = 1 << (level - 1)
    for _ in range(level):
        symbols.append(beta if idx >= size else alpha)
        idx %= size
        size >>= 1
    out = EMPTY
    for s in symbols:
        out = concat_reduce(out, s)
    return concat_reduce(concat_reduce(out, beta), alpha)


def flatten(f: GeneratorMap, g: GeneratorMap, cert: PingPongCertificate,
            epsilon: float, params: FlattenParams | None = None,
            threads: int = 1) -> FlattenReport:
    """Run the full pipeline on a certified free pair.

    Returns a report whose status is ``success`` once some pulled-back pair
    has certified sup displacement below ``2 * epsilon``; hitting the level or
    candidate caps yields ``cap_exhausted`` with the best word found so far.
    """
    if not cert.valid:
        raise PreconditionError("ping-pong certificate is invalid")
    if {cert.f_id, cert.g_id} != {f.id, g.id}:
        raise PreconditionError("certificate does not match the pair")
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    params = params or FlattenParams(epsilon)
    S = GeneratorSet([f, g])
    N = params.grid_n or (math.ceil(1.0 / epsilon) + 1)
    if not 1.0 / N < epsilon:
        raise PreconditionError("grid too coarse: need 1/N < epsilon")
    theta_n = 0.5 * (1.0 + 2.0 ** (1.0 / (2 * N)))
    delta = scan_endpoint_delta(S, side=1, theta=theta_n)
    deadline = (time.monotonic() + params.time_budget_s
                if params.time_budget_s else None)

    # Deepened zone: the case maps move points by at most theta_n^4 in zone.
    zone = Interval(1.0 - delta * theta_n ** -4, 1.0)
    W = find_escape_word(S, 1.0 / N, zone, cap=params.escape_cap)

    grid = GridSpec(N)
    xs_int = grid.interior_points()
    y = word_values(W, xs_int, S)
    z = float(y[0])
    sign = 1 if f.value(z) >= z else -1
    choice = choose_case(f, g, z, sign)
    alpha, beta, z0 = choice.alpha, choice.beta, choice.z0

    base = word_values(concat_reduce(beta, alpha),
                       np.concatenate([y, [z0, z]]), S)
    n_grid = len(xs_int)
    base_mat = base.reshape(1, -1)
    bucket_base = params.bucket_base or 2.0 ** (1.0 / (2 * N))

    report = FlattenReport(
        status="cap_exhausted", epsilon=epsilon, grid_n=N, theta_n=theta_n,
        delta=delta, swapped=sign < 0, case=choice.case, alpha=alpha,
        beta=beta, z0=z0, z=z, w=W, m=len(W),
        notes=("candidates enumerate P_n = {U beta alpha : 1 <= |U| <= n}",
               "theoretical level uses the doubled derivative-sum constant"),
    )
    try:
        report.theoretical_n = pigeonhole_bound(S.m_double, len(W), theta_n,
                                                N, epsilon)
    except CapExhausted:
        report.theoretical_n = None

    levels = [base_mat]                  # levels[k] has 2^k rows for k >= 1
    all_rows = None
    lemma1_min = math.inf
    for n in range(1, params.n_max + 1):
        if deadline and time.monotonic() > deadline:
            report.status = "time_budget"
            break
        prev = levels[-1]
        new = np.vstack([_apply_word_rows(alpha, prev, S, threads),
                         _apply_word_rows(beta, prev, S, threads)])
        levels.append(new)
        report.candidates_total += len(new)
        if all_rows is None:
            all_rows = new
        else:
            all_rows = np.vstack([all_rows, new])

        # Candidate audits: value at z0 (never below z0) and at z.
        lemma1_min = min(lemma1_min, float(np.min(new[:, n_grid] - z0)))
        report.lemma1_violations += int(np.count_nonzero(
            new[:, n_grid] < z0 - AUDIT_TOL))
        report.suffix_violations += int(np.count_nonzero(
            new[:, n_grid + 1] < z - AUDIT_TOL))

        width = bucket_base ** float(-n)
        keys = np.floor(all_rows[:, :n_grid] / width).astype(np.int64)
        buckets = len(np.unique(keys, axis=0))
        order = np.argsort(all_rows[:, 0], kind="stable")
        sorted_keys = keys[order]
        same = np.all(sorted_keys[1:] == sorted_keys[:-1], axis=1)
        level_status = "open"
        if np.any(same):
            grid_rows = all_rows[order][:, :n_grid]
            linf = np.max(np.abs(grid_rows[1:] - grid_rows[:-1]), axis=1)
            linf[~same] = np.inf
            k = int(np.argmin(linf))
            i1, i2 = sorted((int(order[k]), int(order[k + 1])))
            g1 = _decode_row(i1, levels, alpha, beta)
            g2 = _decode_row(i2, levels, alpha, beta)
            h1 = concat_reduce(g1, W)
            h2 = concat_reduce(g2, W)
            v = concat_reduce(invert(h1), h2)
            est = c0_dist_to_id(v, grid, S)
            if est.certified_bound < report.best_certified:
                report.best_certified = est.certified_bound
                report.best_v = v
            if est.certified_bound < 2.0 * epsilon and v:
                report.status = "success"
                report.n_used = n
                report.g1, report.g2, report.v, report.c0 = g1, g2, v, est
                level_status = "accepted"
            else:
                level_status = "rejected"
        report.rows.append(FlattenRow(
            n=n, candidates=report.candidates_total, buckets=buckets,
            best_certified=report.best_certified, status=level_status))
        if report.status == "success":
            break
        if report.candidates_total * 2 + 2 > params.candidate_cap:
            report.status = "cap_exhausted"
            break

    report.lemma1_min_slack = lemma1_min
    if report.status == "success":
        _final_audits(report, S, grid, delta, theta_n)
    return report


def _decode_row(global_idx: int, levels, alpha: Word, beta: Word) -> Word:
    offset = 0
    for lvl in range(1, len(levels)):
        size = len(levels[lvl])
        if global_idx < offset + size:
            return _decode_candidate(lvl, global_idx - offset, alpha, beta)
        offset += size
    raise IndexError("candidate index out of range")


def _final_audits(report: FlattenReport, S: GeneratorSet, grid: GridSpec,
                  delta: float, theta_n: float) -> None:
    # Pull-back letter control: wherever the traced point sits in the zone,
    # the letter derivative must stay inside (1/theta_N, theta_N).
    h1_inv = invert(concat_reduce(report.g1, report.w))
    pts = word_values(concat_reduce(report.g2, report.w),
                      grid.interior_points(), S)
    lo = 1.0 - delta
    checked = violations = 0
    for letter in reversed(h1_inv.letters):
        gmap = S[letter.gen]
        in_zone = pts >= lo
        if np.any(in_zone):
            zs = pts[in_zone]
            ds = gmap.deriv(zs) if letter.sign > 0 else 1.0 / gmap.deriv(gmap.inverse(zs))
            checked += len(zs)
            violations += int(np.count_nonzero(
                (ds <= 1.0 / theta_n) | (ds >= theta_n)))
        pts = gmap.value(pts) if letter.sign > 0 else gmap.inverse(pts)
        np.clip(pts, 0.0, 1.0, out=pts)
    report.theta_audit_checked = checked
    report.theta_audit_violations = violations

    # Suffix audit at z for both accepted candidates, letter by letter.
    for cand in (report.g1, report.g2):
        trace = apply_word(cand, report.z, S)
        report.suffix_violations += sum(
            1 for p in trace.points[1:] if p < report.z - AUDIT_TOL)

    xs = np.linspace(0.0, 1.0, 10_001)
    disp = np.abs(word_values(report.v, xs, S) - xs)
    k = int(np.argmax(disp))
    report.nontrivial_point = (float(xs[k]), float(disp[k])) if disp[k] > 0 else None
