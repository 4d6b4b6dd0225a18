"""Statistics for the experiment harnesses.

Implemented from the definitions rather than wrapped from scipy so the
contracts stay exact and testable against brute-force oracles: min-rank-sum
Wilcoxon with an exact tail for small n, tie-corrected Mann-Whitney,
paired Cohen's d, Shrout-Fleiss ICC(2,1), and interval-metric Krippendorff
alpha. scipy supplies only the Student-t CDF for Pearson p-values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from scipy.stats import t as _student_t


class DegenerateInput(Exception):
    def __init__(self, kind: str, message: str = ""):
        self.kind = kind
        super().__init__(f"{kind}: {message}" if message else kind)


def _mean(xs) -> float:
    return sum(xs) / len(xs)


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


# ---------------------------------------------------------------------------
# Pearson

@dataclass(frozen=True)
class PearsonResult:
    r: float
    t: float
    df: int
    p_two_sided: float


def pearson_r(x: list[float], y: list[float]) -> PearsonResult:
    if len(x) != len(y):
        raise ValueError("paired samples must have equal length")
    n = len(x)
    if n < 3:
        raise DegenerateInput("too_short", f"need >= 3 pairs, got {n}")
    mx, my = _mean(x), _mean(y)
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInput("zero_variance")
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    r = sxy / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    df = n - 2
    if abs(r) >= 1.0:
        return PearsonResult(r=r, t=math.copysign(math.inf, r), df=df,
                             p_two_sided=0.0)
    t_stat = r * math.sqrt(df / (1.0 - r * r))
    p = 2.0 * float(_student_t.sf(abs(t_stat), df))
    return PearsonResult(r=r, t=t_stat, df=df, p_two_sided=min(1.0, p))


# ---------------------------------------------------------------------------
# Wilcoxon signed-rank (paired)

def _midranks(values: list[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = rank
        i = j + 1
    return ranks


def _exact_signed_rank_p(doubled_ranks: list[int], w2_obs: int) -> float:
    """P(W+ <= w_obs) * 2 by DP over all 2^n sign assignments.

    Ranks are doubled so midranks (x.5) become integers; tail counts are
    exact Fractions of 2^n.
    """
    total = sum(doubled_ranks)
    # counts[s] = number of subsets with doubled rank-sum s
    counts = [0] * (total + 1)
    counts[0] = 1
    for r in doubled_ranks:
        for s in range(total, r - 1, -1):
            counts[s] += counts[s - r]
    tail = sum(counts[: w2_obs + 1])
    p = 2 * Fraction(tail, 2 ** len(doubled_ranks))
    return float(min(p, Fraction(1)))


def wilcoxon_signed_rank(before: list[float], after: list[float],
                         exact_max_n: int = 25) -> tuple[float, float]:
    """Returns (W, p_two_sided) with W = min(positive, negative rank sum)."""
    if len(before) != len(after):
        raise ValueError("paired samples must have equal length")
    diffs = [b - a for a, b in zip(before, after)]
    diffs = [d for d in diffs if d != 0.0]
    if not diffs:
        raise DegenerateInput("all_zero_diffs")
    n = len(diffs)
    ranks = _midranks([abs(d) for d in diffs])
    w_pos = sum(r for r, d in zip(ranks, diffs) if d > 0)
    w_neg = sum(r for r, d in zip(ranks, diffs) if d < 0)
    w = min(w_pos, w_neg)

    if n <= exact_max_n:
        doubled = [int(round(2 * r)) for r in ranks]
        p = _exact_signed_rank_p(doubled, int(round(2 * w)))
        return w, p

    mean = n * (n + 1) / 4.0
    tie_groups: dict[float, int] = {}
    for d in diffs:
        tie_groups[abs(d)] = tie_groups.get(abs(d), 0) + 1
    tie_term = sum(t ** 3 - t for t in tie_groups.values()) / 48.0
    var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term
    if var <= 0:
        raise DegenerateInput("all_zero_diffs", "no variance in ranks")
    z = (w - mean + 0.5) / math.sqrt(var)  # continuity correction toward mean
    p = 2.0 * _normal_sf(-z) if z < 0 else 2.0 * _normal_sf(z)
    return w, min(1.0, p)


# ---------------------------------------------------------------------------
# Mann-Whitney U (independent samples)

def mann_whitney_u(a: list[float], b: list[float]) -> tuple[float, float]:
    """Returns (U of sample a, two-sided p via tie-corrected normal approx)."""
    if not a or not b:
        raise ValueError("both samples must be nonempty")
    na, nb = len(a), len(b)
    u = 0.0
    for x in a:
        for y in b:
            if x > y:
                u += 1.0
            elif x == y:
                u += 0.5
    n = na + nb
    mean = na * nb / 2.0
    pooled = list(a) + list(b)
    tie_groups: dict[float, int] = {}
    for v in pooled:
        tie_groups[v] = tie_groups.get(v, 0) + 1
    tie_term = sum(t ** 3 - t for t in tie_groups.values())
    var = na * nb / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var <= 0:
        # all values identical: U is exactly its mean, no evidence either way
        return u, 1.0
    cc = 0.5 if u != mean else 0.0
    z = (u - mean - math.copysign(cc, u - mean)) / math.sqrt(var)
    return u, min(1.0, 2.0 * _normal_sf(abs(z)))


# ---------------------------------------------------------------------------
# Effect size

def cohen_d_paired(before: list[float], after: list[float]) -> float:
    if len(before) != len(after):
        raise ValueError("paired samples must have equal length")
    if len(before) < 2:
        raise DegenerateInput("zero_sd", "need >= 2 pairs")
    diffs = [b - a for a, b in zip(before, after)]
    m = _mean(diffs)
    var = sum((d - m) ** 2 for d in diffs) / (len(diffs) - 1)
    if var == 0.0:
        raise DegenerateInput("zero_sd")
    return m / math.sqrt(var)


# ---------------------------------------------------------------------------
# Inter-rater reliability

def icc_2_1(ratings: list[list[float]]) -> float:
    """ICC(2,1): two-way random effects, absolute agreement, single rater.

    ``ratings`` is a complete targets x raters matrix.
    """
    n = len(ratings)
    if n < 2:
        raise ValueError("need >= 2 targets")
    k = len(ratings[0])
    if k < 2 or any(len(row) != k for row in ratings):
        raise ValueError("need a complete matrix with >= 2 raters")
    grand = _mean([v for row in ratings for v in row])
    row_means = [_mean(row) for row in ratings]
    col_means = [_mean([ratings[i][j] for i in range(n)]) for j in range(k)]
    msr = k * sum((m - grand) ** 2 for m in row_means) / (n - 1)
    msc = n * sum((m - grand) ** 2 for m in col_means) / (k - 1)
    sse = sum(
        (ratings[i][j] - row_means[i] - col_means[j] + grand) ** 2
        for i in range(n) for j in range(k)
    )
    mse = sse / ((n - 1) * (k - 1))
    denom = msr + (k - 1) * mse + k * (msc - mse) / n
    if denom == 0.0:
        raise DegenerateInput("constant_matrix")
    return (msr - mse) / denom


def krippendorff_alpha_interval(
        ratings: list[list[float | None]]) -> float:
    """Krippendorff's alpha with the interval metric; None marks missing.

    ``ratings`` is targets x raters. Units with fewer than two ratings are
    unpairable and ignored.
    """
    units = [[v for v in row if v is not None] for row in ratings]
    units = [u for u in units if len(u) >= 2]
    if not units:
        raise DegenerateInput("no_overlap", "no unit has two ratings")
    pooled = [v for u in units for v in u]
    n = len(pooled)
    d_expected = sum(
        (pooled[i] - pooled[j]) ** 2
        for i in range(n) for j in range(i + 1, n)
    )
    if d_expected == 0.0:
        raise DegenerateInput("no_overlap", "all pairable values identical")
    d_observed = sum(
        sum((u[i] - u[j]) ** 2 for i in range(len(u))
            for j in range(i + 1, len(u))) / (len(u) - 1)
        for u in units
    )
    return 1.0 - (n - 1) * d_observed / d_expected
