"""Statistical routines against brute-force and hand-computed oracles."""

import itertools
import math
import random
from fractions import Fraction

import pytest

from gameui.stats import (
    DegenerateInput,
    cohen_d_paired,
    icc_2_1,
    krippendorff_alpha_interval,
    mann_whitney_u,
    pearson_r,
    wilcoxon_signed_rank,
)


# ---------------------------------------------------------------------------
# Pearson

def test_pearson_perfect_positive():
    res = pearson_r([1, 2, 3, 4], [3, 5, 7, 9])
    assert res.r == pytest.approx(1.0)
    assert res.p_two_sided == 0.0
    assert math.isinf(res.t)


def test_pearson_perfect_negative():
    res = pearson_r([1, 2, 3, 4], [9, 7, 5, 3])
    assert res.r == pytest.approx(-1.0)
    assert res.p_two_sided == 0.0


def test_pearson_hand_computed_oracle():
    # x = 1..5, y = (2,1,4,3,6): sxy = 10, sxx = 10, syy = 14.8
    res = pearson_r([1, 2, 3, 4, 5], [2, 1, 4, 3, 6])
    assert res.r == pytest.approx(10 / math.sqrt(148), rel=1e-12)
    assert res.r == pytest.approx(0.8219949365267865, abs=1e-15)
    assert res.df == 3
    assert 0.0 < res.p_two_sided < 1.0


def test_pearson_symmetry():
    x = [0.3, 1.9, 2.2, 5.0, 4.1]
    y = [9.0, 3.1, 4.4, 0.2, 2.8]
    assert pearson_r(x, y).r == pytest.approx(pearson_r(y, x).r, rel=1e-12)


def test_pearson_input_validation():
    with pytest.raises(ValueError):
        pearson_r([1, 2], [1, 2, 3])
    with pytest.raises(DegenerateInput) as exc:
        pearson_r([1, 2], [3, 4])
    assert exc.value.kind == "too_short"
    with pytest.raises(DegenerateInput) as exc:
        pearson_r([5, 5, 5], [1, 2, 3])
    assert exc.value.kind == "zero_variance"


# ---------------------------------------------------------------------------
# Wilcoxon signed-rank

def midranks(values):
    pairs = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(pairs):
        j = i
        while j + 1 < len(pairs) and values[pairs[j + 1]] == values[pairs[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[pairs[k]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def brute_wilcoxon(before, after):
    """Sign-enumeration oracle: exact two-sided tail over all 2^n signings."""
    diffs = [b - a for a, b in zip(before, after)]
    diffs = [d for d in diffs if d != 0]
    n = len(diffs)
    ranks = [Fraction(r).limit_denominator(2) for r in midranks([abs(d) for d in diffs])]
    w_pos = sum(r for r, d in zip(ranks, diffs) if d > 0)
    w_neg = sum(r for r, d in zip(ranks, diffs) if d < 0)
    w = min(w_pos, w_neg)
    hits = 0
    for signs in itertools.product((0, 1), repeat=n):
        w_plus = sum(r for r, s in zip(ranks, signs) if s)
        if w_plus <= w:
            hits += 1
    p = min(Fraction(1), 2 * Fraction(hits, 2 ** n))
    return float(w), float(p)


def test_wilcoxon_single_negative_rank():
    before = [10] * 10
    after = [9, 12, 13, 14, 15, 16, 17, 18, 19, 20]
    w, p = wilcoxon_signed_rank(before, after)
    assert w == 1.0  # |−1| is the smallest absolute diff
    assert p == pytest.approx(4 / 1024)  # subsets {} and {1} of rank sums


def test_wilcoxon_all_positive_diffs():
    before = list(range(10))
    after = [b + i + 1 for i, b in enumerate(before)]
    w, p = wilcoxon_signed_rank(before, after)
    assert w == 0.0
    assert p == pytest.approx(2 / 1024)


def test_wilcoxon_is_antisymmetric():
    a = [1.0, 4.0, 2.5, 7.0, 5.5, 3.0]
    b = [2.0, 3.5, 4.0, 6.0, 8.0, 2.0]
    assert wilcoxon_signed_rank(a, b) == wilcoxon_signed_rank(b, a)


def test_wilcoxon_zero_diffs_dropped():
    w, p = wilcoxon_signed_rank([5, 5, 5, 1], [5, 5, 5, 3])
    assert w == 0.0
    assert p == 1.0  # single informative pair: 2 * (1/2) capped


def test_wilcoxon_all_zero_diffs_degenerate():
    with pytest.raises(DegenerateInput) as exc:
        wilcoxon_signed_rank([1, 2, 3], [1, 2, 3])
    assert exc.value.kind == "all_zero_diffs"


def test_wilcoxon_length_mismatch():
    with pytest.raises(ValueError):
        wilcoxon_signed_rank([1, 2], [1])


def test_wilcoxon_exact_matches_sign_enumeration():
    rng = random.Random(777)
    for trial in range(40):
        n = rng.randint(4, 12)
        before = [rng.randint(0, 8) for _ in range(n)]
        after = [v + rng.randint(-4, 4) for v in before]
        if all(a == b for a, b in zip(before, after)):
            after[0] += 1
        w, p = wilcoxon_signed_rank(before, after)
        bw, bp = brute_wilcoxon(before, after)
        assert w == pytest.approx(bw), (before, after)
        assert p == pytest.approx(bp, rel=1e-12), (before, after)


def test_wilcoxon_large_n_uses_normal_tail():
    rng = random.Random(3)
    before = [rng.gauss(5, 1) for _ in range(40)]
    after = [v + rng.gauss(0.8, 0.5) for v in before]
    w, p = wilcoxon_signed_rank(before, after)
    assert 0.0 < p < 0.01  # strong systematic shift
    ranks = midranks([abs(a - b) for a, b in zip(before, after)])
    w_neg = sum(r for r, (b, a) in zip(ranks, zip(before, after)) if a - b < 0)
    assert w == pytest.approx(min(w_neg, sum(ranks) - w_neg))


# ---------------------------------------------------------------------------
# Mann-Whitney U

def brute_u(a, b):
    return sum(1.0 if x > y else 0.5 if x == y else 0.0 for x in a for y in b)


def test_mann_whitney_identical_samples():
    a = [3.0] * 8
    u, p = mann_whitney_u(a, list(a))
    assert u == 32.0  # nm/2 with every comparison a tie
    assert p == 1.0


def test_mann_whitney_fully_separated():
    a = [10, 11, 12, 13, 14]
    b = [1, 2, 3, 4, 5]
    u, p = mann_whitney_u(a, b)
    assert u == 25.0  # every pair won
    assert p < 0.02
    u_rev, p_rev = mann_whitney_u(b, a)
    assert u_rev == 0.0
    assert p_rev == pytest.approx(p, rel=1e-12)


def test_mann_whitney_u_matches_pair_counting():
    rng = random.Random(41)
    for _ in range(50):
        a = [rng.randint(0, 6) for _ in range(rng.randint(2, 10))]
        b = [rng.randint(0, 6) for _ in range(rng.randint(2, 10))]
        u, p = mann_whitney_u(a, b)
        assert u == brute_u(a, b)
        assert 0.0 < p <= 1.0


def test_mann_whitney_empty_sample_rejected():
    with pytest.raises(ValueError):
        mann_whitney_u([], [1.0])


# ---------------------------------------------------------------------------
# Cohen's d (paired)

def test_cohen_d_hand_computed():
    # diffs (1,2,1,2): mean 1.5, sample sd sqrt(1/3)
    d = cohen_d_paired([0, 0, 0, 0], [1, 2, 1, 2])
    assert d == pytest.approx(1.5 * math.sqrt(3), rel=1e-12)
    assert d == pytest.approx(2.598076211353316, abs=1e-14)


def test_cohen_d_two_pairs():
    # diffs (0,2): mean 1, sd sqrt(2)
    assert cohen_d_paired([0, 0], [0, 2]) == pytest.approx(1 / math.sqrt(2))


def test_cohen_d_sign_flips_with_direction():
    before, after = [1.0, 2.0, 3.0], [2.5, 2.0, 4.5]
    assert cohen_d_paired(before, after) == pytest.approx(
        -cohen_d_paired(after, before))


def test_cohen_d_constant_diffs_degenerate():
    with pytest.raises(DegenerateInput) as exc:
        cohen_d_paired([1, 2, 3], [2, 3, 4])
    assert exc.value.kind == "zero_sd"


def test_cohen_d_single_pair_degenerate():
    with pytest.raises(DegenerateInput):
        cohen_d_paired([1], [2])


# ---------------------------------------------------------------------------
# ICC(2,1)

SF_RATINGS = [  # classic 6-target, 4-judge worked example
    [9, 2, 5, 8],
    [6, 1, 3, 2],
    [8, 4, 6, 8],
    [7, 1, 2, 6],
    [10, 5, 6, 9],
    [6, 2, 4, 7],
]


def anova_icc_2_1(ratings):
    """Independent two-way ANOVA recomputation."""
    n, k = len(ratings), len(ratings[0])
    flat = [v for row in ratings for v in row]
    grand = sum(flat) / len(flat)
    rows = [sum(r) / k for r in ratings]
    cols = [sum(ratings[i][j] for i in range(n)) / n for j in range(k)]
    ss_rows = k * sum((m - grand) ** 2 for m in rows)
    ss_cols = n * sum((m - grand) ** 2 for m in cols)
    ss_total = sum((v - grand) ** 2 for v in flat)
    ss_err = ss_total - ss_rows - ss_cols
    msr, msc = ss_rows / (n - 1), ss_cols / (k - 1)
    mse = ss_err / ((n - 1) * (k - 1))
    return (msr - mse) / (msr + (k - 1) * mse + k * (msc - mse) / n)


def test_icc_shrout_fleiss_example():
    value = icc_2_1(SF_RATINGS)
    assert value == pytest.approx(anova_icc_2_1(SF_RATINGS), rel=1e-12)
    assert value == pytest.approx(0.2897637795275591, abs=1e-13)


def test_icc_perfect_agreement():
    assert icc_2_1([[1, 1], [2, 2], [5, 5]]) == pytest.approx(1.0)


def test_icc_constant_matrix_degenerate():
    with pytest.raises(DegenerateInput) as exc:
        icc_2_1([[4, 4], [4, 4]])
    assert exc.value.kind == "constant_matrix"


def test_icc_shape_validation():
    with pytest.raises(ValueError):
        icc_2_1([[1, 2]])
    with pytest.raises(ValueError):
        icc_2_1([[1], [2]])
    with pytest.raises(ValueError):
        icc_2_1([[1, 2], [3]])


# ---------------------------------------------------------------------------
# Krippendorff's alpha (interval)

def test_alpha_identical_raters():
    assert krippendorff_alpha_interval(
        [[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]) == pytest.approx(1.0)


def test_alpha_with_missing_ratings():
    ratings = [[1, None, 2], [None, 3, 3], [4, 4, None]]
    # pairable values (1,2,3,3,4,4): D_o = 1, D_e = 41, alpha = 1 - 5/41
    assert krippendorff_alpha_interval(ratings) == pytest.approx(
        36 / 41, rel=1e-12)
    assert krippendorff_alpha_interval(ratings) == pytest.approx(
        0.8780487804878049, abs=1e-13)


def test_alpha_random_ratings_near_zero():
    rng = random.Random(12)
    ratings = [[rng.uniform(1, 10) for _ in range(3)] for _ in range(40)]
    assert abs(krippendorff_alpha_interval(ratings)) < 0.35


def test_alpha_no_pairable_units_degenerate():
    with pytest.raises(DegenerateInput) as exc:
        krippendorff_alpha_interval([[1, None], [None, 2]])
    assert exc.value.kind == "no_overlap"


def test_alpha_constant_values_degenerate():
    with pytest.raises(DegenerateInput) as exc:
        krippendorff_alpha_interval([[3, 3], [3, 3]])
    assert exc.value.kind == "no_overlap"
