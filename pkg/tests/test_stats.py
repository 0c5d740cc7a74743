from __future__ import annotations

import itertools
import json
import math
import random
from pathlib import Path

import pytest

from pgxrag.errors import AllZeroDifferences
from pgxrag.stats import (
    EXACT_LIMIT,
    METHOD_EXACT,
    METHOD_NORMAL,
    wilcoxon_signed_rank,
)

ROOT = Path(__file__).resolve().parent.parent


def pairs_from_diffs(diffs):
    """Differences d_i become pairs (0, d_i) so b - a == d_i."""
    return [(0.0, float(d)) for d in diffs]


def brute_force_p(diffs, alternative="greater"):
    """Enumerate all 2^n sign assignments directly; average ranks on |d|.

    Completely independent of the shipped implementation: ranks are computed
    with a naive sort, the tail is accumulated by explicit enumeration, and
    nothing is doubled into integers.
    """
    diffs = [d for d in diffs if d != 0]
    n = len(diffs)
    absd = sorted((abs(d), i) for i, d in enumerate(diffs))
    ranks = [0.0] * n
    pos = 0
    while pos < n:
        end = pos
        while end + 1 < n and absd[end + 1][0] == absd[pos][0]:
            end += 1
        avg = (pos + 1 + end + 1) / 2.0
        for j in range(pos, end + 1):
            ranks[absd[j][1]] = avg
        pos = end + 1

    if alternative == "greater":
        observed = sum(r for d, r in zip(diffs, ranks) if d < 0)
    else:
        observed = sum(r for d, r in zip(diffs, ranks) if d > 0)

    favorable = 0
    for signs in itertools.product((1, -1), repeat=n):
        if alternative == "greater":
            w = sum(r for s, r in zip(signs, ranks) if s < 0)
        else:
            w = sum(r for s, r in zip(signs, ranks) if s > 0)
        if w <= observed + 1e-9:
            favorable += 1
    return observed, favorable / 2.0 ** n


class TestKnownValues:
    def test_three_positive_diffs(self):
        """d = [+1, +2, +3]: W- = 0, p = 1/8."""
        res = wilcoxon_signed_rank(pairs_from_diffs([1, 2, 3]), alternative="greater")
        assert res.w_statistic == 0.0
        assert res.p_value == 0.125
        assert res.method == METHOD_EXACT

    def test_six_positive_diffs(self):
        res = wilcoxon_signed_rank(pairs_from_diffs([1, 2, 3, 4, 5, 6]), alternative="greater")
        assert res.w_statistic == 0.0
        assert res.p_value == 0.015625  # 1/64

    def test_mixed_signs_with_tie(self):
        # |d| = [1, 1, 2, 3]; the two 1s share rank 1.5
        res = wilcoxon_signed_rank(pairs_from_diffs([1, -1, 2, 3]), alternative="greater")
        assert res.w_minus == 1.5
        assert res.w_plus == 8.5
        observed, p = brute_force_p([1, -1, 2, 3], "greater")
        assert res.w_statistic == observed
        assert res.p_value == pytest.approx(p, abs=1e-12)

    def test_w_plus_w_minus_identity_with_ties(self):
        diffs = [2, -2, 2, 3, -1, 1, 4]
        res = wilcoxon_signed_rank(pairs_from_diffs(diffs), alternative="greater")
        n = len(diffs)
        assert res.w_plus + res.w_minus == n * (n + 1) / 2

    def test_zero_differences_dropped(self):
        res = wilcoxon_signed_rank([(3, 3), (1, 2), (2, 4), (5, 8)], alternative="greater")
        assert res.n_input == 4
        assert res.n_effective == 3
        assert res.p_value == 0.125

    def test_all_zero_differences(self):
        with pytest.raises(AllZeroDifferences):
            wilcoxon_signed_rank([(1, 1), (2, 2)], alternative="greater")

    def test_alternative_less_mirror(self):
        greater = wilcoxon_signed_rank(pairs_from_diffs([1, 2, 3]), alternative="greater")
        less = wilcoxon_signed_rank(pairs_from_diffs([-1, -2, -3]), alternative="less")
        assert less.w_statistic == greater.w_statistic
        assert less.p_value == greater.p_value

    def test_invalid_alternative(self):
        with pytest.raises(ValueError):
            wilcoxon_signed_rank(pairs_from_diffs([1, 2]), alternative="two-sided")

    def test_result_serializes(self):
        res = wilcoxon_signed_rank(pairs_from_diffs([1, 2, 3]), alternative="greater")
        obj = res.to_obj()
        assert obj["w_statistic"] == 0.0
        assert obj["method"] == METHOD_EXACT
        assert obj["alternative"] == "greater"


class TestBruteForceOracle:
    def test_random_small_inputs(self):
        """Exact enumeration equals the naive 2^n oracle on random inputs."""
        rng = random.Random(60312)
        for trial in range(200):
            n = rng.randint(1, 10)
            diffs = [rng.choice([-4, -3, -2, -1, 1, 2, 3, 4]) for _ in range(n)]
            alternative = rng.choice(["greater", "less"])
            res = wilcoxon_signed_rank(pairs_from_diffs(diffs), alternative=alternative)
            observed, p = brute_force_p(diffs, alternative)
            assert res.w_statistic == observed, f"trial {trial}: {diffs}"
            assert res.p_value == pytest.approx(p, abs=1e-12), f"trial {trial}: {diffs}"
            assert res.method == METHOD_EXACT

    def test_heavy_ties(self):
        """Many repeated magnitudes produce fractional ranks; still exact."""
        rng = random.Random(41777)
        for trial in range(60):
            n = rng.randint(2, 9)
            diffs = [rng.choice([-1, 1, -2, 2]) for _ in range(n)]
            if all(d == 0 for d in diffs):
                continue
            res = wilcoxon_signed_rank(pairs_from_diffs(diffs), alternative="greater")
            observed, p = brute_force_p(diffs, "greater")
            assert res.w_statistic == observed
            assert res.p_value == pytest.approx(p, abs=1e-12)


class TestNormalApproximation:
    def test_large_n_switches_method(self):
        diffs = list(range(1, 25))  # 24 nonzero differences
        res = wilcoxon_signed_rank(pairs_from_diffs(diffs), alternative="greater")
        assert res.n_effective == 24 > EXACT_LIMIT
        assert res.method == METHOD_NORMAL

    def test_against_hand_formula_no_ties(self):
        """For untied |d| the z formula is closed-form; recompute by hand."""
        diffs = [(-1) ** i * (i + 1) for i in range(25)]  # alternating, distinct magnitudes
        res = wilcoxon_signed_rank(pairs_from_diffs(diffs), alternative="greater")
        n = 25
        w = res.w_statistic
        mean = n * (n + 1) / 4.0
        var = n * (n + 1) * (2 * n + 1) / 24.0
        z = (w - mean + 0.5) / math.sqrt(var)
        expected = 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))
        assert res.p_value == pytest.approx(expected, abs=1e-12)

    def test_tie_correction_applied(self):
        """Ties shrink the variance by sum(t^3 - t)/48."""
        diffs = [1, 1, 1, 1, -1, 2, 2, 2, -2, 3, 3, -3, 4, 4, -4, 5, 5, -5, 6, 6, -6, 7, 7, -7, 8]
        res = wilcoxon_signed_rank(pairs_from_diffs(diffs), alternative="greater")
        assert res.method == METHOD_NORMAL
        # recompute with explicit average ranks and the tie term
        absd = sorted(abs(d) for d in diffs)
        from collections import Counter

        tie_sizes = Counter(absd).values()
        n = len(diffs)
        mean = n * (n + 1) / 4.0
        var = n * (n + 1) * (2 * n + 1) / 24.0 - sum(t ** 3 - t for t in tie_sizes) / 48.0
        # ranks of negatives
        rank_of = {}
        i = 0
        while i < len(absd):
            j = i
            while j + 1 < len(absd) and absd[j + 1] == absd[i]:
                j += 1
            rank_of[absd[i]] = (i + 1 + j + 1) / 2.0
            i = j + 1
        w_minus = sum(rank_of[abs(d)] for d in diffs if d < 0)
        z = (w_minus - mean + 0.5) / math.sqrt(var)
        expected = 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))
        assert res.w_statistic == w_minus
        assert res.p_value == pytest.approx(expected, abs=1e-12)

    def test_p_clamped_to_one(self):
        diffs = [-(i + 1) for i in range(30)]  # everything favors the wrong side
        res = wilcoxon_signed_rank(pairs_from_diffs(diffs), alternative="greater")
        assert res.p_value <= 1.0


class TestShippedPairFixtures:
    def load(self, name):
        obj = json.loads((ROOT / "fixtures" / name).read_text("utf-8"))
        return [tuple(p) for p in obj["pairs"]]

    def test_phase1_vs_phase2_not_significant(self):
        res = wilcoxon_signed_rank(self.load("wilcoxon_p1p2.json"), alternative="greater")
        assert res.w_statistic == 10.5
        assert res.p_value == pytest.approx(0.171875, abs=1e-12)
        assert res.method == METHOD_EXACT
        assert res.p_value > 0.05

    def test_gpt_vs_phase2_significant(self):
        res = wilcoxon_signed_rank(self.load("wilcoxon_p2gpt.json"), alternative="greater")
        assert res.w_statistic == 18.0
        assert res.p_value == pytest.approx(0.025390625, abs=1e-12)
        assert res.p_value < 0.05

    def test_fixture_pairs_match_brute_force(self):
        for name in ("wilcoxon_p1p2.json", "wilcoxon_p2gpt.json"):
            pairs = self.load(name)
            diffs = [b - a for a, b in pairs]
            res = wilcoxon_signed_rank(pairs, alternative="greater")
            observed, p = brute_force_p(diffs, "greater")
            assert res.w_statistic == observed, name
            assert res.p_value == pytest.approx(p, abs=1e-12), name
