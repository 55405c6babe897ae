from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from untrusted_advice import oracles
from untrusted_advice.bidding import (
    BidSequence,
    DoublingStrategy,
    Infeasible,
    KBitBidding,
    ParetoBidding,
    StrategyExhausted,
    abcd,
    abcd_recurrence,
    adversary_game,
    check_prefix_sum_bound,
    check_step_bound,
    empirical_pair,
    kbit_advice,
    kbit_bounds,
    kbit_rho,
    kbit_strategy,
    log_grid,
    optimal_bid_sequence,
    pareto_strategy,
    randomized_bounds,
    randomized_mixture_pair,
    roots,
    simulate,
)
from untrusted_advice.bidding import _kbit_sequence
from untrusted_advice.core import InvariantViolation, ParameterError


def test_roots():
    r = roots(4)
    assert (r.rho1, r.rho2, r.p) == (2.0, 2.0, 1.0)
    r = roots(4.5)
    assert (r.rho1, r.rho2, r.p) == pytest.approx((1.5, 3.0, 0.5))
    r = roots(5)
    assert r.rho1 * r.rho2 == pytest.approx(5, rel=1e-12)
    assert r.rho1 + r.rho2 == pytest.approx(5, rel=1e-12)
    with pytest.raises(ParameterError):
        roots(3.9)


def test_abcd_small_values():
    s = abcd(4, 1)
    assert (s.a, s.b, s.c, s.d) == pytest.approx((1 / 3, 1 / 3, 1, 1))
    s = abcd(4, 2)
    assert (s.b, s.c) == pytest.approx((0.5, 4 / 3))
    for w in (4, 4.5, 7):
        s = abcd(w, 0)
        assert (s.a, s.b, s.c, s.d) == pytest.approx((1, 0, 0, 1))
    exact = abcd_recurrence(4, 2)
    assert (exact[1].a, exact[1].b, exact[2].b, exact[2].c) == (Fraction(1, 3), Fraction(1, 3), Fraction(1, 2), Fraction(4, 3))


def test_w4_closed_form_for_a():
    for i in range(1, 12):
        assert abcd(4, i).a == pytest.approx(2 / (i + 2) / 2**i, rel=1e-12)


@pytest.mark.parametrize("w", [4, 4.25, 4.5, 5, 8, 20])
def test_ratio_c_nondecreasing_and_below_rho1(w):
    cs = [abcd(w, m).c for m in range(1, 61)]
    assert all(b >= a - 1e-12 for a, b in zip(cs, cs[1:]))
    assert cs[-1] < roots(w).rho1 + 1e-9


def test_w4_trusted_ratio_converges_like_one_over_m():
    for m in range(1, 61):
        assert abcd(4, m).c == pytest.approx(2 - 2 / (m + 1), rel=1e-12)
    ratios = [pareto_strategy(2.0**e, 4).ratio for e in (10, 20, 30, 40)]
    assert ratios == sorted(ratios) and ratios[-1] < 2
    # Getting within 1e-3 of 2 needs m >= 1999 bids, so u near 4 / a_1998,
    # which is far beyond double range.
    m_needed = math.ceil(2 / 1e-3 - 1)
    log2_u = math.log2(4) - math.log2(2 / (m_needed + 1)) + (m_needed - 1)
    assert m_needed == 1999 and log2_u > 1024


def test_optimal_sequence_examples():
    assert optimal_bid_sequence(1, 3, 4).prefix(1) == [3]
    seq = optimal_bid_sequence(2, 9, 4)
    assert seq.prefix(2) == pytest.approx([3, 9])
    assert simulate(seq, 9) / 9 == pytest.approx(4 / 3)
    bad = optimal_bid_sequence(2, 13, 4)
    assert isinstance(bad, Infeasible) and not bad


def test_feasibility_boundary_inclusive():
    # a_1 = 1/3 at w = 4, so u = 12 sits exactly on the boundary
    assert optimal_bid_sequence(2, 12, 4)


@pytest.mark.parametrize("w", [Fraction(4), Fraction(9, 2), Fraction(5), Fraction(33, 4)])
@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_closed_form_matches_exact_solver(m, w):
    a_prev = abcd(float(w), m - 1).a
    u = Fraction(int(float(w) / a_prev * 0.9) or 1)
    seq = optimal_bid_sequence(m, float(u), float(w))
    exact = oracles.solve_tight(m, u, w)
    assert seq.prefix(m) == pytest.approx([float(x) for x in exact], rel=1e-9)


def test_pareto_strategy_examples():
    res = pareto_strategy(1, 4)
    assert (res.m, res.bids.prefix(1), res.ratio) == (1, [1.0], 1.0)
    res = pareto_strategy(9, 4)
    assert res.m == 2 and res.ratio == pytest.approx(4 / 3)


@settings(max_examples=60, deadline=None)
@given(st.floats(1, 2**30), st.sampled_from([4, 4.5, 6, 10]))
def test_pareto_strategy_is_minimal_feasible(u, w):
    res = pareto_strategy(u, w)
    assert res.bids.bid(res.m) == pytest.approx(u, rel=1e-12)
    assert simulate(res.bids, u) / u == pytest.approx(res.ratio, rel=1e-9)
    if res.m > 1:
        assert not optimal_bid_sequence(res.m - 1, u, w)


def test_simulate_examples():
    dbl = DoublingStrategy().sequence(None)
    assert simulate(dbl, 3) == 7
    seq = BidSequence.from_list([3, 9])
    assert simulate(seq, 9) == 12
    with pytest.raises(StrategyExhausted):
        simulate(seq, 9.0001)


def test_kbit_parameters():
    assert kbit_rho(2, 4) == 2.0
    assert kbit_bounds(1, 4).r == pytest.approx(2**1.5)
    K = 4
    w = (1 + K) ** 2 / K + 1
    rho = kbit_rho(2, w)
    assert rho == 1 + K
    assert kbit_bounds(2, w).r == pytest.approx((1 + K) ** (1 + 1 / K) / K)


@settings(max_examples=200, deadline=None)
@given(st.floats(1, 2**40), st.integers(0, 4))
def test_kbit_advice_places_a_bid_close_above(u, k):
    K = 2**k
    a, seq = kbit_strategy(k, 4, u)
    assert 0 <= a < K
    first = seq.through(u)[-1]
    rho = kbit_rho(k, 4)
    assert u <= first <= u * rho ** (1 / K) * (1 + 1e-12) or first == seq.bid(1)


def test_kbit_advice_on_exact_bid():
    for n in (0, 5, 23):
        u = 2.0**n
        assert simulate(kbit_strategy(1, 4, u)[1], u) / u <= 2**1.5 + 1e-9


def test_empirical_pairs_small_grid():
    grid = log_grid(2**12, 4)
    assert empirical_pair(DoublingStrategy(), grid).w == pytest.approx(4, abs=2e-3)
    assert empirical_pair(KBitBidding(0, 4), grid).r <= 4 + 1e-6
    pair = empirical_pair(KBitBidding(2, 4), grid)
    assert pair.r <= 2**1.25 + 1e-6 and pair.w <= 4 + 1e-6
    pair = empirical_pair(ParetoBidding(4.5), grid)
    assert pair.r <= 1.5 + 1e-6 and pair.w <= 4.5 + 1e-6


def test_kbit_untrusted_matches_formula():
    # the formula is a supremum, approached just above each bid
    pair = empirical_pair(KBitBidding(1, 4), log_grid(2**20, 4))
    assert pair.w == pytest.approx(kbit_bounds(1, 4).w, abs=1e-4)


def test_randomized_bounds_examples():
    b = randomized_bounds(4.5)
    assert (b.r, b.w) == pytest.approx((1.875, 3.75))
    with pytest.raises(ParameterError):
        randomized_bounds(4)


def test_randomized_mixture_small():
    pair = randomized_mixture_pair(4.5, log_grid(2**10, 4))
    b = randomized_bounds(4.5)
    assert pair.r <= b.r + 1e-3 and pair.w <= b.w + 1e-3


@pytest.mark.parametrize("w", [4.5, 5, 6])
def test_scaled_copy_interleaves(w):
    rho1 = roots(w).rho1
    X = pareto_strategy(2**20, w).bids
    xs = X.prefix(X.m + 10)
    for lo, hi in zip(xs, xs[1:]):
        assert lo < rho1 * lo < hi


@pytest.mark.parametrize("make", [
    lambda: DoublingStrategy().sequence(None),
    lambda: pareto_strategy(2**30, 4).bids,
    lambda: _kbit_sequence(2, 4, 1),
])
def test_growth_invariants(make):
    seq = make()
    n = min(60, seq.length or 60)
    assert check_step_bound(seq, n) is None
    assert check_prefix_sum_bound(seq, n) is None


def test_growth_check_flags_fast_growth():
    seq = BidSequence(lambda i: 3.0 ** (i - 1))
    # 9 > (2 + 2/3) * 3
    assert check_step_bound(seq, 10) == 3


def test_adversary_game_doubling_and_duplicates():
    dbl = DoublingStrategy().sequence(None)
    res = adversary_game([dbl], lambda u: 0, 30)
    assert res.witness >= 4 - 1e-3
    res2 = adversary_game([dbl, DoublingStrategy().sequence(None)], lambda u: 0, 30)
    assert res2.witness == pytest.approx(res.witness)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_adversary_game_kbit(k):
    K = 2**k
    seqs = [_kbit_sequence(k, 4, a) for a in range(K)]
    res = adversary_game(seqs, lambda u: kbit_advice(k, 4, u), 40)
    assert res.witness >= 2 + 1 / (3 * K) - 0.05
    assert 2 ** (1 + 1 / K) >= 2 + 1 / (3 * K)


def test_adversary_game_rejects_slow_strategy():
    slow = BidSequence(lambda i: 1.5 ** (i - 1))
    with pytest.raises(ParameterError):
        adversary_game([slow], lambda u: 0, 20)


def test_adversary_game_detects_violation():
    dbl = DoublingStrategy().sequence(None)
    with pytest.raises(InvariantViolation) as exc:
        adversary_game([dbl], lambda u: 0, 30, slack=-3)
    assert exc.value.name == "bidding.lower_bound"
