import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from hftmarket.agents import (
    HftState,
    NormalAgentState,
    PriceHistory,
    draw_order,
    expected_price,
    expected_return,
    hft_quotes,
    hft_raw_quotes,
    learn,
    strategy_returns,
)
from hftmarket.orderbook import BUY, SELL, DegeneratePriceError

# Reference values below were computed once with 50-digit decimal arithmetic
# (decimal.Context(prec=50).ln / exp) and frozen.
LN_10000_OVER_9900 = 0.010050335853501441
EXP_PLUS_001_TIMES_10000 = 10100.501670841679
EXP_MINUS_001_TIMES_10000 = 9900.498337491681


def test_frozen_references_match_high_precision():
    from decimal import Context, Decimal

    ctx = Context(prec=50)
    assert float(ctx.ln(Decimal(10000) / Decimal(9900))) == pytest.approx(LN_10000_OVER_9900, rel=1e-15)
    assert float(Decimal(10000) * ctx.exp(Decimal("0.01"))) == pytest.approx(EXP_PLUS_001_TIMES_10000, rel=1e-15)
    assert float(Decimal(10000) * ctx.exp(Decimal("-0.01"))) == pytest.approx(EXP_MINUS_001_TIMES_10000, rel=1e-15)


def test_fundamental_only_return():
    hist = PriceHistory(10_000.0)
    hist.append(9_900.0)
    r_fund, r_tech = strategy_returns(hist, t=2, tau=5, lag=1)
    agent = NormalAgentState(w1=1.0, w2=0.0, u=0.0, tau=5)
    assert expected_return(agent, r_fund, r_tech, 0.0) == pytest.approx(LN_10000_OVER_9900, rel=1e-12)
    assert round(LN_10000_OVER_9900, 5) == 0.01005


def test_noise_only_return():
    agent = NormalAgentState(w1=0.0, w2=0.0, u=1.0, tau=5)
    assert expected_return(agent, 0.4, -0.2, 0.03) == 0.03


def test_all_weights_zero_gives_no_view():
    assert expected_return(NormalAgentState(0.0, 0.0, 0.0, 1), 0.1, 0.1, 0.1) is None


@given(
    st.floats(0, 1), st.floats(0, 10), st.floats(0, 1), st.integers(1, 10_000), st.integers(0, 50)
)
def test_flat_history_gives_zero_return(w1, w2, u, tau, t):
    hist = PriceHistory(10_000.0)
    for _ in range(t):
        hist.append(10_000.0)
    r_fund, r_tech = strategy_returns(hist, t, tau, 1)
    r = expected_return(NormalAgentState(w1, w2, u, tau), r_fund, r_tech, 0.0)
    assert r is None or r == 0.0


@settings(max_examples=200)
@given(
    st.floats(0, 1), st.floats(0, 10), st.floats(0, 1),
    st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1),
)
def test_expected_return_is_convex_combination(w1, w2, u, a, b, c):
    r = expected_return(NormalAgentState(w1, w2, u, 1), a, b, c)
    if r is None:
        assert w1 + w2 + u == 0
        return
    assert min(a, b, c) - 1e-12 <= r <= max(a, b, c) + 1e-12


def test_history_before_start_is_fundamental():
    hist = PriceHistory(123.0)
    hist.append(130.0)
    assert hist[-5] == 123.0 and hist[0] == 123.0 and hist[1] == 130.0


def test_expected_price():
    assert expected_price(0.0, 10_000.0) == 10_000.0
    assert expected_price(0.01, 10_000.0) == pytest.approx(EXP_PLUS_001_TIMES_10000, rel=1e-14)
    assert expected_price(-0.01, 10_000.0) == pytest.approx(EXP_MINUS_001_TIMES_10000, rel=1e-14)
    assert round(expected_price(0.01, 10_000.0), 2) == 10100.50
    assert round(expected_price(-0.01, 10_000.0), 2) == 9900.50


def _z(target, p_e=10_000.0, est=0.003):
    return iter([(target - p_e) / (p_e * est)])


def test_order_side():
    assert draw_order(10_000.0, 0.003, _z(9_990.0)) == (BUY, pytest.approx(9_990.0))
    assert draw_order(10_000.0, 0.003, _z(10_010.0)) == (SELL, pytest.approx(10_010.0))
    assert draw_order(10_000.0, 0.003, iter([0.0])) is None


def test_non_positive_price_is_redrawn():
    side, price = draw_order(10.0, 0.5, iter([-3.0, -2.5, 1.0]))
    assert (side, price) == (SELL, 15.0)


def test_side_is_a_fair_coin():
    rng = np.random.default_rng(7)
    normals = iter(rng.standard_normal(40_000))
    buys = sum(draw_order(10_000.0, 0.003, normals)[0] == BUY for _ in range(20_000))
    # binomial(20000, 1/2) has sd ~71
    assert abs(buys - 10_000) < 400


def _learn(w, r_view, r_l, q=0.5, c=(1.0, 1.0), v=(0.0, 0.0)):
    agent = NormalAgentState(w1=w, w2=w, u=1.0, tau=1)
    learn(agent, r_view, r_view, r_l, 10.0, 10.0, 4.0, 0.01, iter([q, q, *c, *v]))
    return agent


def test_learning_examples():
    assert _learn(5.0, 0.02, 0.01).w1 == 5.1
    assert _learn(5.0, -0.02, 0.01).w1 == 4.9
    # exact rational check of the same arithmetic
    assert Fraction(5) + Fraction(4) * Fraction(1, 100) * Fraction(1, 2) * 5 == Fraction(51, 10)


def test_learning_zero_realised_return_keeps_weights():
    agent = _learn(5.0, 0.02, 0.0)
    assert (agent.w1, agent.w2) == (5.0, 5.0)


def test_learning_reset():
    agent = _learn(5.0, 0.02, 0.0, c=(0.005, 0.5), v=(0.25, 0.75))
    assert agent.w1 == 2.5 and agent.w2 == 5.0


def test_learning_always_consumes_six_draws():
    draws = iter(range(100))
    for r_l in (0.0, 0.01, -0.2):
        learn(NormalAgentState(1.0, 1.0, 1.0, 1), 0.1, 0.1, r_l, 1.0, 10.0, 4.0, 0.0, (x / 100 for x in draws))
    assert next(draws) == 18


@settings(max_examples=300)
@given(
    st.floats(0, 1), st.floats(0, 10), st.floats(-1, 1), st.floats(-1, 1), st.floats(-0.5, 0.5),
    st.lists(st.floats(0, 1, exclude_max=True), min_size=6, max_size=6),
)
def test_learning_keeps_weights_in_bounds(w1, w2, rf, rt, r_l, draws):
    agent = NormalAgentState(w1, w2, 1.0, 1)
    learn(agent, rf, rt, r_l, 1.0, 10.0, 4.0, 0.01, iter(draws))
    assert 0.0 <= agent.w1 <= 1.0 and 0.0 <= agent.w2 <= 10.0


def _quotes(position, bb=9_990.0, ba=10_010.0):
    hft = HftState(position=position, theta=0.002, skew_coeff=5e-8)
    return hft_quotes(hft, bb, ba, 10_000.0, 0.1)


def test_hft_worked_examples():
    assert _quotes(0) == (9_990.0, 10_010.0)
    assert _quotes(100) == (9_970.1, 9_990.1)
    assert _quotes(-100) == (10_009.9, 10_029.9)


@settings(max_examples=300)
@given(
    st.integers(-400, 400),
    st.integers(1, 200_000),
    st.integers(1, 400),
    st.sampled_from([0.1, 1.0, 10.0]),
    st.sampled_from([0.0002, 0.002, 0.02]),
)
def test_hft_quotes_do_not_cross_and_keep_width(position, bb_ticks, spread_ticks, tick, theta):
    bb = bb_ticks * tick
    ba = (bb_ticks + spread_ticks) * tick
    p_f = 10_000.0
    raw_buy, raw_sell = hft_raw_quotes(position, 5e-8, theta, bb, ba, p_f, tick)
    assert raw_sell - raw_buy == pytest.approx(p_f * theta, rel=1e-9, abs=1e-6)
    try:
        buy, sell = hft_quotes(HftState(position, theta, 5e-8), bb, ba, p_f, tick)
    except DegeneratePriceError:
        assume(False)
    assert buy < ba + 1e-9 and sell > bb - 1e-9
    assert sell > buy


def test_hft_skew_is_monotone_in_position():
    mids = [sum(hft_raw_quotes(s, 5e-8, 0.002, 9_990.0, 10_010.0, 10_000.0, 0.1)) / 2 for s in range(-60, 61, 5)]
    assert all(a >= b for a, b in zip(mids, mids[1:]))
