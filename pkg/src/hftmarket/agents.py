"""Decision rules for the normal agents and the market-making HFT.

Normal agents blend a fundamental, a technical and a noise view of the
expected log return, quote a normally scattered limit price around the
implied expected price, and adapt the two strategy weights toward whichever
view agreed with the recent realised return.  The HFT quotes a fixed-width
pair around the mid price, shifted against its inventory with a cubic skew.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterator, Optional

from .orderbook import BUY, SELL, round_to_tick

log = logging.getLogger(__name__)


@dataclass(slots=True)
class NormalAgentState:
    w1: float  # fundamental weight
    w2: float  # technical weight
    u: float  # noise weight, fixed
    tau: int  # technical look-back, fixed


@dataclass(slots=True)
class HftState:
    position: int = 0
    theta: float = 0.002
    skew_coeff: float = 5.0e-8
    live_buy_id: Optional[int] = None
    live_sell_id: Optional[int] = None
    n_quotes: int = 0


class PriceHistory:
    """Last-trade price series with ``P[k] == p_f`` for every ``k <= 0``."""

    __slots__ = ("p_f", "_prices")

    def __init__(self, p_f: float):
        self.p_f = p_f
        self._prices = [p_f]

    def __getitem__(self, k: int) -> float:
        if k < 0:
            return self.p_f
        return self._prices[k]

    def __len__(self) -> int:
        return len(self._prices)

    @property
    def last(self) -> float:
        return self._prices[-1]

    def append(self, price: float) -> None:
        self._prices.append(price)

    def as_list(self) -> list[float]:
        return list(self._prices)


def strategy_returns(hist: PriceHistory, t: int, tau: int, lag: int) -> tuple[float, float]:
    """Fundamental and technical expected log returns seen at step ``t``."""
    p_lag = hist[t - lag]
    return math.log(hist.p_f / p_lag), math.log(p_lag / hist[t - lag - tau])


def expected_return(
    agent: NormalAgentState, r_fund: float, r_tech: float, noise: float
) -> Optional[float]:
    """Weighted mean of the three strategy returns; None if every weight is zero."""
    total = agent.w1 + agent.w2 + agent.u
    if total == 0.0:
        return None
    return (agent.w1 * r_fund + agent.w2 * r_tech + agent.u * noise) / total


def expected_price(r_e: float, last_price: float) -> float:
    return last_price * math.exp(r_e)


def draw_order(p_e: float, est: float, normals: Iterator[float]) -> Optional[tuple[int, float]]:
    """Scatter a limit price around ``p_e`` and pick the side.

    ``normals`` yields standard normal draws; non-positive prices are redrawn.
    Returns ``(side, raw_price)``, or None when the price lands exactly on
    ``p_e``.
    """
    while True:
        raw = p_e + p_e * est * next(normals)
        if raw > 0.0:
            break
    if p_e > raw:
        return BUY, raw
    if p_e < raw:
        return SELL, raw
    return None


def _adapt(w: float, w_max: float, r_view: float, r_l: float, rate: float) -> float:
    # rate = k_l * |r_l| * q
    if r_view * r_l > 0.0:
        return w + rate * (w_max - w)
    if r_l == 0.0:
        return w
    return w - rate * w


def learn(
    agent: NormalAgentState,
    r_fund: float,
    r_tech: float,
    r_l: float,
    w1_max: float,
    w2_max: float,
    k_l: float,
    m: float,
    uniforms: Iterator[float],
) -> None:
    """Update ``agent.w1``/``agent.w2`` in place.

    Consumes exactly six draws from ``uniforms`` in the order
    ``q1, q2, reset1, reset2, redraw1, redraw2`` whatever the outcome, so the
    stream stays aligned between runs whose price paths differ.
    """
    q1 = next(uniforms)
    q2 = next(uniforms)
    c1 = next(uniforms)
    c2 = next(uniforms)
    v1 = next(uniforms)
    v2 = next(uniforms)
    scale = k_l * abs(r_l)
    if scale > 0.0:
        rate1 = scale * q1
        rate2 = scale * q2
        if rate1 > 1.0 or rate2 > 1.0:
            log.warning("learning step %.3g exceeds 1 (r_l=%.3g); weights clipped", max(rate1, rate2), r_l)
        agent.w1 = min(max(_adapt(agent.w1, w1_max, r_fund, r_l, rate1), 0.0), w1_max)
        agent.w2 = min(max(_adapt(agent.w2, w2_max, r_tech, r_l, rate2), 0.0), w2_max)
    if c1 < m:
        agent.w1 = v1 * w1_max
    if c2 < m:
        agent.w2 = v2 * w2_max


def hft_raw_quotes(
    position: int,
    skew_coeff: float,
    theta: float,
    best_bid: float,
    best_ask: float,
    p_f: float,
    tick: float,
) -> tuple[float, float]:
    """Unrounded HFT buy/sell prices, clamped so neither would cross the book."""
    width = p_f * theta
    base = (1.0 - skew_coeff * position**3) * (best_bid + best_ask) / 2.0
    buy = base - width / 2.0
    sell = base + width / 2.0
    if buy >= best_ask:
        buy = best_ask - tick
        sell = (best_ask - tick) + width
    if sell <= best_bid:
        buy = (best_bid + tick) - width
        sell = best_bid + tick
    return buy, sell


def hft_quotes(
    hft: HftState, best_bid: float, best_ask: float, p_f: float, tick: float
) -> tuple[float, float]:
    """HFT buy/sell prices in currency units, rounded onto the tick grid."""
    buy, sell = hft_raw_quotes(hft.position, hft.skew_coeff, hft.theta, best_bid, best_ask, p_f, tick)
    return round_to_tick(buy, BUY, tick), round_to_tick(sell, SELL, tick)
