"""Round-robin simulation loop tying the book and the agents together."""
from __future__ import annotations

import math
import zlib
from dataclasses import asdict, dataclass, field, fields
from typing import IO, Iterator, Optional

import numpy as np

from .agents import (
    HftState,
    NormalAgentState,
    PriceHistory,
    draw_order,
    expected_return,
    hft_raw_quotes,
    learn,
    strategy_returns,
)
from .orderbook import (
    BUY,
    HFT_OWNER,
    SELL,
    DegeneratePriceError,
    EventLog,
    OrderBook,
    Trade,
    price_to_ticks,
    ticks_to_price,
)


@dataclass(frozen=True)
class MarketParams:
    """Model and run settings; defaults are the baseline calibration."""

    t_end: int = 1_000_000
    n: int = 1_000
    w1_max: float = 1.0
    w2_max: float = 10.0
    u_max: float = 1.0
    tau_max: int = 10_000
    sigma_eps: float = 0.06
    est: float = 0.003
    t_c: int = 20_000
    tick: float = 0.1
    p_f: float = 10_000.0
    k_l: float = 4.0
    m: float = 0.01
    theta_h: float = 0.002
    w_h: float = 5.0e-8
    pr_o: float = 1.0
    hft_enabled: bool = False
    t_day: int = 20_000
    seed: int = 0
    # look-back for the fundamental/technical/learning returns; None means n
    lag: Optional[int] = None
    # HFT re-quotes on steps where the scheduled normal agent abstains
    hft_on_abstain: bool = True
    # book-filling steps run before t=1 with every agent's reference price
    # pinned at p_f; None means t_c
    warmup: Optional[int] = None

    def __post_init__(self):
        problems = []
        if self.t_end < 0:
            problems.append("t_end must be >= 0")
        if self.n < 1:
            problems.append("n must be >= 1")
        if self.tick <= 0:
            problems.append("tick must be > 0")
        if self.p_f <= 0:
            problems.append("p_f must be > 0")
        if not 0 < self.est <= 1:
            problems.append("est must lie in (0, 1]")
        if not 0 <= self.pr_o <= 1:
            problems.append("pr_o must lie in [0, 1]")
        if not 0 <= self.m <= 1:
            problems.append("m must lie in [0, 1]")
        if self.t_c < 1:
            problems.append("t_c must be >= 1")
        if self.t_day < 1:
            problems.append("t_day must be >= 1")
        if self.tau_max < 1:
            problems.append("tau_max must be >= 1")
        if self.warmup is not None and self.warmup < 0:
            problems.append("warmup must be >= 0")
        if self.lag is not None and self.lag < 1:
            problems.append("lag must be >= 1")
        for name in ("w1_max", "w2_max", "u_max", "sigma_eps", "k_l", "theta_h", "w_h"):
            if getattr(self, name) < 0:
                problems.append(f"{name} must be >= 0")
        if problems:
            raise ValueError("invalid MarketParams: " + "; ".join(problems))

    @property
    def lookback(self) -> int:
        return self.n if self.lag is None else self.lag

    @property
    def warmup_steps(self) -> int:
        return self.t_c if self.warmup is None else self.warmup

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


STREAMS = ("init", "noise", "learn", "price", "coin")
_CHUNK = 1 << 14


def substream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for one named random stream of a run."""
    ss = np.random.SeedSequence(seed, spawn_key=(zlib.crc32(name.encode()),))
    return np.random.default_rng(ss)


def _floats(draw) -> Iterator[float]:
    while True:
        yield from draw(_CHUNK).tolist()


@dataclass
class RunTrace:
    """Everything the metrics need from one run.

    Per-step arrays have one entry per step ``t = 1..t_end`` and describe the
    book after the step completed; quote prices are in ticks, with 0 meaning
    the side was empty.  ``price`` has ``t_end + 1`` entries starting at P^0.
    """

    tick: float
    p_f: float
    t_day: int
    price: np.ndarray
    best_bid: np.ndarray
    best_ask: np.ndarray
    depth_buy: np.ndarray
    depth_sell: np.ndarray
    volume: np.ndarray
    hft_volume: np.ndarray
    trade_time: np.ndarray
    trade_price: np.ndarray  # ticks
    trade_hft: np.ndarray  # HFT on either side
    trade_resting_normal: np.ndarray  # resting order belonged to a normal agent
    new_orders: int
    hft_position: int = 0
    hft_quotes: int = 0
    params: Optional[MarketParams] = field(default=None, compare=False)

    @property
    def t_end(self) -> int:
        return len(self.price) - 1


class Market:
    """Mutable state of one simulation run.

    Construct, then call :meth:`step` for ``t = 1, 2, ...`` or just
    :meth:`run`.
    """

    def __init__(self, params: MarketParams, log: Optional[IO[str]] = None):
        self.params = p = params
        init = substream(p.seed, "init")
        w1 = init.uniform(0.0, p.w1_max, p.n)
        w2 = init.uniform(0.0, p.w2_max, p.n)
        u = init.uniform(0.0, p.u_max, p.n)
        tau = init.integers(1, p.tau_max, size=p.n, endpoint=True)
        self.agents = [
            NormalAgentState(float(a), float(b), float(c), int(d)) for a, b, c, d in zip(w1, w2, u, tau)
        ]
        noise = substream(p.seed, "noise")
        self._noise = _floats(lambda k: noise.normal(0.0, p.sigma_eps, k))
        self._learn = _floats(substream(p.seed, "learn").random)
        self._normals = _floats(substream(p.seed, "price").standard_normal)
        self._coin = _floats(substream(p.seed, "coin").random)

        self.event_log = None
        if log is not None:
            self.event_log = EventLog(log, p.tick)
            self.event_log.meta(tick=p.tick, p_f=p.p_f, t_day=p.t_day, t_end=p.t_end, hft_owner=HFT_OWNER)
            self.event_log.header()
        self.book = OrderBook(p.tick, log=self.event_log)
        self.hist = PriceHistory(p.p_f)
        self.hft = HftState(theta=p.theta_h, skew_coeff=p.w_h) if p.hft_enabled else None
        self.t = 0
        self._warm_up(p.warmup_steps)

        n_steps = p.t_end
        self._bb = [0] * n_steps
        self._ba = [0] * n_steps
        self._db = [0] * n_steps
        self._ds = [0] * n_steps
        self._vol = [0] * n_steps
        self._hvol = [0] * n_steps
        self._trades: list[Trade] = []
        self.new_orders = 0

    def _warm_up(self, steps: int) -> None:
        # steps -steps+1 .. 0; nothing is recorded and the HFT stays out so
        # paired runs with and without it start from the same book
        p = self.params
        book = self.book
        coin = _floats(substream(p.seed, "warmup-coin").random)
        noise_gen = substream(p.seed, "warmup-noise")
        noise = _floats(lambda k: noise_gen.normal(0.0, p.sigma_eps, k))
        normals = _floats(substream(p.seed, "warmup-price").standard_normal)
        for t in range(1 - steps, 1):
            book.expire(t, p.t_c)
            eps = next(noise)
            if next(coin) >= p.pr_o:
                continue
            agent = self.agents[t % p.n]
            r_e = expected_return(agent, 0.0, 0.0, eps)
            if r_e is None:
                continue
            drawn = draw_order(p.p_f * math.exp(r_e), p.est, normals)
            if drawn is None:
                continue
            side, raw = drawn
            try:
                ticks = price_to_ticks(raw, side, p.tick)
            except DegeneratePriceError:
                continue
            book.submit(book.new_order(t % p.n, side, ticks, t), t)

    def step(self) -> None:
        """Advance one step: expiry, one normal agent turn, then the HFT."""
        p = self.params
        book = self.book
        hist = self.hist
        self.t = t = self.t + 1
        book.expire(t, p.t_c)
        trades: list[Trade] = []

        acted = next(self._coin) < p.pr_o
        if acted:
            agent = self.agents[t % p.n]
            lag = p.lookback
            r_fund, r_tech = strategy_returns(hist, t, agent.tau, lag)
            r_l = math.log(hist[t - 1] / hist[t - lag])
            learn(agent, r_fund, r_tech, r_l, p.w1_max, p.w2_max, p.k_l, p.m, self._learn)
            eps = next(self._noise)
            r_e = expected_return(agent, r_fund, r_tech, eps)
            if r_e is not None:
                p_e = hist[t - 1] * math.exp(r_e)
                drawn = draw_order(p_e, p.est, self._normals)
                if drawn is not None:
                    side, raw = drawn
                    try:
                        ticks = price_to_ticks(raw, side, p.tick)
                    except DegeneratePriceError:
                        ticks = None
                    if ticks is not None:
                        self.new_orders += 1
                        order = book.new_order(t % p.n, side, ticks, t)
                        trades += book.submit(order, t)

        hft = self.hft
        if hft is not None:
            # fills against resting HFT quotes must move the position before it re-quotes
            self._apply_positions(trades)
            if acted or p.hft_on_abstain:
                own = self._hft_turn(t)
                self._apply_positions(own)
                trades += own

        last = hist.last
        n_hft = 0
        for tr in trades:
            if tr.buy_owner == HFT_OWNER or tr.sell_owner == HFT_OWNER:
                n_hft += 1
            last = tr.price
        if trades:
            last = ticks_to_price(last, p.tick)
            self._trades += trades
        hist.append(last)

        i = t - 1
        bb = book.best_bid()
        ba = book.best_ask()
        if bb is not None and ba is not None:
            self._bb[i] = bb
            self._ba[i] = ba
            self._db[i], self._ds[i] = book.depth_within(50)
        else:
            self._bb[i] = bb or 0
            self._ba[i] = ba or 0
        self._vol[i] = len(trades)
        self._hvol[i] = n_hft

    def _hft_turn(self, t: int) -> list[Trade]:
        p = self.params
        book = self.book
        hft = self.hft
        if hft.live_buy_id is not None:
            book.cancel(hft.live_buy_id, t)
            hft.live_buy_id = None
        if hft.live_sell_id is not None:
            book.cancel(hft.live_sell_id, t)
            hft.live_sell_id = None
        bb = book.best_bid()
        ba = book.best_ask()
        if bb is None or ba is None:
            return []
        hft.n_quotes += 1
        buy, sell = hft_raw_quotes(
            hft.position,
            hft.skew_coeff,
            hft.theta,
            ticks_to_price(bb, p.tick),
            ticks_to_price(ba, p.tick),
            p.p_f,
            p.tick,
        )
        trades: list[Trade] = []
        for side, raw in ((BUY, buy), (SELL, sell)):
            try:
                ticks = price_to_ticks(raw, side, p.tick)
            except DegeneratePriceError:
                continue
            order = book.new_order(HFT_OWNER, side, ticks, t)
            fills = book.submit(order, t)
            if fills:
                trades += fills
            elif side == BUY:
                hft.live_buy_id = order.id
            else:
                hft.live_sell_id = order.id
        return trades

    def _apply_positions(self, trades: list[Trade]) -> None:
        hft = self.hft
        for tr in trades:
            if tr.buy_owner == HFT_OWNER:
                hft.position += 1
            if tr.sell_owner == HFT_OWNER:
                hft.position -= 1

    def run(self) -> RunTrace:
        while self.t < self.params.t_end:
            self.step()
        return self.trace()

    def trace(self) -> RunTrace:
        p = self.params
        trades = self._trades
        return RunTrace(
            tick=p.tick,
            p_f=p.p_f,
            t_day=p.t_day,
            price=np.array(self.hist.as_list(), dtype=float),
            best_bid=np.array(self._bb, dtype=np.int64),
            best_ask=np.array(self._ba, dtype=np.int64),
            depth_buy=np.array(self._db, dtype=np.int64),
            depth_sell=np.array(self._ds, dtype=np.int64),
            volume=np.array(self._vol, dtype=np.int64),
            hft_volume=np.array(self._hvol, dtype=np.int64),
            trade_time=np.array([tr.time for tr in trades], dtype=np.int64),
            trade_price=np.array([tr.price for tr in trades], dtype=np.int64),
            trade_hft=np.array(
                [tr.buy_owner == HFT_OWNER or tr.sell_owner == HFT_OWNER for tr in trades], dtype=bool
            ),
            trade_resting_normal=np.array([tr.resting_owner != HFT_OWNER for tr in trades], dtype=bool),
            new_orders=self.new_orders,
            hft_position=self.hft.position if self.hft is not None else 0,
            hft_quotes=self.hft.n_quotes if self.hft is not None else 0,
            params=p,
        )


def run(params: MarketParams, log: Optional[IO[str]] = None) -> RunTrace:
    """Simulate ``params.t_end`` steps and return the trace."""
    return Market(params, log=log).run()
