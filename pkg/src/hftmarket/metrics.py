"""Liquidity indicators and return statistics computed from a :class:`RunTrace`."""
from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import IO, Optional, Sequence, Union

import numpy as np

from .engine import RunTrace
from .orderbook import BUY, HFT_OWNER, SELL, Order, OrderBook, price_to_ticks, ticks_to_price

DEPTH_TICKS = 50
STYLIZED_INTERVAL = 100
ACF_LAGS = 5


def volume(trace: RunTrace) -> tuple[int, int]:
    """Total shares traded and the part with the HFT on either side."""
    return int(trace.volume.sum()), int(trace.hft_volume.sum())


def tightness(trace: RunTrace) -> Optional[float]:
    """Mean quoted spread over the steps that had both a bid and an ask."""
    ok = (trace.best_bid > 0) & (trace.best_ask > 0)
    if not ok.any():
        return None
    spread = (trace.best_ask[ok] - trace.best_bid[ok]).mean()
    return float(spread * trace.tick)


def daily_ranges(trace: RunTrace) -> tuple[np.ndarray, np.ndarray]:
    """Per-day traded price range (currency) and volume; NaN range on empty days."""
    t_end, t_day = trace.t_end, trace.t_day
    if t_end % t_day:
        raise ValueError(f"t_end={t_end} is not a whole number of {t_day}-step days")
    n_days = t_end // t_day
    day = (trace.trade_time - 1) // t_day
    vol = np.bincount(day, minlength=n_days)[:n_days]
    hi = np.full(n_days, -np.inf)
    lo = np.full(n_days, np.inf)
    price = trace.trade_price.astype(float)
    np.maximum.at(hi, day, price)
    np.minimum.at(lo, day, price)
    rng = np.where(vol > 0, (hi - lo) * trace.tick, np.nan)
    return rng, vol


def resiliency(trace: RunTrace) -> Optional[float]:
    """Mean daily (high - low) / volume; days without trades are skipped."""
    rng, vol = daily_ranges(trace)
    traded = vol > 0
    if not traded.any():
        return None
    return float(np.mean(rng[traded] / vol[traded]))


def depth(trace: RunTrace) -> float:
    """Per-step average of (buy count + sell count) / 2 near the touch."""
    if len(trace.depth_buy) == 0:
        return 0.0
    return float((trace.depth_buy + trace.depth_sell).mean() / 2.0)


def execution_rate(trace: RunTrace, resting: str = "all") -> Optional[float]:
    """Executed resting orders per new normal-agent order.

    ``resting="normal"`` counts only executions of normal agents' resting
    orders in the numerator.
    """
    if trace.new_orders == 0:
        return None
    if resting == "all":
        executed = len(trace.trade_time)
    elif resting == "normal":
        executed = int(trace.trade_resting_normal.sum())
    else:
        raise ValueError(f"resting must be 'all' or 'normal', got {resting!r}")
    return executed / trace.new_orders


def _log_returns(price: np.ndarray, interval: int) -> np.ndarray:
    sampled = np.asarray(price, dtype=float)[::interval]
    return np.diff(np.log(sampled))


def volatility(trace_or_prices: Union[RunTrace, np.ndarray], interval: int = 1) -> float:
    """Standard deviation of log returns over ``interval`` steps, in percent."""
    if interval < 1:
        raise ValueError(f"interval must be >= 1, got {interval}")
    price = trace_or_prices.price if isinstance(trace_or_prices, RunTrace) else trace_or_prices
    r = _log_returns(price, interval)
    if len(r) == 0:
        return 0.0
    return float(r.std() * 100.0)


@dataclass(frozen=True)
class StylizedFacts:
    kurtosis: float  # excess
    sq_return_autocorr: tuple[float, ...]

    @property
    def fat_tail(self) -> bool:
        return self.kurtosis > 0

    @property
    def clustering(self) -> bool:
        return all(a > 0 for a in self.sq_return_autocorr)


def autocorrelation(x: np.ndarray, lags: Sequence[int]) -> tuple[float, ...]:
    x = np.asarray(x, dtype=float) - np.mean(x)
    denom = float(np.dot(x, x))
    return tuple(float(np.dot(x[:-k], x[k:]) / denom) for k in lags)


def return_statistics(returns: np.ndarray, lags: int = ACF_LAGS) -> Optional[StylizedFacts]:
    r = np.asarray(returns, dtype=float)
    if len(r) <= lags + 1:
        return None
    centred = r - r.mean()
    m2 = np.mean(centred**2)
    if m2 == 0.0:
        return None
    kurt = np.mean(centred**4) / m2**2 - 3.0
    sq = r**2
    if np.ptp(sq) == 0.0:
        return None
    return StylizedFacts(float(kurt), autocorrelation(sq, range(1, lags + 1)))


def stylized_facts(
    trace_or_prices: Union[RunTrace, np.ndarray], interval: int = STYLIZED_INTERVAL
) -> Optional[StylizedFacts]:
    """Excess kurtosis and squared-return autocorrelations of ``interval``-step returns.

    None when the sampled returns have no variance.
    """
    price = trace_or_prices.price if isinstance(trace_or_prices, RunTrace) else trace_or_prices
    return return_statistics(_log_returns(price, interval))


@dataclass(frozen=True)
class LiquidityReport:
    volume: int
    hft_volume: int
    tightness: Optional[float]
    resiliency: Optional[float]
    depth: float
    execution_rate: Optional[float]
    volatility: float
    execution_rate_normal: Optional[float] = None
    kurtosis: Optional[float] = None
    sq_return_autocorr: Optional[tuple[float, ...]] = None

    def to_dict(self) -> dict:
        return asdict(self)


def report(trace: RunTrace, volatility_interval: int = 1) -> LiquidityReport:
    vol, hft_vol = volume(trace)
    facts = stylized_facts(trace) if trace.t_end >= STYLIZED_INTERVAL * (ACF_LAGS + 2) else None
    return LiquidityReport(
        volume=vol,
        hft_volume=hft_vol,
        tightness=tightness(trace),
        resiliency=resiliency(trace) if trace.t_end % trace.t_day == 0 else None,
        depth=depth(trace),
        execution_rate=execution_rate(trace),
        volatility=volatility(trace, volatility_interval),
        execution_rate_normal=execution_rate(trace, "normal"),
        kurtosis=facts.kurtosis if facts else None,
        sq_return_autocorr=facts.sq_return_autocorr if facts else None,
    )


# Column order of the CSV report; the last column is the alternative execution-rate reading.
REPORT_COLUMNS = (
    "Volume",
    "HFT volume",
    "Tightness",
    "Resiliency",
    "Depth",
    "Execution rate",
    "Volatility",
    "Execution rate (normal resting)",
)
_REPORT_FIELDS = (
    "volume",
    "hft_volume",
    "tightness",
    "resiliency",
    "depth",
    "execution_rate",
    "volatility",
    "execution_rate_normal",
)


def report_values(rep: LiquidityReport) -> list[Optional[float]]:
    return [getattr(rep, f) for f in _REPORT_FIELDS]


# ---------------------------------------------------------------------------
# event-log replay


def _parse_meta(line: str) -> dict:
    out = {}
    for item in line.lstrip("#").split():
        key, _, value = item.partition("=")
        out[key] = float(value) if "." in value or "e" in value else int(value)
    return out


def replay(source: Union[str, Path, IO[str]]) -> RunTrace:
    """Rebuild a :class:`RunTrace` from an event log written by the engine.

    Submissions are re-matched in a fresh book and every logged trade must
    agree with the re-matched one.
    """
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            return replay(fh)
    meta: dict = {}
    rows = []
    for line in source:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            meta.update(_parse_meta(line))
            continue
        rows.append(line)
    missing = {"tick", "p_f", "t_day", "t_end"} - meta.keys()
    if missing:
        raise ValueError(f"event log lacks metadata: {sorted(missing)}")
    tick = float(meta["tick"])
    p_f = float(meta["p_f"])
    t_end = int(meta["t_end"])
    hft_owner = int(meta.get("hft_owner", HFT_OWNER))

    book = OrderBook(tick)
    bb_arr = [0] * t_end
    ba_arr = [0] * t_end
    db_arr = [0] * t_end
    ds_arr = [0] * t_end
    vol_arr = [0] * t_end
    hvol_arr = [0] * t_end
    prices = [p_f]
    tr_time, tr_price, tr_hft, tr_rest_normal = [], [], [], []
    new_orders = 0
    pending = []  # trades produced by the latest submit, awaiting their log line
    step_trades: list = []

    def close_step(t: int) -> None:
        i = t - 1
        bb = book.best_bid()
        ba = book.best_ask()
        bb_arr[i] = bb or 0
        ba_arr[i] = ba or 0
        if bb is not None and ba is not None:
            db_arr[i], ds_arr[i] = book.depth_within(DEPTH_TICKS)
        vol_arr[i] = len(step_trades)
        hvol_arr[i] = sum(1 for tr in step_trades if hft_owner in (tr.buy_owner, tr.sell_owner))
        last = prices[-1]
        if step_trades:
            last = ticks_to_price(step_trades[-1].price, tick)
        prices.append(last)
        step_trades.clear()

    reader = csv.reader(rows)
    header = next(reader, None)
    if header is None or ",".join(header) != "t,event,order_id,owner,side,price,qty":
        raise ValueError("event log header missing or malformed")
    current = 0
    for lineno, rec in enumerate(reader, start=2):
        t = int(rec[0])
        event = rec[1]
        oid = int(rec[2])
        owner = int(rec[3])
        side = BUY if rec[4] == "buy" else SELL
        price = float(rec[5])
        if t > t_end:
            raise ValueError(f"line {lineno}: step {t} beyond t_end={t_end}")
        while current < t:
            if current >= 1:
                close_step(current)
            current += 1
        if pending and event != "trade":
            raise ValueError(f"line {lineno}: logged trade missing after order {pending[0].incoming_id}")
        if event == "submit":
            ticks = price_to_ticks(price, side, tick)
            if t >= 1 and owner != hft_owner:
                new_orders += 1
            pending = book.submit(Order(oid, owner, side, ticks, t), t)
            if t >= 1:
                for tr in pending:
                    step_trades.append(tr)
                    tr_time.append(t)
                    tr_price.append(tr.price)
                    tr_hft.append(hft_owner in (tr.buy_owner, tr.sell_owner))
                    tr_rest_normal.append(tr.resting_owner != hft_owner)
        elif event == "trade":
            if not pending or pending[0].resting_id != oid:
                raise ValueError(f"line {lineno}: trade against order {oid} does not replay")
            pending = pending[1:]
        elif event in ("cancel", "expire"):
            if not book.cancel(oid, t):
                raise ValueError(f"line {lineno}: {event} of unknown order {oid}")
        else:
            raise ValueError(f"line {lineno}: unknown event {event!r}")
    if pending:
        raise ValueError("event log ends with an unlogged trade")
    while current <= t_end:
        if current >= 1:
            close_step(current)
        current += 1

    return RunTrace(
        tick=tick,
        p_f=p_f,
        t_day=int(meta["t_day"]),
        price=np.array(prices, dtype=float),
        best_bid=np.array(bb_arr, dtype=np.int64),
        best_ask=np.array(ba_arr, dtype=np.int64),
        depth_buy=np.array(db_arr, dtype=np.int64),
        depth_sell=np.array(ds_arr, dtype=np.int64),
        volume=np.array(vol_arr, dtype=np.int64),
        hft_volume=np.array(hvol_arr, dtype=np.int64),
        trade_time=np.array(tr_time, dtype=np.int64),
        trade_price=np.array(tr_price, dtype=np.int64),
        trade_hft=np.array(tr_hft, dtype=bool),
        trade_resting_normal=np.array(tr_rest_normal, dtype=bool),
        new_orders=new_orders,
    )
