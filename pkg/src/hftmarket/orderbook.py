"""Continuous double-auction order book for one-share orders.

Prices inside the book are integer multiples of the tick size ("ticks");
:func:`ticks_to_price` converts back to currency units.  Matching follows
price-time priority and every trade executes at the resting order's price.
"""
from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import repeat
from typing import IO, Iterator, Optional

BUY = 1
SELL = -1

HFT_OWNER = -1
"""Owner id of the market maker; normal agents use 0..n-1."""

_TICK_EPS = 1e-9


class DegeneratePriceError(ValueError):
    """A buy price rounded down to zero or below."""


@lru_cache(maxsize=64)
def _tick_denominator(tick: float) -> Optional[int]:
    # ticks of the form 1/k are converted by division so that e.g. 1001 * 0.1
    # comes back as 100.1 rather than 100.10000000000001
    inv = 1.0 / tick
    k = round(inv)
    if k >= 1 and abs(inv - k) <= _TICK_EPS * inv:
        return k
    return None


def ticks_to_price(ticks: int, tick: float) -> float:
    k = _tick_denominator(tick)
    return ticks / k if k is not None else ticks * tick


def price_to_ticks(raw_price: float, side: int, tick: float) -> int:
    """Round ``raw_price`` onto the tick grid: sells up, buys down.

    Values within a relative 1e-9 of a grid point snap to it, so float noise
    such as ``9990.1 / 0.1 == 99900.99999999999`` does not move an exact
    multiple by a whole tick.
    """
    if tick <= 0:
        raise ValueError(f"tick must be positive, got {tick}")
    if not raw_price > 0:
        raise DegeneratePriceError(f"non-positive price {raw_price}")
    k = _tick_denominator(tick)
    q = raw_price * k if k is not None else raw_price / tick
    nearest = round(q)
    if abs(q - nearest) <= _TICK_EPS * max(1.0, abs(q)):
        n = nearest
    elif side == SELL:
        n = math.ceil(q)
    else:
        n = math.floor(q)
    if n <= 0:
        raise DegeneratePriceError(f"price {raw_price} rounds to {n} ticks")
    return int(n)


def round_to_tick(raw_price: float, side: int, tick: float) -> float:
    """Round a raw order price to the tick grid, returned in currency units."""
    return ticks_to_price(price_to_ticks(raw_price, side, tick), tick)


@dataclass(slots=True)
class Order:
    id: int
    owner: int
    side: int
    price: int  # ticks
    placed_at: int
    quantity: int = 1
    active: bool = field(default=True, compare=False)


@dataclass(frozen=True, slots=True)
class Trade:
    time: int
    price: int  # ticks
    buy_owner: int
    sell_owner: int
    aggressor: int
    resting_id: int
    incoming_id: int

    @property
    def resting_owner(self) -> int:
        return self.sell_owner if self.aggressor == BUY else self.buy_owner


class EventLog:
    """Line-oriented writer for ``t,event,order_id,owner,side,price,qty`` records."""

    HEADER = "t,event,order_id,owner,side,price,qty"

    def __init__(self, stream: IO[str], tick: float):
        self.stream = stream
        self.tick = tick

    def meta(self, **items) -> None:
        body = " ".join(f"{k}={v!r}" for k, v in items.items())
        self.stream.write(f"# {body}\n")

    def header(self) -> None:
        self.stream.write(self.HEADER + "\n")

    def write(self, t: int, event: str, order: Order) -> None:
        side = "buy" if order.side == BUY else "sell"
        price = ticks_to_price(order.price, self.tick)
        self.stream.write(
            f"{t},{event},{order.id},{order.owner},{side},{price!r},{order.quantity}\n"
        )


class OrderBook:
    """Resting one-share orders with price-time priority and expiry.

    Removal is lazy: cancelled or expired orders are flagged inactive and the
    per-level live counts are updated at once, while the queue entries are
    discarded when they reach the front of their level.
    """

    def __init__(self, tick: float, log: Optional[EventLog] = None):
        if tick <= 0:
            raise ValueError(f"tick must be positive, got {tick}")
        self.tick = tick
        self.log = log
        self._queues = {BUY: {}, SELL: {}}
        self._counts: dict[int, dict[int, int]] = {BUY: {}, SELL: {}}
        self._bid_heap: list[int] = []  # negated ticks
        self._ask_heap: list[int] = []
        self._live: dict[int, Order] = {}
        self._by_age: deque[Order] = deque()
        self._next_id = 0
        self.n_submitted = 0
        self.n_filled = 0
        self.n_cancelled = 0
        self.n_expired = 0

    def __len__(self) -> int:
        return len(self._live)

    def __contains__(self, order_id: int) -> bool:
        return order_id in self._live

    def orders(self) -> Iterator[Order]:
        return iter(list(self._live.values()))

    def new_order(self, owner: int, side: int, price: int, t: int) -> Order:
        oid = self._next_id
        self._next_id += 1
        return Order(oid, owner, side, price, t)

    def best_bid(self) -> Optional[int]:
        heap = self._bid_heap
        counts = self._counts[BUY]
        while heap:
            p = -heap[0]
            if counts.get(p, 0):
                return p
            heapq.heappop(heap)
        return None

    def best_ask(self) -> Optional[int]:
        heap = self._ask_heap
        counts = self._counts[SELL]
        while heap:
            p = heap[0]
            if counts.get(p, 0):
                return p
            heapq.heappop(heap)
        return None

    def level_count(self, side: int, price: int) -> int:
        return self._counts[side].get(price, 0)

    def submit(self, order: Order, t: int) -> list[Trade]:
        """Match ``order`` against the opposite side or rest it.

        Returns the (zero or one) trades produced.
        """
        if order.id >= self._next_id:
            self._next_id = order.id + 1
        self.n_submitted += 1
        if self.log is not None:
            self.log.write(t, "submit", order)
        if order.side == BUY:
            best = self.best_ask()
            crosses = best is not None and order.price >= best
        else:
            best = self.best_bid()
            crosses = best is not None and order.price <= best
        if crosses:
            resting = self._pop_front(-order.side, best)
            self.n_filled += 2
            if self.log is not None:
                self.log.write(t, "trade", resting)
            if order.side == BUY:
                trade = Trade(t, best, order.owner, resting.owner, BUY, resting.id, order.id)
            else:
                trade = Trade(t, best, resting.owner, order.owner, SELL, resting.id, order.id)
            order.active = False
            return [trade]
        self._rest(order)
        return []

    def cancel(self, order_id: int, t: int = 0) -> bool:
        """Remove a resting order; False if it already traded, expired or never rested."""
        order = self._live.get(order_id)
        if order is None:
            return False
        self._remove(order)
        self.n_cancelled += 1
        if self.log is not None:
            self.log.write(t, "cancel", order)
        return True

    def expire(self, t: int, t_c: int) -> int:
        """Drop every resting order whose age ``t - placed_at`` has reached ``t_c``."""
        cutoff = t - t_c
        queue = self._by_age
        removed = 0
        while queue and queue[0].placed_at <= cutoff:
            order = queue.popleft()
            if order.active:
                self._remove(order)
                removed += 1
                if self.log is not None:
                    self.log.write(t, "expire", order)
        self.n_expired += removed
        return removed

    def depth_within(self, n_ticks: int = 50) -> tuple[int, int]:
        """Resting buy/sell counts within ``n_ticks`` levels of the best quotes.

        Returns ``(0, 0)`` unless both sides are populated.
        """
        bb = self.best_bid()
        ba = self.best_ask()
        if bb is None or ba is None:
            return 0, 0
        zeros = repeat(0)
        buys = sum(map(self._counts[BUY].get, range(bb - n_ticks + 1, bb + 1), zeros))
        sells = sum(map(self._counts[SELL].get, range(ba, ba + n_ticks), zeros))
        return buys, sells

    def _rest(self, order: Order) -> None:
        side = order.side
        p = order.price
        counts = self._counts[side]
        c = counts.get(p, 0)
        if c == 0:
            self._queues[side][p] = deque([order])
            if side == BUY:
                heapq.heappush(self._bid_heap, -p)
            else:
                heapq.heappush(self._ask_heap, p)
        else:
            self._queues[side][p].append(order)
        counts[p] = c + 1
        self._live[order.id] = order
        self._by_age.append(order)

    def _pop_front(self, side: int, price: int) -> Order:
        queue = self._queues[side][price]
        order = queue.popleft()
        while not order.active:
            order = queue.popleft()
        order.active = False
        del self._live[order.id]
        self._decrement(side, price)
        return order

    def _remove(self, order: Order) -> None:
        order.active = False
        del self._live[order.id]
        self._decrement(order.side, order.price)

    def _decrement(self, side: int, price: int) -> None:
        counts = self._counts[side]
        c = counts[price] - 1
        if c:
            counts[price] = c
        else:
            del counts[price]
            del self._queues[side][price]
