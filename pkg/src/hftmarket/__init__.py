"""Artificial continuous double-auction market with an optional market-making
HFT, plus liquidity metrics and sweep tooling."""

__version__ = "0.1.0"

from .engine import Market, MarketParams, RunTrace, run  # noqa: E402
from .harness import SweepSpec, emit, run_sweep, validate_stylized, write_csv  # noqa: E402
from .metrics import LiquidityReport, report, replay, stylized_facts  # noqa: E402
from .orderbook import BUY, HFT_OWNER, SELL, Order, OrderBook, Trade, round_to_tick  # noqa: E402

__all__ = [
    "BUY",
    "SELL",
    "HFT_OWNER",
    "Market",
    "MarketParams",
    "RunTrace",
    "Order",
    "OrderBook",
    "Trade",
    "LiquidityReport",
    "report",
    "replay",
    "round_to_tick",
    "run",
    "stylized_facts",
    "SweepSpec",
    "emit",
    "run_sweep",
    "validate_stylized",
    "write_csv",
]
