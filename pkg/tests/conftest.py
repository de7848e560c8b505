import logging

import numpy as np
import pytest

from hftmarket.engine import RunTrace


@pytest.fixture(autouse=True)
def _quiet_learning_warnings():
    logging.getLogger("hftmarket.agents").setLevel(logging.ERROR)


def make_trace(
    price,
    best_bid=None,
    best_ask=None,
    depth_buy=None,
    depth_sell=None,
    trades=(),
    new_orders=0,
    tick=0.1,
    t_day=None,
    p_f=None,
):
    """Hand-built trace. ``trades`` holds (time, price_ticks, hft, resting_normal)."""
    price = np.asarray(price, dtype=float)
    n = len(price) - 1
    zeros = np.zeros(n, dtype=np.int64)
    trades = list(trades)
    volume = np.bincount([t - 1 for t, *_ in trades], minlength=n).astype(np.int64)[:n] if trades else zeros.copy()
    hft_volume = (
        np.bincount([t - 1 for t, _, h, _ in trades if h], minlength=n).astype(np.int64)[:n]
        if any(h for _, _, h, _ in trades)
        else zeros.copy()
    )
    return RunTrace(
        tick=tick,
        p_f=float(price[0]) if p_f is None else p_f,
        t_day=n if t_day is None else t_day,
        price=price,
        best_bid=zeros.copy() if best_bid is None else np.asarray(best_bid, dtype=np.int64),
        best_ask=zeros.copy() if best_ask is None else np.asarray(best_ask, dtype=np.int64),
        depth_buy=zeros.copy() if depth_buy is None else np.asarray(depth_buy, dtype=np.int64),
        depth_sell=zeros.copy() if depth_sell is None else np.asarray(depth_sell, dtype=np.int64),
        volume=volume,
        hft_volume=hft_volume,
        trade_time=np.array([t for t, *_ in trades], dtype=np.int64),
        trade_price=np.array([p for _, p, *_ in trades], dtype=np.int64),
        trade_hft=np.array([h for _, _, h, _ in trades], dtype=bool),
        trade_resting_normal=np.array([r for *_, r in trades], dtype=bool),
        new_orders=new_orders,
    )


# ---------------------------------------------------------------------------
# acceptance bookkeeping: one line per criterion at the end of the session

_ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


@pytest.fixture
def criterion():
    def record(number: int, check: str, passed: bool, detail: str = "") -> bool:
        _ACCEPTANCE.setdefault(number, []).append((check, bool(passed), detail))
        print(f"criterion {number} [{check}] {'PASS' if passed else 'FAIL'} {detail}")
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        checks = _ACCEPTANCE[number]
        ok = all(p for _, p, _ in checks)
        failed = [f"{c} ({d})" if d else c for c, p, d in checks if not p]
        note = "all checks hold" if ok else "failed: " + "; ".join(failed)
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {note}")
