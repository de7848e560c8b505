"""
One market, with and without the market maker
=============================================

Both runs share every normal-agent random draw, so the gap between them is
down to the market maker alone.  Two simulated days keep this under a
minute.
"""

from dataclasses import replace

from hftmarket import MarketParams, report, run

params = MarketParams(t_end=40_000, seed=7)

rows = {}
for hft in (False, True):
    trace = run(replace(params, hft_enabled=hft))
    rows["with" if hft else "without"] = report(trace)
    if hft:
        print("final HFT position:", trace.hft_position)

print(f"{'':16s}{'without':>12s}{'with':>12s}")
for name in ("volume", "hft_volume", "tightness", "resiliency", "depth", "execution_rate", "volatility"):
    a, b = getattr(rows["without"], name), getattr(rows["with"], name)
    print(f"{name:16s}{a:12.5g}{b:12.5g}")
