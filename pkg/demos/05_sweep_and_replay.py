"""
A small sweep, and a run rebuilt from its event log
===================================================

The sweep writes the same CSV the command line tool writes.  The event log
holds every submit, trade, cancel and expiry, which is enough to recompute
all the metrics without the simulator.
"""

import io
import sys

from hftmarket import MarketParams, SweepSpec, replay, report, run, run_sweep, write_csv

base = MarketParams(t_end=20_000)
rep = run_sweep(SweepSpec("est", (0.003, 0.03), runs=2, base=base, master_seed=1))
write_csv(rep, sys.stdout)

log = io.StringIO()
direct = report(run(MarketParams(t_end=20_000, seed=5, hft_enabled=True), log=log))
print("event log lines:", log.getvalue().count("\n"))
log.seek(0)
print("replay matches:", report(replay(log)) == direct)
