"""Parameter sweeps, multi-seed aggregation, CSV/manifest output and the
stylized-facts gate."""
from __future__ import annotations

import csv
import json
import logging
import math
import os
import typing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from . import __version__
from .engine import MarketParams, run
from .metrics import REPORT_COLUMNS, LiquidityReport, StylizedFacts, report, report_values, stylized_facts

log = logging.getLogger(__name__)

WORKERS_ENV = "HFTMARKET_WORKERS"

TABLE2 = {
    "tick": (0.01, 0.1, 1.0, 10.0, 100.0),
    "w1_max": (1.0, 3.0, 5.0, 8.0, 10.0),
    "w2_max": (1.0, 3.0, 5.0, 8.0, 10.0),
    "sigma_eps": (0.02, 0.04, 0.06, 0.08, 0.1),
    "est": (0.003, 0.005, 0.01, 0.02, 0.03),
    "t_c": (10_000, 15_000, 20_000, 25_000, 30_000),
    "pr_o": (0.2, 0.4, 0.6, 0.8, 1.0),
}
PRESETS = {"table2": TABLE2}

VARIANTS = {"with": (True,), "without": (False,), "both": (True, False)}


def variant_name(hft_enabled: bool) -> str:
    return "with" if hft_enabled else "without"


# ---------------------------------------------------------------------------
# configuration


def _coerce(name: str, text: str):
    hints = typing.get_type_hints(MarketParams)
    kind = hints[name]
    text = text.strip()
    if kind is bool:
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: expected a boolean, got {text!r}")
    if kind == Optional[int]:
        return None if text.lower() in ("", "none") else int(float(text))
    if kind is int:
        value = float(text)
        if value != int(value):
            raise ValueError(f"{name}: expected an integer, got {text!r}")
        return int(value)
    return float(text)


def parse_assignments(lines: Iterable[str], source: str = "<config>") -> dict:
    """Parse ``name = value`` lines into MarketParams keyword arguments."""
    known = set(MarketParams.field_names())
    out = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{lineno}: expected 'name = value', got {raw.strip()!r}")
        name, _, value = line.partition("=")
        name = name.strip()
        if name not in known:
            raise ValueError(f"{source}:{lineno}: unknown parameter {name!r}")
        out[name] = _coerce(name, value)
    return out


def load_config(path: Union[str, Path]) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    return parse_assignments(text.splitlines(), str(path))


def scaled(params: MarketParams, scale: float) -> MarketParams:
    """Shorten (or lengthen) a run by scaling ``t_end`` only.

    The result must still be a whole number of days.
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    t_end = int(round(params.t_end * scale))
    if t_end % params.t_day:
        raise ValueError(f"scaled t_end={t_end} is not a multiple of t_day={params.t_day}")
    return replace(params, t_end=t_end)


# ---------------------------------------------------------------------------
# seeds


def run_seed(master_seed: int, cell: int, run_index: int) -> int:
    """Seed of one run.

    Independent of the market variant, so with/without-HFT runs of the same
    cell and index share their normal-agent randomness.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=(cell, run_index))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepSpec:
    param: str
    values: tuple
    runs: int = 100
    base: MarketParams = field(default_factory=MarketParams)
    variants: tuple[bool, ...] = (True, False)
    master_seed: int = 0
    volatility_interval: int = 1

    def __post_init__(self):
        if self.param not in MarketParams.field_names() or self.param in ("seed", "hft_enabled"):
            raise ValueError(f"cannot sweep parameter {self.param!r}")
        if self.runs < 1:
            raise ValueError("runs must be positive")
        if not self.values:
            raise ValueError("no values to sweep")
        if not self.variants:
            raise ValueError("no market variants selected")
        if self.volatility_interval < 1:
            raise ValueError("volatility_interval must be >= 1")
        for v in self.values:
            p = self.params_for(v, self.variants[0], 0)
            if p.t_end % p.t_day:
                raise ValueError(f"t_end={p.t_end} is not a multiple of t_day={p.t_day}")

    def params_for(self, value, hft_enabled: bool, seed: int) -> MarketParams:
        coerced = _coerce(self.param, repr(value))
        return replace(self.base, **{self.param: coerced, "hft_enabled": hft_enabled, "seed": seed})

    def tasks(self) -> list[tuple[int, bool, int, MarketParams]]:
        out = []
        for ci, value in enumerate(self.values):
            for hft in self.variants:
                for r in range(self.runs):
                    seed = run_seed(self.master_seed, ci, r)
                    out.append((ci, hft, r, self.params_for(value, hft, seed)))
        return out

    def manifest(self) -> dict:
        return {
            "version": __version__,
            "param": self.param,
            "values": list(self.values),
            "runs": self.runs,
            "variants": [variant_name(v) for v in self.variants],
            "master_seed": self.master_seed,
            "volatility_interval": self.volatility_interval,
            "hft_on_abstain": self.base.hft_on_abstain,
            "base": self.base.to_dict(),
            "seeds": [
                [run_seed(self.master_seed, ci, r) for r in range(self.runs)] for ci in range(len(self.values))
            ],
        }

    @classmethod
    def from_manifest(cls, data: dict) -> "SweepSpec":
        base = dict(data["base"])
        return cls(
            param=data["param"],
            values=tuple(data["values"]),
            runs=int(data["runs"]),
            base=MarketParams(**base),
            variants=tuple(v == "with" for v in data["variants"]),
            master_seed=int(data["master_seed"]),
            volatility_interval=int(data.get("volatility_interval", 1)),
        )


def _mean(values: Sequence[Optional[float]]) -> Optional[float]:
    vals = [v for v in values if v is not None]
    if not vals:
        return None
    return math.fsum(vals) / len(vals)


def _stderr(values: Sequence[Optional[float]]) -> Optional[float]:
    vals = [v for v in values if v is not None]
    if len(vals) < 2:
        return None
    return float(np.std(vals, ddof=1) / math.sqrt(len(vals)))


@dataclass
class SweepCell:
    param: str
    value: float
    hft_enabled: bool
    runs: list[LiquidityReport]

    @property
    def variant(self) -> str:
        return variant_name(self.hft_enabled)

    def mean(self, metric: str) -> Optional[float]:
        return _mean([getattr(r, metric) for r in self.runs])

    def stderr(self, metric: str) -> Optional[float]:
        return _stderr([getattr(r, metric) for r in self.runs])

    def row(self) -> list[Optional[float]]:
        columns = list(zip(*(report_values(r) for r in self.runs)))
        return [_mean(c) for c in columns] + [_stderr(c) for c in columns]


@dataclass
class SweepReport:
    spec: SweepSpec
    cells: list[SweepCell]

    def cell(self, value, hft_enabled: bool) -> SweepCell:
        for c in self.cells:
            if c.value == value and c.hft_enabled == hft_enabled:
                return c
        raise KeyError((value, hft_enabled))


def _run_task(task: tuple[int, bool, int, MarketParams, int]) -> LiquidityReport:
    *_, params, vol_interval = task
    return report(run(params), volatility_interval=vol_interval)


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def run_sweep(spec: SweepSpec, workers: Optional[int] = None) -> SweepReport:
    """Run every (value, variant, run) of ``spec`` and average per cell."""
    tasks = [t + (spec.volatility_interval,) for t in spec.tasks()]
    workers = _workers() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=1))
    else:
        results = []
        for t in tasks:
            log.info("run %s=%s hft=%s #%d", spec.param, spec.values[t[0]], t[1], t[2])
            results.append(_run_task(t))
    cells = []
    by_key: dict[tuple[int, bool], list[LiquidityReport]] = {}
    for t, rep in zip(tasks, results):
        by_key.setdefault((t[0], t[1]), []).append(rep)
    for ci, value in enumerate(spec.values):
        for hft in spec.variants:
            cells.append(SweepCell(spec.param, value, hft, by_key[(ci, hft)]))
    return SweepReport(spec, cells)


# ---------------------------------------------------------------------------
# output


def csv_header() -> list[str]:
    return ["Parameter", "Value", "Market"] + list(REPORT_COLUMNS) + [f"{c} SE" for c in REPORT_COLUMNS]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(rep: SweepReport, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(csv_header())
    for cell in rep.cells:
        writer.writerow([cell.param, _fmt(cell.value), cell.variant] + [_fmt(v) for v in cell.row()])


def manifest_path(csv_path: Union[str, Path]) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.stem + ".manifest.json")


def emit(rep: SweepReport, path: Union[str, Path]) -> tuple[Path, Path]:
    """Write the CSV report and its reproduction manifest next to it."""
    path = Path(path)
    mpath = manifest_path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            write_csv(rep, fh)
        with open(mpath, "w", encoding="utf-8") as fh:
            json.dump(rep.spec.manifest(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path, mpath


def load_manifest(path: Union[str, Path]) -> SweepSpec:
    with open(path, encoding="utf-8") as fh:
        return SweepSpec.from_manifest(json.load(fh))


# ---------------------------------------------------------------------------
# stylized facts


@dataclass(frozen=True)
class StylizedCheck:
    passed: bool
    kurtosis: Optional[float]
    sq_return_autocorr: Optional[tuple[float, ...]]
    runs: tuple[Optional[StylizedFacts], ...]


def stylized_gate(facts: Sequence[Optional[StylizedFacts]]) -> StylizedCheck:
    """Pass iff the mean excess kurtosis and every mean squared-return
    autocorrelation are positive.  Any run without defined statistics fails
    the gate."""
    facts = tuple(facts)
    if not facts or any(f is None for f in facts):
        return StylizedCheck(False, None, None, facts)
    kurt = math.fsum(f.kurtosis for f in facts) / len(facts)
    acf = tuple(float(np.mean(col)) for col in zip(*(f.sq_return_autocorr for f in facts)))
    return StylizedCheck(kurt > 0 and all(a > 0 for a in acf), kurt, acf, facts)


def validate_stylized(params: MarketParams, runs: int = 10, master_seed: int = 0) -> StylizedCheck:
    facts = []
    for r in range(runs):
        trace = run(replace(params, seed=run_seed(master_seed, 0, r)))
        facts.append(stylized_facts(trace))
    return stylized_gate(facts)
