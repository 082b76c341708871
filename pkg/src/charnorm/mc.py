"""Monte Carlo size/power experiments with order-independent random streams.

Every replication draws from its own Philox stream keyed on
``(seed, data cell, replication index)``, where the data cell is
``(model, innovation family, zeta, n)``. All tests of a configuration are
evaluated on the same simulated series, and results do not depend on the
number of workers or on the order in which replications run.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from . import htest
from .dgp import InnovationSpec, ar1, arch1, simulate
from .errors import CharnError
from .resid import default_bandwidth
from .smooth import default_weight

log = logging.getLogger(__name__)

CSV_COLUMNS = ("model", "test", "zeta", "n", "R", "alpha", "rejection_rate", "stderr", "errors")
WORKERS_ENV = "CHARNORM_WORKERS"
GAUSSIANITY_TESTS = ("ar_arch", "ar", "arch")


class McCellError(RuntimeError):
    """Too many replications of a cell failed."""


@dataclass(frozen=True)
class McConfig:
    """One rectangular block of a Monte Carlo table.

    ``zetas x ns`` data cells are simulated and every test in ``tests`` is
    applied to each replication.
    """

    model: str = "ar1"
    family: str = "skew_normal"
    zetas: tuple = (0.0,)
    ns: tuple = (100,)
    tests: tuple = ("ar_arch",)
    reps: int = 500
    alpha: float = 0.05
    seed: int = 0
    theta: float = 0.5
    arch_a: float = 0.75
    arch_b: float = 0.25
    max_error_frac: float = 0.01

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if any(n < 20 for n in self.ns):
            raise ValueError("all sample sizes must be >= 20")
        if self.model not in ("ar1", "arch1"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.family not in ("skew_normal", "standardized_t", "standard_normal"):
            raise ValueError(f"unknown innovation family {self.family!r}")
        for t in self.tests:
            if t not in htest.TESTS:
                raise ValueError(f"unknown test {t!r}")

    def innovation(self, zeta: float) -> InnovationSpec:
        if self.family == "skew_normal":
            return InnovationSpec.skew_normal(zeta)
        if self.family == "standardized_t":
            return InnovationSpec.standardized_t(zeta)
        return InnovationSpec.standard_normal()

    def charn(self, zeta: float):
        if self.model == "ar1":
            return ar1(self.theta, self.innovation(zeta))
        return arch1(self.arch_a, self.arch_b, self.innovation(zeta))


@dataclass(frozen=True)
class McRow:
    model: str
    test: str
    zeta: float
    n: int
    R: int
    alpha: float
    rejection_rate: float
    stderr: float
    errors: int


@dataclass
class McResult:
    rows: list = field(default_factory=list)
    elapsed: float = 0.0

    def __iter__(self):
        return iter(self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def lookup(self, model: str, test: str, zeta: float, n: int) -> McRow:
        for r in self.rows:
            if (r.model, r.test, r.n) == (model, test, n) and math.isclose(r.zeta, zeta):
                return r
        raise KeyError((model, test, zeta, n))

    def to_records(self) -> list[dict]:
        return [asdict(r) for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for rec in self.to_records():
            w.writerow(rec)
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(self.to_records(), indent=2)

    def extend(self, other: "McResult") -> None:
        self.rows.extend(other.rows)
        self.elapsed += other.elapsed


def _cell_key(config: McConfig, zeta: float, n: int) -> int:
    tag = f"{config.model}|{config.family}|{float(zeta)!r}|{n}|{config.theta!r}|{config.arch_a!r}|{config.arch_b!r}"
    return int.from_bytes(hashlib.sha256(tag.encode()).digest()[:8], "little")


def replication_rng(seed: int, cell_key: int, rep: int) -> np.random.Generator:
    """Counter-based stream for one replication."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(cell_key), int(rep)))
    return np.random.Generator(np.random.Philox(ss))


def _replicate(config: McConfig, zeta: float, n: int, rep: int) -> tuple:
    """Decisions of every configured test on one replication; ``None`` marks an error."""
    rng = replication_rng(config.seed, _cell_key(config, zeta, n), rep)
    try:
        x = simulate(config.charn(zeta), n, rng).values
        weight = default_weight(n)
        cfg = htest.TestConfig(alpha=config.alpha, weight=weight, bandwidth=default_bandwidth(x, weight=weight))
    except CharnError:
        return (None,) * len(config.tests)
    out = []
    for t in config.tests:
        try:
            out.append(bool(htest.TESTS[t](x, cfg).reject))
        except CharnError:
            out.append(None)
    return tuple(out)


def _run_chunk(args) -> list:
    config, zeta, n, reps = args
    return [_replicate(config, zeta, n, r) for r in reps]


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _chunks(config: McConfig, workers: int) -> list:
    tasks = []
    size = max(1, math.ceil(config.reps / max(1, 4 * workers)))
    for zeta in config.zetas:
        for n in config.ns:
            for start in range(0, config.reps, size):
                tasks.append((config, zeta, n, range(start, min(start + size, config.reps))))
    return tasks


def _aggregate(config: McConfig, zeta: float, n: int, decisions: Sequence[tuple]) -> list[McRow]:
    rows = []
    for j, t in enumerate(config.tests):
        col = [d[j] for d in decisions]
        errors = sum(v is None for v in col)
        ok = len(col) - errors
        if errors > config.max_error_frac * len(col):
            raise McCellError(
                f"{errors}/{len(col)} replications failed for model={config.model} test={t} zeta={zeta} n={n}"
            )
        rate = sum(v is True for v in col) / ok if ok else float("nan")
        stderr = math.sqrt(rate * (1 - rate) / ok) if ok else float("nan")
        rows.append(McRow(config.model, t, float(zeta), int(n), config.reps, config.alpha, rate, stderr, errors))
    return rows


def run_table(config: McConfig, workers: Optional[int] = None, progress: bool = False) -> McResult:
    """Run every (zeta, n) cell of ``config``; rows come out in grid order."""
    workers = default_workers() if workers is None else max(1, int(workers))
    t0 = time.perf_counter()
    tasks = _chunks(config, workers)
    if workers == 1:
        chunks = []
        for i, task in enumerate(tasks):
            chunks.append(_run_chunk(task))
            if progress:
                log.info("chunk %d/%d done", i + 1, len(tasks))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_chunk, tasks))
    by_cell: dict = {}
    for task, res in zip(tasks, chunks):
        by_cell.setdefault((task[1], task[2]), []).extend(res)
    result = McResult()
    for zeta in config.zetas:
        for n in config.ns:
            result.rows.extend(_aggregate(config, zeta, n, by_cell[(zeta, n)]))
            if progress:
                log.info("cell zeta=%g n=%d done", zeta, n)
    result.elapsed = time.perf_counter() - t0
    return result


def run_tables(configs: Iterable[McConfig], workers: Optional[int] = None, progress: bool = False) -> McResult:
    result = McResult()
    for c in configs:
        result.extend(run_table(c, workers, progress))
    return result


def run_cell(
    config: McConfig, zeta: float, n: int, test: str, master_seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> tuple[float, float]:
    """Rejection rate and its Monte Carlo standard error for one cell."""
    cfg = replace(config, zetas=(zeta,), ns=(n,), tests=(test,))
    if master_seed is not None:
        cfg = replace(cfg, seed=master_seed)
    row = run_table(cfg, workers).rows[0]
    return row.rejection_rate, row.stderr


SKEW_ZETAS = (0.0, 0.1, 0.2, 0.3, 0.4, 0.6, 0.8, 1.0)
T_DFS = (3, 4, 5, 6, 7)


def preset(name: str, reps: int = 500, seed: int = 0, alpha: float = 0.05) -> list[McConfig]:
    """Grids of the reference size/power tables: ``table3``, ``table4``, ``table5``."""
    common = dict(reps=reps, seed=seed, alpha=alpha)
    if name == "table3":
        return [McConfig("ar1", "skew_normal", SKEW_ZETAS, (100, 200), ("ar_arch", "ar"), **common)]
    if name == "table4":
        return [
            McConfig("arch1", "skew_normal", SKEW_ZETAS, (100, 200), ("ar_arch", "arch"), **common),
            McConfig("arch1", "skew_normal", SKEW_ZETAS, (500,), ("arch",), **common),
        ]
    if name == "table5":
        return [
            McConfig("ar1", "standardized_t", T_DFS, (100, 200, 500), ("ar_arch", "ar"), **common),
            McConfig("arch1", "standardized_t", T_DFS, (100, 200, 500), ("ar_arch", "arch"), **common),
        ]
    raise ValueError(f"unknown preset {name!r}; choose table3, table4 or table5")


PRESETS = ("table3", "table4", "table5")


def _grid(model, test, zetas, rows):
    return {(model, test, z, n): p for n, vals in rows.items() for z, p in zip(zetas, vals)}


#: Published rejection percentages (level 5%, 500 replications) for the preset grids,
#: keyed by ``(model, test, zeta, n)``.
REFERENCE_RATES = {
    "table3": {
        **_grid("ar1", "ar_arch", SKEW_ZETAS, {
            100: (4.8, 5.4, 8.6, 12.2, 26.2, 48.8, 62, 75.4),
            200: (5, 6, 8.8, 18.6, 44, 83.6, 94, 96.2)}),
        **_grid("ar1", "ar", SKEW_ZETAS, {
            100: (5, 7.4, 9, 15.6, 27, 53.2, 67.4, 76.6),
            200: (5, 6.8, 8.8, 19, 41.8, 77.8, 93.6, 98)}),
    },
    "table4": {
        **_grid("arch1", "ar_arch", SKEW_ZETAS, {
            100: (5.2, 6.6, 8.2, 15.8, 33, 61.8, 72.8, 82.6),
            200: (4.8, 6.2, 7.8, 22, 47.4, 82.2, 94.8, 98.8)}),
        **_grid("arch1", "arch", SKEW_ZETAS, {
            100: (5, 6.2, 6.4, 8, 16.2, 24.4, 31.2, 39.6),
            200: (5.2, 6, 7.2, 10.4, 15, 34, 48.8, 55.8),
            500: (5, 5.6, 6.8, 14.2, 31.8, 68.6, 87, 91.2)}),
    },
    "table5": {
        **_grid("ar1", "ar_arch", T_DFS, {
            100: (61.4, 49.8, 35.2, 27.8, 23.6),
            200: (90, 71.8, 52.2, 45.4, 34.6),
            500: (100, 98.8, 89.6, 77.6, 62)}),
        **_grid("arch1", "ar_arch", T_DFS, {
            100: (60.4, 45.2, 35.8, 26.4, 22.6),
            200: (91, 72.2, 52.4, 37.2, 31),
            500: (100, 98.4, 86.6, 75, 59.2)}),
        **_grid("ar1", "ar", T_DFS, {
            100: (23.4, 15.8, 15.4, 11, 9.8),
            200: (54.8, 25.6, 10.8, 9.8, 6.4),
            500: (99, 74.6, 41.8, 22.4, 18.6)}),
        **_grid("arch1", "arch", T_DFS, {
            100: (18, 9.8, 7.6, 7.2, 5.2),
            200: (47.2, 22.4, 12, 6.6, 6.2),
            500: (96.8, 70.2, 37, 19.6, 13.4)}),
    },
}
