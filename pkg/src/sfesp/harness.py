"""Experiment harness: instance generation, comparison sweeps, gap studies."""

from __future__ import annotations

import csv
import io
import itertools
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .baselines import BaselineConfig
from .exact import GapRecord, OracleLimits, OracleRefusal, gap_report
from .fixtures import APPLICATIONS, POOL_PRESETS, build_registry, latency_model_id
from .model import ApplicationClass, ProblemInstance, ResourcePool, TaskSpec, clean_admitted
from .perf import ProfileRegistry
from .solvers import SOLVER_NAMES, get_solver

ACCURACY_LEVELS = {
    "low": {"detection": 0.20, "segmentation": 0.35},
    "medium": {"detection": 0.35, "segmentation": 0.50},
    "high": {"detection": 0.55, "segmentation": 0.70},
}
LATENCY_LEVELS = {"low": 0.2, "high": 0.7}


@dataclass(frozen=True)
class ExperimentGrid:
    task_counts: tuple[int, ...] = (10, 20, 30, 40, 50)
    accuracy_levels: tuple[str, ...] = ("low", "medium", "high")
    latency_levels: tuple[str, ...] = ("low", "high")
    resource_dims: tuple[int, ...] = (2, 4)
    repetitions: int = 10
    seed: int = 0
    fps_range: tuple[float, float] = (5.0, 15.0)
    bitrate_range: tuple[float, float] = (0.7, 0.9)

    def __post_init__(self):
        for name in ("task_counts", "accuracy_levels", "latency_levels", "resource_dims"):
            if not getattr(self, name):
                raise ValueError(f"grid {name} must be non-empty")
        for lvl in self.accuracy_levels:
            if lvl not in ACCURACY_LEVELS:
                raise ValueError(f"unknown accuracy level {lvl!r}")
        for lvl in self.latency_levels:
            if lvl not in LATENCY_LEVELS:
                raise ValueError(f"unknown latency level {lvl!r}")
        for d in self.resource_dims:
            if d not in POOL_PRESETS:
                raise ValueError(f"no pool preset for {d} resource types")
        if self.repetitions < 1:
            raise ValueError("repetitions must be positive")

    def points(self) -> list["GridPoint"]:
        return [
            GridPoint(n, a, l, d)
            for d, a, l, n in itertools.product(self.resource_dims, self.accuracy_levels, self.latency_levels,
                                                self.task_counts)
        ]


@dataclass(frozen=True)
class GridPoint:
    n_tasks: int
    accuracy_level: str
    latency_level: str
    dims: int


def _rng(*key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in key]))


def point_seed(grid_seed: int, point: GridPoint, rep: int) -> int:
    acc = list(ACCURACY_LEVELS).index(point.accuracy_level)
    lat = list(LATENCY_LEVELS).index(point.latency_level)
    return int(_rng(grid_seed, point.n_tasks, acc, lat, point.dims, rep).integers(2**31))


def generate_instance(point: GridPoint, seed: int, grid: ExperimentGrid = ExperimentGrid(),
                      registry: Optional[ProfileRegistry] = None) -> ProblemInstance:
    """Round-robin tasks over the ten applications with preset pool and thresholds."""
    if point.accuracy_level not in ACCURACY_LEVELS or point.latency_level not in LATENCY_LEVELS:
        raise ValueError(f"unknown grid point {point}")
    if point.dims not in POOL_PRESETS:
        raise ValueError(f"no pool preset for {point.dims} resource types")
    registry = registry or build_registry()
    rng = _rng(seed)
    classes = []
    for c, app in enumerate(APPLICATIONS):
        classes.append(ApplicationClass(
            class_id=c,
            service=app.service,
            accuracy_threshold=ACCURACY_LEVELS[point.accuracy_level][app.service],
            latency_threshold=LATENCY_LEVELS[point.latency_level],
            profile_id=app.profile_id,
            latency_model_id=latency_model_id(app.service, point.dims),
            target_labels=app.labels,
            name=app.name,
        ))
    n_apps = len(APPLICATIONS)
    fps = rng.uniform(*grid.fps_range, size=point.n_tasks)
    bitrate = rng.uniform(*grid.bitrate_range, size=point.n_tasks)
    tasks = [
        TaskSpec((i % n_apps, i // n_apps, 0), round(float(fps[i]), 3), round(float(bitrate[i]), 4))
        for i in range(point.n_tasks)
    ]
    pool = ResourcePool.equal_priced(*POOL_PRESETS[point.dims])
    return ProblemInstance(tuple(classes), tuple(tasks), pool, registry)


# ---------------------------------------------------------------------------
# comparison sweep

COMPARE_FIELDS = ("dims", "n_tasks", "accuracy_level", "latency_level", "repetition", "seed", "algo",
                  "requested", "admitted_clean", "admitted_raw", "objective", "wall_ms")
SUMMARY_FIELDS = ("dims", "n_tasks", "accuracy_level", "latency_level", "algo", "runs",
                  "admitted_clean_mean", "admitted_clean_std", "admitted_raw_mean", "admitted_raw_std",
                  "objective_mean", "objective_std")


def run_comparison(grid: ExperimentGrid, algos: Sequence[str], cfg: BaselineConfig = BaselineConfig(),
                   record_time: bool = True, limits: OracleLimits = OracleLimits(),
                   registry: Optional[ProfileRegistry] = None) -> list[dict]:
    """One row per grid point x repetition x algorithm.

    ``admitted_clean`` counts admitted tasks that meet their own accuracy and
    latency requirements; ``admitted_raw`` counts every admission. With
    ``record_time=False`` the wall-time column is zero so that runs are
    byte-reproducible.
    """
    for a in algos:
        if a not in SOLVER_NAMES:
            raise ValueError(f"unknown algorithm {a!r}")
    solvers = {a: get_solver(a, cfg, limits) for a in algos}
    registry = registry or build_registry()
    rows = []
    for point in grid.points():
        for rep in range(grid.repetitions):
            seed = point_seed(grid.seed, point, rep)
            inst = generate_instance(point, seed, grid, registry)
            for a in algos:
                t0 = time.perf_counter()
                sol = solvers[a](inst)
                wall = (time.perf_counter() - t0) * 1000.0 if record_time else 0.0
                rows.append({
                    "dims": point.dims, "n_tasks": point.n_tasks, "accuracy_level": point.accuracy_level,
                    "latency_level": point.latency_level, "repetition": rep, "seed": seed, "algo": a,
                    "requested": len(inst.tasks), "admitted_clean": len(clean_admitted(inst, sol)),
                    "admitted_raw": len(sol.admitted), "objective": round(sol.objective, 9),
                    "wall_ms": round(wall, 3),
                })
    rows.sort(key=lambda r: (r["dims"], r["accuracy_level"], r["latency_level"], r["n_tasks"],
                             r["repetition"], r["algo"]))
    return rows


def summarize(rows: Iterable[dict]) -> list[dict]:
    cells: dict[tuple, list[dict]] = {}
    for r in rows:
        key = (r["dims"], r["n_tasks"], r["accuracy_level"], r["latency_level"], r["algo"])
        cells.setdefault(key, []).append(r)
    out = []
    for key in sorted(cells):
        rs = cells[key]
        stats = {}
        for col in ("admitted_clean", "admitted_raw", "objective"):
            v = np.array([r[col] for r in rs], float)
            stats[f"{col}_mean"] = round(float(v.mean()), 6)
            stats[f"{col}_std"] = round(float(v.std()), 6)
        out.append(dict(zip(SUMMARY_FIELDS[:5], key), runs=len(rs), **stats))
    return out


# ---------------------------------------------------------------------------
# gap study

GAP_POOL = (("RBG", "GPU"), (8, 8))
GAP_FIELDS = ("instance", "seed", "n_tasks", "status", "greedy_objective", "exact_objective", "ratio",
              "greedy_admitted", "exact_admitted")


def generate_gap_instance(n_tasks: int, seed: int, registry: Optional[ProfileRegistry] = None) -> ProblemInstance:
    """Small mixed instance: random applications, thresholds and a tight 8x8 pool."""
    registry = registry or build_registry()
    rng = _rng(seed, n_tasks)
    classes, tasks = [], []
    for i in range(n_tasks):
        app = APPLICATIONS[int(rng.integers(len(APPLICATIONS)))]
        acc = list(ACCURACY_LEVELS)[int(rng.integers(3))]
        lat = list(LATENCY_LEVELS)[int(rng.integers(2))]
        classes.append(ApplicationClass(i, app.service, ACCURACY_LEVELS[acc][app.service], LATENCY_LEVELS[lat],
                                        app.profile_id, latency_model_id(app.service, 2), app.labels, app.name))
        tasks.append(TaskSpec((i, 0, 0), round(float(rng.uniform(5, 15)), 3),
                              round(float(rng.uniform(0.7, 0.9)), 4)))
    pool = ResourcePool.equal_priced(*GAP_POOL)
    return ProblemInstance(tuple(classes), tuple(tasks), pool, registry)


def run_gap_study(task_counts: Sequence[int], repetitions: int, seed: int,
                  limits: OracleLimits = OracleLimits(), registry: Optional[ProfileRegistry] = None) -> list[dict]:
    """Greedy-vs-exact rows; oracle refusals are kept as ``skipped`` rows."""
    registry = registry or build_registry()
    rows = []
    k = 0
    for n in task_counts:
        if n > limits.max_tasks:
            raise ValueError(f"gap studies need n_tasks <= {limits.max_tasks}")
        for rep in range(repetitions):
            s = int(_rng(seed, n, rep).integers(2**31))
            inst = generate_gap_instance(n, s, registry)
            row = {"instance": k, "seed": s, "n_tasks": n}
            try:
                g: GapRecord = gap_report(inst, limits)
                row.update(status="ok", greedy_objective=round(g.greedy_objective, 9),
                           exact_objective=round(g.exact_objective, 9), ratio=round(g.ratio, 9),
                           greedy_admitted=g.greedy_admitted, exact_admitted=g.exact_admitted)
            except OracleRefusal as exc:
                row.update(status=f"skipped: {exc}", greedy_objective="", exact_objective="", ratio="",
                           greedy_admitted="", exact_admitted="")
            rows.append(row)
            k += 1
    return rows


def gap_summary(rows: Sequence[dict]) -> dict:
    ratios = [r["ratio"] for r in rows if r["status"] == "ok"]
    if not ratios:
        return {"instances": 0, "skipped": len(rows), "min_ratio": math.nan, "mean_ratio": math.nan,
                "optimal_fraction": math.nan}
    return {"instances": len(ratios), "skipped": len(rows) - len(ratios),
            "min_ratio": min(ratios), "mean_ratio": float(np.mean(ratios)),
            "optimal_fraction": float(np.mean([r >= 1 - 1e-9 for r in ratios]))}


# ---------------------------------------------------------------------------
# CSV


def write_csv(rows: Sequence[dict], fields: Sequence[str], path: Union[str, Path, io.TextIOBase]) -> None:
    def dump(fh):
        w = csv.DictWriter(fh, fieldnames=list(fields), lineterminator="\n", extrasaction="raise")
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(r[k]) for k in fields})

    if isinstance(path, (str, Path)):
        with open(path, "w", newline="") as fh:
            dump(fh)
    else:
        dump(path)


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


_INT_FIELDS = {"dims", "n_tasks", "repetition", "seed", "requested", "admitted_clean", "admitted_raw", "runs",
               "instance", "greedy_admitted", "exact_admitted"}


def read_csv(path: Union[str, Path]) -> list[dict]:
    """Parse a harness CSV back into typed rows."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for r in rows:
        typed = {}
        for k, v in r.items():
            if v == "" or k in ("accuracy_level", "latency_level", "algo", "status"):
                typed[k] = v
            elif k in _INT_FIELDS:
                typed[k] = int(v)
            else:
                typed[k] = float(v)
        out.append(typed)
    return out
