"""Discrete-time replay of slicing decisions.

Admitted tasks emit jobs at a fixed spacing of ``1/fps``; each job's latency
is the model value plus zero-mean Gaussian noise truncated so samples stay
non-negative. The dynamic runner re-solves the whole task set at each period
boundary and logs evictions of tasks that lose their admission.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy.stats import truncnorm

from .model import (
    InstanceError,
    ProblemInstance,
    SlicingSolution,
    TaskId,
    TaskSpec,
    Violation,
    meets_latency,
    parse_task_key,
    task_key,
    verify_feasible,
)
from .perf import eval_latency
from .solvers import SOLVER_NAMES, get_solver


@dataclass(frozen=True)
class TimelinePeriod:
    fps_overrides: tuple[tuple[TaskId, float], ...] = ()
    inactive: tuple[TaskId, ...] = ()

    def fps_map(self) -> dict[TaskId, float]:
        return dict(self.fps_overrides)


@dataclass(frozen=True)
class ScenarioTimeline:
    periods: tuple[TimelinePeriod, ...]
    period_length: float = 25.0
    solver: str = "semoran"

    def __post_init__(self):
        if not self.period_length > 0:
            raise ValueError("period_length must be positive")
        if not self.periods:
            raise ValueError("timeline needs at least one period")

    def check(self, inst: ProblemInstance) -> None:
        known = {t.task_id for t in inst.tasks}
        for i, p in enumerate(self.periods):
            for tid, fps in p.fps_overrides:
                if tid not in known:
                    raise InstanceError(f"period {i}: override for unknown task {task_key(tid)}")
                if not fps > 0:
                    raise InstanceError(f"period {i}: fps for task {task_key(tid)} must be positive")
            for tid in p.inactive:
                if tid not in known:
                    raise InstanceError(f"period {i}: inactive list names unknown task {task_key(tid)}")
        if self.solver not in SOLVER_NAMES:
            raise ValueError(f"unknown solver {self.solver!r}")

    def to_dict(self) -> dict:
        return {
            "period_length": self.period_length,
            "solver": self.solver,
            "periods": [
                {"fps_overrides": {task_key(t): f for t, f in p.fps_overrides},
                 "inactive": [task_key(t) for t in p.inactive]}
                for p in self.periods
            ],
        }


def timeline_from_dict(d: dict) -> ScenarioTimeline:
    periods = []
    for p in d["periods"]:
        over = tuple(sorted((parse_task_key(k), float(v)) for k, v in p.get("fps_overrides", {}).items()))
        inactive = tuple(sorted(parse_task_key(k) for k in p.get("inactive", ())))
        periods.append(TimelinePeriod(over, inactive))
    return ScenarioTimeline(tuple(periods), float(d.get("period_length", 25.0)), d.get("solver", "semoran"))


def load_timeline(path: Union[str, Path]) -> ScenarioTimeline:
    path = Path(path)
    try:
        return timeline_from_dict(json.loads(path.read_text()))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{path}: bad timeline ({exc})") from exc


@dataclass(frozen=True)
class LatencySample:
    period: int
    timestamp: float
    task_id: TaskId
    latency: float
    threshold: float


@dataclass(frozen=True)
class PeriodRecord:
    period: int
    start: float
    instance: ProblemInstance
    solution: SlicingSolution
    violations: tuple[Violation, ...]
    active: tuple[TaskId, ...]


@dataclass(frozen=True)
class EvictionEvent:
    period: int
    timestamp: float
    task_id: TaskId


@dataclass(frozen=True)
class SimReport:
    samples: tuple[LatencySample, ...]
    periods: tuple[PeriodRecord, ...]
    evictions: tuple[EvictionEvent, ...] = ()

    def latency_series(self, task_id: TaskId, period: Optional[int] = None) -> np.ndarray:
        return np.array([s.latency for s in self.samples
                         if s.task_id == task_id and (period is None or s.period == period)])

    def violation_fraction(self, task_id: TaskId, period: Optional[int] = None) -> float:
        hits = [not meets_latency(s.latency, s.threshold) for s in self.samples
                if s.task_id == task_id and (period is None or s.period == period)]
        return float(np.mean(hits)) if hits else 0.0

    def violation_stats(self) -> dict[TaskId, float]:
        tids = sorted({s.task_id for s in self.samples})
        return {t: self.violation_fraction(t) for t in tids}


def _sample_period(inst: ProblemInstance, sol: SlicingSolution, period: int, start: float, duration: float,
                   noise_sigma: float, seed: int) -> list[LatencySample]:
    out = []
    for tid in sol.admitted:
        task = inst.task(tid)
        cls = inst.class_of(task)
        alloc = sol.allocations[tid]
        base = eval_latency(inst.latency_model(cls), alloc.compression, alloc.slice, task.fps, task.base_bitrate)
        n = int(math.floor(task.fps * duration + 1e-9))
        times = start + np.arange(n) / task.fps
        if noise_sigma > 0 and math.isfinite(base) and n:
            # independent stream per (seed, period, task) so results do not depend on task order
            rng = np.random.default_rng(np.random.SeedSequence([seed, period, *tid]))
            eps = truncnorm.rvs(-base / noise_sigma, np.inf, loc=0.0, scale=noise_sigma, size=n, random_state=rng)
            lat = base + eps
        else:
            lat = np.full(n, base)
        out += [LatencySample(period, float(t), tid, float(v), cls.latency_threshold) for t, v in zip(times, lat)]
    return out


def run_static(inst: ProblemInstance, sol: SlicingSolution, duration: float, noise_sigma: float = 0.0,
               seed: int = 0) -> SimReport:
    """Replay one solution for ``duration`` seconds."""
    if not duration > 0:
        raise ValueError("duration must be positive")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be non-negative")
    viol = tuple(verify_feasible(inst, sol))
    samples = _sample_period(inst, sol, 0, 0.0, duration, noise_sigma, seed)
    rec = PeriodRecord(0, 0.0, inst, sol, viol, tuple(t.task_id for t in inst.sorted_tasks()))
    return SimReport(tuple(samples), (rec,), ())


def run_dynamic(inst: ProblemInstance, timeline: ScenarioTimeline, noise_sigma: float = 0.0, seed: int = 0,
                **solver_kw) -> SimReport:
    """Re-solve, reconfigure and replay at every period boundary.

    Overrides are relative to the base instance: a task not mentioned in a
    period runs at its instance fps. Running tasks get no incumbency
    advantage, so a task admitted earlier can be evicted.
    """
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be non-negative")
    timeline.check(inst)
    solve = get_solver(timeline.solver, **solver_kw)
    samples: list[LatencySample] = []
    records: list[PeriodRecord] = []
    evictions: list[EvictionEvent] = []
    prev: set[TaskId] = set()
    for i, period in enumerate(timeline.periods):
        start = i * timeline.period_length
        fps = period.fps_map()
        off = set(period.inactive)
        tasks = [TaskSpec(t.task_id, fps.get(t.task_id, t.fps), t.base_bitrate)
                 for t in inst.sorted_tasks() if t.task_id not in off]
        sub = inst.with_tasks(tasks)
        sol = solve(sub)
        now = set(sol.admitted)
        for tid in sorted(prev - now):
            if tid not in off:
                evictions.append(EvictionEvent(i, start, tid))
        prev = now
        records.append(PeriodRecord(i, start, sub, sol, tuple(verify_feasible(sub, sol)),
                                    tuple(t.task_id for t in tasks)))
        samples += _sample_period(sub, sol, i, start, timeline.period_length, noise_sigma, seed)
    return SimReport(tuple(samples), tuple(records), tuple(evictions))


SIM_FIELDS = ("period", "timestamp", "task_id", "latency", "threshold", "admitted", "rbg", "gpu_equivalents", "z")


def export_report(report: SimReport, path: Union[str, Path]) -> None:
    """Write the latency time series; unadmitted tasks get one row with blank latency."""
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SIM_FIELDS)
            by_period: dict[int, list[LatencySample]] = {}
            for s in report.samples:
                by_period.setdefault(s.period, []).append(s)
            for rec in report.periods:
                for tid in rec.active:
                    a = rec.solution.allocations[tid]
                    thr = rec.instance.class_of(rec.instance.task(tid)).latency_threshold
                    rbg = a.slice[0] if a.admitted else 0
                    gpu = a.slice[1] if a.admitted and len(a.slice) > 1 else 0
                    rows = [s for s in by_period.get(rec.period, []) if s.task_id == tid]
                    if not a.admitted:
                        w.writerow([rec.period, repr(rec.start), task_key(tid), "", repr(thr), 0, 0, 0,
                                    repr(a.compression)])
                    for s in rows:
                        w.writerow([rec.period, repr(s.timestamp), task_key(tid), repr(s.latency), repr(thr), 1,
                                    rbg, gpu, repr(a.compression)])
    except OSError as exc:
        raise OSError(f"cannot write simulation report to {path}: {exc.strerror or exc}") from exc


def read_report_csv(path: Union[str, Path]) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for r in rows:
        out.append({
            "period": int(r["period"]), "timestamp": float(r["timestamp"]), "task_id": parse_task_key(r["task_id"]),
            "latency": float(r["latency"]) if r["latency"] else None, "threshold": float(r["threshold"]),
            "admitted": bool(int(r["admitted"])), "rbg": int(r["rbg"]), "gpu_equivalents": int(r["gpu_equivalents"]),
            "z": float(r["z"]),
        })
    return out


def colosseum_timeline(solver: str = "semoran") -> ScenarioTimeline:
    """Four 25 s periods over the three testbed tasks; the second one forces an eviction."""
    ids = [(0, 0, 0), (1, 0, 0), (2, 0, 0)]
    plan = [(10, 10, 10), (15, 15, 15), (5, 5, 5), (15, 10, 5)]
    periods = tuple(TimelinePeriod(tuple(zip(ids, map(float, p)))) for p in plan)
    return ScenarioTimeline(periods, 25.0, solver)
