"""Comparison algorithms.

All of them reuse the same instance model and perf functions as the greedy
solver, so measured differences come only from how compression and slices
are chosen:

* ``minres-sem``: semantic compression, fewest total units, first fit.
* ``sl-edge``: like ``minres-sem`` but blind to semantics (the per-service
  catch-all profile decides compression).
* ``flexres-nsem``: the greedy primal-gradient solver with catch-all profiles.
* ``highcomp``: fixed aggressive compression, fewest units, first fit.
* ``highres``: no compression and a fixed share of every resource.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .greedy import (
    DEFAULT_CANDIDATE_BUDGET,
    minimal_slices,
    optimal_compression,
    require_valid,
    solve_greedy,
)
from .model import (
    Allocation,
    ApplicationClass,
    InstanceError,
    ProblemInstance,
    Reason,
    SlicingSolution,
    TaskId,
    TaskSpec,
    build_solution,
    meets_accuracy,
    meets_latency,
)
from .perf import AccuracyProfile, eval_accuracy, eval_latency

DEFAULT_ALL_PROFILES = {"detection": "COCO-All", "segmentation": "CS-All"}


@dataclass(frozen=True)
class BaselineConfig:
    highcomp_z: float = 0.1
    highres_fraction: float = 0.2
    # service -> catch-all profile used by the semantics-agnostic baselines
    all_profile_id: dict = field(default_factory=lambda: dict(DEFAULT_ALL_PROFILES))

    def __post_init__(self):
        if not 0 < self.highcomp_z <= 1:
            raise ValueError("highcomp_z must lie in (0, 1]")
        if not 0 < self.highres_fraction <= 1:
            raise ValueError("highres_fraction must lie in (0, 1]")


def all_profile_chooser(cfg: BaselineConfig) -> Callable[[ProblemInstance, ApplicationClass], AccuracyProfile]:
    def choose(inst: ProblemInstance, cls: ApplicationClass) -> AccuracyProfile:
        pid = cfg.all_profile_id.get(cls.service.value) if isinstance(cfg.all_profile_id, dict) else cfg.all_profile_id
        if pid is None or pid not in inst.profiles.accuracy:
            raise InstanceError(f"no catch-all accuracy profile loaded for service {cls.service.value!r} ({pid!r})")
        return inst.profiles.accuracy[pid]

    return choose


def min_units_slice(inst: ProblemInstance, task: TaskSpec, cls: ApplicationClass, z: float,
                    budget: int = DEFAULT_CANDIDATE_BUDGET) -> Optional[tuple[int, ...]]:
    """Latency-feasible slice with the fewest total units over the full pool."""
    cands = minimal_slices(inst.latency_model(cls), z, task, cls.latency_threshold, inst.pool, budget)
    cands = cands[cands.any(axis=1)]
    if not len(cands):
        return None
    units = cands.sum(axis=1)
    tied = cands[units == units.min()]
    return tuple(int(v) for v in tied[np.lexsort(tied.T[::-1])[0]])


def _first_fit(inst: ProblemInstance, algorithm: str,
               plan: Callable[[TaskSpec, ApplicationClass], tuple[Optional[float], Optional[tuple[int, ...]], Reason]],
               ) -> SlicingSolution:
    """Admit tasks in ascending id order while their planned slice fits."""
    require_valid(inst)
    m = inst.pool.m
    remaining = list(inst.pool.capacities)
    allocations: dict[TaskId, Allocation] = {}
    reasons: dict[TaskId, Reason] = {}
    for task in inst.sorted_tasks():
        cls = inst.class_of(task)
        z, s, reason = plan(task, cls)
        z_out = 1.0 if z is None else z
        if s is None:
            allocations[task.task_id] = Allocation(False, (0,) * m, z_out)
            reasons[task.task_id] = reason
            continue
        if all(v <= r for v, r in zip(s, remaining)):
            remaining = [r - v for r, v in zip(remaining, s)]
            allocations[task.task_id] = Allocation(True, s, z_out)
            reasons[task.task_id] = reason
        else:
            allocations[task.task_id] = Allocation(False, (0,) * m, z_out)
            reasons[task.task_id] = Reason.CAPACITY_EXHAUSTED
    return build_solution(inst, allocations, reasons, algorithm)


def _min_units_plan(choose: Callable[[ProblemInstance, ApplicationClass], AccuracyProfile], inst: ProblemInstance):
    def plan(task, cls):
        z = optimal_compression(task, cls, choose(inst, cls))
        if z is None:
            return None, None, Reason.ACCURACY_UNREACHABLE
        s = min_units_slice(inst, task, cls, z)
        if s is None:
            return z, None, Reason.LATENCY_UNREACHABLE
        return z, s, Reason.ADMITTED

    return plan


def solve_minres_sem(inst: ProblemInstance) -> SlicingSolution:
    return _first_fit(inst, "minres-sem", _min_units_plan(lambda i, c: i.accuracy_profile(c), inst))


def solve_sl_edge(inst: ProblemInstance, cfg: BaselineConfig = BaselineConfig()) -> SlicingSolution:
    return _first_fit(inst, "sl-edge", _min_units_plan(all_profile_chooser(cfg), inst))


def solve_flexres_nsem(inst: ProblemInstance, cfg: BaselineConfig = BaselineConfig()) -> SlicingSolution:
    return solve_greedy(inst, choose_profile=all_profile_chooser(cfg), algorithm="flexres-nsem")


def solve_highcomp(inst: ProblemInstance, cfg: BaselineConfig = BaselineConfig()) -> SlicingSolution:
    z = cfg.highcomp_z

    def plan(task, cls):
        prof = inst.accuracy_profile(cls)
        if not prof.on_grid(z):
            raise InstanceError(f"highcomp factor {z} is not on the grid of profile {prof.profile_id!r}")
        z_grid = prof.z_grid[prof.index_of(z)]
        s = min_units_slice(inst, task, cls, z_grid)
        if s is None:
            return z_grid, None, Reason.LATENCY_UNREACHABLE
        ok = meets_accuracy(eval_accuracy(prof, z_grid), cls.accuracy_threshold)
        return z_grid, s, Reason.ADMITTED if ok else Reason.ADMITTED_VIOLATING

    return _first_fit(inst, "highcomp", plan)


def solve_highres(inst: ProblemInstance, cfg: BaselineConfig = BaselineConfig()) -> SlicingSolution:
    share = tuple(int(math.floor(cfg.highres_fraction * S + 1e-9)) for S in inst.pool.capacities)

    def plan(task, cls):
        prof = inst.accuracy_profile(cls)
        z = 1.0
        lat = eval_latency(inst.latency_model(cls), z, share, task.fps, task.base_bitrate)
        if math.isinf(lat) or not any(share):
            return z, None, Reason.LATENCY_UNREACHABLE
        ok = meets_latency(lat, cls.latency_threshold)
        if prof.on_grid(z):
            ok = ok and meets_accuracy(eval_accuracy(prof, z), cls.accuracy_threshold)
        else:
            ok = False
        return z, share, Reason.ADMITTED if ok else Reason.ADMITTED_VIOLATING

    return _first_fit(inst, "highres", plan)
