"""Brute-force exact solver for desk-size instances.

Enumerates every admission subset together with every latency-feasible
slice of each admitted task, pruning only partial assignments that already
exceed capacity. Compression is fixed at each task's minimal feasible factor
unless ``no_dominance`` asks for all accuracy-feasible factors.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

from .greedy import minimal_slices, optimal_compression, require_valid, solve_greedy
from .model import Allocation, ProblemInstance, Reason, SlicingSolution, TaskId, build_solution, meets_accuracy


class OracleRefusal(RuntimeError):
    """The instance is outside the oracle's declared limits."""


@dataclass(frozen=True)
class OracleLimits:
    max_tasks: int = 6
    max_candidates_per_task: int = 200
    time_budget: float = 60.0

    def __post_init__(self):
        if self.max_tasks <= 0 or self.max_candidates_per_task <= 0 or self.time_budget <= 0:
            raise ValueError("oracle limits must be positive")


def _task_options(inst: ProblemInstance, no_dominance: bool, limits: OracleLimits):
    options: dict[TaskId, list[tuple[tuple[int, ...], float]]] = {}
    reasons: dict[TaskId, Reason] = {}
    zstar: dict[TaskId, float] = {}
    for task in inst.sorted_tasks():
        tid = task.task_id
        cls = inst.class_of(task)
        prof = inst.accuracy_profile(cls)
        model = inst.latency_model(cls)
        z0 = optimal_compression(task, cls, prof)
        zstar[tid] = 1.0 if z0 is None else z0
        if z0 is None:
            reasons[tid] = Reason.ACCURACY_UNREACHABLE
            options[tid] = []
            continue
        if no_dominance:
            zs = [z for z, a in zip(prof.z_grid, prof.accuracy) if meets_accuracy(a, cls.accuracy_threshold)]
        else:
            zs = [z0]
        opts = []
        for z in zs:
            c = minimal_slices(model, z, task, cls.latency_threshold, inst.pool)
            opts += [(tuple(int(v) for v in row), z) for row in c if row.any()]
        opts.sort()
        if len(opts) > limits.max_candidates_per_task:
            raise OracleRefusal(
                f"task {tid} has {len(opts)} candidate slices, limit is {limits.max_candidates_per_task}"
            )
        if not opts:
            reasons[tid] = Reason.LATENCY_UNREACHABLE
        options[tid] = opts
    return options, reasons, zstar


def solve_exact(inst: ProblemInstance, limits: OracleLimits = OracleLimits(), no_dominance: bool = False) -> SlicingSolution:
    """Maximum-objective feasible solution by exhaustive enumeration.

    Ties go to the lexicographically smallest admission vector (tasks in id
    order), then to the smallest slices. Raises ``OracleRefusal`` instead of
    returning a truncated search.
    """
    require_valid(inst)
    tasks = inst.sorted_tasks()
    if len(tasks) > limits.max_tasks:
        raise OracleRefusal(f"instance has {len(tasks)} tasks, limit is {limits.max_tasks}")
    options, reasons, zstar = _task_options(inst, no_dominance, limits)
    pool = inst.pool
    caps = list(pool.capacities)
    m = pool.m
    ids = [t.task_id for t in tasks]
    opts = [options[t] for t in ids]
    values = [[sum(p * (S - s) for p, S, s in zip(pool.prices, caps, sl)) for sl, _ in o] for o in opts]

    deadline = time.monotonic() + limits.time_budget
    n = len(ids)
    best_val = 0.0
    best_pick: list[int] = [-1] * n
    pick = [-1] * n
    used = [0] * m
    nodes = 0

    def dfs(i: int, val: float) -> None:
        nonlocal best_val, best_pick, nodes
        nodes += 1
        if nodes & 0xFFF == 0 and time.monotonic() > deadline:
            raise OracleRefusal(f"time budget of {limits.time_budget}s exhausted")
        if i == n:
            if val > best_val + 1e-9 * max(1.0, abs(best_val)):
                best_val = val
                best_pick = pick.copy()
            return
        # reject first: enumeration follows increasing admission vectors
        pick[i] = -1
        dfs(i + 1, val)
        for j, (sl, _) in enumerate(opts[i]):
            if all(used[k] + sl[k] <= caps[k] for k in range(m)):
                for k in range(m):
                    used[k] += sl[k]
                pick[i] = j
                dfs(i + 1, val + values[i][j])
                for k in range(m):
                    used[k] -= sl[k]
        pick[i] = -1

    dfs(0, 0.0)

    allocations: dict[TaskId, Allocation] = {}
    for i, tid in enumerate(ids):
        j = best_pick[i]
        if j >= 0:
            sl, z = opts[i][j]
            allocations[tid] = Allocation(True, sl, z)
            reasons[tid] = Reason.ADMITTED
        else:
            allocations[tid] = Allocation(False, (0,) * m, zstar[tid])
            reasons.setdefault(tid, Reason.CAPACITY_EXHAUSTED)
    return build_solution(inst, allocations, reasons, "exact")


@dataclass(frozen=True)
class GapRecord:
    greedy_objective: float
    exact_objective: float
    ratio: float
    greedy_admitted: int
    exact_admitted: int


def gap_report(inst: ProblemInstance, limits: OracleLimits = OracleLimits(),
               greedy: Optional[SlicingSolution] = None) -> GapRecord:
    exact = solve_exact(inst, limits)
    greedy = greedy or solve_greedy(inst)
    if exact.objective == 0:
        ratio = 1.0 if greedy.objective == 0 else float("nan")
    else:
        ratio = greedy.objective / exact.objective
    return GapRecord(greedy.objective, exact.objective, ratio, len(greedy.admitted), len(exact.admitted))
