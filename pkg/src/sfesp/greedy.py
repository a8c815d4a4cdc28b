"""Greedy primal-gradient slicing.

Each task is compressed to the smallest grid factor that still meets its
class accuracy threshold. The loop then repeatedly scores every remaining
candidate task by the best primal gradient any latency-feasible slice can
reach in the residual capacity, and admits the top-scoring task.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .model import (
    Allocation,
    ApplicationClass,
    InstanceError,
    ProblemInstance,
    Reason,
    ResourcePool,
    SlicingSolution,
    TaskId,
    TaskSpec,
    build_solution,
    meets_accuracy,
    task_key,
    validate_instance,
)
from .perf import AccuracyProfile, LatencyModel

DEFAULT_CANDIDATE_BUDGET = 10**6
TIE_RTOL = 1e-12


class CandidateBudgetError(RuntimeError):
    """The allocation grid of a task is larger than the configured budget."""


@dataclass(frozen=True)
class GradientEvaluation:
    task_id: TaskId
    best_slice: tuple[int, ...]
    gradient: float


def optimal_compression(task: TaskSpec, cls: ApplicationClass, profile: AccuracyProfile) -> Optional[float]:
    """Smallest grid factor whose accuracy meets the class threshold, or None."""
    for z, a in zip(profile.z_grid, profile.accuracy):
        if meets_accuracy(a, cls.accuracy_threshold):
            return z
    return None


# ---------------------------------------------------------------------------
# allocation grid


def allocation_axes(pool: ResourcePool, limit: Optional[Sequence[int]] = None) -> list[np.ndarray]:
    limit = pool.capacities if limit is None else limit
    return [np.arange(0, max(int(u), 0) + 1, st, dtype=np.int64) for u, st in zip(limit, pool.allocation_stride)]


def grid_size(pool: ResourcePool, limit: Optional[Sequence[int]] = None) -> int:
    return math.prod(len(a) for a in allocation_axes(pool, limit))


def _check_budget(pool: ResourcePool, budget: int, limit=None) -> list[np.ndarray]:
    axes = allocation_axes(pool, limit)
    size = math.prod(len(a) for a in axes)
    if size > budget:
        raise CandidateBudgetError(f"allocation grid has {size} points, budget is {budget}")
    return axes


def feasible_mask(model: LatencyModel, z: float, task: TaskSpec, threshold: float, axes) -> np.ndarray:
    lat = model.grid(z, axes, task.fps, task.base_bitrate)
    return lat <= threshold * (1 + 1e-9)


def feasible_slices(model: LatencyModel, z: float, task: TaskSpec, threshold: float, pool: ResourcePool,
                    limit: Optional[Sequence[int]] = None, budget: int = DEFAULT_CANDIDATE_BUDGET) -> np.ndarray:
    """Every latency-feasible slice of the grid (rows in lexicographic order)."""
    axes = _check_budget(pool, budget, limit)
    mask = feasible_mask(model, z, task, threshold, axes)
    idx = np.argwhere(mask)
    return np.stack([axes[k][idx[:, k]] for k in range(len(axes))], axis=1) if idx.size else np.zeros((0, len(axes)), np.int64)


def minimal_slices(model: LatencyModel, z: float, task: TaskSpec, threshold: float, pool: ResourcePool,
                   budget: int = DEFAULT_CANDIDATE_BUDGET) -> np.ndarray:
    """Feasible slices with no feasible grid neighbour one stride below.

    This set contains every Pareto-minimal feasible slice. Any selection
    rule that strictly prefers a componentwise-smaller slice (primal
    gradient, unit count, priced cost) attains its optimum inside it, for any
    residual capacity box.
    """
    axes = _check_budget(pool, budget)
    mask = feasible_mask(model, z, task, threshold, axes)
    keep = mask.copy()
    for k in range(mask.ndim):
        below = np.zeros_like(mask)
        sl_dst = [slice(None)] * mask.ndim
        sl_src = [slice(None)] * mask.ndim
        sl_dst[k] = slice(1, None)
        sl_src[k] = slice(None, -1)
        below[tuple(sl_dst)] = mask[tuple(sl_src)]
        keep &= ~below
    idx = np.argwhere(keep)
    if not idx.size:
        return np.zeros((0, len(axes)), np.int64)
    return np.stack([axes[k][idx[:, k]] for k in range(len(axes))], axis=1)


# ---------------------------------------------------------------------------
# primal gradient


def primal_gradients(slices: np.ndarray, pool: ResourcePool, occupied: Sequence[int]) -> np.ndarray:
    """Vectorised primal gradient of each row of ``slices``."""
    s = np.asarray(slices, dtype=float)
    S = np.asarray(pool.capacities, dtype=float)
    p = np.asarray(pool.prices, dtype=float)
    o = np.asarray(occupied, dtype=float)
    inv_S = np.divide(1.0, S, out=np.zeros_like(S), where=S > 0)
    num = (S - s) @ p
    if not np.any(o):
        den = s @ inv_S
        scale = math.sqrt(len(S))
    else:
        den = s @ (o * inv_S)
        scale = math.sqrt(float(o @ o))
    with np.errstate(divide="ignore", invalid="ignore"):
        g = num * scale / den
    zero = den == 0
    g[zero] = np.where(num[zero] > 0, np.inf, 0.0)
    return g


def primal_gradient(s: Sequence[int], pool: ResourcePool, occupied: Sequence[int]) -> float:
    if len(s) != pool.m or len(occupied) != pool.m:
        raise ValueError("slice and occupation vectors must have one entry per resource type")
    if not any(s):
        raise ValueError("primal gradient of an all-zero slice is undefined")
    return float(primal_gradients(np.asarray([s]), pool, occupied)[0])


def _argbest(gradients: np.ndarray, slices: np.ndarray, prices: np.ndarray) -> int:
    """Index of the max-gradient row; ties go to lower priced cost, then lexicographic order."""
    best = gradients.max()
    if math.isinf(best):
        tied = np.flatnonzero(np.isinf(gradients))
    else:
        tied = np.flatnonzero(gradients >= best - TIE_RTOL * abs(best))
    if len(tied) == 1:
        return int(tied[0])
    cost = slices[tied] @ prices
    cmin = cost.min()
    tied = tied[cost <= cmin + TIE_RTOL * abs(cmin)]
    if len(tied) == 1:
        return int(tied[0])
    sub = slices[tied]
    order = np.lexsort(sub.T[::-1])
    return int(tied[order[0]])


def best_allocation(task: TaskSpec, z: float, pool: ResourcePool, occupied: Sequence[int],
                    remaining: Sequence[int], latency_model: LatencyModel, latency_threshold: float,
                    budget: int = DEFAULT_CANDIDATE_BUDGET) -> Optional[GradientEvaluation]:
    """Exhaustive search of the residual grid for the max-gradient feasible slice."""
    cands = feasible_slices(latency_model, z, task, latency_threshold, pool, remaining, budget)
    cands = cands[cands.any(axis=1)]
    if not len(cands):
        return None
    g = primal_gradients(cands, pool, occupied)
    i = _argbest(g, cands, np.asarray(pool.prices))
    return GradientEvaluation(task.task_id, tuple(int(v) for v in cands[i]), float(g[i]))


# ---------------------------------------------------------------------------
# solver


ProfileChooser = Callable[[ProblemInstance, ApplicationClass], AccuracyProfile]


def semantic_profile(inst: ProblemInstance, cls: ApplicationClass) -> AccuracyProfile:
    return inst.accuracy_profile(cls)


def require_valid(inst: ProblemInstance) -> None:
    problems = validate_instance(inst)
    if problems:
        raise InstanceError("invalid instance:\n  " + "\n  ".join(str(v) for v in problems))


def compression_plan(inst: ProblemInstance, choose: ProfileChooser = semantic_profile) -> dict[TaskId, Optional[float]]:
    plan = {}
    for task in inst.sorted_tasks():
        cls = inst.class_of(task)
        plan[task.task_id] = optimal_compression(task, cls, choose(inst, cls))
    return plan


def solve_greedy(inst: ProblemInstance, *, choose_profile: ProfileChooser = semantic_profile,
                 budget: int = DEFAULT_CANDIDATE_BUDGET, trace: Optional[list] = None,
                 algorithm: str = "semoran") -> SlicingSolution:
    """Greedy primal-gradient admission.

    ``choose_profile`` selects the accuracy profile used for the compression
    factor; the semantics-agnostic variant swaps in a catch-all profile.
    ``trace`` (a list) receives one dict per examined candidate and per
    admission.
    """
    require_valid(inst)
    pool = inst.pool
    m = pool.m
    prices = np.asarray(pool.prices)
    caps = np.asarray(pool.capacities, dtype=np.int64)

    allocations: dict[TaskId, Allocation] = {}
    reasons: dict[TaskId, Reason] = {}
    cand_slices: dict[TaskId, np.ndarray] = {}
    zstar: dict[TaskId, float] = {}

    for task in inst.sorted_tasks():
        tid = task.task_id
        cls = inst.class_of(task)
        z = optimal_compression(task, cls, choose_profile(inst, cls))
        allocations[tid] = Allocation(False, (0,) * m, 1.0 if z is None else z)
        if z is None:
            reasons[tid] = Reason.ACCURACY_UNREACHABLE
            continue
        zstar[tid] = z
        c = minimal_slices(inst.latency_model(cls), z, task, cls.latency_threshold, pool, budget)
        cand_slices[tid] = c[c.any(axis=1)]

    candidates = [tid for tid in sorted(cand_slices)]
    occupied = np.zeros(m, dtype=np.int64)
    iteration = 0
    while candidates:
        iteration += 1
        remaining = caps - occupied
        best: Optional[GradientEvaluation] = None
        survivors = []
        for tid in candidates:
            c = cand_slices[tid]
            fits = c[(c <= remaining).all(axis=1)]
            if not len(fits):
                reasons[tid] = Reason.LATENCY_UNREACHABLE if not len(c) else Reason.CAPACITY_EXHAUSTED
                if trace is not None:
                    trace.append({"iteration": iteration, "task": task_key(tid), "gradient": None, "slice": None})
                continue
            g = primal_gradients(fits, pool, occupied)
            i = _argbest(g, fits, prices)
            ev = GradientEvaluation(tid, tuple(int(v) for v in fits[i]), float(g[i]))
            if trace is not None:
                trace.append({"iteration": iteration, "task": task_key(tid),
                              "gradient": _json_float(ev.gradient), "slice": list(ev.best_slice)})
            survivors.append(tid)
            if best is None or _beats(ev.gradient, best.gradient):
                best = ev
        candidates = survivors
        if best is None:
            break
        allocations[best.task_id] = Allocation(True, best.best_slice, zstar[best.task_id])
        reasons[best.task_id] = Reason.ADMITTED
        occupied = occupied + np.asarray(best.best_slice, dtype=np.int64)
        candidates.remove(best.task_id)
        if trace is not None:
            trace.append({"iteration": iteration, "admit": task_key(best.task_id),
                          "gradient": _json_float(best.gradient), "slice": list(best.best_slice)})

    sol = build_solution(inst, allocations, reasons, algorithm)
    if trace is not None:
        trace.append({"iterations": iteration, "admitted": len(sol.admitted)})
    return sol


def _beats(g: float, incumbent: float) -> bool:
    # candidates are visited in task-id order, so an equal gradient keeps the earlier task
    if math.isinf(incumbent):
        return False
    if math.isinf(g):
        return True
    return g > incumbent + TIE_RTOL * abs(incumbent)


def _json_float(v: float):
    return "inf" if math.isinf(v) else v
