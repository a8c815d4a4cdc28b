"""Problem instances, solutions and constraint checking."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from .perf import (
    GRID_ATOL,
    AccuracyProfile,
    LatencyModel,
    ProfileRegistry,
    eval_accuracy,
    eval_latency,
    registry_from_dict,
)

TaskId = tuple[int, int, int]

# comparisons against thresholds absorb float noise at grid boundary points
LATENCY_RTOL = 1e-9
ACCURACY_ATOL = 1e-12


def meets_latency(latency: float, threshold: float) -> bool:
    return latency <= threshold * (1 + LATENCY_RTOL)


def meets_accuracy(accuracy: float, threshold: float) -> bool:
    return accuracy >= threshold - ACCURACY_ATOL


class Service(str, enum.Enum):
    DETECTION = "detection"
    SEGMENTATION = "segmentation"


class Reason(str, enum.Enum):
    ADMITTED = "admitted"
    ACCURACY_UNREACHABLE = "accuracy_unreachable"
    LATENCY_UNREACHABLE = "latency_unreachable"
    CAPACITY_EXHAUSTED = "capacity_exhausted"
    # requirement-agnostic baselines admit tasks that break (1d)/(1e)
    ADMITTED_VIOLATING = "admitted_violating"


class InstanceError(ValueError):
    """An instance or solution does not satisfy its structural contract."""


@dataclass(frozen=True)
class ApplicationClass:
    class_id: int
    service: Service
    accuracy_threshold: float
    latency_threshold: float
    profile_id: str
    latency_model_id: str
    target_labels: tuple[str, ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "service", Service(self.service))
        object.__setattr__(self, "target_labels", tuple(self.target_labels))


@dataclass(frozen=True)
class TaskSpec:
    task_id: TaskId
    fps: float
    base_bitrate: float

    def __post_init__(self):
        object.__setattr__(self, "task_id", tuple(int(v) for v in self.task_id))

    @property
    def class_id(self) -> int:
        return self.task_id[0]


@dataclass(frozen=True)
class ResourcePool:
    names: tuple[str, ...]
    capacities: tuple[int, ...]
    prices: tuple[float, ...]
    allocation_stride: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "capacities", tuple(self.capacities))
        object.__setattr__(self, "prices", tuple(float(p) for p in self.prices))
        stride = tuple(self.allocation_stride) or (1,) * len(self.names)
        object.__setattr__(self, "allocation_stride", stride)

    @property
    def m(self) -> int:
        return len(self.names)

    @classmethod
    def equal_priced(cls, names: Sequence[str], capacities: Sequence[int], total: Optional[float] = None,
                     stride: Sequence[int] = ()) -> "ResourcePool":
        """Prices ``p_k = C / S_k`` so that every type's full capacity costs ``C``.

        ``C`` defaults to the first capacity, which gives that type unit price.
        """
        c = float(capacities[0] if total is None else total)
        return cls(tuple(names), tuple(capacities), tuple(c / s for s in capacities), tuple(stride))


@dataclass(frozen=True)
class ProblemInstance:
    classes: tuple[ApplicationClass, ...]
    tasks: tuple[TaskSpec, ...]
    pool: ResourcePool
    profiles: ProfileRegistry = field(default_factory=ProfileRegistry)

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "tasks", tuple(self.tasks))

    def class_of(self, task: TaskSpec) -> ApplicationClass:
        for c in self.classes:
            if c.class_id == task.class_id:
                return c
        raise InstanceError(f"task {task.task_id} references unknown class {task.class_id}")

    def accuracy_profile(self, cls: ApplicationClass) -> AccuracyProfile:
        return self.profiles.accuracy[cls.profile_id]

    def latency_model(self, cls: ApplicationClass) -> LatencyModel:
        return self.profiles.latency[cls.latency_model_id]

    def task(self, task_id: TaskId) -> TaskSpec:
        for t in self.tasks:
            if t.task_id == tuple(task_id):
                return t
        raise KeyError(task_id)

    def sorted_tasks(self) -> list[TaskSpec]:
        return sorted(self.tasks, key=lambda t: t.task_id)

    def with_tasks(self, tasks: Iterable[TaskSpec]) -> "ProblemInstance":
        return ProblemInstance(self.classes, tuple(tasks), self.pool, self.profiles)

    def with_pool(self, pool: ResourcePool) -> "ProblemInstance":
        return ProblemInstance(self.classes, self.tasks, pool, self.profiles)


@dataclass(frozen=True)
class Allocation:
    admitted: bool
    slice: tuple[int, ...]
    compression: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "slice", tuple(int(v) for v in self.slice))


@dataclass(frozen=True)
class SlicingSolution:
    allocations: Mapping[TaskId, Allocation]
    objective: float
    occupied: tuple[int, ...]
    diagnostics: Mapping[TaskId, Reason]
    algorithm: str = ""

    @property
    def admitted(self) -> list[TaskId]:
        return sorted(t for t, a in self.allocations.items() if a.admitted)

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "objective": self.objective,
            "occupied": list(self.occupied),
            "allocations": [
                {
                    "task_id": list(tid),
                    "admitted": a.admitted,
                    "slice": list(a.slice),
                    "compression": a.compression,
                    "reason": self.diagnostics.get(tid, Reason.ADMITTED if a.admitted else None),
                }
                for tid, a in sorted(self.allocations.items())
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SlicingSolution":
        allocs, diags = {}, {}
        for row in d["allocations"]:
            tid = tuple(int(v) for v in row["task_id"])
            allocs[tid] = Allocation(bool(row["admitted"]), row["slice"], float(row["compression"]))
            if row.get("reason") is not None:
                diags[tid] = Reason(row["reason"])
        return cls(allocs, float(d["objective"]), tuple(d["occupied"]), diags, d.get("algorithm", ""))


def build_solution(inst: ProblemInstance, allocations: Mapping[TaskId, Allocation],
                   diagnostics: Mapping[TaskId, Reason], algorithm: str = "") -> SlicingSolution:
    occupied = [0] * inst.pool.m
    for a in allocations.values():
        if a.admitted:
            for k, v in enumerate(a.slice):
                occupied[k] += v
    allocs = {tid: allocations[tid] for tid in sorted(allocations)}
    diags = {tid: diagnostics[tid] for tid in sorted(diagnostics)}
    return SlicingSolution(allocs, objective_value(inst, allocs), tuple(occupied), diags, algorithm)


# ---------------------------------------------------------------------------
# checks


@dataclass(frozen=True)
class Violation:
    constraint: str
    message: str
    task_id: Optional[TaskId] = None

    def __str__(self) -> str:
        return self.message


def validate_instance(inst: ProblemInstance) -> list[Violation]:
    """Structural violations of the instance; empty when well formed."""
    out: list[Violation] = []
    pool = inst.pool
    m = len(pool.names)
    if m < 1:
        out.append(Violation("pool", "pool must define at least one resource type"))
    if not (len(pool.capacities) == len(pool.prices) == len(pool.allocation_stride) == m):
        out.append(Violation("pool", "pool names, capacities, prices and strides must have equal length"))
    for k, s in enumerate(pool.capacities):
        if not isinstance(s, int) or isinstance(s, bool) or s < 0:
            out.append(Violation("pool", f"capacity of resource {k} ({s!r}) must be a non-negative integer"))
    for k, p in enumerate(pool.prices):
        if not p > 0:
            out.append(Violation("pool", f"prices must be positive (resource {k}: {p!r})"))
    for k, st in enumerate(pool.allocation_stride):
        if not isinstance(st, int) or st < 1:
            out.append(Violation("pool", f"allocation stride of resource {k} ({st!r}) must be a positive integer"))

    class_ids = [c.class_id for c in inst.classes]
    for cid in sorted({c for c in class_ids if class_ids.count(c) > 1}):
        out.append(Violation("class", f"class {cid} defined more than once"))
    for c in inst.classes:
        if not 0 <= c.accuracy_threshold <= 1:
            out.append(Violation("class", f"class {c.class_id}: accuracy threshold {c.accuracy_threshold} outside [0, 1]"))
        if not c.latency_threshold > 0:
            out.append(Violation("class", f"class {c.class_id}: latency threshold {c.latency_threshold} must be positive"))
        if c.profile_id not in inst.profiles.accuracy:
            out.append(Violation("class", f"class {c.class_id}: unknown accuracy profile {c.profile_id!r}"))
        if c.latency_model_id not in inst.profiles.latency:
            out.append(Violation("class", f"class {c.class_id}: unknown latency model {c.latency_model_id!r}"))

    seen: set[TaskId] = set()
    known = set(class_ids)
    for t in inst.tasks:
        if len(t.task_id) != 3:
            out.append(Violation("task", f"task {t.task_id}: id must be a (c, d, t) triple", t.task_id))
        if t.task_id in seen:
            out.append(Violation("task", f"task {t.task_id}: duplicate id", t.task_id))
        seen.add(t.task_id)
        if t.class_id not in known:
            out.append(Violation("task", f"task {t.task_id} references class {t.class_id}, which is not defined", t.task_id))
        if not t.fps > 0:
            out.append(Violation("task", f"task {t.task_id}: fps must be positive", t.task_id))
        if not t.base_bitrate > 0:
            out.append(Violation("task", f"task {t.task_id}: base bitrate must be positive", t.task_id))
    return out


def _check_cover(inst: ProblemInstance, allocations: Mapping[TaskId, Allocation]) -> None:
    want = {t.task_id for t in inst.tasks}
    have = set(allocations)
    if want != have:
        missing = sorted(want - have)
        extra = sorted(have - want)
        raise InstanceError(f"solution does not cover the instance tasks: missing={missing} extra={extra}")


def objective_value(inst: ProblemInstance, sol: Union[SlicingSolution, Mapping[TaskId, Allocation]]) -> float:
    """Priced unused capacity summed over admitted tasks."""
    allocations = sol.allocations if isinstance(sol, SlicingSolution) else sol
    _check_cover(inst, allocations)
    pool = inst.pool
    total = 0.0
    for tid in sorted(allocations):
        a = allocations[tid]
        if a.admitted:
            total += math.fsum(p * (S - s) for p, S, s in zip(pool.prices, pool.capacities, a.slice))
    return total


def task_violations(inst: ProblemInstance, task: TaskSpec, alloc: Allocation) -> list[Violation]:
    """Per-task constraints (compression domain, accuracy, latency) of an admitted task."""
    tid = task.task_id
    cls = inst.class_of(task)
    prof = inst.accuracy_profile(cls)
    out = []
    if len(alloc.slice) != inst.pool.m:
        return [Violation("slice", f"task {tid}: slice has {len(alloc.slice)} entries, pool has {inst.pool.m}", tid)]
    for k, (v, S) in enumerate(zip(alloc.slice, inst.pool.capacities)):
        if not 0 <= v <= S:
            out.append(Violation("slice", f"task {tid}: slice[{k}]={v} outside [0, {S}]", tid))
    z = alloc.compression
    if not (0 < z <= 1 + GRID_ATOL) or not prof.on_grid(z):
        out.append(Violation("compression", f"task {tid}: compression {z} not on the grid of {prof.profile_id}", tid))
        return out
    acc = eval_accuracy(prof, z)
    if not meets_accuracy(acc, cls.accuracy_threshold):
        out.append(Violation("accuracy", f"task {tid}: accuracy {acc:.4g} < threshold {cls.accuracy_threshold:.4g}", tid))
    if any(v < 0 for v in alloc.slice):
        return out
    lat = eval_latency(inst.latency_model(cls), z, alloc.slice, task.fps, task.base_bitrate)
    if not meets_latency(lat, cls.latency_threshold):
        out.append(Violation("latency", f"task {tid}: latency {lat:.4g}s > threshold {cls.latency_threshold:.4g}s", tid))
    return out


def capacity_violations(inst: ProblemInstance, allocations: Mapping[TaskId, Allocation]) -> list[Violation]:
    out = []
    for k, S in enumerate(inst.pool.capacities):
        used = sum(a.slice[k] for a in allocations.values() if a.admitted and len(a.slice) > k)
        if used > S:
            out.append(Violation("capacity", f"resource {k} ({inst.pool.names[k]}) over capacity: {used} > {S}"))
    return out


def verify_feasible(inst: ProblemInstance, sol: SlicingSolution) -> list[Violation]:
    """All constraint violations of ``sol``; empty iff feasible."""
    _check_cover(inst, sol.allocations)
    out = capacity_violations(inst, sol.allocations)
    for task in inst.sorted_tasks():
        a = sol.allocations[task.task_id]
        if a.admitted:
            out += task_violations(inst, task, a)
    return out


def clean_admitted(inst: ProblemInstance, sol: SlicingSolution) -> list[TaskId]:
    """Admitted tasks that satisfy their own accuracy and latency constraints."""
    bad = {v.task_id for v in verify_feasible(inst, sol) if v.task_id is not None}
    return [t for t in sol.admitted if t not in bad]


# ---------------------------------------------------------------------------
# serialization


def task_key(tid: TaskId) -> str:
    return "-".join(str(v) for v in tid)


def parse_task_key(key: Union[str, Sequence[int]]) -> TaskId:
    if isinstance(key, str):
        parts = key.replace(",", "-").split("-")
        if len(parts) != 3:
            raise ValueError(f"task id {key!r} is not of the form c-d-t")
        return tuple(int(p) for p in parts)
    return tuple(int(v) for v in key)


def instance_to_dict(inst: ProblemInstance, embed_all_profiles: bool = False) -> dict:
    profiles = inst.profiles if embed_all_profiles else inst.profiles.subset(
        [c.profile_id for c in inst.classes], [c.latency_model_id for c in inst.classes]
    )
    return {
        "classes": [
            {
                "class_id": c.class_id,
                "name": c.name,
                "service": c.service.value,
                "target_labels": list(c.target_labels),
                "accuracy_threshold": c.accuracy_threshold,
                "latency_threshold": c.latency_threshold,
                "profile_id": c.profile_id,
                "latency_model_id": c.latency_model_id,
            }
            for c in inst.classes
        ],
        "tasks": [
            {"task_id": list(t.task_id), "fps": t.fps, "base_bitrate": t.base_bitrate} for t in inst.tasks
        ],
        "pool": {
            "names": list(inst.pool.names),
            "capacities": list(inst.pool.capacities),
            "prices": list(inst.pool.prices),
            "allocation_stride": list(inst.pool.allocation_stride),
        },
        "profiles": profiles.to_dict(),
    }


def instance_from_dict(d: dict, profiles: Optional[ProfileRegistry] = None, base_dir: Optional[Path] = None) -> ProblemInstance:
    """Parse an instance document.

    ``profiles`` may be an embedded registry object, a path (relative to
    ``base_dir``) or the string ``"bundled"``; an explicit ``profiles``
    argument is merged underneath whatever the document embeds.
    """
    raw = d.get("profiles")
    reg = profiles or ProfileRegistry()
    if isinstance(raw, dict):
        reg = reg.merged(registry_from_dict(raw, "instance.profiles"))
    elif raw == "bundled":
        from .fixtures import bundled_profiles

        reg = bundled_profiles().merged(reg)
    elif isinstance(raw, str):
        from .perf import load_profiles

        p = Path(raw)
        if base_dir is not None and not p.is_absolute():
            p = base_dir / p
        reg = load_profiles(p).merged(reg)
    classes = [
        ApplicationClass(
            class_id=int(c["class_id"]),
            service=c["service"],
            accuracy_threshold=float(c["accuracy_threshold"]),
            latency_threshold=float(c["latency_threshold"]),
            profile_id=c["profile_id"],
            latency_model_id=c["latency_model_id"],
            target_labels=tuple(c.get("target_labels", ())),
            name=c.get("name", ""),
        )
        for c in d["classes"]
    ]
    tasks = [TaskSpec(tuple(t["task_id"]), float(t["fps"]), float(t["base_bitrate"])) for t in d["tasks"]]
    p = d["pool"]
    pool = ResourcePool(
        tuple(p["names"]),
        tuple(int(v) if float(v).is_integer() else v for v in p["capacities"]),
        tuple(p["prices"]),
        tuple(p.get("allocation_stride") or ()),
    )
    return ProblemInstance(tuple(classes), tuple(tasks), pool, reg)


def load_instance(path: Union[str, Path], profiles: Optional[ProfileRegistry] = None) -> ProblemInstance:
    path = Path(path)
    return instance_from_dict(json.loads(path.read_text()), profiles, path.parent)


def save_instance(inst: ProblemInstance, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=1) + "\n")


def save_solution(sol: SlicingSolution, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(sol.to_dict(), indent=1) + "\n")


def load_solution(path: Union[str, Path]) -> SlicingSolution:
    return SlicingSolution.from_dict(json.loads(Path(path).read_text()))
