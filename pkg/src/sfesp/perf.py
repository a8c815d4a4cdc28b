"""Data-driven accuracy and latency functions.

Accuracy profiles are tabulated on a discrete grid of compression scaling
factors. Latency models are either parametric (one network term that scales
with the compressed bitrate plus hyperbolic compute terms) or an explicit
grid over ``(z, fps, s_1, ..., s_m)``.

Both kinds are evaluated pointwise (``eval_latency``) and over a whole
allocation grid at once (the ``grid`` method); the solvers rely on the latter.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

GRID_ATOL = 1e-9


class OffGridError(ValueError):
    """Raised when an accuracy profile is queried off its z grid."""


class ProfileError(ValueError):
    """Raised when a profile file cannot be loaded."""


@dataclass(frozen=True)
class AccuracyProfile:
    profile_id: str
    z_grid: tuple[float, ...]
    accuracy: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "z_grid", tuple(float(z) for z in self.z_grid))
        object.__setattr__(self, "accuracy", tuple(float(a) for a in self.accuracy))

    def index_of(self, z: float) -> int:
        for i, zg in enumerate(self.z_grid):
            if abs(zg - z) <= GRID_ATOL:
                return i
        raise OffGridError(f"off-grid compression factor {z!r} for profile {self.profile_id!r}")

    def on_grid(self, z: float) -> bool:
        return any(abs(zg - z) <= GRID_ATOL for zg in self.z_grid)

    @property
    def max_accuracy(self) -> float:
        return max(self.accuracy) if self.accuracy else 0.0

    def to_dict(self) -> dict:
        return {"id": self.profile_id, "z_grid": list(self.z_grid), "accuracy": list(self.accuracy)}


def eval_accuracy(profile: AccuracyProfile, z: float) -> float:
    """Tabulated accuracy at grid point ``z``; off-grid queries raise."""
    return profile.accuracy[profile.index_of(z)]


# ---------------------------------------------------------------------------
# latency models


def _fps_factor(table, fps: float) -> float:
    if not table:
        return 1.0
    xs = [p[0] for p in table]
    ys = [p[1] for p in table]
    return float(np.interp(fps, xs, ys))


@dataclass(frozen=True)
class ParametricLatency:
    """``alpha*z*b*g(fps)/s[net] + sum_k gamma_k/s[k] + c0``.

    ``g`` is piecewise linear through ``fps_table`` (clamped at the ends) and
    identically 1 when the table is empty. Every resource that appears in a
    term is required: a zero allocation there yields ``inf``.
    """

    model_id: str
    alpha: float
    network_index: int = 0
    compute: tuple[tuple[int, float], ...] = ()
    c0: float = 0.0
    fps_table: tuple[tuple[float, float], ...] = ()

    kind = "parametric"

    @property
    def required(self) -> frozenset[int]:
        return frozenset([self.network_index, *(k for k, _ in self.compute)])

    def fps_factor(self, fps: float) -> float:
        return _fps_factor(self.fps_table, fps)

    def __call__(self, z: float, s: Sequence[int], fps: float, b: float) -> float:
        if any(s[k] == 0 for k in self.required):
            return math.inf
        value = self.alpha * z * b * self.fps_factor(fps) / s[self.network_index]
        for k, gamma in self.compute:
            value += gamma / s[k]
        return value + self.c0

    def grid(self, z: float, axes: Sequence[np.ndarray], fps: float, b: float) -> np.ndarray:
        m = len(axes)
        shape = tuple(len(a) for a in axes)
        out = np.full(shape, self.c0, dtype=float)

        def term(k: int, coef: float) -> np.ndarray:
            a = np.asarray(axes[k], dtype=float)
            with np.errstate(divide="ignore"):
                t = np.where(a > 0, coef / np.where(a > 0, a, 1.0), np.inf)
            view = [1] * m
            view[k] = len(a)
            return t.reshape(view)

        out = out + term(self.network_index, self.alpha * z * b * self.fps_factor(fps))
        for k, gamma in self.compute:
            out = out + term(k, gamma)
        return out

    def to_dict(self) -> dict:
        return {
            "id": self.model_id,
            "kind": "parametric",
            "network": {"index": self.network_index, "alpha": self.alpha},
            "compute": [{"index": k, "gamma": g} for k, g in self.compute],
            "c0": self.c0,
            "fps_table": [list(p) for p in self.fps_table],
        }


@dataclass(frozen=True)
class TabulatedLatency:
    """Explicit latency grid indexed by ``(z, [fps,] s_1, ..., s_m)``.

    Lookup is conservative: ``z`` and ``fps`` round up to the next tabulated
    value, each ``s_k`` rounds down to the largest tabulated value not above
    it. Queries outside the table (z or fps above the last value, any s_k
    below the first value) are infeasible and return ``inf``.
    """

    model_id: str
    z_axis: tuple[float, ...]
    s_axes: tuple[tuple[int, ...], ...]
    values: np.ndarray = field(compare=False)
    fps_axis: tuple[float, ...] = ()

    kind = "tabulated"

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        vals = np.where(np.isnan(vals), np.inf, vals)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        expected = (len(self.z_axis),) + ((len(self.fps_axis),) if self.fps_axis else ()) + tuple(
            len(a) for a in self.s_axes
        )
        if vals.shape != expected:
            raise ProfileError(f"latency model {self.model_id!r}: table shape {vals.shape} != axes {expected}")

    @property
    def required(self) -> frozenset[int]:
        return frozenset(k for k, a in enumerate(self.s_axes) if a and a[0] > 0)

    def _lead_index(self, z: float, fps: float):
        zi = int(np.searchsorted(np.asarray(self.z_axis), z - GRID_ATOL, side="left"))
        if zi >= len(self.z_axis):
            return None
        if not self.fps_axis:
            return (zi,)
        fi = int(np.searchsorted(np.asarray(self.fps_axis), fps - GRID_ATOL, side="left"))
        if fi >= len(self.fps_axis):
            return None
        return (zi, fi)

    def __call__(self, z: float, s: Sequence[int], fps: float, b: float) -> float:
        lead = self._lead_index(z, fps)
        if lead is None:
            return math.inf
        idx = []
        for k, a in enumerate(self.s_axes):
            i = int(np.searchsorted(np.asarray(a), s[k], side="right")) - 1
            if i < 0:
                return math.inf
            idx.append(i)
        return float(self.values[lead + tuple(idx)])

    def grid(self, z: float, axes: Sequence[np.ndarray], fps: float, b: float) -> np.ndarray:
        shape = tuple(len(a) for a in axes)
        lead = self._lead_index(z, fps)
        if lead is None:
            return np.full(shape, np.inf)
        sub = self.values[lead]
        # pad with a leading inf slot so "below first value" maps to index 0
        padded = np.pad(sub, [(1, 0)] * sub.ndim, constant_values=np.inf)
        idx = [np.searchsorted(np.asarray(t), np.asarray(a), side="right") for t, a in zip(self.s_axes, axes)]
        return padded[np.ix_(*idx)]

    def to_dict(self) -> dict:
        vals = np.where(np.isinf(self.values), np.nan, self.values)
        return {
            "id": self.model_id,
            "kind": "tabulated",
            "z": list(self.z_axis),
            "fps": list(self.fps_axis),
            "s": [list(a) for a in self.s_axes],
            "latency": _nested(vals),
        }


def _nested(arr: np.ndarray):
    if arr.ndim == 0:
        v = float(arr)
        return None if math.isnan(v) else v
    return [_nested(a) for a in arr]


LatencyModel = Union[ParametricLatency, TabulatedLatency]


def eval_latency(model: LatencyModel, z: float, s: Sequence[int], fps: float, b: float) -> float:
    """Per-job latency in seconds, ``inf`` when a required resource is zero."""
    if any(v < 0 for v in s):
        raise ValueError(f"negative allocation {tuple(s)}")
    if not 0 < z <= 1 + GRID_ATOL:
        raise ValueError(f"compression factor {z!r} outside (0, 1]")
    if isinstance(model, TabulatedLatency) and len(s) != len(model.s_axes):
        raise ValueError(f"allocation has {len(s)} entries, model {model.model_id!r} expects {len(model.s_axes)}")
    if isinstance(model, ParametricLatency) and max(model.required) >= len(s):
        raise ValueError(f"allocation has {len(s)} entries, model {model.model_id!r} needs index {max(model.required)}")
    return model(z, tuple(int(v) for v in s), fps, b)


# ---------------------------------------------------------------------------
# validation


def validate_profile(obj: Union[AccuracyProfile, LatencyModel]) -> list[str]:
    """Monotonicity and domain violations; empty when the object is usable."""
    out: list[str] = []
    if isinstance(obj, AccuracyProfile):
        pid = obj.profile_id
        if len(obj.z_grid) != len(obj.accuracy):
            out.append(f"{pid}: z_grid and accuracy lengths differ")
            return out
        if not obj.z_grid:
            out.append(f"{pid}: empty grid")
        for i, z in enumerate(obj.z_grid):
            if not 0 < z <= 1:
                out.append(f"{pid}: z_grid[{i}]={z} outside (0, 1]")
        for i in range(1, len(obj.z_grid)):
            if obj.z_grid[i] <= obj.z_grid[i - 1]:
                out.append(f"{pid}: z_grid not strictly ascending at index {i}")
        for i, a in enumerate(obj.accuracy):
            if not 0 <= a <= 1:
                out.append(f"{pid}: accuracy[{i}]={a} outside [0, 1]")
        for i in range(1, len(obj.accuracy)):
            if obj.accuracy[i] < obj.accuracy[i - 1]:
                out.append(f"{pid}: accuracy decreasing at index {i}")
        return out

    if isinstance(obj, ParametricLatency):
        mid = obj.model_id
        if obj.alpha < 0:
            out.append(f"{mid}: latency decreasing in z (alpha < 0)")
        for k, g in obj.compute:
            if g < 0:
                out.append(f"{mid}: latency increasing in s[{k}] (gamma < 0)")
        if obj.c0 < 0:
            out.append(f"{mid}: negative fixed latency c0")
        for f, g in obj.fps_table:
            if g < 0:
                out.append(f"{mid}: negative fps factor at fps={f}")
        if obj.network_index < 0 or any(k < 0 for k, _ in obj.compute):
            out.append(f"{mid}: negative resource index")
        return out

    if isinstance(obj, TabulatedLatency):
        mid = obj.model_id
        axes = [("z", obj.z_axis)] + ([("fps", obj.fps_axis)] if obj.fps_axis else [])
        axes += [(f"s[{k}]", a) for k, a in enumerate(obj.s_axes)]
        for name, a in axes:
            if any(a[i] <= a[i - 1] for i in range(1, len(a))):
                out.append(f"{mid}: axis {name} not strictly ascending")
        if any(not 0 < z <= 1 for z in obj.z_axis):
            out.append(f"{mid}: z axis outside (0, 1]")
        vals = obj.values
        if np.any(vals < 0):
            out.append(f"{mid}: negative latency entries")
        lead = 2 if obj.fps_axis else 1
        if vals.shape[0] > 1:
            bad = np.argwhere(_decreasing(vals, 0))
            if bad.size:
                out.append(f"{mid}: latency decreasing in z at grid index {tuple(int(i) for i in bad[0])}")
        for k in range(len(obj.s_axes)):
            ax = lead + k
            if vals.shape[ax] > 1:
                bad = np.argwhere(_decreasing(-vals, ax))
                if bad.size:
                    out.append(f"{mid}: latency increasing in s[{k}] at grid index {tuple(int(i) for i in bad[0])}")
        return out

    raise TypeError(f"cannot validate {type(obj).__name__}")


def _decreasing(vals: np.ndarray, axis: int) -> np.ndarray:
    lo = np.take(vals, range(vals.shape[axis] - 1), axis=axis)
    hi = np.take(vals, range(1, vals.shape[axis]), axis=axis)
    return hi < lo


# ---------------------------------------------------------------------------
# registry and file format


@dataclass(frozen=True)
class ProfileRegistry:
    accuracy: dict[str, AccuracyProfile] = field(default_factory=dict)
    latency: dict[str, LatencyModel] = field(default_factory=dict)

    def subset(self, accuracy_ids: Iterable[str], latency_ids: Iterable[str]) -> "ProfileRegistry":
        return ProfileRegistry(
            {i: self.accuracy[i] for i in sorted(set(accuracy_ids)) if i in self.accuracy},
            {i: self.latency[i] for i in sorted(set(latency_ids)) if i in self.latency},
        )

    def merged(self, other: "ProfileRegistry") -> "ProfileRegistry":
        return ProfileRegistry({**self.accuracy, **other.accuracy}, {**self.latency, **other.latency})

    def to_dict(self) -> dict:
        return {
            "accuracy_profiles": [p.to_dict() for p in self.accuracy.values()],
            "latency_models": [m.to_dict() for m in self.latency.values()],
        }


def latency_from_dict(d: dict) -> LatencyModel:
    kind = d.get("kind")
    if kind == "parametric":
        net = d["network"]
        return ParametricLatency(
            model_id=d["id"],
            alpha=float(net["alpha"]),
            network_index=int(net.get("index", 0)),
            compute=tuple((int(c["index"]), float(c["gamma"])) for c in d.get("compute", [])),
            c0=float(d.get("c0", 0.0)),
            fps_table=tuple((float(f), float(g)) for f, g in d.get("fps_table") or []),
        )
    if kind == "tabulated":
        values = np.array(d["latency"], dtype=float)  # None -> nan -> inf
        return TabulatedLatency(
            model_id=d["id"],
            z_axis=tuple(float(z) for z in d["z"]),
            fps_axis=tuple(float(f) for f in d.get("fps") or []),
            s_axes=tuple(tuple(int(v) for v in a) for a in d["s"]),
            values=values,
        )
    raise ProfileError(f"latency model {d.get('id')!r}: unknown kind {kind!r}")


def registry_from_dict(data: dict, source: str = "<dict>") -> ProfileRegistry:
    acc: dict[str, AccuracyProfile] = {}
    lat: dict[str, LatencyModel] = {}
    problems: list[str] = []
    for i, d in enumerate(data.get("accuracy_profiles", [])):
        where = f"{source}: accuracy_profiles[{i}]"
        try:
            p = AccuracyProfile(d["id"], d["z_grid"], d["accuracy"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ProfileError(f"{where}: malformed entry ({exc})") from exc
        if p.profile_id in acc:
            raise ProfileError(f"{where}: duplicate profile id {p.profile_id!r}")
        problems += [f"{where}: {v}" for v in validate_profile(p)]
        acc[p.profile_id] = p
    for i, d in enumerate(data.get("latency_models", [])):
        where = f"{source}: latency_models[{i}]"
        try:
            m = latency_from_dict(d)
        except (KeyError, TypeError) as exc:
            raise ProfileError(f"{where}: malformed entry ({exc})") from exc
        except ProfileError as exc:
            raise ProfileError(f"{where}: {exc}") from exc
        if m.model_id in lat or m.model_id in acc:
            raise ProfileError(f"{where}: duplicate profile id {m.model_id!r}")
        problems += [f"{where}: {v}" for v in validate_profile(m)]
        lat[m.model_id] = m
    if problems:
        raise ProfileError("profile validation failed:\n  " + "\n  ".join(problems))
    return ProfileRegistry(acc, lat)


def load_profiles(path: Union[str, Path]) -> ProfileRegistry:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ProfileError(f"{path}: parse failure at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return registry_from_dict(data, str(path))


def export_accuracy_csv(registry: ProfileRegistry, path: Union[str, Path]) -> None:
    """Long-format ``profile_id,z,accuracy`` table for plotting."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["profile_id", "z", "accuracy"])
        for p in registry.accuracy.values():
            for z, a in zip(p.z_grid, p.accuracy):
                w.writerow([p.profile_id, repr(z), repr(a)])
