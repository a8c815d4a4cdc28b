"""Bundled synthetic fixtures.

The accuracy tables are shape-constrained stand-ins for measured detector
and segmenter curves: each catch-all profile lies pointwise below every
per-class profile of its dataset and saturates under the "high" threshold,
while every per-class profile reaches it somewhere on the grid. None of the
numbers here are measurements.

``build_registry`` is the source of truth; ``data/profiles.json`` is its
serialised form (regenerate with ``sfesp export-fixtures``).
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .model import ApplicationClass, ProblemInstance, ResourcePool, TaskSpec
from .perf import AccuracyProfile, ParametricLatency, ProfileRegistry, TabulatedLatency, registry_from_dict

Z_GRID = (0.04, 0.08, 0.10, 0.14, 0.18, 0.28, 0.47, 0.70, 1.0)

# accuracy at each Z_GRID point (mAP for COCO, mIoU for Cityscapes)
ACCURACY_TABLES = {
    "COCO-All":       (0.08, 0.15, 0.20, 0.24, 0.27, 0.31, 0.35, 0.38, 0.40),
    "COCO-Urban":     (0.10, 0.18, 0.23, 0.28, 0.33, 0.40, 0.48, 0.53, 0.57),
    "COCO-Bags":      (0.08, 0.16, 0.20, 0.25, 0.29, 0.36, 0.45, 0.51, 0.56),
    "COCO-Animals":   (0.12, 0.22, 0.26, 0.33, 0.41, 0.50, 0.57, 0.61, 0.64),
    "COCO-Person":    (0.15, 0.25, 0.29, 0.35, 0.42, 0.50, 0.56, 0.60, 0.62),
    "CS-All":         (0.20, 0.30, 0.34, 0.40, 0.45, 0.52, 0.58, 0.62, 0.65),
    "CS-Vehicles":    (0.25, 0.36, 0.40, 0.47, 0.53, 0.61, 0.68, 0.72, 0.75),
    "CS-Objects":     (0.21, 0.31, 0.35, 0.42, 0.49, 0.57, 0.64, 0.68, 0.71),
    "CS-Flat":        (0.45, 0.58, 0.64, 0.71, 0.76, 0.82, 0.87, 0.90, 0.92),
    "CS-Person":      (0.24, 0.35, 0.39, 0.46, 0.52, 0.60, 0.67, 0.71, 0.74),
}

DEMO_PERSON = AccuracyProfile(
    "DEMO-Person", (0.04, 0.08, 0.14, 0.18, 0.28, 0.47, 1.0), (0.15, 0.25, 0.35, 0.42, 0.50, 0.56, 0.62)
)


@dataclass(frozen=True)
class Application:
    name: str
    service: str
    profile_id: str
    labels: tuple[str, ...]


APPLICATIONS = (
    Application("COCO All", "detection", "COCO-All", ("all-80",)),
    Application("COCO Urban", "detection", "COCO-Urban",
                ("bicycle", "car", "motorcycle", "bus", "truck", "traffic light", "stop sign", "person")),
    Application("COCO Bags", "detection", "COCO-Bags", ("handbag", "backpack", "suitcase")),
    Application("COCO Animals", "detection", "COCO-Animals",
                ("bird", "cat", "dog", "horse", "sheep", "cow", "elephant", "bear", "zebra", "giraffe")),
    Application("COCO Person", "detection", "COCO-Person", ("person",)),
    Application("Cityscapes All", "segmentation", "CS-All", ("all-19",)),
    Application("Cityscapes Vehicles", "segmentation", "CS-Vehicles",
                ("car", "truck", "bus", "train", "motorcycle", "bicycle")),
    Application("Cityscapes Objects", "segmentation", "CS-Objects", ("pole", "traffic light", "traffic sign")),
    Application("Cityscapes Flat", "segmentation", "CS-Flat", ("road", "sidewalk")),
    Application("Cityscapes Person", "segmentation", "CS-Person", ("person",)),
)

# resource presets: the 2-type pool mirrors the testbed (15 RBGs, 20 GPUs);
# the CPU/RAM capacities of the 4-type pool are fixture choices
POOL_PRESETS = {
    2: (("RBG", "GPU"), (15, 20)),
    4: (("RBG", "GPU", "CPU", "RAM"), (15, 20, 16, 16)),
}

DEFAULT_BITRATE = 0.8  # megabits per job, ~100 KB images

# per-job latency = alpha*z*b/s_RBG + sum gamma_k/s_k + c0
LATENCY_PARAMS = {
    "DET-2D": dict(alpha=2.5, compute=((1, 0.60),), c0=0.05),
    "SEG-2D": dict(alpha=2.5, compute=((1, 0.45),), c0=0.05),
    "DET-4D": dict(alpha=2.5, compute=((1, 0.40), (2, 0.15), (3, 0.15)), c0=0.05),
    "SEG-4D": dict(alpha=2.5, compute=((1, 0.30), (2, 0.12), (3, 0.12)), c0=0.05),
}

# two-resource model with exactly two ways to reach 0.4 s at z=1: (6, 3) and (10, 2)
L_FLEX = ParametricLatency("L-FLEX", alpha=4.0 / 3.0, network_index=0, compute=((1, 8.0 / 15.0),), c0=0.0)


def latency_model_id(service: str, dims: int) -> str:
    return f"{'DET' if service == 'detection' else 'SEG'}-{dims}D"


# ---------------------------------------------------------------------------
# testbed-style scenario

COLOSSEUM_FPS = (5.0, 10.0, 15.0, 20.0)
COLOSSEUM_C0 = 0.05
# GPU-side latency for 1..20 GPUs: batching gains flatten after a few GPUs
COLOSSEUM_GPU = (0.324, 0.31, 0.30, 0.29, 0.28, 0.275, 0.272, 0.27, 0.268, 0.266,
                 0.265, 0.264, 0.263, 0.262, 0.262, 0.261, 0.261, 0.260, 0.260, 0.260)
COLOSSEUM_ALPHA = 4.464
COLOSSEUM_LATENCY = 0.5
COLOSSEUM_APPS = (
    # name, accuracy profile, accuracy threshold, stream size (Mb/job)
    ("Bags", "COCO-Bags", 0.35, 0.496),
    ("Flat", "CS-Flat", 0.70, 0.56),
    ("Animals", "COCO-Animals", 0.50, 0.80),
)


def colosseum_latency(model_id: str, stream_mb: float) -> TabulatedLatency:
    """Tabulated RBG x GPU latency for one testbed application.

    Network term ``alpha*z*stream*(fps/10)/s_RBG`` (the stream size is baked
    into the table); the GPU term follows a measured-style table rather
    than a hyperbola.
    """
    rbg = np.arange(1, 16)
    gpu = np.arange(1, 21)
    vals = np.empty((len(Z_GRID), len(COLOSSEUM_FPS), len(rbg), len(gpu)))
    for i, z in enumerate(Z_GRID):
        for j, f in enumerate(COLOSSEUM_FPS):
            net = COLOSSEUM_ALPHA * z * stream_mb * (f / 10.0) / rbg
            vals[i, j] = np.round(net[:, None] + np.asarray(COLOSSEUM_GPU)[None, :] + COLOSSEUM_C0, 6)
    return TabulatedLatency(model_id, Z_GRID, (tuple(int(v) for v in rbg), tuple(int(v) for v in gpu)),
                            vals, COLOSSEUM_FPS)


def _colosseum_models() -> list[TabulatedLatency]:
    return [colosseum_latency(f"COL-{name}", b) for name, _, _, b in COLOSSEUM_APPS]


def build_registry() -> ProfileRegistry:
    acc = {pid: AccuracyProfile(pid, Z_GRID, vals) for pid, vals in ACCURACY_TABLES.items()}
    acc[DEMO_PERSON.profile_id] = DEMO_PERSON
    lat = {mid: ParametricLatency(mid, **params) for mid, params in LATENCY_PARAMS.items()}
    lat[L_FLEX.model_id] = L_FLEX
    for col in _colosseum_models():
        lat[col.model_id] = col
    return ProfileRegistry(acc, lat)


def bundled_path() -> Path:
    return Path(str(resources.files("sfesp") / "data" / "profiles.json"))


@functools.lru_cache(maxsize=1)
def bundled_profiles() -> ProfileRegistry:
    """The registry shipped in ``data/profiles.json`` (validated on load)."""
    data = json.loads(resources.files("sfesp").joinpath("data/profiles.json").read_text())
    return registry_from_dict(data, "bundled profiles.json")


def write_bundled(path: Path) -> None:
    path.write_text(json.dumps(build_registry().to_dict()) + "\n")


# ---------------------------------------------------------------------------
# canned instances


def flex_example(prices: tuple[float, float] | None = None, n_tasks: int = 2) -> ProblemInstance:
    """Two identical 0.4 s tasks on a 25 RBG / 4 GPU pool with the L-FLEX model."""
    pool = ResourcePool.equal_priced(("RBG", "GPU"), (25, 4))
    if prices is not None:
        pool = ResourcePool(pool.names, pool.capacities, prices)
    prof = AccuracyProfile("FLEX-ANY", (1.0,), (1.0,))
    reg = ProfileRegistry({prof.profile_id: prof}, {L_FLEX.model_id: L_FLEX})
    cls = ApplicationClass(0, "detection", 0.0, 0.4, prof.profile_id, L_FLEX.model_id, ("person",), "flex")
    tasks = tuple(TaskSpec((0, 0, t), 10.0, 1.0) for t in range(n_tasks))
    return ProblemInstance((cls,), tasks, pool, reg)


def colosseum_instance() -> ProblemInstance:
    """Three single-task slices sharing the 15 RBG / 20 GPU testbed pool."""
    reg = build_registry()
    pool = ResourcePool.equal_priced(*POOL_PRESETS[2])
    classes, tasks = [], []
    for c, (name, pid, acc, b) in enumerate(COLOSSEUM_APPS):
        service = "segmentation" if pid.startswith("CS") else "detection"
        classes.append(ApplicationClass(c, service, acc, COLOSSEUM_LATENCY, pid, f"COL-{name}", (), name))
        tasks.append(TaskSpec((c, 0, 0), 10.0, b))
    used = reg.subset([c.profile_id for c in classes] + ["COCO-All", "CS-All"], [c.latency_model_id for c in classes])
    return ProblemInstance(tuple(classes), tuple(tasks), pool, used)
