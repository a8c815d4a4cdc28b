"""Instance builders shared by the test modules."""

from __future__ import annotations

import numpy as np

from sfesp.fixtures import Z_GRID
from sfesp.model import ApplicationClass, ProblemInstance, ResourcePool, TaskSpec
from sfesp.perf import AccuracyProfile, ParametricLatency, ProfileRegistry, TabulatedLatency


def random_accuracy(rng: np.random.Generator, pid: str) -> AccuracyProfile:
    k = int(rng.integers(1, len(Z_GRID) + 1))
    zs = sorted(rng.choice(Z_GRID, size=k, replace=False).tolist())
    acc = np.sort(rng.uniform(0, 1, size=k))
    return AccuracyProfile(pid, tuple(zs), tuple(float(round(a, 4)) for a in acc))


def random_parametric(rng: np.random.Generator, mid: str, m: int) -> ParametricLatency:
    net = int(rng.integers(m))
    others = [k for k in range(m) if k != net]
    chosen = [k for k in others if rng.random() < 0.7]
    compute = tuple((k, float(round(rng.uniform(0.05, 1.0), 4))) for k in chosen)
    return ParametricLatency(mid, float(round(rng.uniform(0.1, 3.0), 4)), net, compute,
                             float(round(rng.uniform(0, 0.1), 4)))


def random_tabulated(rng: np.random.Generator, mid: str, caps) -> TabulatedLatency:
    """Additively separable monotone table over z x s_1 x ... x s_m."""
    z_axis = Z_GRID
    s_axes = tuple(tuple(range(1, c + 1)) for c in caps)
    vals = np.cumsum(rng.uniform(0, 0.1, len(z_axis)))
    vals = vals.reshape((-1,) + (1,) * len(caps))
    for k, c in enumerate(caps):
        dec = np.cumsum(rng.uniform(0, 0.3, c))[::-1]
        shape = [1] * (len(caps) + 1)
        shape[k + 1] = c
        vals = vals + dec.reshape(shape)
    return TabulatedLatency(mid, z_axis, s_axes, np.round(vals, 6))


def random_instance(seed: int, n_tasks: int | None = None, m: int | None = None, cap_max: int = 8,
                    equal_prices: bool | None = None) -> ProblemInstance:
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 4)) if m is None else m
    n_tasks = int(rng.integers(0, 7)) if n_tasks is None else n_tasks
    caps = tuple(int(c) for c in rng.integers(1, cap_max + 1, size=m))
    names = tuple(f"R{k}" for k in range(m))
    if equal_prices is None:
        equal_prices = bool(rng.random() < 0.5)
    if equal_prices:
        pool = ResourcePool.equal_priced(names, caps)
    else:
        pool = ResourcePool(names, caps, tuple(float(round(p, 3)) for p in rng.uniform(0.2, 5, size=m)))
    acc = {f"A{i}": random_accuracy(rng, f"A{i}") for i in range(int(rng.integers(1, 4)))}
    lat = {f"P{i}": random_parametric(rng, f"P{i}", m) for i in range(int(rng.integers(1, 3)))}
    if rng.random() < 0.4 and np.prod(caps) <= 512:
        lat["T0"] = random_tabulated(rng, "T0", caps)
    classes = []
    for c in range(int(rng.integers(1, 4))):
        classes.append(ApplicationClass(
            c, "detection" if rng.random() < 0.5 else "segmentation",
            float(round(rng.uniform(0, 0.9), 3)), float(round(rng.uniform(0.2, 2.0), 3)),
            str(rng.choice(sorted(acc))), str(rng.choice(sorted(lat))),
        ))
    tasks = []
    for i in range(n_tasks):
        c = int(rng.integers(len(classes)))
        tasks.append(TaskSpec((c, i, 0), float(round(rng.uniform(1, 20), 2)), float(round(rng.uniform(0.1, 2), 3))))
    return ProblemInstance(tuple(classes), tuple(tasks), pool, ProfileRegistry(acc, lat))


def knapsack_instance(weights, caps, prices) -> ProblemInstance:
    """Fixed z, one latency-feasible minimal slice per task (its weight vector).

    Each task gets a step latency table: fast iff every s_k >= w_k.
    """
    m = len(caps)
    prof = AccuracyProfile("KP", (1.0,), (1.0,))
    lat = {}
    classes = []
    tasks = []
    for i, w in enumerate(weights):
        grids = np.meshgrid(*[np.arange(c + 1) for c in caps], indexing="ij")
        ok = np.ones(grids[0].shape, bool)
        for k in range(m):
            ok &= grids[k] >= w[k]
        vals = np.where(ok, 0.1, 1.0)[None]
        mid = f"KP-{i}"
        lat[mid] = TabulatedLatency(mid, (1.0,), tuple(tuple(range(c + 1)) for c in caps), vals)
        classes.append(ApplicationClass(i, "detection", 0.5, 0.5, "KP", mid))
        tasks.append(TaskSpec((i, 0, 0), 10.0, 1.0))
    pool = ResourcePool(tuple(f"R{k}" for k in range(m)), tuple(caps), tuple(prices))
    return ProblemInstance(tuple(classes), tuple(tasks), pool, ProfileRegistry({"KP": prof}, lat))


def dkp_brute_force(weights, caps, prices) -> float:
    """0/1 multi-dimensional knapsack by enumeration; item value is sum_k p_k (S_k - w_k)."""
    import itertools

    best = 0.0
    for pick in itertools.product([0, 1], repeat=len(weights)):
        used = [sum(x * w[k] for x, w in zip(pick, weights)) for k in range(len(caps))]
        if all(u <= c for u, c in zip(used, caps)):
            val = sum(x * sum(p * (c - w[k]) for k, (p, c) in enumerate(zip(prices, caps)))
                      for x, w in zip(pick, weights))
            best = max(best, val)
    return best


def random_knapsack(rng: np.random.Generator, max_tasks: int = 7, max_m: int = 3):
    """Random integer weights (never all zero), capacities and integer prices."""
    m = int(rng.integers(1, max_m + 1))
    n = int(rng.integers(1, max_tasks + 1))
    caps = tuple(int(c) for c in rng.integers(2, 7, size=m))
    prices = tuple(float(p) for p in rng.integers(1, 6, size=m))
    weights = []
    for _ in range(n):
        w = tuple(int(rng.integers(0, c + 1)) for c in caps)
        weights.append(w if any(w) else (1,) + w[1:])
    return weights, caps, prices
