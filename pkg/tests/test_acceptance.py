"""Acceptance criteria AC-1 .. AC-8.

Each test records a ``criterion`` and a ``detail`` property before asserting;
``conftest.py`` prints one pass/fail line per criterion at the end of the run.
"""

import collections
import time

import numpy as np
import pytest

from sfesp.baselines import min_units_slice
from sfesp.exact import OracleLimits, solve_exact
from sfesp.fixtures import build_registry, colosseum_instance, flex_example
from sfesp.greedy import solve_greedy
from sfesp.harness import (
    ExperimentGrid,
    GridPoint,
    gap_summary,
    generate_gap_instance,
    generate_instance,
    run_comparison,
    run_gap_study,
    summarize,
)
from sfesp.model import capacity_violations, verify_feasible
from sfesp.sim import colosseum_timeline, run_dynamic
from sfesp.solvers import get_solver

import test_properties
from support import dkp_brute_force, knapsack_instance, random_instance, random_knapsack

pytestmark = pytest.mark.acceptance

CLEAN_SOLVERS = ("semoran", "minres-sem", "sl-edge", "flexres-nsem")


def test_ac1_feasibility_suite(record_property):
    t0 = time.perf_counter()
    reg = build_registry()
    rng = np.random.default_rng(2024)
    solvers = {a: get_solver(a) for a in CLEAN_SOLVERS + ("highcomp", "highres", "exact")}
    failures, counts = [], collections.Counter()
    # grid instances cover N up to 50 and both pool presets
    for _ in range(800):
        point = GridPoint(int(rng.integers(0, 51)), str(rng.choice(["low", "medium", "high"])),
                          str(rng.choice(["low", "high"])), int(rng.choice([2, 4])))
        inst = generate_instance(point, int(rng.integers(2**31)), registry=reg)
        counts[f"m={point.dims}"] += 1
        for a in CLEAN_SOLVERS:
            if verify_feasible(inst, solvers[a](inst)):
                failures.append((a, point))
        for a in ("highcomp", "highres"):
            if capacity_violations(inst, solvers[a](inst).allocations):
                failures.append((a, point))
    # small mixed instances where the exact oracle applies as well
    for i in range(200):
        inst = generate_gap_instance(int(rng.integers(1, 7)), i, reg)
        counts["small"] += 1
        for a in CLEAN_SOLVERS + ("exact",):
            if verify_feasible(inst, solvers[a](inst)):
                failures.append((a, i))
    elapsed = time.perf_counter() - t0
    record_property("criterion", "AC-1 feasibility suite")
    record_property("detail", f"{sum(counts.values())} instances {dict(counts)}, {len(failures)} failures, "
                              f"{elapsed:.0f}s")
    assert sum(counts.values()) >= 1000
    assert failures == []
    assert elapsed <= 300


def test_ac2_knapsack_reduction(record_property):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    mismatches = 0
    sizes = collections.Counter()
    for _ in range(150):
        weights, caps, prices = random_knapsack(rng, max_tasks=10, max_m=3)
        sizes[len(weights)] += 1
        sol = solve_exact(knapsack_instance(weights, caps, prices), OracleLimits(max_tasks=10))
        mismatches += sol.objective != dkp_brute_force(weights, caps, prices)
    elapsed = time.perf_counter() - t0
    record_property("criterion", "AC-2 knapsack reduction")
    record_property("detail", f"150 instances, up to {max(sizes)} tasks, {mismatches} mismatches, {elapsed:.1f}s")
    assert mismatches == 0
    assert elapsed <= 60


def test_ac3_greedy_gap(record_property):
    t0 = time.perf_counter()
    violations = 0
    n = 0
    for seed in range(300):
        inst = random_instance(seed)
        n += 1
        violations += solve_greedy(inst).objective > solve_exact(inst).objective
    rows = run_gap_study([5], 100, seed=0)
    for r in rows:
        violations += r["status"] == "ok" and r["greedy_objective"] > r["exact_objective"]
    s = gap_summary(rows)
    elapsed = time.perf_counter() - t0
    record_property("criterion", "AC-3 greedy gap")
    record_property("detail", f"{n + len(rows)} instances, {violations} greedy>exact; fixture family "
                              f"mean={s['mean_ratio']:.4f} min={s['min_ratio']:.3f} "
                              f"optimal={s['optimal_fraction']:.2f} skipped={s['skipped']}, {elapsed:.1f}s")
    assert violations == 0
    assert s["instances"] >= 100 and s["skipped"] == 0
    assert s["mean_ratio"] >= 0.90
    assert elapsed <= 600


def test_ac4_flexibility_example(record_property):
    t0 = time.perf_counter()
    inst = flex_example()
    g = solve_greedy(inst)
    mr = get_solver("minres-sem")(inst)
    elapsed = time.perf_counter() - t0
    slices = [g.allocations[t].slice for t in g.admitted]
    record_property("criterion", "AC-4 flexibility example")
    record_property("detail", f"pool={inst.pool.capacities} prices={inst.pool.prices} greedy={slices} "
                              f"minres={[mr.allocations[t].slice for t in mr.admitted]}")
    assert inst.pool.capacities == (25, 4) and inst.pool.prices == (1.0, 6.25)
    assert len(g.admitted) == 2 and slices == [(10, 2), (10, 2)]
    assert len(mr.admitted) == 1 and mr.allocations[mr.admitted[0]].slice == (5, 4)
    assert verify_feasible(inst, g) == [] and verify_feasible(inst, mr) == []
    assert elapsed < 1.0


def test_ac5_semantic_high_threshold(record_property):
    t0 = time.perf_counter()
    grid = ExperimentGrid(accuracy_levels=("high",), repetitions=3)
    rows = run_comparison(grid, ["semoran", "minres-sem", "sl-edge", "flexres-nsem", "highcomp", "highres"],
                          record_time=False)
    by_algo = collections.defaultdict(list)
    for r in rows:
        by_algo[r["algo"]].append(r)
    elapsed = time.perf_counter() - t0
    totals = {a: (sum(r["admitted_clean"] for r in rs), sum(r["admitted_raw"] for r in rs))
              for a, rs in sorted(by_algo.items())}
    record_property("criterion", "AC-5 semantic high-threshold regime")
    record_property("detail", f"clean/raw totals over {len(rows) // 6} runs: {totals}, {elapsed:.1f}s")
    for a in ("semoran", "minres-sem"):
        assert all(r["admitted_clean"] > 0 for r in by_algo[a])
    for a in ("sl-edge", "flexres-nsem"):
        assert all(r["admitted_raw"] == 0 for r in by_algo[a])
    for a in ("highcomp", "highres"):
        assert all(r["admitted_clean"] == 0 for r in by_algo[a])
        assert sum(r["admitted_raw"] for r in by_algo[a]) > 0
    assert elapsed < 60


def test_ac6_flexibility_dominance(record_property):
    t0 = time.perf_counter()
    grid = ExperimentGrid(resource_dims=(4,), repetitions=10)
    summ = summarize(run_comparison(grid, ["semoran", "minres-sem", "flexres-nsem"], record_time=False))
    cells = collections.defaultdict(dict)
    for s in summ:
        cells[(s["n_tasks"], s["accuracy_level"], s["latency_level"])][s["algo"]] = s["admitted_clean_mean"]
    weak = [c for c, v in cells.items() if v["semoran"] < max(v["minres-sem"], v["flexres-nsem"])]
    strict = [c for c, v in cells.items() if c[0] >= 40 and v["semoran"] > max(v["minres-sem"], v["flexres-nsem"])]
    elapsed = time.perf_counter() - t0
    record_property("criterion", "AC-6 flexibility dominance at m=4")
    record_property("detail", f"{len(cells)} cells, {len(weak)} where semoran trails, {len(strict)} high-load "
                              f"cells strictly ahead, {elapsed:.0f}s")
    assert weak == []
    assert strict
    assert elapsed <= 600


def test_ac7_dynamic_scenario(record_property):
    t0 = time.perf_counter()
    inst = colosseum_instance()
    flex = run_dynamic(inst, colosseum_timeline("semoran"))
    mr = run_dynamic(inst, colosseum_timeline("minres-sem"))
    animals = (2, 0, 0)
    f0, m0 = flex.periods[0].solution, mr.periods[0].solution
    sub = flex.periods[0].instance
    mu = min_units_slice(sub, sub.task(animals), sub.class_of(sub.task(animals)), f0.allocations[animals].compression)
    others = sum(m0.allocations[t].slice[0] for t in m0.admitted)
    elapsed = time.perf_counter() - t0
    record_property("criterion", "AC-7 dynamic scenario")
    record_property("detail", f"flexible {f0.allocations[animals].slice} vs min-units {mu}, min-units RBG total "
                              f"{others + mu[0]}, evictions {[(e.period, e.task_id) for e in flex.evictions]}")
    assert inst.pool.capacities == (15, 20) and len(flex.periods) == 4
    assert all(p.start == 25.0 * p.period for p in flex.periods)
    assert animals in f0.admitted and animals not in m0.admitted
    assert f0.allocations[animals].slice == (6, 5)
    assert mu == (8, 1) and others + mu[0] == 16
    assert flex.evictions and all(e.timestamp == 25.0 * e.period and e.period > 0 for e in flex.evictions)
    assert all(not p.violations for p in flex.periods)
    assert elapsed < 60


def test_ac8_algorithmic_invariants(record_property, tmp_path):
    t0 = time.perf_counter()
    failed = []
    for prop in test_properties.PROPERTIES:
        try:
            prop()
        except Exception as exc:  # keep going so the detail names every failing property
            failed.append(f"{prop.__name__}: {type(exc).__name__}")
    try:
        test_properties.test_csvs_are_byte_identical(tmp_path)
    except Exception as exc:
        failed.append(f"test_csvs_are_byte_identical: {type(exc).__name__}")
    elapsed = time.perf_counter() - t0
    record_property("criterion", "AC-8 algorithmic invariants")
    record_property("detail", f"{len(test_properties.PROPERTIES) + 1} properties, failed={failed}, {elapsed:.1f}s")
    assert failed == []
    assert elapsed <= 120
