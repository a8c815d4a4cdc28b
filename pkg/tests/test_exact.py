import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sfesp.exact import OracleLimits, OracleRefusal, gap_report, solve_exact
from sfesp.fixtures import L_FLEX, flex_example
from sfesp.greedy import feasible_slices, solve_greedy
from sfesp.model import ApplicationClass, ProblemInstance, Reason, verify_feasible
from sfesp.perf import AccuracyProfile, ProfileRegistry

from support import dkp_brute_force, knapsack_instance, random_instance, random_knapsack


def test_knapsack_example():
    sol = solve_exact(knapsack_instance([(6,), (5,), (5,)], (10,), (1.0,)))
    assert sol.objective == 10
    assert sol.admitted == [(1, 0, 0), (2, 0, 0)]


def test_flex_example_matches_pair_enumeration():
    inst = flex_example()
    sol = solve_exact(inst)
    assert len(sol.admitted) == 2
    task = inst.tasks[0]
    feas = [tuple(int(v) for v in r) for r in feasible_slices(L_FLEX, 1.0, task, 0.4, inst.pool)]
    p, S = inst.pool.prices, inst.pool.capacities
    value = lambda s: sum(pk * (Sk - sk) for pk, Sk, sk in zip(p, S, s))  # noqa: E731
    best = max(value(a) + value(b) for a, b in itertools.product(feas, feas)
               if all(x + y <= c for x, y, c in zip(a, b, S)))
    assert sol.objective == pytest.approx(best)
    assert verify_feasible(inst, sol) == []


def test_unreachable_accuracy_gives_empty_solution():
    base = flex_example()
    low = AccuracyProfile("LOW", (0.5, 1.0), (0.3, 0.5))
    cls = ApplicationClass(0, "detection", 0.9, 0.4, "LOW", "L-FLEX")
    inst = ProblemInstance((cls,), base.tasks, base.pool, ProfileRegistry({"LOW": low}, base.profiles.latency))
    sol = solve_exact(inst)
    assert sol.admitted == [] and sol.objective == 0
    assert set(sol.diagnostics.values()) == {Reason.ACCURACY_UNREACHABLE}


def test_refuses_too_many_tasks():
    with pytest.raises(OracleRefusal, match="7 tasks"):
        solve_exact(flex_example(n_tasks=7))


def test_refuses_too_many_candidates():
    with pytest.raises(OracleRefusal, match="candidate slices"):
        solve_exact(flex_example(), OracleLimits(max_candidates_per_task=2))


def test_refuses_when_time_budget_is_spent():
    inst = knapsack_instance([(1, 1)] * 12, (12, 12), (1.0, 1.0))
    with pytest.raises(OracleRefusal, match="time budget"):
        solve_exact(inst, OracleLimits(max_tasks=12, time_budget=1e-9))


def test_limits_must_be_positive():
    with pytest.raises(ValueError):
        OracleLimits(max_tasks=0)


def test_ties_go_to_lexicographically_smallest_admission_vector():
    # two identical tasks, room for one: the later task is admitted first in enumeration order
    sol = solve_exact(knapsack_instance([(6,), (6,)], (10,), (1.0,)))
    assert sol.admitted == [(1, 0, 0)]


def test_gap_report_conventions():
    r = gap_report(flex_example(n_tasks=0))
    assert r.ratio == 1.0 and r.exact_objective == 0
    r = gap_report(flex_example())
    assert r.ratio == 1.0 and r.greedy_admitted == r.exact_admitted == 2


@given(st.integers(0, 100_000))
def test_knapsack_reduction(seed):
    weights, caps, prices = random_knapsack(np.random.default_rng(seed))
    sol = solve_exact(knapsack_instance(weights, caps, prices), OracleLimits(max_tasks=10))
    assert sol.objective == dkp_brute_force(weights, caps, prices)


@given(st.integers(0, 100_000))
def test_oracle_dominates_greedy_and_is_feasible(seed):
    inst = random_instance(seed)
    ex = solve_exact(inst)
    assert verify_feasible(inst, ex) == []
    assert solve_greedy(inst).objective <= ex.objective


@given(st.integers(0, 100_000))
def test_compression_dominance_argument(seed):
    inst = random_instance(seed, n_tasks=int(np.random.default_rng(seed).integers(0, 5)))
    a = solve_exact(inst)
    b = solve_exact(inst, no_dominance=True)
    assert math.isclose(a.objective, b.objective, rel_tol=1e-12, abs_tol=1e-12)
    assert verify_feasible(inst, b) == []
