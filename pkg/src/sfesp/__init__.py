"""Semantic, flexible edge slicing: task admission and multi-resource slicing.

Typical use::

    from sfesp import fixtures, solve_greedy, verify_feasible
    inst = fixtures.flex_example()
    sol = solve_greedy(inst)
    assert not verify_feasible(inst, sol)
"""

from .baselines import (
    BaselineConfig,
    solve_flexres_nsem,
    solve_highcomp,
    solve_highres,
    solve_minres_sem,
    solve_sl_edge,
)
from .exact import OracleLimits, OracleRefusal, gap_report, solve_exact
from .greedy import primal_gradient, solve_greedy
from .model import (
    Allocation,
    ApplicationClass,
    InstanceError,
    ProblemInstance,
    Reason,
    ResourcePool,
    SlicingSolution,
    TaskSpec,
    objective_value,
    validate_instance,
    verify_feasible,
)
from .perf import AccuracyProfile, ParametricLatency, ProfileRegistry, TabulatedLatency, load_profiles
from .solvers import SOLVER_NAMES, get_solver

__all__ = [
    "AccuracyProfile", "Allocation", "ApplicationClass", "BaselineConfig", "InstanceError", "OracleLimits",
    "OracleRefusal", "ParametricLatency", "ProblemInstance", "ProfileRegistry", "Reason", "ResourcePool",
    "SOLVER_NAMES", "SlicingSolution", "TabulatedLatency", "TaskSpec", "gap_report", "get_solver", "load_profiles",
    "objective_value", "primal_gradient", "solve_exact", "solve_flexres_nsem", "solve_greedy", "solve_highcomp",
    "solve_highres", "solve_minres_sem", "solve_sl_edge", "validate_instance", "verify_feasible",
]

__version__ = "0.1.0"
