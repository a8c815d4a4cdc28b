"""Name-based solver lookup shared by the CLI, harness and simulator."""

from __future__ import annotations

from typing import Callable

from .baselines import (
    BaselineConfig,
    solve_flexres_nsem,
    solve_highcomp,
    solve_highres,
    solve_minres_sem,
    solve_sl_edge,
)
from .exact import OracleLimits, solve_exact
from .greedy import solve_greedy
from .model import ProblemInstance, SlicingSolution

Solver = Callable[[ProblemInstance], SlicingSolution]

SOLVER_NAMES = ("semoran", "minres-sem", "sl-edge", "flexres-nsem", "highcomp", "highres", "exact")


def get_solver(name: str, cfg: BaselineConfig = BaselineConfig(), limits: OracleLimits = OracleLimits()) -> Solver:
    table: dict[str, Solver] = {
        "semoran": solve_greedy,
        "minres-sem": solve_minres_sem,
        "sl-edge": lambda inst: solve_sl_edge(inst, cfg),
        "flexres-nsem": lambda inst: solve_flexres_nsem(inst, cfg),
        "highcomp": lambda inst: solve_highcomp(inst, cfg),
        "highres": lambda inst: solve_highres(inst, cfg),
        "exact": lambda inst: solve_exact(inst, limits),
    }
    try:
        return table[name]
    except KeyError:
        raise ValueError(f"unknown solver {name!r}; choose from {', '.join(SOLVER_NAMES)}") from None
