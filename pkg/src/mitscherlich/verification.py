"""Solver-versus-oracle agreement checks.

The oracle maximises the closed-form determinant by exhaustive grid search,
independently of the placement rules and of the x2 equation:

* the middle stimulus (and x3 when it is searched) on the solver's grid
  step, with the remaining stimuli at the solver's values;
* all three stimuli on a coarse lattice, which checks the outer stimuli
  the solver placed by rule (x1 always; x3 unless it was grid-searched,
  since a coarse lattice cannot resolve a flat ridge in x3).
"""

from __future__ import annotations

from dataclasses import dataclass

from mitscherlich.errors import ConvergenceError, InfeasibleError
from mitscherlich.family import LinkLike
from mitscherlich.model import Bounds, ModelParams
from mitscherlich.solver import (
    DEFAULT_GRID_STEP,
    Method,
    brute_force_oracle,
    determinant_criterion,
    solve,
)

COARSE_STEP = 0.25
_SLACK = 1e-9


@dataclass(frozen=True)
class OracleCheck:
    family: str
    params: tuple[float, float, float]
    solver_x: tuple[float, float, float] | None
    oracle_x: tuple[float, float, float] | None
    coarse_x: tuple[float, float, float] | None
    passed: bool
    detail: str

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "beta": list(self.params),
            "solver_x": None if self.solver_x is None else list(self.solver_x),
            "oracle_x": None if self.oracle_x is None else list(self.oracle_x),
            "coarse_x": None if self.coarse_x is None else list(self.coarse_x),
            "passed": self.passed,
            "detail": self.detail,
        }


def _within(a, b, tol: float) -> bool:
    return all(abs(u - v) <= tol + _SLACK for u, v in zip(a, b))


def oracle_check(family: LinkLike, params: ModelParams, bounds: Bounds, *,
                 grid_step: float = DEFAULT_GRID_STEP, coarse_step: float = COARSE_STEP,
                 curvature_sign: float = 1.0) -> OracleCheck:
    """Compare the solver's design with exhaustive grid maximisation.

    Passes when the fine oracle agrees within one ``grid_step`` in every
    coordinate and the coarse 3-D oracle within one ``coarse_step`` in the
    rule-placed outer stimuli.
    """
    label = (family.name, params.as_tuple())
    try:
        rep = solve(family, params, bounds, grid_step=grid_step,
                    curvature_sign=curvature_sign)
    except (ConvergenceError, InfeasibleError) as exc:
        return OracleCheck(*label, None, None, None, False, f"solver failed: {exc}")
    x = rep.x
    crit = determinant_criterion(family, params)
    if rep.method is Method.GRID_2D:
        fixed, outer = (x[0], None, None), (0,)
    else:
        fixed, outer = (x[0], None, x[2]), (0, 2)
    fine = brute_force_oracle(crit, bounds, grid_step, fixed=fixed).x
    coarse = brute_force_oracle(crit, bounds, coarse_step).x
    ok_fine = _within(x, fine, grid_step)
    ok_coarse = _within([x[i] for i in outer], [coarse[i] for i in outer], coarse_step)
    if ok_fine and ok_coarse:
        detail = "agree"
    else:
        parts = []
        if not ok_fine:
            parts.append(f"fine oracle {fine} differs from solver {x} by more than {grid_step}")
        if not ok_coarse:
            parts.append(f"coarse oracle {coarse} moves an outer stimulus of {x} "
                         f"by more than {coarse_step}")
        detail = "; ".join(parts)
    return OracleCheck(*label, x, fine, coarse, ok_fine and ok_coarse, detail)
