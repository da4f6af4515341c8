"""Built-in illustration presets and the two reference tables.

The presets are the window ``[0, 15]`` and six parameter rows.  Table 1 is
the optimal middle stimulus for six families (both outer stimuli sit at the
window ends); Table 2 is the full inverse-Gaussian design with the
efficiency of dilution designs ``(U/d^2, U/d, U)``.
"""

from __future__ import annotations

from dataclasses import dataclass

from mitscherlich.family import GAMMA, GAUSSIAN, INVERSE_GAUSSIAN, POISSON, Family, binomial
from mitscherlich.model import Bounds, ModelParams
from mitscherlich.solver import (
    DEFAULT_GRID_STEP,
    SolveReport,
    dilution_design,
    efficiency,
    solve,
)

PRESET_BOUNDS = Bounds(0.0, 15.0)
PRESET_ROWS: tuple[ModelParams, ...] = tuple(
    ModelParams(*row)
    for row in [
        (0.5, 1.2, 0.9),
        (0.5, 1.0, 1.0),
        (0.5, 0.8, 1.1),
        (1.0, 1.2, 0.9),
        (1.0, 1.0, 1.0),
        (1.0, 0.8, 1.1),
    ]
)
TABLE1_FAMILIES: tuple[Family, ...] = (
    GAUSSIAN, POISSON, GAMMA, binomial(25), binomial(50), binomial(100),
)
DILUTIONS = (60.0, 30.0, 15.0)


@dataclass(frozen=True)
class Table1Row:
    params: ModelParams
    reports: tuple[SolveReport, ...]

    @property
    def x2(self) -> tuple[float, ...]:
        return tuple(r.x[1] for r in self.reports)


def table1(rows=PRESET_ROWS, families=TABLE1_FAMILIES, bounds: Bounds = PRESET_BOUNDS,
           grid_step: float = DEFAULT_GRID_STEP) -> list[Table1Row]:
    return [
        Table1Row(p, tuple(solve(f, p, bounds, grid_step=grid_step) for f in families))
        for p in rows
    ]


@dataclass(frozen=True)
class Table2Row:
    """Inverse-Gaussian design for one parameter row.

    ``report.grid_design`` is the optimum on the search lattice, which is
    what the efficiencies are measured against; ``report.design`` has x2
    refined at the grid x3.
    """

    params: ModelParams
    report: SolveReport
    dilutions: tuple[float, ...]
    efficiencies: tuple[float, ...]


def table2(rows=PRESET_ROWS, bounds: Bounds = PRESET_BOUNDS,
           dilutions=DILUTIONS, grid_step: float = DEFAULT_GRID_STEP) -> list[Table2Row]:
    out = []
    for p in rows:
        rep = solve(INVERSE_GAUSSIAN, p, bounds, grid_step=grid_step)
        effs = tuple(
            efficiency(INVERSE_GAUSSIAN, p, dilution_design(bounds.upper, d),
                       rep.grid_design).ratio
            for d in dilutions
        )
        out.append(Table2Row(p, rep, tuple(dilutions), effs))
    return out
