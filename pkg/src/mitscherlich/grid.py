"""Exhaustive and zooming grid maximisation of a design criterion.

A criterion is any vectorised callable ``f(x1, x2, x3) -> array`` that is
side-effect free.  Only strictly ordered cells ``x1 < x2 < x3`` compete;
ties are broken towards the lexicographically smallest ``(x1, x2, x3)``,
which is what a C-order ``argmax`` over an ``ij`` mesh gives for free as
long as chunks are visited in order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from mitscherlich.errors import BudgetError, InfeasibleError
from mitscherlich.model import Bounds

Criterion = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]

DEFAULT_MAX_CELLS = 50_000_000
_CHUNK_CELLS = 1_000_000


@dataclass(frozen=True)
class GridResult:
    x: tuple[float, float, float]
    value: float
    cells: int


def axis(lo: float, hi: float, step: float) -> np.ndarray:
    """Inclusive grid from ``lo`` to ``hi``; the step is adjusted to fit exactly."""
    if not step > 0:
        raise ValueError("grid step must be positive")
    k = max(1, int(round((hi - lo) / step)))
    return np.linspace(lo, hi, k + 1)


def local_axis(center: float, half_width: float, step: float, lo: float, hi: float) -> np.ndarray:
    """Grid of spacing ``step`` around ``center`` clipped to ``[lo, hi]``.

    Clipped ends are added explicitly so the window edges stay candidates.
    """
    k = int(round(half_width / step))
    pts = center + step * np.arange(-k, k + 1)
    pts = pts[(pts >= lo) & (pts <= hi)]
    extra = []
    if center - half_width < lo:
        extra.append(lo)
    if center + half_width > hi:
        extra.append(hi)
    return np.unique(np.concatenate([pts, extra, [center]]))


def _evaluate(criterion: Criterion, x1, x2, x3) -> np.ndarray:
    valid = (x1 < x2) & (x2 < x3)
    with np.errstate(all="ignore"):
        val = np.asarray(criterion(x1, x2, x3), dtype=float)
    val = np.broadcast_to(val, valid.shape)
    return np.where(valid & ~np.isnan(val), val, -np.inf)


def search_axes(criterion: Criterion, axes: Sequence[np.ndarray],
                max_cells: float = DEFAULT_MAX_CELLS) -> GridResult:
    """Maximise over the tensor grid spanned by three 1-D axes."""
    a1, a2, a3 = (np.atleast_1d(np.asarray(a, dtype=float)) for a in axes)
    cells = a1.size * a2.size * a3.size
    if cells > max_cells:
        raise BudgetError(f"grid of {cells} cells exceeds the cap of {int(max_cells)}")
    best_val, best_x = -np.inf, None
    inner = a2.size * a3.size
    rows = max(1, _CHUNK_CELLS // max(inner, 1))
    for start in range(0, a1.size, rows):
        x1, x2, x3 = np.meshgrid(a1[start:start + rows], a2, a3, indexing="ij")
        val = _evaluate(criterion, x1, x2, x3)
        k = int(np.argmax(val))
        v = val.flat[k]
        if v > best_val:
            best_val = float(v)
            best_x = (float(x1.flat[k]), float(x2.flat[k]), float(x3.flat[k]))
    if best_x is None or not best_val > 0:
        raise InfeasibleError("no grid cell gives a positive criterion value")
    return GridResult(best_x, best_val, cells)


def full_axes(bounds: Bounds, step: float, fixed: Sequence[float | None]) -> list[np.ndarray]:
    grid = axis(bounds.lower, bounds.upper, step)
    return [grid if f is None else np.array([float(f)]) for f in fixed]


def refine(criterion: Criterion, bounds: Bounds, fixed: Sequence[float | None],
           center: Sequence[float], half_width: float, step: float) -> GridResult:
    """One local pass around ``center`` over the free coordinates."""
    axes = []
    for f, c in zip(fixed, center):
        if f is None:
            axes.append(local_axis(c, half_width, step, bounds.lower, bounds.upper))
        else:
            axes.append(np.array([float(f)]))
    return search_axes(criterion, axes)


def climb(criterion: Criterion, bounds: Bounds, fixed: Sequence[float | None],
          start: Sequence[float], half_width: float, step: float,
          max_passes: int = 100) -> tuple[GridResult, int]:
    """Repeat :func:`refine`, re-centring on the best cell, until it is interior.

    A single local window can clip a flat ridge; re-centring lets the search
    walk along it.  Window edges that coincide with ``bounds`` count as
    interior.
    """
    center = tuple(start)
    for passes in range(1, max_passes + 1):
        res = refine(criterion, bounds, fixed, center, half_width, step)
        on_edge = False
        for f, c, x in zip(fixed, center, res.x):
            if f is None and abs(x - c) >= half_width * (1 - 1e-9) \
                    and bounds.lower < x < bounds.upper:
                on_edge = True
        if not on_edge:
            return res, passes
        center = res.x
    return res, max_passes


def zoom(criterion: Criterion, bounds: Bounds, fixed: Sequence[float | None],
         coarse_step: float, final_step: float, factor: int = 10,
         max_cells: float = DEFAULT_MAX_CELLS) -> tuple[GridResult, int]:
    """Coarse exhaustive grid followed by successively finer local climbs.

    Each level searches +-2 previous steps at ``factor`` times finer spacing
    until the spacing reaches ``final_step``.  Returns the result and the
    total number of passes.
    """
    res = search_axes(criterion, full_axes(bounds, coarse_step, fixed), max_cells)
    step, passes = coarse_step, 1
    while step > final_step * (1 + 1e-9):
        new_step = max(step / factor, final_step)
        res, k = climb(criterion, bounds, fixed, res.x, 2 * step, new_step)
        step, passes = new_step, passes + k
    return res, passes


def grid_cells(bounds: Bounds, step: float, free: int) -> int:
    return int(round(bounds.width / step) + 1) ** free


def coarse_step_for(bounds: Bounds, step: float, free: int, max_cells: float) -> float:
    """Smallest step >= ``step`` whose full grid stays within ``max_cells``."""
    if free == 0:
        return step
    per_axis = max_cells ** (1.0 / free)
    return max(step, bounds.width / max(per_axis - 1.0, 1.0))
