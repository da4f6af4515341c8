"""Locally D-optimal three-point designs for the Mitscherlich curve.

``mu(x) = b1 + b2 * x**b3`` with responses from a canonical-link exponential
family (Gaussian, Poisson, negative binomial, Gamma, Binomial, inverse
Gaussian) or from a normal model with mean-dependent variance.
"""

from mitscherlich.family import Family, Kind, binomial
from mitscherlich.fisher import HeteroSpec, det_explicit, info_matrix
from mitscherlich.model import Bounds, Design, ModelParams, mean, mean_gradient
from mitscherlich.solver import SolveReport, efficiency, hetero_solve, solve, transformed_solve

__version__ = "0.1.0"

__all__ = [
    "Bounds",
    "Design",
    "Family",
    "HeteroSpec",
    "Kind",
    "ModelParams",
    "SolveReport",
    "binomial",
    "det_explicit",
    "efficiency",
    "hetero_solve",
    "info_matrix",
    "mean",
    "mean_gradient",
    "solve",
    "transformed_solve",
]
