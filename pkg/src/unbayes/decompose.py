"""Orthogonal splits of parameter functions and estimators.

Every ``gamma`` splits uniquely into an estimable part (in the range of U)
plus a part whose Bayes estimate vanishes; every estimator ``delta`` splits
into a Bayes estimator plus an unbiased estimator of zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotEstimable
from .model import (
    ModelSpace,
    as_param_function,
    as_sample_function,
    inner_m,
    inner_pi,
)
from .operators import (
    DEFAULT_RANK_TOL,
    PARAM_SPACE,
    SAMPLE_SPACE,
    apply_U,
    pseudo_solve_U,
    range_basis_B,
    range_basis_U,
)

DEFAULT_ESTIMABILITY_TOL = 1e-8


@dataclass(frozen=True)
class DecompResult:
    side: str
    part_in_range: np.ndarray
    part_in_null: np.ndarray
    pythagoras_residual: float
    cross_inner: float

    @property
    def whole(self) -> np.ndarray:
        return self.part_in_range + self.part_in_null


def _split(values, basis, model, inner):
    in_range = basis.project(values, model)
    in_null = values - in_range
    whole_sq = inner(values, values, model)
    pyth = abs(whole_sq - inner(in_range, in_range, model)
               - inner(in_null, in_null, model))
    cross = inner(in_range, in_null, model)
    return DecompResult(basis.side, in_range, in_null, pyth, cross)


def decompose_param(gamma, model: ModelSpace,
                    tol: float = DEFAULT_RANK_TOL) -> DecompResult:
    """Split ``gamma`` into its prior-weighted projection onto the
    estimable functions and a remainder with zero Bayes estimate."""
    gamma = as_param_function(gamma, model)
    return _split(gamma, range_basis_U(model, tol), model, inner_pi)


def decompose_sample(delta, model: ModelSpace,
                     tol: float = DEFAULT_RANK_TOL) -> DecompResult:
    """Split ``delta`` into a Bayes estimator and an unbiased estimator of zero."""
    delta = as_sample_function(delta, model)
    return _split(delta, range_basis_B(model, tol), model, inner_m)


def solve_unbiased(gamma, model: ModelSpace,
                   tol: float = DEFAULT_ESTIMABILITY_TOL,
                   rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Minimum-norm unbiased estimator of ``gamma``.

    ``gamma`` counts as estimable when the prior-weighted norm of its
    non-estimable part is at most ``tol`` times its own norm.  The returned
    estimator is the unique solution orthogonal to every unbiased estimator
    of zero.

    Raises
    ------
    NotEstimable
        Carries the nearest estimable function and the residual norm.
    """
    gamma = as_param_function(gamma, model)
    split = decompose_param(gamma, model, rank_tol)
    resid = math.sqrt(max(inner_pi(split.part_in_null, split.part_in_null, model), 0.0))
    scale = math.sqrt(max(inner_pi(gamma, gamma, model), 0.0))
    rel = resid / scale if scale > 0 else 0.0
    if resid > tol * scale:
        raise NotEstimable(split.part_in_range, resid, rel)
    return pseudo_solve_U(gamma, model, rank_tol)


def unbiased_residual(delta, gamma, model: ModelSpace) -> float:
    """Prior-weighted norm of ``U delta - gamma``."""
    diff = apply_U(delta, model) - as_param_function(gamma, model)
    return math.sqrt(max(inner_pi(diff, diff, model), 0.0))


def fit_polynomial(values, model: ModelSpace, degree: int) -> tuple[np.ndarray, float]:
    """Prior-weighted least-squares monomial coefficients of ``values``.

    Returns the coefficients ``c0..c_degree`` and the weighted RMS misfit.
    Used to report estimable parts of polynomial models in closed form.
    """
    values = as_param_function(values, model)
    sw = np.sqrt(model.weights)
    V = np.vander(model.nodes, degree + 1, increasing=True)
    coeffs, *_ = np.linalg.lstsq(sw[:, None] * V, sw * values, rcond=None)
    misfit = values - V @ coeffs
    return coeffs, math.sqrt(max(inner_pi(misfit, misfit, model), 0.0))


__all__ = [
    "DecompResult",
    "DEFAULT_ESTIMABILITY_TOL",
    "PARAM_SPACE",
    "SAMPLE_SPACE",
    "decompose_param",
    "decompose_sample",
    "fit_polynomial",
    "solve_unbiased",
    "unbiased_residual",
]
