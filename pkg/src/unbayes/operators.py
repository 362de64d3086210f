"""The unbiasedness operator U and the Bayes operator B as matrices.

``U`` sends an estimator to its expectation function, ``(U d)_i =
sum_j P[i, j] d_j``; ``B`` sends a parameter function to its posterior mean,
``(B g)_j = sum_i Pi[j, i] g_i``.  They are adjoint for the two weighted
inner products.

Range and null space bases come from one SVD of the rescaled matrix
``M = diag(sqrt(w)) P diag(1/sqrt(m))``.  In the orthonormal coordinates
``x -> sqrt(w) * x`` and ``y -> sqrt(m) * y`` the operator U is ``M`` and B
is ``M.T``, so the left singular vectors split parameter space into
range(U) and null(B), and the right singular vectors split sample space
into range(B) and null(U).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import ModelSpace, as_param_function, as_sample_function, inner_m, inner_pi

DEFAULT_RANK_TOL = 1e-10
PARAM_SPACE = "param_space"
SAMPLE_SPACE = "sample_space"


def apply_U(delta, model: ModelSpace) -> np.ndarray:
    """Expectation function ``theta -> E_theta delta(X)``."""
    return model.likelihood @ as_sample_function(delta, model)


def apply_B(gamma, model: ModelSpace) -> np.ndarray:
    """Posterior mean ``x -> E(gamma(theta) | x)``."""
    return model.posterior @ as_param_function(gamma, model)


def adjointness_residual(gamma, delta, model: ModelSpace) -> float:
    """``|(gamma, U delta)_pi - (B gamma, delta)_m|``."""
    lhs = inner_pi(gamma, apply_U(delta, model), model)
    rhs = inner_m(apply_B(gamma, model), delta, model)
    return abs(lhs - rhs)


@dataclass(frozen=True)
class SubspaceBasis:
    """Weighted-orthonormal basis of a subspace.

    ``vectors`` holds one basis function per column, so its shape is
    ``(K, rank)`` on the parameter side and ``(N, rank)`` on the sample
    side.  Only the spanned subspace is meaningful; individual vectors are
    determined up to rotation.
    """

    side: str
    vectors: np.ndarray
    rank: int
    tol_used: float

    def coordinates(self, values, model: ModelSpace) -> np.ndarray:
        """Weighted inner products of ``values`` with each basis vector."""
        weights = _side_weights(self.side, model)
        return self.vectors.T @ (weights * np.asarray(values, dtype=float))

    def project(self, values, model: ModelSpace) -> np.ndarray:
        """Orthogonal projection of ``values`` onto the subspace."""
        return self.vectors @ self.coordinates(values, model)

    def gram(self, model: ModelSpace) -> np.ndarray:
        weights = _side_weights(self.side, model)
        return self.vectors.T @ (weights[:, None] * self.vectors)


def _side_weights(side: str, model: ModelSpace) -> np.ndarray:
    return model.weights if side == PARAM_SPACE else model.marginal


@dataclass(frozen=True)
class _Factorization:
    left: np.ndarray   # K x K, orthonormal columns
    sv: np.ndarray     # min(K, N) singular values, descending
    right: np.ndarray  # N x N, orthonormal columns


@lru_cache(maxsize=64)
def _factor(model: ModelSpace) -> _Factorization:
    sw = np.sqrt(model.weights)
    sm = np.sqrt(model.marginal)
    M = sw[:, None] * model.likelihood / sm[None, :]
    left, sv, right_t = np.linalg.svd(M, full_matrices=True)
    return _Factorization(left, sv, right_t.T)


def numerical_rank(model: ModelSpace, tol: float = DEFAULT_RANK_TOL) -> int:
    """Rank shared by U and B under the relative singular value cutoff."""
    _check_tol(tol)
    sv = _factor(model).sv
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.count_nonzero(sv > tol * sv[0]))


def _check_tol(tol):
    if not 0 < tol <= 1e-4:
        raise ValueError(f"rank tolerance must lie in (0, 1e-4], got {tol!r}")


def _basis(model, tol, side, columns):
    scale = np.sqrt(_side_weights(side, model))
    vectors = columns / scale[:, None]
    return SubspaceBasis(side, vectors, vectors.shape[1], tol)


def range_basis_U(model: ModelSpace, tol: float = DEFAULT_RANK_TOL) -> SubspaceBasis:
    """Functions of theta that have an unbiased estimator."""
    r = numerical_rank(model, tol)
    return _basis(model, tol, PARAM_SPACE, _factor(model).left[:, :r])


def null_basis_B(model: ModelSpace, tol: float = DEFAULT_RANK_TOL) -> SubspaceBasis:
    """Functions of theta whose Bayes estimate is identically zero."""
    r = numerical_rank(model, tol)
    return _basis(model, tol, PARAM_SPACE, _factor(model).left[:, r:])


def range_basis_B(model: ModelSpace, tol: float = DEFAULT_RANK_TOL) -> SubspaceBasis:
    """Estimators that are Bayes for some function of theta."""
    r = numerical_rank(model, tol)
    return _basis(model, tol, SAMPLE_SPACE, _factor(model).right[:, :r])


def null_basis_U(model: ModelSpace, tol: float = DEFAULT_RANK_TOL) -> SubspaceBasis:
    """Unbiased estimators of zero."""
    r = numerical_rank(model, tol)
    return _basis(model, tol, SAMPLE_SPACE, _factor(model).right[:, r:])


SUBSPACES = {
    "range-u": range_basis_U,
    "null-u": null_basis_U,
    "range-b": range_basis_B,
    "null-b": null_basis_B,
}


def pseudo_solve_U(gamma, model: ModelSpace, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Minimum ``m``-norm least-squares solution of ``P d = gamma``.

    The residual is measured in the prior-weighted norm.
    """
    gamma = as_param_function(gamma, model)
    f = _factor(model)
    r = numerical_rank(model, tol)
    rhs = f.left[:, :r].T @ (np.sqrt(model.weights) * gamma)
    y = f.right[:, :r] @ (rhs / f.sv[:r])
    return y / np.sqrt(model.marginal)
