"""Polynomials orthonormal under the prior, and Bayes expansions in them.

For the binomial model with ``n`` trials the estimable functions are exactly
the polynomials of degree at most ``n``.  Expanding a target in a
prior-orthonormal polynomial basis ``P_0 = 1, P_1, ..., P_n`` therefore gives
its Bayes estimator as a finite combination of the Bayes estimators of the
basis, and the truncation remainder has zero Bayes estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegreeMismatch, DegreeTooHigh, IdentityViolation
from .model import ModelSpace, as_param_function
from .operators import apply_B

EXPANSION_TOL = 1e-9
# Relative norm left after orthogonalization below which a monomial is
# treated as dependent on the lower ones.
DEPENDENCE_TOL = 1e-10


@dataclass(frozen=True)
class OrthoBasis:
    """Orthonormal polynomials ``P_0..P_n`` in monomial coefficients.

    Row ``k`` of ``coeff_matrix`` holds ``c_0..c_k`` with
    ``P_k(t) = sum_j c_j t^j``; entries above the diagonal are zero.
    """

    degree_max: int
    coeff_matrix: np.ndarray
    gram_residual: float

    def evaluate(self, theta) -> np.ndarray:
        """Values ``P_k(theta)``, one column per degree."""
        V = np.vander(np.asarray(theta, dtype=float), self.degree_max + 1,
                      increasing=True)
        return V @ self.coeff_matrix.T

    def coefficients(self, gamma, model: ModelSpace) -> np.ndarray:
        """``(gamma, P_k)_pi`` for ``k = 0..n``."""
        gamma = as_param_function(gamma, model)
        return self.evaluate(model.nodes).T @ (model.weights * gamma)


def build_ortho_basis(model: ModelSpace, n: int) -> OrthoBasis:
    """Gram-Schmidt on ``1, t, ..., t^n`` under the prior-weighted product.

    Modified Gram-Schmidt with a second orthogonalization pass; each
    polynomial is scaled to unit norm with a positive leading coefficient.

    Raises
    ------
    DegreeTooHigh
        ``n >= K`` or a monomial is numerically dependent on lower ones.
    """
    if n < 0:
        raise ValueError("degree must be non-negative")
    if n >= model.K:
        raise DegreeTooHigh(f"degree {n} needs more than {model.K} grid nodes")
    w = model.weights
    V = np.vander(model.nodes, n + 1, increasing=True)
    Q = np.zeros_like(V)
    C = np.zeros((n + 1, n + 1))
    for k in range(n + 1):
        v = V[:, k].copy()
        c = np.zeros(n + 1)
        c[k] = 1.0
        start = math.sqrt(np.dot(w, v * v))
        for _ in range(2):
            for j in range(k):
                proj = np.dot(w, v * Q[:, j])
                v -= proj * Q[:, j]
                c -= proj * C[j]
        norm = math.sqrt(np.dot(w, v * v))
        if norm <= DEPENDENCE_TOL * start:
            raise DegreeTooHigh(
                f"monomial of degree {k} is numerically dependent on the grid"
            )
        Q[:, k] = v / norm
        C[k] = c / norm

    P = V @ C.T
    gram = P.T @ (w[:, None] * P)
    resid = float(np.max(np.abs(gram - np.eye(n + 1))))
    return OrthoBasis(n, C, resid)


def _require_binomial(model: ModelSpace, basis: OrthoBasis):
    if model.family != "binomial":
        raise DegreeMismatch("the expansion needs a binomial model")
    if model.family_size != basis.degree_max:
        raise DegreeMismatch(
            f"basis degree {basis.degree_max} does not match "
            f"binomial size {model.family_size}"
        )


def bayes_expansion(gamma, model: ModelSpace, basis: OrthoBasis) -> np.ndarray:
    """Bayes estimator of ``gamma`` assembled from the basis.

    Returns ``sum_k (gamma, P_k)_pi * B P_k``; the ``k = 0`` term is the prior
    mean of ``gamma``.  Checked against the direct posterior mean.
    """
    _require_binomial(model, basis)
    gamma = as_param_function(gamma, model)
    coeffs = basis.coefficients(gamma, model)
    Pk = basis.evaluate(model.nodes)
    expansion = (model.posterior @ Pk) @ coeffs
    direct = apply_B(gamma, model)
    gap = float(np.max(np.abs(expansion - direct)))
    if gap > EXPANSION_TOL * (1.0 + float(np.max(np.abs(direct)))):
        raise IdentityViolation(f"expansion differs from posterior mean by {gap:.3g}")
    return expansion


def expansion_remainder(gamma, basis: OrthoBasis, model: ModelSpace) -> np.ndarray:
    """``gamma`` minus its truncated expansion; its Bayes estimate is zero."""
    _require_binomial(model, basis)
    gamma = as_param_function(gamma, model)
    coeffs = basis.coefficients(gamma, model)
    remainder = gamma - basis.evaluate(model.nodes) @ coeffs
    gap = float(np.max(np.abs(apply_B(remainder, model))))
    if gap > EXPANSION_TOL * (1.0 + float(np.max(np.abs(gamma)))):
        raise IdentityViolation(f"remainder has Bayes estimate of size {gap:.3g}")
    return remainder
