"""Bayes risk under squared error, computed directly and through identities.

The direct risk of an estimator ``delta`` for a target ``gamma`` is the exact
double sum ``sum_i w_i sum_j P[i, j] (delta_j - gamma_i)^2``.  Two
identities give the same number by other routes:

* bias identity: for the Bayes rule ``delta = B gamma`` with expectation
  function ``lam = U delta`` and bias ``b = gamma - lam``, the risk equals
  ``(b, gamma)_pi``;
* projection split: the risk of ``B gamma`` for ``gamma`` equals its risk for
  the estimable part ``gamma_e`` plus the squared norm of ``gamma - gamma_e``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .decompose import decompose_param
from .errors import IdentityViolation
from .model import ModelSpace, as_param_function, as_sample_function, inner_pi
from .operators import DEFAULT_RANK_TOL, apply_B, apply_U

IDENTITY_RTOL = 1e-10


@dataclass(frozen=True)
class RiskReport:
    """Risk figures for one target function.

    ``bias_identity_risk`` is only meaningful when ``delta`` is the Bayes
    rule for ``gamma``.  ``risk_vs_projection`` and ``excess_over_projection``
    are filled in by :func:`theorem1_split`.
    """

    direct_risk: float
    bias_fn: np.ndarray
    bias_identity_risk: float
    excess_over_projection: Optional[float] = None
    risk_vs_projection: Optional[float] = None
    delta: Optional[np.ndarray] = None

    def as_dict(self) -> dict:
        out = {
            "direct_risk": self.direct_risk,
            "bias_identity_risk": self.bias_identity_risk,
            "bias_fn": self.bias_fn.tolist(),
        }
        if self.excess_over_projection is not None:
            out["risk_vs_projection"] = self.risk_vs_projection
            out["excess_over_projection"] = self.excess_over_projection
        if self.delta is not None:
            out["delta"] = self.delta.tolist()
        return out


def bayes_risk(delta, gamma, model: ModelSpace) -> float:
    """Prior-averaged mean squared error of ``delta`` as an estimate of ``gamma``."""
    delta = as_sample_function(delta, model)
    gamma = as_param_function(gamma, model)
    sq = (delta[None, :] - gamma[:, None]) ** 2
    per_theta = np.sum(model.likelihood * sq, axis=1)
    return float(np.dot(model.weights, per_theta))


def _bias_report(gamma, delta, model):
    lam = apply_U(delta, model)
    bias = gamma - lam
    return bayes_risk(delta, gamma, model), bias, inner_pi(bias, gamma, model)


def _check(name, a, b, scale):
    if abs(a - b) > IDENTITY_RTOL * (1.0 + abs(scale)):
        raise IdentityViolation(f"{name}: {a!r} vs {b!r}")


def risk_via_bias(gamma, model: ModelSpace) -> RiskReport:
    """Risk of the Bayes rule for ``gamma``, direct and via its bias."""
    gamma = as_param_function(gamma, model)
    delta = apply_B(gamma, model)
    direct, bias, via_bias = _bias_report(gamma, delta, model)
    _check("bias identity", via_bias, direct, direct)
    return RiskReport(direct, bias, via_bias, delta=delta)


def estimator_report(delta, gamma, model: ModelSpace) -> RiskReport:
    """Direct risk and bias of an arbitrary estimator.

    No identity is enforced: ``(b, gamma)_pi`` equals the risk only for the
    Bayes rule.
    """
    gamma = as_param_function(gamma, model)
    delta = as_sample_function(delta, model)
    direct, bias, via_bias = _bias_report(gamma, delta, model)
    return RiskReport(direct, bias, via_bias, delta=delta)


def theorem1_split(gamma, model: ModelSpace,
                   tol: float = DEFAULT_RANK_TOL) -> RiskReport:
    """Compare the Bayes rule's risk for ``gamma`` and for its estimable part.

    The two risks differ by exactly the squared norm of the non-estimable
    part, so the estimable target is always estimated at least as well.
    """
    gamma = as_param_function(gamma, model)
    delta = apply_B(gamma, model)
    direct, bias, via_bias = _bias_report(gamma, delta, model)
    _check("bias identity", via_bias, direct, direct)

    split = decompose_param(gamma, model, tol)
    vs_proj = bayes_risk(delta, split.part_in_range, model)
    excess = inner_pi(split.part_in_null, split.part_in_null, model)
    _check("projection split", direct, vs_proj + excess, direct)
    if excess > IDENTITY_RTOL * (1.0 + direct) and not vs_proj < direct:
        raise IdentityViolation("risk for the projection is not smaller")
    return RiskReport(direct, bias, via_bias, excess, vs_proj, delta)
