"""Sample mean versus Bayes estimator as the Bernoulli sample grows.

Given an unbiased estimator ``U`` of ``gamma`` from a single Bernoulli draw,
the average ``U_n`` over ``n`` draws has Bayes risk ``tau / n`` with ``tau``
the single-draw risk.  The Bayes estimator ``delta_n`` does at least as well,
and since ``U_n - gamma = (U_n - delta_n) + (delta_n - gamma)`` with
orthogonal terms,

    risk(U_n) = risk(delta_n) + ||U_n - delta_n||^2,

so the two estimators merge as ``n`` grows.  All three quantities depend on
the data only through the success count ``S``, so the ``2^n`` outcome space
collapses to the ``n + 1`` outcomes of a binomial model.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .decompose import solve_unbiased
from .errors import IdentityViolation, NMaxTooLarge
from .model import ModelSpace, ParameterGrid, binomial_model, inner_m
from .operators import apply_B
from .risk import bayes_risk

N_MAX = 64
SPLIT_RTOL = 1e-12
MIN_REPS = 1000

GammaLike = Union[str, Callable[[np.ndarray], np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ConsistencyRow:
    n: int
    risk_Un: float
    risk_bayes: float
    cross_norm: float
    tau_over_n: float
    se_risk_Un: Optional[float] = None
    se_risk_bayes: Optional[float] = None
    se_cross_norm: Optional[float] = None

    def as_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def _gamma_values(gamma: GammaLike, grid: ParameterGrid) -> np.ndarray:
    if isinstance(gamma, str):
        if gamma != "theta":
            raise ValueError(f"unknown target {gamma!r}; use 'theta' or pass values")
        return grid.nodes.copy()
    if callable(gamma):
        return np.asarray(gamma(grid.nodes), dtype=float)
    return np.asarray(gamma, dtype=float)


class _Setup:
    """Grid, target values and the single-draw unbiased estimator."""

    def __init__(self, gamma: GammaLike, grid: Optional[ParameterGrid], grid_size: int):
        self.grid = grid if grid is not None else ParameterGrid.gauss_legendre(grid_size)
        self.gamma = _gamma_values(gamma, self.grid)
        bern = binomial_model(1, self.grid)
        # Raises NotEstimable unless gamma is affine in theta.
        u0, u1 = solve_unbiased(self.gamma, bern)
        self.u0, self.slope = float(u0), float(u1 - u0)
        self.tau = bayes_risk([u0, u1], self.gamma, bern)

    def model(self, n: int) -> ModelSpace:
        return binomial_model(n, self.grid)

    def mean_estimator(self, n: int) -> np.ndarray:
        """``U_n`` as a function of the count ``S = 0..n``."""
        return self.u0 + self.slope * np.arange(n + 1) / n


def exact_consistency_table(gamma: GammaLike = "theta", n_max: int = 50,
                            grid_size: int = 64,
                            grid: Optional[ParameterGrid] = None) -> list[ConsistencyRow]:
    """Exact risks of ``U_n`` and of the Bayes rule for ``n = 1..n_max``.

    ``gamma`` is ``"theta"``, a callable evaluated on the grid, or an array
    of grid values; it must be affine in theta to have a single-draw
    unbiased estimator.  Exact for polynomial targets as long as
    ``2 * grid_size - 1 >= n_max + 2``.
    """
    if n_max > N_MAX:
        raise NMaxTooLarge(f"n_max={n_max} exceeds {N_MAX}")
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    setup = _Setup(gamma, grid, grid_size)
    rows = []
    for n in range(1, n_max + 1):
        model = setup.model(n)
        u_n = setup.mean_estimator(n)
        delta = apply_B(setup.gamma, model)
        risk_u = bayes_risk(u_n, setup.gamma, model)
        risk_b = bayes_risk(delta, setup.gamma, model)
        diff = u_n - delta
        cross = inner_m(diff, diff, model)
        if abs(risk_u - (risk_b + cross)) > SPLIT_RTOL * risk_u + 1e-15:
            raise IdentityViolation(f"split identity fails at n={n}")
        rows.append(ConsistencyRow(n, risk_u, risk_b, cross, setup.tau / n))
    return rows


def _uniforms(seed: int, n: int, reps: range) -> np.ndarray:
    out = np.empty((len(reps), 2))
    for k, r in enumerate(reps):
        state = np.random.SeedSequence(seed, spawn_key=(n, r)).generate_state(2, np.uint64)
        out[k] = (state >> np.uint64(11)) * (1.0 / 9007199254740992.0)
    return out


def replicate_uniforms(seed: int, n: int, reps: int, workers: int = 1,
                       chunk: int = 4096) -> np.ndarray:
    """Two uniforms per replicate, each from its own ``(n, rep)`` substream.

    The result does not depend on ``workers``.
    """
    bounds = [range(lo, min(lo + chunk, reps)) for lo in range(0, reps, chunk)]
    if workers <= 1:
        parts = [_uniforms(seed, n, b) for b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _uniforms(seed, n, b), bounds))
    return np.concatenate(parts) if parts else np.empty((0, 2))


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(x.size))


def monte_carlo_consistency(gamma: GammaLike = "theta",
                            n_list: Sequence[int] = (4, 16, 64),
                            reps: int = 100_000, seed: int = 0,
                            grid_size: int = 64,
                            grid: Optional[ParameterGrid] = None,
                            workers: int = 1) -> list[ConsistencyRow]:
    """Simulated counterpart of :func:`exact_consistency_table`.

    Each replicate draws a grid node from the prior and then a count
    ``S ~ Binomial(n, theta)``, both by inversion of uniforms taken from the
    replicate's own substream of ``seed``.  Rows carry standard errors.
    """
    if reps < MIN_REPS:
        raise ValueError(f"reps must be at least {MIN_REPS}")
    setup = _Setup(gamma, grid, grid_size)
    w_cdf = np.cumsum(setup.grid.weights)
    rows = []
    for n in n_list:
        if n < 1 or n > N_MAX:
            raise NMaxTooLarge(f"n={n} outside 1..{N_MAX}")
        model = setup.model(n)
        u_n = setup.mean_estimator(n)
        delta = apply_B(setup.gamma, model)
        s_cdf = np.cumsum(model.likelihood, axis=1)

        u = replicate_uniforms(seed, n, reps, workers)
        idx = np.minimum(np.searchsorted(w_cdf, u[:, 0] * w_cdf[-1], side="right"),
                         setup.grid.size - 1)
        s = np.minimum(np.sum(s_cdf[idx] <= u[:, 1:2] * s_cdf[idx, -1:], axis=1), n)

        g = setup.gamma[idx]
        err_u = (u_n[s] - g) ** 2
        err_b = (delta[s] - g) ** 2
        gap = (u_n[s] - delta[s]) ** 2
        (ru, se_u), (rb, se_b), (cn, se_c) = _mean_se(err_u), _mean_se(err_b), _mean_se(gap)
        rows.append(ConsistencyRow(n, ru, rb, cn, setup.tau / n, se_u, se_b, se_c))
    return rows
