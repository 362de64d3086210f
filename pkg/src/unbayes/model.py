"""Discrete statistical models and their two weighted inner products.

A model couples a parameter grid ``theta_1..theta_K`` carrying prior masses
``w_i`` with a finite sample space of ``N`` outcomes through a ``K x N``
row-stochastic likelihood matrix ``P``.  From these we derive

* the marginal ``m[j] = sum_i w_i P[i, j]``, and
* the ``N x K`` posterior matrix ``Pi[j, i] = P[i, j] w_i / m[j]``.

Parameter functions (length-K arrays) are compared with ``sum_i f_i g_i w_i``
and estimators (length-N arrays) with ``sum_j d_j e_j m_j``.  Functions are
plain ``numpy`` float arrays throughout; :func:`as_param_function` and
:func:`as_sample_function` validate them against a model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    InvalidGrid,
    InvalidSampleSpace,
    LengthMismatch,
    NonStochasticRow,
    UnknownName,
    ZeroMarginal,
    ZeroPriorWeight,
)

ROW_SUM_TOL = 1e-9
PRIOR_SUM_TOL = 1e-12
POSTERIOR_ROW_TOL = 1e-12
JOINT_IDENTITY_RTOL = 1e-14


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ParameterGrid:
    """Parameter nodes with strictly positive prior masses summing to one."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = _frozen(self.nodes)
        weights = _frozen(self.weights)
        if nodes.ndim != 1 or nodes.size == 0:
            raise InvalidGrid("nodes must be a non-empty 1-d sequence")
        if weights.shape != nodes.shape:
            raise LengthMismatch(
                f"{weights.size} prior weights for {nodes.size} nodes"
            )
        if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(weights))):
            raise InvalidGrid("nodes and weights must be finite")
        if np.any(np.diff(nodes) <= 0):
            raise InvalidGrid("nodes must be strictly increasing")
        if np.any(weights <= 0):
            raise ZeroPriorWeight("every prior weight must be strictly positive")
        total = math.fsum(weights)
        if abs(total - 1.0) > PRIOR_SUM_TOL:
            raise InvalidGrid(f"prior weights sum to {total!r}, not 1")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self) -> int:
        return self.nodes.size

    @classmethod
    def gauss_legendre(cls, size: int, density=None) -> "ParameterGrid":
        """Gauss-Legendre grid on (0, 1).

        ``density`` is an optional callable prior density on (0, 1); the
        default is the uniform prior.  Masses are density times quadrature
        weight and must already integrate to one.
        """
        if size < 1:
            raise InvalidGrid("grid size must be at least 1")
        t, w = np.polynomial.legendre.leggauss(size)
        nodes = 0.5 * (t + 1.0)
        weights = 0.5 * w
        if density is not None:
            weights = weights * np.asarray(density(nodes), dtype=float)
        return cls(nodes, weights)


@dataclass(frozen=True)
class SampleSpace:
    labels: tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        if len(labels) < 1:
            raise InvalidSampleSpace("sample space needs at least one outcome")
        if len(set(labels)) != len(labels):
            raise InvalidSampleSpace("sample labels must be distinct")
        object.__setattr__(self, "labels", labels)

    @property
    def size(self) -> int:
        return len(self.labels)

    @classmethod
    def range(cls, n: int, start: int = 0) -> "SampleSpace":
        return cls(tuple(range(start, start + n)))


@dataclass(frozen=True, eq=False)
class ModelSpace:
    """A validated model; build it with :func:`build_model`.

    ``family`` and ``family_size`` record the builtin family a model came
    from (``"binomial"`` with its number of trials, for instance), and are
    ``None`` for user-supplied likelihoods.
    """

    grid: ParameterGrid
    samples: SampleSpace
    likelihood: np.ndarray
    marginal: np.ndarray
    posterior: np.ndarray
    family: Optional[str] = field(default=None, compare=False)
    family_size: Optional[int] = field(default=None, compare=False)

    @property
    def K(self) -> int:
        return self.grid.size

    @property
    def N(self) -> int:
        return self.samples.size

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def weights(self) -> np.ndarray:
        return self.grid.weights

    def with_prior(self, weights) -> "ModelSpace":
        """Same nodes and likelihood, different prior masses."""
        grid = ParameterGrid(self.grid.nodes, weights)
        return build_model(
            grid, self.samples, self.likelihood,
            family=self.family, family_size=self.family_size,
        )


def build_model(
    grid: ParameterGrid,
    samples: SampleSpace,
    likelihood,
    *,
    family: Optional[str] = None,
    family_size: Optional[int] = None,
) -> ModelSpace:
    """Validate a likelihood matrix and derive the marginal and posterior.

    Raises
    ------
    NonStochasticRow
        A row has a negative entry or its sum is off by more than 1e-9.
        Rows are never renormalized.
    ZeroMarginal
        Some outcome has zero marginal probability.
    """
    P = np.array(likelihood, dtype=float)
    if P.ndim != 2 or P.shape != (grid.size, samples.size):
        raise LengthMismatch(
            f"likelihood has shape {P.shape}, expected "
            f"({grid.size}, {samples.size})"
        )
    if not np.all(np.isfinite(P)):
        raise NonStochasticRow("likelihood entries must be finite")
    bad = np.flatnonzero(np.any(P < 0, axis=1))
    if bad.size:
        raise NonStochasticRow(f"row {bad[0]} has negative entries")
    sums = np.array([math.fsum(row) for row in P])
    bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)
    if bad.size:
        i = bad[0]
        raise NonStochasticRow(f"row {i} sums to {sums[i]!r}")

    w = grid.weights
    joint = P * w[:, None]
    m = joint.sum(axis=0)
    bad = np.flatnonzero(m <= 0)
    if bad.size:
        raise ZeroMarginal(f"outcome {samples.labels[bad[0]]!r} has zero marginal")
    Pi = joint.T / m[:, None]

    _check_posterior(P, w, m, Pi)
    return ModelSpace(
        grid, samples, _frozen(P), _frozen(m), _frozen(Pi),
        family=family, family_size=family_size,
    )


def _check_posterior(P, w, m, Pi):
    # Post-conditions; can only fail through a bug or overflow.
    rows = Pi.sum(axis=1)
    assert np.all(np.abs(rows - 1.0) <= POSTERIOR_ROW_TOL), rows
    lhs = Pi * m[:, None]
    rhs = (P * w[:, None]).T
    assert np.all(np.abs(lhs - rhs) <= JOINT_IDENTITY_RTOL * np.abs(rhs) + 1e-300)


def _as_vector(values, size: int, what: str) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.ndim == 0:
        v = np.full(size, float(v))
    if v.ndim != 1 or v.size != size:
        raise LengthMismatch(f"{what} has length {v.size}, expected {size}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{what} has non-finite entries")
    return v


def as_param_function(values, model: ModelSpace) -> np.ndarray:
    """Validate ``values`` as a function on the parameter grid.

    A scalar is broadcast to a constant function.
    """
    return _as_vector(values, model.K, "parameter function")


def as_sample_function(values, model: ModelSpace) -> np.ndarray:
    """Validate ``values`` as an estimator on the sample space."""
    return _as_vector(values, model.N, "sample function")


def inner_pi(f, g, model: ModelSpace) -> float:
    """Prior-weighted inner product of two parameter functions."""
    f = as_param_function(f, model)
    g = as_param_function(g, model)
    return float(np.dot(f * g, model.weights))


def inner_m(d1, d2, model: ModelSpace) -> float:
    """Marginal-weighted inner product of two estimators."""
    d1 = as_sample_function(d1, model)
    d2 = as_sample_function(d2, model)
    return float(np.dot(d1 * d2, model.marginal))


def norm_pi(f, model: ModelSpace) -> float:
    return math.sqrt(max(inner_pi(f, f, model), 0.0))


def norm_m(d, model: ModelSpace) -> float:
    return math.sqrt(max(inner_m(d, d, model), 0.0))


# -- builtin models ---------------------------------------------------------


def binomial_likelihood(nodes, n: int) -> np.ndarray:
    """``P[i, s] = C(n, s) theta_i^s (1 - theta_i)^(n - s)``."""
    theta = np.asarray(nodes, dtype=float)[:, None]
    s = np.arange(n + 1)
    coeff = np.array([math.comb(n, k) for k in s], dtype=float)
    return coeff * theta ** s * (1.0 - theta) ** (n - s)


def example1_likelihood(nodes) -> np.ndarray:
    theta = np.asarray(nodes, dtype=float)
    return np.column_stack([
        np.full_like(theta, 0.5),
        (1.0 - theta) / 4.0,
        (1.0 + theta) / 4.0,
    ])


def binomial_model(n: int, grid: ParameterGrid) -> ModelSpace:
    if n < 1:
        raise ValueError("binomial size must be at least 1")
    return build_model(
        grid, SampleSpace.range(n + 1), binomial_likelihood(grid.nodes, n),
        family="binomial", family_size=n,
    )


BUILTIN_NAMES = ("example1", "bernoulli", "binomial")


def builtin_model(name: str, grid_size: int = 64, n: Optional[int] = None,
                  grid: Optional[ParameterGrid] = None) -> ModelSpace:
    """One of the builtin models under a uniform prior on (0, 1).

    Parameters
    ----------
    name : {"example1", "bernoulli", "binomial"}
        ``"binomial"`` needs ``n``; it may also be written ``"binomial(3)"``
        or ``"binomial:3"``.  ``"bernoulli"`` is ``binomial`` with ``n = 1``.
    grid_size : int
        Number of Gauss-Legendre nodes, at least 2.
    grid : ParameterGrid, optional
        Replaces the default uniform Gauss-Legendre grid (non-uniform priors).
    """
    name, n = _split_builtin_name(name, n)
    if grid is None:
        if grid_size < 2:
            raise InvalidGrid("grid_size must be at least 2")
        grid = ParameterGrid.gauss_legendre(grid_size)
    if name == "example1":
        return build_model(
            grid, SampleSpace((1, 2, 3)), example1_likelihood(grid.nodes),
            family="example1",
        )
    if name == "bernoulli":
        return binomial_model(1, grid)
    if n is None:
        raise UnknownName("binomial needs a size, e.g. binomial(3)")
    return binomial_model(n, grid)


def _split_builtin_name(name: str, n):
    raw = name.strip().lower()
    for sep in ("(", ":"):
        if sep in raw:
            head, _, tail = raw.partition(sep)
            try:
                n = int(tail.rstrip(")"))
            except ValueError:
                raise UnknownName(f"bad builtin model name {name!r}") from None
            raw = head
            break
    if raw not in BUILTIN_NAMES:
        raise UnknownName(f"unknown builtin model {name!r}")
    if raw == "binomial" and n is not None and n < 1:
        raise UnknownName("binomial size must be at least 1")
    return raw, n


def random_model(rng: np.random.Generator, K: int, N: int,
                 concentration: float = 1.0) -> ModelSpace:
    """Random model with Dirichlet likelihood rows and a Dirichlet prior.

    Nodes are ``1..K``; used for property checks over model ensembles.
    """
    P = rng.dirichlet(np.full(N, concentration), size=K)
    P = np.maximum(P, 1e-300)
    P /= P.sum(axis=1, keepdims=True)
    w = rng.dirichlet(np.ones(K))
    w = np.maximum(w, 1e-12)
    w /= math.fsum(w)
    return build_model(
        ParameterGrid(np.arange(1.0, K + 1.0), w), SampleSpace.range(N), P,
    )


def polynomial_values(coeffs: Sequence[float], nodes) -> np.ndarray:
    """Evaluate ``c0 + c1 t + c2 t^2 + ...`` at ``nodes``."""
    return np.polynomial.polynomial.polyval(np.asarray(nodes, float), coeffs)
