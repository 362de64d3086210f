"""Acceptance criteria, one test per criterion.

A PASS/FAIL line per criterion is printed in the pytest terminal summary
(see ``conftest.py``).  Tolerances are fixed here and never tuned.
"""

import io
import json
from math import comb, sqrt

import numpy as np

from unbayes.cli import run
from unbayes.consistency import exact_consistency_table, monte_carlo_consistency
from unbayes.decompose import decompose_param, decompose_sample, fit_polynomial
from unbayes.model import ParameterGrid, SampleSpace, build_model, builtin_model, inner_m, inner_pi
from unbayes.operators import (
    adjointness_residual,
    apply_B,
    apply_U,
    null_basis_B,
    null_basis_U,
    range_basis_B,
    range_basis_U,
)
from unbayes.orthopoly import bayes_expansion, build_ortho_basis, expansion_remainder
from unbayes.risk import bayes_risk, risk_via_bias

from conftest import random_ensemble

E = np.e
ENSEMBLE_SIZE = 500
ENSEMBLE_SEED = 20151101


def ensemble():
    return random_ensemble(ENSEMBLE_SIZE, seed=ENSEMBLE_SEED, max_k=64, max_n=10)


def cli_json(*argv):
    out, err = io.StringIO(), io.StringIO()
    assert run([*argv, "--format", "json"], stdout=out, stderr=err) == 0, err.getvalue()
    return json.loads(out.getvalue())


def test_criterion_1_example1_golden(example1):
    np.testing.assert_allclose(example1.marginal, [1 / 2, 1 / 8, 3 / 8], atol=1e-12, rtol=0)

    nu = null_basis_U(example1)
    assert nu.rank == 1
    z = np.array([1.0, -1.0, -1.0])
    assert np.max(np.abs(z - nu.project(z, example1))) <= 1e-10

    rb = range_basis_B(example1)
    assert rb.rank == 2
    rng = np.random.default_rng(1)
    for c, d in rng.uniform(-5, 5, size=(20, 2)):
        v = np.array([c, 2 * (c - d), 2 * (c + d) / 3])
        assert np.max(np.abs(v - rb.project(v, example1))) <= 1e-10

    nb = null_basis_B(example1)
    w, t = example1.weights, example1.nodes
    assert np.max(np.abs(nb.vectors.T @ w)) <= 1e-10
    assert np.max(np.abs(nb.vectors.T @ (w * t))) <= 1e-10


def test_criterion_2_example2_golden(bernoulli):
    t = bernoulli.nodes
    g = np.exp(t)
    np.testing.assert_allclose(apply_B(g, bernoulli), [2 * (E - 2), 2], atol=1e-10, rtol=0)

    split = decompose_param(g, bernoulli)
    coeffs, _ = fit_polynomial(split.part_in_range, bernoulli, 1)
    np.testing.assert_allclose(coeffs, [4 * E - 10, 18 - 6 * E], atol=1e-8, rtol=0)

    quad = decompose_param(1 - t * t, bernoulli)
    np.testing.assert_allclose(quad.part_in_range, 7 / 6 - t, atol=1e-10, rtol=0)
    np.testing.assert_allclose(quad.part_in_null, -1 / 6 + t - t * t, atol=1e-10, rtol=0)
    np.testing.assert_allclose(apply_B(1 - t * t, bernoulli), [5 / 6, 1 / 2], atol=1e-12, rtol=0)

    delta = apply_B(g, bernoulli)
    assert abs(bayes_risk(delta, g, bernoulli) - 0.16268) <= 1e-5
    assert abs(bayes_risk(delta, split.part_in_range, bernoulli) - 0.15873) <= 1e-5

    # Same numbers through the CLI alone.
    rec = cli_json("risk", "--model", "builtin:bernoulli", "--gamma", "expr:exp")
    assert abs(rec["direct_risk"] - 0.16268) <= 1e-5
    assert abs(rec["risk_vs_projection"] - 0.15873) <= 1e-5
    rec = cli_json("decompose", "--model", "builtin:bernoulli", "--gamma", "expr:exp")
    np.testing.assert_allclose(rec["range_poly_coefficients"], [4 * E - 10, 18 - 6 * E], atol=1e-8)


def test_criterion_3_adjointness():
    count = 0
    for model, g, d in ensemble():
        lhs = inner_pi(g, apply_U(d, model), model)
        assert adjointness_residual(g, d, model) <= 1e-12 * (1 + abs(lhs))
        count += 1
    assert count == ENSEMBLE_SIZE


def test_criterion_4_decompositions():
    for model, g, d in ensemble():
        p = decompose_param(g, model)
        assert abs(inner_pi(p.part_in_range, p.part_in_null, model)) <= 1e-10
        assert p.pythagoras_residual <= 1e-10 * (1 + inner_pi(g, g, model))
        s = decompose_sample(d, model)
        assert abs(inner_m(s.part_in_range, s.part_in_null, model)) <= 1e-10
        assert s.pythagoras_residual <= 1e-10 * (1 + inner_m(d, d, model))

        assert range_basis_U(model).rank + null_basis_B(model).rank == model.K
        assert range_basis_B(model).rank + null_basis_U(model).rank == model.N
        np.testing.assert_allclose(apply_B(g, model), apply_B(p.part_in_range, model),
                                   atol=1e-10, rtol=0)


def _informative_models(rng, count):
    # Rows with disjoint supports: every target has an unbiased Bayes rule.
    for _ in range(count):
        K = int(rng.integers(1, 8))
        sizes = rng.integers(1, 3, size=K)
        N = int(sizes.sum())
        P = np.zeros((K, N))
        col = 0
        for i, s in enumerate(sizes):
            P[i, col:col + s] = rng.dirichlet(np.ones(s))
            col += s
        w = rng.dirichlet(np.ones(K))
        yield build_model(ParameterGrid(np.arange(1.0, K + 1), w / w.sum()), SampleSpace.range(N), P), \
            rng.standard_normal(K)


def test_criterion_5_bias_identity():
    def check(model, g):
        delta = apply_B(g, model)
        direct = bayes_risk(delta, g, model)
        report = risk_via_bias(g, model)
        assert abs(report.bias_identity_risk - direct) <= 1e-10 * (1 + direct)
        if np.max(np.abs(apply_U(delta, model) - g)) <= 1e-10:
            assert direct <= 1e-9
            return 1
        return 0

    corollary_cases = 0
    for model, g, _ in ensemble():
        check(model, g)
        corollary_cases += check(model, np.full(model.K, g[0]))
    for model, g in _informative_models(np.random.default_rng(5), 50):
        corollary_cases += check(model, g)
    assert corollary_cases >= ENSEMBLE_SIZE


def test_criterion_6_theorem3_exact():
    rows = exact_consistency_table("theta", 50)
    assert [r.n for r in rows] == list(range(1, 51))
    for r in rows:
        n = r.n
        assert abs(r.risk_Un - 1 / (6 * n)) <= 1e-12
        assert abs(r.risk_bayes - 1 / (6 * (n + 2))) <= 1e-12
        assert abs(r.cross_norm - 1 / (3 * n * (n + 2))) <= 1e-12
        assert abs(r.risk_Un - (r.risk_bayes + r.cross_norm)) <= 1e-12 * r.risk_Un


def test_criterion_7_expansion_equivalence():
    rng = np.random.default_rng(7)
    for n in (1, 2, 3, 5):
        model = builtin_model("binomial", 64, n=n)
        basis = build_ortho_basis(model, n)
        for _ in range(50):
            g = rng.standard_normal(model.K)
            assert np.max(np.abs(bayes_expansion(g, model, basis) - apply_B(g, model))) <= 1e-9
            rem = expansion_remainder(g, basis, model)
            assert np.max(np.abs(apply_B(rem, model))) <= 1e-9

        ru = range_basis_U(model)
        P = basis.evaluate(model.nodes)
        w = model.weights
        for k in range(n + 1):
            assert np.max(np.abs(P[:, k] - ru.project(P[:, k], model))) <= 1e-9
        for k in range(ru.rank):
            v = ru.vectors[:, k]
            assert np.max(np.abs(v - P @ (P.T @ (w * v)))) <= 1e-9


def test_criterion_8_shifted_legendre():
    model = builtin_model("example1", 64)
    basis = build_ortho_basis(model, 4)
    for k in range(5):
        expected = np.zeros(5)
        expected[: k + 1] = [sqrt(2 * k + 1) * (-1) ** (k + j) * comb(k, j) * comb(k + j, j)
                             for j in range(k + 1)]
        assert np.max(np.abs(basis.coeff_matrix[k] - expected)) <= 1e-10


def test_criterion_9_monte_carlo():
    kwargs = dict(gamma="theta", n_list=(4, 16, 64), reps=100_000, seed=42)
    rows = monte_carlo_consistency(**kwargs, workers=1)
    for r in rows:
        exact = 1 / (3 * r.n * (r.n + 2))
        assert abs(r.cross_norm - exact) <= 3 * r.se_cross_norm
    again = monte_carlo_consistency(**kwargs, workers=4)
    assert [r.as_dict() for r in rows] == [r.as_dict() for r in again]
