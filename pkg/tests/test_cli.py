import io
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from unbayes.cli import RunConfig, run
from unbayes.errors import BadSpec, LengthMismatch
from unbayes.io import (
    dumps,
    load_model,
    model_from_dict,
    parse_gamma_spec,
    read_vector,
    resolve_model,
    save_model,
    write_vector,
)
from unbayes.model import builtin_model


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def call_json(*argv):
    code, out, err = call(*argv, "--format", "json")
    assert code == 0, err
    return json.loads(out)


class TestSpecs:
    def test_poly(self, example1):
        t = example1.nodes
        np.testing.assert_allclose(parse_gamma_spec("poly:1,0,-1", example1), 1 - t * t, rtol=1e-15)

    def test_expr(self, example1):
        np.testing.assert_array_equal(parse_gamma_spec("expr:exp", example1), np.exp(example1.nodes))
        np.testing.assert_array_equal(parse_gamma_spec("expr:theta", example1), example1.nodes)

    @pytest.mark.parametrize("spec", ["sin", "expr:sin", "poly:", "poly:1,a", "bogus:1"])
    def test_bad(self, spec, example1):
        with pytest.raises(BadSpec):
            parse_gamma_spec(spec, example1)

    def test_file_wrong_length(self, tmp_path, example1):
        p = tmp_path / "gamma.json"
        p.write_text("[1, 2, 3]")
        with pytest.raises((BadSpec, LengthMismatch)):
            parse_gamma_spec(f"file:{p}", example1)


class TestRoundTrip:
    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=1, max_size=20),
           st.sampled_from(["json", "csv"]))
    def test_vector(self, tmp_path_factory, values, fmt):
        path = tmp_path_factory.mktemp("v") / f"v.{fmt}"
        write_vector(values, path, fmt)
        back = read_vector(path)
        np.testing.assert_array_equal(back, np.array(values))

    def test_model(self, tmp_path, example1):
        path = tmp_path / "m.json"
        save_model(example1, path)
        back = load_model(path)
        for a, b in [(example1.likelihood, back.likelihood), (example1.weights, back.weights),
                     (example1.nodes, back.nodes), (example1.marginal, back.marginal)]:
            np.testing.assert_allclose(a, b, atol=1e-15, rtol=0)
        assert back.samples.labels == (1, 2, 3)

    def test_dumps_17_digits(self):
        assert dumps([0.1]) == "[0.10000000000000001]"
        assert json.loads(dumps({"a": 1 / 3}))["a"] == 1 / 3


class TestModelFile:
    def test_builtin_doc(self):
        model = model_from_dict({"builtin": {"name": "binomial", "params": {"n": 2, "grid_size": 16}}})
        assert model.N == 3 and model.K == 16

    def test_gauss_legendre_doc(self):
        base = builtin_model("bernoulli", 8)
        doc = {"grid": {"kind": "gauss_legendre", "size": 8}, "prior": "uniform",
               "sample_labels": ["fail", "success"], "likelihood": base.likelihood.tolist()}
        model = model_from_dict(doc)
        np.testing.assert_allclose(model.marginal, [0.5, 0.5], atol=1e-14)

    def test_density_prior_doc(self):
        base = builtin_model("bernoulli", 8)
        doc = {"grid": {"kind": "gauss_legendre", "size": 8},
               "prior": (2 * base.nodes).tolist(), "likelihood": base.likelihood.tolist()}
        model = model_from_dict(doc)
        # Prior 2t: P(X = 1) = E theta = 2/3.
        np.testing.assert_allclose(model.marginal, [1 / 3, 2 / 3], atol=1e-14)

    def test_explicit_nodes(self):
        doc = {"theta_nodes": [0.25, 0.75], "prior": "uniform",
               "likelihood": [[0.75, 0.25], [0.25, 0.75]]}
        np.testing.assert_allclose(model_from_dict(doc).marginal, [0.5, 0.5])

    def test_missing_fields(self):
        with pytest.raises(BadSpec):
            model_from_dict({"theta_nodes": [0.5]})

    def test_resolve(self):
        assert resolve_model("builtin:binomial(2)", 8).N == 3


class TestCommands:
    def test_unknown_subcommand(self):
        code, _, err = call("bogus")
        assert code == 2 and "invalid choice" in err

    def test_missing_argument(self):
        assert call("apply-b")[0] == 2

    def test_bad_rank_tol(self):
        assert call("subspace", "null-u", "--rank-tol", "0.5")[0] == 2

    def test_apply_b(self):
        rec = call_json("apply-b", "--model", "builtin:bernoulli", "--gamma", "expr:exp")
        np.testing.assert_allclose(rec["values"], [2 * (np.e - 2), 2], atol=1e-10)

    def test_apply_u(self):
        rec = call_json("apply-u", "--delta", "vec:1,-1,-1")
        np.testing.assert_allclose(rec["values"], 0, atol=1e-15)

    def test_adjoint_check(self):
        code, out, _ = call("adjoint-check", "--model", "builtin:example1", "--trials", "100")
        assert code == 0 and "max residual <= 1e-12" in out

    def test_decompose_coefficients(self):
        rec = call_json("decompose", "--model", "builtin:bernoulli", "--gamma", "expr:exp")
        np.testing.assert_allclose(rec["range_poly_coefficients"], [4 * np.e - 10, 18 - 6 * np.e], atol=1e-8)
        assert rec["pythagoras_residual"] <= 1e-10

    def test_decompose_sample(self):
        rec = call_json("decompose", "--side", "sample", "--delta", "vec:1,-1,-1")
        np.testing.assert_allclose(rec["part_in_null"], [1, -1, -1], atol=1e-12)

    def test_subspace(self):
        rec = call_json("subspace", "null-b")
        assert rec["rank"] == 62 and len(rec["vectors"]) == 62

    def test_unbiased_solve(self):
        rec = call_json("unbiased-solve", "--gamma", "expr:theta")
        np.testing.assert_allclose(rec["delta"], [0.5, -2.5, 1.5], atol=1e-10)

    def test_not_estimable_exit_1(self):
        code, _, err = call("unbiased-solve", "--model", "builtin:bernoulli", "--gamma", "expr:exp")
        assert code == 1 and err.startswith("NotEstimable")

    def test_wrong_length_file(self, tmp_path):
        p = tmp_path / "g.json"
        p.write_text("[1, 2]")
        code, _, err = call("apply-b", "--gamma", f"file:{p}")
        assert code == 1 and err.split(":")[0] in {"BadSpec", "LengthMismatch"}

    def test_risk(self):
        rec = call_json("risk", "--model", "builtin:bernoulli", "--gamma", "expr:exp")
        assert rec["direct_risk"] == pytest.approx(0.16268, abs=1e-5)
        assert rec["risk_vs_projection"] == pytest.approx(0.15873, abs=1e-5)

    def test_risk_with_delta(self):
        rec = call_json("risk", "--model", "builtin:bernoulli", "--gamma", "expr:theta",
                        "--delta", "vec:0,1")
        assert rec["direct_risk"] == pytest.approx(1 / 6, abs=1e-14)

    def test_orthopoly_csv(self):
        code, out, _ = call("orthopoly", "--degree", "2")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "k,c0,c1,c2"
        assert [float(x) for x in lines[2].split(",")[1:3]] == pytest.approx([-np.sqrt(3), 2 * np.sqrt(3)], abs=1e-10)

    def test_orthopoly_prior(self):
        rec = call_json("orthopoly", "--degree", "1", "--prior", "poly:0,2")
        # Prior 2t: mean 2/3, variance 1/18.
        c = rec["coefficients"][1]
        assert c[1] == pytest.approx(np.sqrt(18), abs=1e-10)
        assert c[0] == pytest.approx(-2 / 3 * np.sqrt(18), abs=1e-10)

    def test_bayes_expand(self):
        rec = call_json("bayes-expand", "--model", "builtin:binomial(2)", "--gamma", "poly:0,0,0,1")
        np.testing.assert_allclose(rec["expansion"], [1 / 20, 1 / 5, 1 / 2], atol=1e-9)

    def test_consistency_exact_csv(self):
        code, out, _ = call("consistency", "--exact", "--nmax", "5")
        lines = out.strip().splitlines()
        assert lines[0] == "n,risk_Un,risk_bayes,cross_norm,tau_over_n"
        n, ru, rb, cn, tau = map(float, lines[5].split(","))
        assert (n, ru, cn) == pytest.approx((5, 1 / 30, 1 / 105), abs=1e-12)

    def test_consistency_mc_deterministic(self, tmp_path):
        argv = ["consistency", "--mc", "--reps", "2000", "--n", "4,8", "--seed", "9"]
        a = call(*argv)[1]
        b = call(*argv, "--workers", "3")[1]
        assert a == b
        assert a.splitlines()[0].endswith("se_risk_Un,se_risk_bayes,se_cross_norm")

    def test_out_file(self, tmp_path):
        p = tmp_path / "o.json"
        code, out, _ = call("apply-u", "--delta", "vec:1,1,1", "--out", str(p), "--format", "json")
        assert code == 0 and out == ""
        np.testing.assert_allclose(json.loads(p.read_text())["values"], 1, rtol=1e-15)


def test_run_config_rejects_unknown_tolerance():
    with pytest.raises(ValueError):
        RunConfig("risk", None, "json", {"bogus": 1.0})
    with pytest.raises(ValueError):
        RunConfig("risk", None, "json", {"rank": -1.0})
