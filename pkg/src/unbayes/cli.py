"""Command-line front end.

Exit status is 0 on success, 1 on a domain error (the error class name is
printed to stderr) and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import contextlib
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import consistency, decompose, operators, orthopoly, risk
from .errors import BadSpec, IdentityViolation, UnbayesError
from .io import dumps, fmt_float, parse_delta_spec, parse_gamma_spec, read_vector, resolve_model
from .model import ModelSpace, inner_pi

ADJOINT_RTOL = 1e-12
TOLERANCE_KEYS = {"rank", "estimability"}


@dataclass
class RunConfig:
    subcommand: str
    model_source: Optional[str]
    io_format: str
    tolerances: dict = field(default_factory=dict)
    seed: Optional[int] = None

    def __post_init__(self):
        unknown = set(self.tolerances) - TOLERANCE_KEYS
        if unknown:
            raise ValueError(f"unknown tolerance keys {sorted(unknown)}")
        for k, v in self.tolerances.items():
            if not v > 0:
                raise ValueError(f"tolerance {k} must be positive")


@dataclass
class Output:
    """A record of named values plus an optional table of rows."""

    record: dict
    table: Optional[list] = None
    message: Optional[str] = None


# -- rendering ----------------------------------------------------------------


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return str(v)


def render(out: Output, fmt: str) -> str:
    if fmt == "json":
        rec = dict(out.record)
        if out.table is not None:
            rec["rows"] = out.table
        return dumps(rec) + "\n"
    if fmt == "csv":
        if out.table is not None:
            cols = list(out.table[0]) if out.table else []
            lines = [",".join(cols)]
            lines += [",".join(_cell(row[c]) for c in cols) for row in out.table]
        else:
            lines = ["key,value"]
            for k, v in out.record.items():
                if isinstance(v, (list, tuple, np.ndarray)):
                    lines += [f"{k}[{i}],{_cell(x)}" for i, x in enumerate(v)]
                else:
                    lines.append(f"{k},{_cell(v)}")
        return "\n".join(lines) + "\n"
    return _render_text(out)


def _render_text(out: Output) -> str:
    lines = []
    if out.message:
        lines.append(out.message)
    # Long vectors are left to the table.
    scalars = {k: v for k, v in out.record.items()
               if not isinstance(v, (list, tuple, np.ndarray, dict)) or len(v) <= 8}
    width = max((len(k) for k in scalars), default=0)
    lines += [f"{k:<{width}}  {_short(v)}" for k, v in scalars.items()]
    if out.table:
        cols = list(out.table[0])
        cells = [[_short(r[c]) for c in cols] for r in out.table]
        widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
        lines.append("")
        lines.append("  ".join(c.rjust(w) for c, w in zip(cols, widths)))
        lines += ["  ".join(x.rjust(w) for x, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def _short(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{v:.10g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_short(x) for x in v) + "]"
    return str(v)


# -- commands -----------------------------------------------------------------


def _model(args) -> ModelSpace:
    model = resolve_model(args.model, args.grid_size)
    if args.prior and args.prior != "uniform":
        model = model.with_prior(model.weights * _density(args.prior, model))
    return model


def _density(spec: str, model: ModelSpace) -> np.ndarray:
    if spec.startswith("file:"):
        values = read_vector(spec[5:])
        if values.size != model.K:
            raise BadSpec(f"prior file has {values.size} values, grid has {model.K}")
        return values / model.weights
    return parse_gamma_spec(spec, model)


def _param_rows(model, **cols):
    return [{"theta": float(t), **{k: float(v[i]) for k, v in cols.items()}}
            for i, t in enumerate(model.nodes)]


def _sample_rows(model, **cols):
    return [{"x": lab, **{k: float(v[j]) for k, v in cols.items()}}
            for j, lab in enumerate(model.samples.labels)]


def cmd_apply_u(args):
    model = _model(args)
    gamma = operators.apply_U(parse_delta_spec(args.delta, model), model)
    return Output({"values": gamma.tolist()}, _param_rows(model, value=gamma))


def cmd_apply_b(args):
    model = _model(args)
    delta = operators.apply_B(parse_gamma_spec(args.gamma, model), model)
    return Output({"values": delta.tolist()}, _sample_rows(model, value=delta))


def cmd_adjoint_check(args):
    model = _model(args)
    rng = np.random.default_rng(args.seed)
    worst_abs = worst_rel = 0.0
    for _ in range(args.trials):
        gamma = rng.standard_normal(model.K)
        delta = rng.standard_normal(model.N)
        res = operators.adjointness_residual(gamma, delta, model)
        lhs = inner_pi(gamma, operators.apply_U(delta, model), model)
        worst_abs = max(worst_abs, res)
        worst_rel = max(worst_rel, res / (1.0 + abs(lhs)))
    passed = worst_rel <= ADJOINT_RTOL
    rec = {"trials": args.trials, "max_residual": worst_abs,
           "max_scaled_residual": worst_rel, "tolerance": ADJOINT_RTOL, "passed": passed}
    if not passed:
        raise IdentityViolation(f"adjointness residual {worst_rel:.3g} exceeds {ADJOINT_RTOL}")
    return Output(rec, message="max residual <= 1e-12")


def cmd_subspace(args):
    model = _model(args)
    basis = operators.SUBSPACES[args.which](model, args.rank_tol)
    rec = {"subspace": args.which, "side": basis.side, "rank": basis.rank,
           "tol_used": basis.tol_used, "vectors": basis.vectors.T.tolist()}
    cols = {f"v{k + 1}": basis.vectors[:, k] for k in range(basis.rank)}
    rows = (_param_rows if basis.side == operators.PARAM_SPACE else _sample_rows)(model, **cols)
    return Output(rec, rows)


def cmd_decompose(args):
    model = _model(args)
    if args.side == "param":
        if args.gamma is None:
            raise BadSpec("--side param needs --gamma")
        whole = parse_gamma_spec(args.gamma, model)
        res = decompose.decompose_param(whole, model, args.rank_tol)
        rows = _param_rows(model, whole=whole, in_range=res.part_in_range,
                           in_null=res.part_in_null)
    else:
        if args.delta is None:
            raise BadSpec("--side sample needs --delta")
        whole = parse_delta_spec(args.delta, model)
        res = decompose.decompose_sample(whole, model, args.rank_tol)
        rows = _sample_rows(model, whole=whole, in_range=res.part_in_range,
                            in_null=res.part_in_null)
    rec = {"side": res.side, "pythagoras_residual": res.pythagoras_residual,
           "cross_inner": res.cross_inner}
    if args.side == "param":
        degree = operators.numerical_rank(model, args.rank_tol) - 1
        coeffs, misfit = decompose.fit_polynomial(res.part_in_range, model, degree)
        rec["range_poly_coefficients"] = coeffs.tolist()
        rec["range_poly_misfit"] = misfit
    rec["part_in_range"] = res.part_in_range.tolist()
    rec["part_in_null"] = res.part_in_null.tolist()
    return Output(rec, rows)


def cmd_unbiased_solve(args):
    model = _model(args)
    gamma = parse_gamma_spec(args.gamma, model)
    delta = decompose.solve_unbiased(gamma, model, args.tol, args.rank_tol)
    rec = {"delta": delta.tolist(),
           "residual_norm": decompose.unbiased_residual(delta, gamma, model)}
    return Output(rec, _sample_rows(model, delta=delta))


def cmd_risk(args):
    model = _model(args)
    gamma = parse_gamma_spec(args.gamma, model)
    if args.delta is None:
        report = risk.theorem1_split(gamma, model, args.rank_tol)
    else:
        report = risk.estimator_report(parse_delta_spec(args.delta, model), gamma, model)
    return Output(report.as_dict())


def cmd_orthopoly(args):
    model = _model(args)
    basis = orthopoly.build_ortho_basis(model, args.degree)
    C = basis.coeff_matrix
    rows = [{"k": k, **{f"c{j}": float(C[k, j]) for j in range(args.degree + 1)}}
            for k in range(args.degree + 1)]
    rec = {"degree": args.degree, "gram_residual": basis.gram_residual,
           "coefficients": C.tolist()}
    return Output(rec, rows)


def cmd_bayes_expand(args):
    model = _model(args)
    gamma = parse_gamma_spec(args.gamma, model)
    degree = args.degree if args.degree is not None else (model.family_size or 0)
    basis = orthopoly.build_ortho_basis(model, degree)
    expansion = orthopoly.bayes_expansion(gamma, model, basis)
    direct = operators.apply_B(gamma, model)
    rec = {"coefficients": basis.coefficients(gamma, model).tolist(),
           "expansion": expansion.tolist(), "direct": direct.tolist(),
           "max_abs_diff": float(np.max(np.abs(expansion - direct)))}
    return Output(rec, _sample_rows(model, expansion=expansion, direct=direct))


def cmd_consistency(args):
    if args.mc:
        rows = consistency.monte_carlo_consistency(
            "theta", _int_list(args.n), args.reps, args.seed, args.grid_size,
            workers=args.workers)
    else:
        rows = consistency.exact_consistency_table("theta", args.nmax, args.grid_size)
    table = [r.as_dict() for r in rows]
    return Output({"mode": "mc" if args.mc else "exact"}, table)


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise BadSpec(f"bad integer list {text!r}") from None


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", default="builtin:example1",
                        help="builtin:<name> (example1, bernoulli, binomial(n)) or a model JSON file")
    common.add_argument("--grid-size", type=int, default=64)
    common.add_argument("--prior", default=None,
                        help="density on the grid relative to the model prior: "
                             "uniform, poly:..., expr:... or file:<weights>")
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv", "text"), default=None)
    common.add_argument("--tol", type=float, default=decompose.DEFAULT_ESTIMABILITY_TOL,
                        help="estimability tolerance (relative residual)")
    common.add_argument("--rank-tol", type=float, default=operators.DEFAULT_RANK_TOL)
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(prog="unbayes",
                                     description="Unbiasedness and Bayes operators on discrete models.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("apply-u", parents=[common], help="expectation function of an estimator")
    p.add_argument("--delta", required=True)
    p.set_defaults(func=cmd_apply_u)

    p = sub.add_parser("apply-b", parents=[common], help="Bayes estimator of a parameter function")
    p.add_argument("--gamma", required=True)
    p.set_defaults(func=cmd_apply_b)

    p = sub.add_parser("adjoint-check", parents=[common], help="random adjointness trials")
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(func=cmd_adjoint_check, default_format="text")

    p = sub.add_parser("subspace", parents=[common], help="range or null space basis")
    p.add_argument("which", choices=sorted(operators.SUBSPACES))
    p.set_defaults(func=cmd_subspace)

    p = sub.add_parser("decompose", parents=[common], help="orthogonal decomposition")
    p.add_argument("--side", choices=("param", "sample"), default="param")
    p.add_argument("--gamma")
    p.add_argument("--delta")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("unbiased-solve", parents=[common], help="minimum-norm unbiased estimator")
    p.add_argument("--gamma", required=True)
    p.set_defaults(func=cmd_unbiased_solve)

    p = sub.add_parser("risk", parents=[common], help="Bayes risk report")
    p.add_argument("--gamma", required=True)
    p.add_argument("--delta")
    p.set_defaults(func=cmd_risk)

    p = sub.add_parser("orthopoly", parents=[common], help="prior-orthonormal polynomials")
    p.add_argument("--degree", type=int, required=True)
    p.set_defaults(func=cmd_orthopoly, default_format="csv")

    p = sub.add_parser("bayes-expand", parents=[common],
                       help="Bayes estimator through the orthonormal expansion")
    p.add_argument("--gamma", required=True)
    p.add_argument("--degree", type=int)
    p.set_defaults(func=cmd_bayes_expand)

    p = sub.add_parser("consistency", parents=[common], help="sample mean vs Bayes rule table")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--mc", action="store_true")
    p.add_argument("--nmax", type=int, default=50)
    p.add_argument("--n", default="4,16,64", help="sample sizes for --mc")
    p.add_argument("--reps", type=int, default=100_000)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_consistency, default_format="csv")
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    fmt = args.format or getattr(args, "default_format", "json")
    try:
        RunConfig(args.command, args.model, fmt,
                  {"rank": args.rank_tol, "estimability": args.tol}, args.seed)
    except ValueError as exc:
        print(f"unbayes: error: {exc}", file=stderr)
        return 2
    try:
        out = args.func(args)
    except UnbayesError as exc:
        print(f"{exc.code}: {exc}", file=stderr)
        return 1
    except ValueError as exc:
        print(f"unbayes: error: {exc}", file=stderr)
        return 2
    text = render(out, fmt)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
