"""Model files, vector files and function specs used by the CLI.

Model file (JSON), either a builtin::

    {"builtin": {"name": "binomial", "params": {"n": 3, "grid_size": 64}}}

or explicit::

    {"theta_nodes": [...] | "grid": {"kind": "gauss_legendre", "size": K},
     "prior": "uniform" | [w_1, ..., w_K],
     "sample_labels": [...],
     "likelihood": [[P_11, ..., P_1N], ...]}

With explicit ``theta_nodes`` the prior array holds the masses themselves;
with a Gauss-Legendre grid it holds density values at the nodes, which are
multiplied by the quadrature weights.  Masses are never renormalized.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import BadSpec, LengthMismatch, UnknownName
from .model import (
    ModelSpace,
    ParameterGrid,
    SampleSpace,
    build_model,
    builtin_model,
    polynomial_values,
)

EXPRESSIONS = {
    "exp": np.exp,
    "one_minus_theta_sq": lambda t: 1.0 - t * t,
    "theta": lambda t: np.array(t, dtype=float),
}


# -- numbers ------------------------------------------------------------------


def fmt_float(x: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot serialize {x!r}")
    return format(x, ".17g")


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written by :func:`fmt_float`."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if all(isinstance(v, (int, float, np.floating, np.integer)) and not isinstance(v, bool)
               for v in seq):
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    if obj is None:
        return "null"
    return json.dumps(str(obj))


# -- vectors ------------------------------------------------------------------


def read_vector(path) -> np.ndarray:
    """Read a JSON array (or ``{"values": [...]}``) or a one-column CSV."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise BadSpec(f"cannot read {path}: {exc}") from None
    if path.suffix.lower() == ".json" or text.lstrip()[:1] in "[{":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise BadSpec(f"{path}: {exc}") from None
        if isinstance(data, dict):
            data = data.get("values")
        if not isinstance(data, list):
            raise BadSpec(f"{path}: expected a JSON array of numbers")
        try:
            return np.array([float(v) for v in data])
        except (TypeError, ValueError):
            raise BadSpec(f"{path}: non-numeric entry") from None
    return _read_csv_column(text, path)


def _read_csv_column(text: str, path) -> np.ndarray:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise BadSpec(f"{path}: empty file")
    col = len(rows[0]) - 1
    try:
        float(rows[0][col])
    except ValueError:
        header = [h.strip() for h in rows[0]]
        col = header.index("value") if "value" in header else len(header) - 1
        rows = rows[1:]
    try:
        return np.array([float(r[col]) for r in rows])
    except (ValueError, IndexError):
        raise BadSpec(f"{path}: non-numeric entry") from None


def write_vector(values, path, fmt: str | None = None) -> None:
    path = Path(path)
    fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "json")
    if fmt == "csv":
        path.write_text("value\n" + "".join(fmt_float(v) + "\n" for v in values))
    else:
        path.write_text(dumps([float(v) for v in values]) + "\n")


def _numbers(text: str, spec: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise BadSpec(f"bad number list in {spec!r}") from None


def parse_gamma_spec(spec: str, model: ModelSpace) -> np.ndarray:
    """Evaluate a parameter-function spec on the model's grid.

    Accepted forms: ``file:<path>``, ``poly:c0,c1,...`` (``c0 + c1 t + ...``),
    ``expr:<name>`` with ``name`` in ``exp``, ``one_minus_theta_sq``,
    ``theta``, and ``vec:v1,v2,...``.
    """
    kind, sep, rest = spec.partition(":")
    if not sep:
        raise BadSpec(f"function spec {spec!r} needs a prefix such as poly: or expr:")
    if kind == "poly":
        coeffs = _numbers(rest, spec)
        if not coeffs:
            raise BadSpec("poly: needs at least one coefficient")
        return polynomial_values(coeffs, model.nodes)
    if kind == "expr":
        if rest not in EXPRESSIONS:
            raise BadSpec(f"unknown expression {rest!r}; choose from {sorted(EXPRESSIONS)}")
        return np.asarray(EXPRESSIONS[rest](model.nodes), dtype=float)
    values = _explicit(kind, rest, spec)
    if values.size != model.K:
        raise LengthMismatch(f"{spec!r} has {values.size} values, grid has {model.K}")
    return values


def parse_delta_spec(spec: str, model: ModelSpace) -> np.ndarray:
    """Estimator spec: ``file:<path>`` or ``vec:d1,d2,...``."""
    kind, sep, rest = spec.partition(":")
    if not sep:
        raise BadSpec(f"estimator spec {spec!r} needs a file: or vec: prefix")
    values = _explicit(kind, rest, spec)
    if values.size != model.N:
        raise LengthMismatch(f"{spec!r} has {values.size} values, sample space has {model.N}")
    return values


def _explicit(kind, rest, spec):
    if kind == "file":
        return read_vector(rest)
    if kind == "vec":
        return np.array(_numbers(rest, spec))
    raise BadSpec(f"unknown spec kind {kind!r} in {spec!r}")


# -- models -------------------------------------------------------------------


def model_from_dict(doc: dict) -> ModelSpace:
    if not isinstance(doc, dict):
        raise BadSpec("model document must be a JSON object")
    if "builtin" in doc:
        b = doc["builtin"]
        if isinstance(b, str):
            return builtin_model(b)
        params = dict(b.get("params") or {})
        return builtin_model(b["name"], grid_size=int(params.pop("grid_size", 64)),
                             n=params.pop("n", None))
    try:
        P = np.array(doc["likelihood"], dtype=float)
    except KeyError:
        raise BadSpec("model document needs 'likelihood' or 'builtin'") from None
    except (TypeError, ValueError):
        raise BadSpec("likelihood must be a K x N array of numbers") from None
    prior = doc.get("prior", "uniform")
    if "theta_nodes" in doc:
        nodes = np.array(doc["theta_nodes"], dtype=float)
        if isinstance(prior, str):
            if prior != "uniform":
                raise BadSpec(f"unknown prior {prior!r}")
            weights = np.full(nodes.size, 1.0 / nodes.size)
        else:
            weights = np.array(prior, dtype=float)
        grid = ParameterGrid(nodes, weights)
    elif "grid" in doc:
        g = doc["grid"]
        if g.get("kind") != "gauss_legendre":
            raise UnknownName(f"unknown grid kind {g.get('kind')!r}")
        base = ParameterGrid.gauss_legendre(int(g["size"]))
        if isinstance(prior, str):
            if prior != "uniform":
                raise BadSpec(f"unknown prior {prior!r}")
            grid = base
        else:
            density = np.array(prior, dtype=float)
            if density.size != base.size:
                raise LengthMismatch("prior density length differs from grid size")
            grid = ParameterGrid(base.nodes, base.weights * density)
    else:
        raise BadSpec("model document needs 'theta_nodes' or 'grid'")
    labels = doc.get("sample_labels")
    samples = SampleSpace(labels) if labels is not None else SampleSpace.range(P.shape[-1])
    return build_model(grid, samples, P)


def load_model(path) -> ModelSpace:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise BadSpec(f"cannot read model file {path}: {exc}") from None
    return model_from_dict(doc)


def model_to_dict(model: ModelSpace) -> dict:
    return {
        "theta_nodes": model.nodes.tolist(),
        "prior": model.weights.tolist(),
        "sample_labels": list(model.samples.labels),
        "likelihood": model.likelihood.tolist(),
    }


def save_model(model: ModelSpace, path) -> None:
    Path(path).write_text(dumps(model_to_dict(model)) + "\n")


def resolve_model(source: str, grid_size: int = 64) -> ModelSpace:
    """``builtin:<name>`` (e.g. ``builtin:binomial(3)``) or a model file path."""
    if source.startswith("builtin:"):
        return builtin_model(source[len("builtin:"):], grid_size=grid_size)
    return load_model(source)
