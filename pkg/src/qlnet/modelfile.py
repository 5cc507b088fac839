"""Self-describing JSON model documents.

One human-editable format feeds every CLI command: block dimensions,
state-space matrices, an optional weighting sequence and run defaults.
Serialization is deterministic (sorted keys, shortest round-trip floats)
so regenerating a file from the same data is byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ModelFormatError
from .network import AxisCoupling, BlockParams, validate
from .performance import WeightSequence

SCHEMA_TAG = "qlnet-model/1"

__all__ = ["RunDefaults", "ModelDocument", "parse_model", "load_model", "model_to_dict", "save_model"]


@dataclass(frozen=True)
class RunDefaults:
    sites: int = 8
    grid: int = 64
    tol: float = 1e-8
    seed: int = 0


@dataclass(frozen=True)
class ModelDocument:
    params: BlockParams
    weights: WeightSequence | None
    run: RunDefaults


def _matrix(doc, section, name, violations, required=True):
    raw = doc.get(section, {}).get(name)
    if raw is None:
        if required:
            violations.append(f"missing matrix {section}.{name}")
        return None
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError):
        violations.append(f"matrix {section}.{name} is not a numeric array")
        return None
    if arr.ndim != 2:
        violations.append(f"matrix {section}.{name} must be 2-D")
        return None
    return arr


def _axis_matrices(doc, name, axes, violations):
    raw = doc.get("matrices", {}).get(name)
    if raw is None:
        violations.append(f"missing matrix list matrices.{name}")
        return None
    if not isinstance(raw, list) or len(raw) != axes:
        violations.append(f"matrices.{name} must list one matrix per axis ({axes})")
        return None
    out = []
    for k, entry in enumerate(raw):
        try:
            arr = np.array(entry, dtype=float)
        except (TypeError, ValueError):
            violations.append(f"matrices.{name}[{k}] is not a numeric array")
            return None
        if arr.ndim != 2:
            violations.append(f"matrices.{name}[{k}] must be 2-D")
            return None
        out.append(arr)
    return out


def _parse_weights(doc, violations):
    raw = doc.get("weights")
    if raw is None:
        return None
    axes = int(doc.get("dims", {}).get("axes", 1))
    kind = raw.get("kind")
    try:
        if kind == "finite":
            blocks = {}
            for key, mat in raw.get("blocks", {}).items():
                parts = [int(p) for p in str(key).split(",")]
                if len(parts) != axes:
                    raise ValueError(f"lag key {key!r} does not match {axes} axes")
                blocks[parts[0] if axes == 1 else tuple(parts)] = mat
            return WeightSequence.finite(blocks, axes=axes)
        if kind == "geometric":
            return WeightSequence.geometric(raw.get("rho"), raw.get("base"), axes=axes)
    except Exception as exc:  # collected, not raised, to report all problems
        violations.append(f"weights: {exc}")
        return None
    violations.append(f"weights.kind must be 'finite' or 'geometric', got {kind!r}")
    return None


def parse_model(doc):
    """Build a :class:`ModelDocument` from a parsed JSON object.

    Raises :class:`ModelFormatError` carrying every violation found, so
    a bad file is reported in one pass.
    """
    violations = []
    if doc.get("schema") != SCHEMA_TAG:
        violations.append(f"schema tag must be {SCHEMA_TAG!r}, got {doc.get('schema')!r}")

    dims = doc.get("dims", {})
    axes = dims.get("axes", 1)
    if axes not in (1, 2):
        violations.append(f"dims.axes must be 1 or 2, got {axes!r}")
        axes = 1

    run_raw = doc.get("run", {})
    boundary = run_raw.get("boundary", "periodic")
    if boundary != "periodic":
        violations.append(
            f"run.boundary must be 'periodic' (got {boundary!r}); "
            "other boundary conditions are not supported"
        )
    run = RunDefaults(
        sites=int(run_raw.get("N", 8)),
        grid=int(run_raw.get("grid", 64)),
        tol=float(run_raw.get("tol", 1e-8)),
        seed=int(run_raw.get("seed", 0)),
    )

    a = _matrix(doc, "matrices", "A", violations)
    b = _matrix(doc, "matrices", "B", violations)
    j = _matrix(doc, "matrices", "J", violations)
    theta = _matrix(doc, "matrices", "Theta", violations, required=False)

    axis_mats = {}
    for name in ("C_plus", "C_minus", "D_plus", "D_minus", "E_plus", "E_minus"):
        axis_mats[name] = _axis_matrices(doc, name, axes, violations)

    params = None
    if a is not None and b is not None and j is not None and all(
        v is not None for v in axis_mats.values()
    ):
        couplings = tuple(
            AxisCoupling(
                c_plus=axis_mats["C_plus"][k],
                c_minus=axis_mats["C_minus"][k],
                d_plus=axis_mats["D_plus"][k],
                d_minus=axis_mats["D_minus"][k],
                e_plus=axis_mats["E_plus"][k],
                e_minus=axis_mats["E_minus"][k],
            )
            for k in range(axes)
        )
        params = BlockParams(a=a, b=b, j=j, couplings=couplings, theta=theta)
        violations.extend(validate(params))
        declared = (dims.get("n"), dims.get("m0"))
        if declared[0] is not None and declared[0] != params.n:
            violations.append(f"dims.n = {declared[0]} does not match A ({params.n})")
        if declared[1] is not None and declared[1] != params.m0:
            violations.append(f"dims.m0 = {declared[1]} does not match B ({params.m0})")

    weights = _parse_weights(doc, violations)
    if weights is not None and params is not None and weights.dim != params.n:
        violations.append(
            f"weight blocks are {weights.dim}x{weights.dim} but the state size is {params.n}"
        )

    if violations:
        raise ModelFormatError(
            "model document failed validation:\n  " + "\n  ".join(violations),
            violations=violations,
        )
    return ModelDocument(params=params, weights=weights, run=run)


def load_model(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ModelFormatError(f"model file not found: {path}", violations=[f"missing file {path}"])
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}", violations=[str(exc)])
    return parse_model(doc)


def _mat_list(m):
    return [[float(x) for x in row] for row in np.asarray(m)]


def model_to_dict(doc):
    params, weights, run = doc.params, doc.weights, doc.run
    out = {
        "schema": SCHEMA_TAG,
        "dims": {
            "n": params.n,
            "m0": params.m0,
            "axes": params.axes,
            "m_plus": [ax.m_plus for ax in params.couplings],
            "m_minus": [ax.m_minus for ax in params.couplings],
        },
        "matrices": {
            "A": _mat_list(params.a),
            "B": _mat_list(params.b),
            "J": _mat_list(params.j),
            "C_plus": [_mat_list(ax.c_plus) for ax in params.couplings],
            "C_minus": [_mat_list(ax.c_minus) for ax in params.couplings],
            "D_plus": [_mat_list(ax.d_plus) for ax in params.couplings],
            "D_minus": [_mat_list(ax.d_minus) for ax in params.couplings],
            "E_plus": [_mat_list(ax.e_plus) for ax in params.couplings],
            "E_minus": [_mat_list(ax.e_minus) for ax in params.couplings],
        },
        "run": {
            "N": run.sites,
            "grid": run.grid,
            "tol": run.tol,
            "seed": run.seed,
            "boundary": "periodic",
        },
    }
    if params.theta is not None:
        out["matrices"]["Theta"] = _mat_list(params.theta)
    if weights is not None:
        if weights.kind == "finite":
            blocks = {}
            for lag, mat in sorted(weights.blocks.items()):
                key = ",".join(str(c) for c in lag)
                blocks[key] = _mat_list(mat)
            out["weights"] = {"kind": "finite", "blocks": blocks}
        else:
            out["weights"] = {
                "kind": "geometric",
                "rho": [float(r) for r in weights.rho],
                "base": _mat_list(weights.base),
            }
    return out


def save_model(doc, path):
    """Write the document as deterministic JSON (sorted keys, newline end)."""
    text = json.dumps(model_to_dict(doc), indent=2, sort_keys=True) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return text
