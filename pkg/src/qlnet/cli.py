"""Command-line front end.

Verbs: check-pr, cost, spectrum, simulate, gen, sweep.  Results are
persisted as JSON and CSV in the output directory; everything written is
deterministic for identical inputs (sorted JSON keys, 17-significant-
digit CSV floats, no timestamps).  Exit codes: 0 success/pass, 1 check
ran but failed, 2 input error, 3 stability error, 4 inconclusive
numerics.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import generators
from .errors import (
    ConfigurationError,
    DimensionError,
    InconclusiveError,
    IntegrationError,
    ModelFormatError,
    QlnetError,
    ResourceLimitError,
    SolvabilityError,
    StabilityError,
    UnsupportedError,
)
from . import cmatrix
from .frequency import mode_matrices, roots_of_unity
from .modelfile import ModelDocument, RunDefaults, load_model, save_model
from .network import j_regime
from .performance import cost_limit, finite_cost, steady_covariance
from .realizability import check_pr_algebraic, check_pr_frequency
from .simulate import integrate_moments

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_STABILITY = 3
EXIT_INCONCLUSIVE = 4

__all__ = ["main"]


def _fmt(x):
    return format(float(x), ".17g")


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            cells.append(cell if isinstance(cell, str) else _fmt(cell))
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _out_dir(args):
    os.makedirs(args.out_dir, exist_ok=True)
    return args.out_dir


def _print_report(report):
    kind = "per-frequency" if report.theorem == 1 else "coefficient-level"
    print(f"realizability check ({kind}), tolerance {report.tolerance:g}, "
          f"scale {report.scale:.6g}")
    width = max(len(lbl) for lbl, _ in report.residuals)
    for lbl, res in report.residuals:
        mark = "ok" if res <= report.tolerance * report.scale else "FAIL"
        print(f"  {lbl:<{width}}  {res:.6e}  {mark}")
    print(f"  verdict: {'PASS' if report.passed else 'FAIL'} "
          f"(worst: {report.worst_offender})")


def cmd_check_pr(args):
    doc = load_model(args.model)
    sites = args.N if args.N is not None else doc.run.sites
    tol = args.tol if args.tol is not None else doc.run.tol
    regime = j_regime(doc.params)
    where = "strictly inside" if regime == "strict" else "on the boundary of"
    print(f"field Ito matrix: spectral radius of J is {where} the unit disc")
    reports = []
    if args.theorem in ("1", "both"):
        reports.append(check_pr_frequency(doc.params, sites, tol=tol))
    if args.theorem in ("2", "both"):
        reports.append(check_pr_algebraic(doc.params, tol=tol))
    payload = {"N": sites, "reports": [r.as_dict() for r in reports]}
    _write_json(os.path.join(_out_dir(args), "check_pr.json"), payload)
    for r in reports:
        _print_report(r)
    return EXIT_PASS if all(r.passed for r in reports) else EXIT_FAIL


def _require_weights(doc):
    if doc.weights is None:
        raise ConfigurationError("model declares no weights; add a 'weights' section")
    return doc.weights


def _cost_rows(result):
    rows, running = [], 0.0
    for idx, (angles, value) in enumerate(result.samples):
        running += value
        rows.append(list(angles) + [value, running / (idx + 1)])
    return rows


def cmd_cost(args):
    doc = load_model(args.model)
    w = _require_weights(doc)
    size_spec = args.N if args.N is not None else str(doc.run.sites)
    if size_spec == "limit":
        result = cost_limit(doc.params, w)
        label = "limit"
    else:
        result = finite_cost(doc.params, w, int(size_spec))
        label = size_spec
    angle_cols = ["phi"] if doc.params.axes == 1 else ["phi1", "phi2"]
    _write_csv(
        os.path.join(_out_dir(args), "cost_modes.csv"),
        angle_cols + ["trace_value", "cumulative_estimate"],
        _cost_rows(result),
    )
    payload = {
        "N": label,
        "cost_per_site": result.cost,
        "points": result.points,
        "error_estimate": result.error_estimate,
        "converged": result.converged,
        "history": [[p, v] for p, v in result.history],
    }
    _write_json(os.path.join(_out_dir(args), "cost.json"), payload)
    print(f"cost per site ({'thermodynamic limit' if label == 'limit' else f'N={label}'}): "
          f"{result.cost:.12g}  [{result.points} grid points, "
          f"est. error {result.error_estimate:.3g}]")
    if not result.converged:
        return EXIT_INCONCLUSIVE
    return EXIT_PASS


def cmd_spectrum(args):
    doc = load_model(args.model)
    params = doc.params
    if params.axes != 1:
        raise UnsupportedError("the spectrum listing is implemented for chains")
    grid = args.grid if args.grid is not None else doc.run.grid
    if grid < 8:
        raise ConfigurationError("spectrum grid must be at least 8")
    n = params.n
    theta = params.theta
    rows, any_unstable = [], False
    for z in roots_of_unity(grid):
        phi = float(np.angle(z) % (2 * np.pi))
        drift = mode_matrices(params, z).drift
        re_eigs = sorted(np.linalg.eigvals(drift).real.tolist())
        stable = re_eigs[-1] < 0
        if stable:
            s = steady_covariance(params, z)
            s_eigs = sorted(np.linalg.eigvalsh(cmatrix.hermitize(s)).tolist())
            dev = float(np.linalg.norm(s.imag - theta)) if theta is not None else float("nan")
        else:
            any_unstable = True
            s_eigs = [float("nan")] * n
            dev = float("nan")
        rows.append([phi] + s_eigs + re_eigs + [dev, 1.0 if stable else 0.0])

    header = (
        ["phi"]
        + [f"cov_eig_{k}" for k in range(1, n + 1)]
        + [f"drift_re_{k}" for k in range(1, n + 1)]
        + ["imag_dev_from_theta", "stable"]
    )
    _write_csv(os.path.join(_out_dir(args), "spectrum.csv"), header, rows)
    print(f"spectrum written for {grid} grid points "
          f"({'all stable' if not any_unstable else 'UNSTABLE modes flagged'})")
    return EXIT_STABILITY if any_unstable else EXIT_PASS


def cmd_simulate(args):
    doc = load_model(args.model)
    params = doc.params
    sites = args.N if args.N is not None else doc.run.sites
    horizon = args.horizon
    zs = list(roots_of_unity(sites)) if params.axes == 1 else None
    if zs is None:
        raise UnsupportedError("the simulate command is implemented for chains")
    initial = {(z, z): np.zeros((params.n, params.n), dtype=complex) for z in zs}
    traj = integrate_moments(params, sites, initial, horizon=horizon)

    steadies = {}
    for z in zs:
        try:
            steadies[z] = sites * steady_covariance(params, z)
        except StabilityError:
            steadies[z] = None

    rows = []
    for ti, t in enumerate(traj.times):
        row = [float(t)]
        for z in zs:
            row.append(float(np.linalg.norm(traj.values[(z, z)][ti])))
        for z in zs:
            target = steadies[z]
            row.append(
                float(np.linalg.norm(traj.values[(z, z)][ti] - target))
                if target is not None else float("nan")
            )
        rows.append(row)
    header = (["time"]
              + [f"moment_norm_{k}" for k in range(sites)]
              + [f"steady_gap_{k}" for k in range(sites)])
    _write_csv(os.path.join(_out_dir(args), "simulate.csv"), header, rows)
    print(f"simulated {sites} modes to t={traj.times[-1]:g} ({traj.step_policy})")
    return EXIT_PASS


def cmd_gen(args):
    axes = args.axes
    if args.kind == "random":
        params = generators.random_instance(
            args.seed, n=args.n, m0=args.m0, axes=axes
        )
    else:
        if axes == 1:
            params = generators.pr_instance(args.seed, n=args.n, m0=args.m0)
        else:
            params = generators.lattice_pr_instance(args.seed, n=args.n, m0=args.m0)
    weights = None
    if args.weights == "identity":
        from .performance import WeightSequence
        lag0 = 0 if axes == 1 else (0, 0)
        weights = WeightSequence.finite({lag0: np.eye(params.n)}, axes=axes)
    elif args.weights == "geometric":
        from .performance import WeightSequence
        rho = [0.5] * axes
        weights = WeightSequence.geometric(rho, np.eye(params.n), axes=axes)
    doc = ModelDocument(params=params, weights=weights, run=RunDefaults(seed=args.seed))
    path = os.path.join(_out_dir(args), "model.json")
    save_model(doc, path)
    print(f"model written to {path}")
    return EXIT_PASS


def cmd_sweep(args):
    doc = load_model(args.model)
    w = _require_weights(doc)
    sizes = [int(tok) for tok in (args.N or "8,16,32,64").split(",")]
    limit = cost_limit(doc.params, w)
    rows = []
    for sites in sizes:
        res = finite_cost(doc.params, w, sites)
        rows.append([float(sites), res.cost, limit.cost, abs(res.cost - limit.cost)])
    _write_csv(
        os.path.join(_out_dir(args), "sweep.csv"),
        ["N", "cost_per_site", "limit", "abs_error"],
        rows,
    )
    print("sweep:")
    for row in rows:
        print(f"  N={int(row[0]):>4d}  cost={row[1]:.12g}  |err|={row[3]:.3e}")
    if not limit.converged:
        return EXIT_INCONCLUSIVE
    return EXIT_PASS


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qlnet",
        description="Translation-invariant quantum network toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, model=True):
        if model:
            p.add_argument("--model", required=True, help="model JSON file")
        p.add_argument("--out-dir", default="out", help="output directory")

    p = sub.add_parser("check-pr", help="verify physical realizability")
    common(p)
    p.add_argument("--N", type=int, default=None, help="fragment size")
    p.add_argument("--theorem", choices=("1", "2", "both"), default="both",
                   help="per-frequency (1), coefficient-level (2) or both")
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=cmd_check_pr)

    p = sub.add_parser("cost", help="steady cost per site")
    common(p)
    p.add_argument("--N", default=None, help="fragment size or 'limit'")
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("spectrum", help="per-frequency covariance spectrum CSV")
    common(p)
    p.add_argument("--grid", type=int, default=None)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("simulate", help="integrate per-mode second moments")
    common(p)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--horizon", type=float, default=None,
                   help="integration horizon (default: run to steady state)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gen", help="generate a model file")
    common(p, model=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kind", choices=("random", "pr-consistent"), default="random")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--m0", type=int, default=2)
    p.add_argument("--axes", type=int, choices=(1, 2), default=1)
    p.add_argument("--weights", choices=("none", "identity", "geometric"),
                   default="identity")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("sweep", help="finite-size cost sweep against the limit")
    common(p)
    p.add_argument("--N", default=None, help="comma-separated fragment sizes")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ModelFormatError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConfigurationError, DimensionError, UnsupportedError, ResourceLimitError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except StabilityError as exc:
        print(f"stability error: {exc}", file=sys.stderr)
        return EXIT_STABILITY
    except (InconclusiveError, SolvabilityError, IntegrationError) as exc:
        print(f"inconclusive numerics: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except QlnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
