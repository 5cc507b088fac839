"""Physical-realizability checks and the commutation-matrix solver.

A block of the network represents a genuine open quantum harmonic
oscillator only if its state-space matrices preserve the canonical
commutation relations of the dynamic variables and keep state and output
commuting.  Two equivalent formulations are implemented: a per-frequency
check over the N-th roots of unity, and a frequency-free coefficient
check (five matrix equations for a chain) that is equivalent to the
former for every fragment with N >= max(5, n+1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import cmatrix
from .errors import DimensionError, UnsupportedError
from .frequency import as_point, aps_table, mode_matrices, roots_of_unity, torus_points

DEFAULT_PR_TOL = 1e-8

__all__ = [
    "PRReport",
    "check_pr_frequency",
    "check_pr_algebraic",
    "ThetaFit",
    "solve_theta",
    "commutator_flow",
    "DEFAULT_PR_TOL",
]


@dataclass(frozen=True)
class PRReport:
    """Outcome of a realizability check.

    ``residuals`` lists (label, Frobenius norm) for every condition
    family; the check passes when each residual is at most
    ``tolerance * scale`` with ``scale = 1 + max input matrix norm``.
    ``worst_offender`` names the frequency point or coefficient order of
    the largest residual.
    """

    theorem: int
    residuals: list = field(default_factory=list)
    passed: bool = False
    worst_offender: str = ""
    tolerance: float = DEFAULT_PR_TOL
    scale: float = 1.0

    def as_dict(self):
        return {
            "theorem": self.theorem,
            "conditions": [{"label": lbl, "residual": float(r)} for lbl, r in self.residuals],
            "passed": self.passed,
            "worst_offender": self.worst_offender,
            "tolerance": self.tolerance,
            "scale": self.scale,
        }


def _param_scale(params, include_theta=True):
    mats = [params.a, params.b, params.j]
    if include_theta and params.theta is not None:
        mats.append(params.theta)
    for ax in params.couplings:
        mats += [ax.c_plus, ax.c_minus, ax.d_plus, ax.d_minus, ax.e_plus, ax.e_minus]
    return 1.0 + max(cmatrix.norm(m) for m in mats)


def _finish(theorem, residuals, tol, scale):
    worst = max(residuals, key=lambda item: item[1])[0] if residuals else ""
    passed = all(r <= tol * scale for _, r in residuals)
    return PRReport(
        theorem=theorem,
        residuals=residuals,
        passed=passed,
        worst_offender=worst,
        tolerance=tol,
        scale=scale,
    )


def ccr_drift(params, z):
    """Drift of the state commutation matrix at frequency z (scaled by
    1/(2iN)): drift Theta + Theta drift* + noise J noise*.  Vanishing at
    every grid frequency is the state-commutation half of realizability.
    """
    theta = params.require_theta()
    mm = mode_matrices(params, z)
    return mm.drift @ theta + theta @ mm.drift.conj().T + mm.noise @ params.j @ mm.noise.conj().T


def output_coupling(params, z):
    """Forcing of the state-output commutator at frequency z:
    Theta C^T + noise J D^T."""
    theta = params.require_theta()
    mm = mode_matrices(params, z)
    return theta @ params.c.T + mm.noise @ params.j @ params.d.T


def check_pr_frequency(params, sites, tol=DEFAULT_PR_TOL):
    """Per-frequency realizability check over the size-N frequency grid.

    Confirms that the state commutation matrix is conserved at every grid
    frequency and that, for each power p = 0..n-1 of the mode drift, the
    grid sum of drift^p times the state-output forcing vanishes.  On two
    axes the grid is the N x N torus grid.
    """
    theta = params.require_theta()
    if sites < 1:
        raise DimensionError("need at least one site")
    points = (
        list(roots_of_unity(sites)) if params.axes == 1 else torus_points(sites)
    )

    residuals = []
    worst_r, worst_idx = -1.0, 0
    forcings = []
    drifts = []
    for idx, z in enumerate(points):
        r = cmatrix.norm(ccr_drift(params, z))
        if r > worst_r:
            worst_r, worst_idx = r, idx
        drifts.append(mode_matrices(params, z).drift)
        forcings.append(output_coupling(params, z))
    residuals.append((f"ccr-drift[grid={worst_idx}]", worst_r))

    n = params.n
    powers = [np.eye(n, dtype=complex) for _ in points]
    for p in range(n):
        acc = np.zeros((n, params.m), dtype=complex)
        for k in range(len(points)):
            acc = acc + powers[k] @ forcings[k]
            powers[k] = powers[k] @ drifts[k]
        residuals.append((f"xy-moment[p={p}]", cmatrix.norm(acc)))

    return _finish(1, residuals, tol, _param_scale(params))


def _algebraic_conditions(params, theta):
    """The five coefficient-level condition families of a chain block.

    Returns labelled matrices whose vanishing is realizability:
    three Laurent coefficients (orders 0, -1, -2) of the commutation
    drift, the order-0 state-output condition, and the order-p output
    conditions driven by the Laurent blocks of drift powers.
    """
    ax = params.couplings[0]
    a, b, j = params.a, params.b, params.j
    epdp = ax.e_plus @ ax.d_plus
    emdm = ax.e_minus @ ax.d_minus
    epcp = ax.e_plus @ ax.c_plus

    out = [
        (
            "ccr-lag0",
            a @ theta + theta @ a.T + b @ j @ b.T
            + epdp @ j @ epdp.T + emdm @ j @ emdm.T,
        ),
        (
            "ccr-lag-1",
            epcp @ theta + theta @ ax.c_minus.T @ ax.e_minus.T
            + b @ j @ ax.d_minus.T @ ax.e_minus.T + epdp @ j @ b.T,
        ),
        ("ccr-lag-2", epdp @ j @ emdm.T),
        ("xy-order0", theta @ params.c.T + b @ j @ params.d.T),
    ]
    for p in range(1, params.n):
        table = aps_table(params, p)
        out.append(
            (
                f"xy-order{p}",
                (table.block(1) @ epdp + table.block(-1) @ emdm) @ j @ params.d.T,
            )
        )
    return out


def check_pr_algebraic(params, tol=DEFAULT_PR_TOL):
    """Coefficient-level realizability check for a chain block.

    Five families of matrix equations on the block data; equivalent to
    :func:`check_pr_frequency` for every fragment with
    N >= max(5, n+1).  Smaller fragments can mask a nonzero order +-2
    coefficient by aliasing, so agreement is only guaranteed above that
    bound.
    """
    if params.axes != 1:
        raise UnsupportedError(
            "coefficient-level conditions are available for chains only"
        )
    theta = params.require_theta()
    conditions = _algebraic_conditions(params, theta)
    residuals = [(label, cmatrix.norm(mat)) for label, mat in conditions]
    return _finish(2, residuals, tol, _param_scale(params))


@dataclass(frozen=True)
class ThetaFit:
    """Least-squares commutation matrix fit.

    ``residual`` is the Frobenius norm of the stacked defect of the three
    theta-linear condition families at the fitted matrix.  The two
    theta-free families are reported separately in ``free_residuals``
    since no choice of theta can repair them.  ``degenerate`` flags a
    rank-deficient normal system (minimum-norm solution returned).
    """

    theta: np.ndarray
    residual: float
    degenerate: bool
    rank: int
    free_residuals: list


def _antisym_basis(n):
    basis = []
    for i in range(n):
        for k in range(i + 1, n):
            t = np.zeros((n, n))
            t[i, k] = 1.0
            t[k, i] = -1.0
            basis.append(t)
    return basis


def solve_theta(params, rank_tol=1e-10):
    """Best antisymmetric commutation matrix for a chain block.

    Minimizes the stacked squared residuals of the three theta-linear
    realizability conditions (commutation-drift orders 0 and -1 and the
    order-0 state-output condition) over real antisymmetric matrices.
    """
    if params.axes != 1:
        raise UnsupportedError("the commutation solver is available for chains only")
    ax = params.couplings[0]
    n = params.n
    a, b, j = params.a, params.b, params.j
    epdp = ax.e_plus @ ax.d_plus
    emdm = ax.e_minus @ ax.d_minus
    epcp = ax.e_plus @ ax.c_plus

    def linear_maps(th):
        return [
            a @ th + th @ a.T,
            epcp @ th + th @ ax.c_minus.T @ ax.e_minus.T,
            th @ params.c.T,
        ]

    consts = [
        b @ j @ b.T + epdp @ j @ epdp.T + emdm @ j @ emdm.T,
        b @ j @ ax.d_minus.T @ ax.e_minus.T + epdp @ j @ b.T,
        b @ j @ params.d.T,
    ]

    basis = _antisym_basis(n)
    if not basis:
        theta = np.zeros((n, n))
        resid = np.sqrt(sum(cmatrix.norm(c) ** 2 for c in consts))
        return ThetaFit(theta, float(resid), True, 0, _free_residuals(params, theta))

    columns = []
    for t in basis:
        columns.append(np.concatenate([m.reshape(-1) for m in linear_maps(t)]))
    design = np.column_stack(columns)
    rhs = -np.concatenate([c.reshape(-1) for c in consts])

    coeffs, _, rank, _ = np.linalg.lstsq(design, rhs, rcond=rank_tol)
    theta = sum(w * t for w, t in zip(coeffs, basis))
    residual = float(np.linalg.norm(design @ coeffs - rhs))
    degenerate = rank < len(basis)
    return ThetaFit(theta, residual, degenerate, int(rank), _free_residuals(params, theta))


def _free_residuals(params, theta):
    """Residuals of the theta-free condition families."""
    conditions = _algebraic_conditions(params, theta)
    keep = ("ccr-lag-2",) + tuple(f"xy-order{p}" for p in range(1, params.n))
    return [(label, cmatrix.norm(mat)) for label, mat in conditions if label in keep]


def commutator_flow(params, sites, z, v, t):
    """Commutation-matrix drift and state-output commutator at time t.

    Returns the constant drift of the cross commutation matrix between
    modes z and v (zero for distinct grid frequencies) and the
    closed-form state-output commutator
    ``2i N int_0^t exp(s drift_z) ds (Theta C^T + noise_z J D^T)``,
    with the time integral evaluated by quadrature so a singular mode
    drift is safe.
    """
    theta = params.require_theta()
    zp = as_point(z, params.axes)
    vp = as_point(v, params.axes)
    for point in (zp, vp):
        for comp in point:
            if abs(comp ** sites - 1.0) > 1e-9:
                raise DimensionError(
                    f"frequency component {comp} is not a root of unity of order {sites}"
                )
    same = all(abs(a - b) <= 1e-12 for a, b in zip(zp, vp))
    n = params.n

    if not same:
        return (
            np.zeros((n, n), dtype=complex),
            np.zeros((n, params.m), dtype=complex),
        )

    mm_z = mode_matrices(params, zp)
    mm_v = mode_matrices(params, vp)
    scale = 2j * (sites ** params.axes)
    drift = scale * (
        mm_z.drift @ theta + theta @ mm_v.drift.conj().T
        + mm_z.noise @ params.j @ mm_v.noise.conj().T
    )
    if t == 0:
        xy = np.zeros((n, params.m), dtype=complex)
    else:
        xy = scale * (cmatrix.expm_integral(mm_z.drift, t) @ output_coupling(params, zp))
    return drift, xy
