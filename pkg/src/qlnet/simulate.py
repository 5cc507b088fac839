"""Time-domain second-moment integration.

Independent oracle for the frequency-domain steady-state formulas: the
per-mode second moments obey a Lyapunov ODE with constant forcing, and
the full finite fragment can be integrated densely as well, which checks
the mode decomposition end to end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError, ResourceLimitError
from .frequency import as_point, mode_matrices
from .network import assemble_chain_generator, assemble_chain_noise

FULLCHAIN_MAX_SITES = 64
FULLCHAIN_MAX_STATE = 8
STEADY_REL_TOL = 1e-9
STEADY_HORIZON_CAP = 1e4

__all__ = [
    "MomentTrajectory",
    "integrate_moments",
    "FullChainMoments",
    "fullchain_moments",
]


@dataclass(frozen=True)
class MomentTrajectory:
    """Trajectories of per-mode second-moment matrices.

    ``values`` maps each requested mode pair to an array of shape
    (len(times), n, n).  Diagonal pairs are Hermitian PSD along the whole
    trajectory up to integrator tolerance.
    """

    times: np.ndarray
    values: dict
    sites: int
    step_policy: str


def _rhs(left, right, forcing):
    n, m = forcing.shape

    def rhs(_, y):
        s = y.reshape(n, m)
        return (left @ s + s @ right.conj().T + forcing).reshape(-1)

    return rhs


def _integrate(left, right, forcing, s0, horizon, rtol, atol, num_points):
    n, m = forcing.shape
    t_eval = np.linspace(0.0, horizon, num_points)
    sol = solve_ivp(
        _rhs(left, right, forcing),
        (0.0, horizon),
        np.asarray(s0, dtype=complex).reshape(-1),
        method="RK45",
        rtol=rtol,
        atol=atol,
        t_eval=t_eval,
        dense_output=False,
    )
    if not sol.success:
        last = float(sol.t[-1]) if sol.t.size else 0.0
        raise IntegrationError(
            f"moment integration failed: {sol.message}", last_good_time=last
        )
    return sol.t, sol.y.T.reshape(len(sol.t), n, m)


def _steady_horizon(left, right, forcing, s0, rtol, atol):
    """Integrate in windows until the flow stalls, returning the horizon."""
    n, m = forcing.shape
    s = np.asarray(s0, dtype=complex).reshape(n, m)
    rhs = _rhs(left, right, forcing)
    t, window = 0.0, 10.0
    while t < STEADY_HORIZON_CAP:
        rate = np.linalg.norm(rhs(t, s.reshape(-1)))
        if rate <= STEADY_REL_TOL * (1.0 + np.linalg.norm(s)):
            return max(t, window)
        sol = solve_ivp(
            rhs, (t, t + window), s.reshape(-1), method="RK45",
            rtol=rtol, atol=atol,
        )
        if not sol.success:
            raise IntegrationError(
                f"moment integration failed: {sol.message}", last_good_time=float(sol.t[-1])
            )
        s = sol.y[:, -1].reshape(n, m)
        t += window
    return STEADY_HORIZON_CAP


def integrate_moments(params, sites, initial, horizon=None, rtol=1e-9, atol=1e-12,
                      num_points=201):
    """Integrate the per-mode second-moment ODE for the requested pairs.

    ``initial`` maps mode pairs (z, v) to starting matrices (None for the
    vacuum-like zero moments); both members must lie on the size-N
    frequency grid.  Each pair evolves as
    ``S' = drift_z S + S drift_v* + N delta_{zv} noise_z Omega noise_v*``
    (with N^2 on the torus).  When ``horizon`` is None, integration runs
    until the flow rate falls below ``1e-9`` of the state norm, capped at
    ``1e4`` time units.
    """
    initial = {
        key: (np.zeros((params.n, params.n), dtype=complex) if s0 is None else s0)
        for key, s0 in initial.items()
    }
    keys = {}
    for (z, v) in initial:
        zp, vp = as_point(z, params.axes), as_point(v, params.axes)
        for point in (zp, vp):
            for comp in point:
                if abs(comp ** sites - 1.0) > 1e-9:
                    raise IntegrationError(
                        f"frequency component {comp} is not on the size-{sites} grid"
                    )
        keys[(z, v)] = (zp, vp)

    intensity = float(sites ** params.axes)
    values = {}
    times = None
    for (z, v), (zp, vp) in keys.items():
        mm_z = mode_matrices(params, zp)
        mm_v = mode_matrices(params, vp)
        same = all(abs(a - b) <= 1e-12 for a, b in zip(zp, vp))
        forcing = (
            intensity * mm_z.noise @ params.omega @ mm_v.noise.conj().T
            if same
            else np.zeros((params.n, params.n), dtype=complex)
        )
        span = horizon
        if span is None:
            span = _steady_horizon(mm_z.drift, mm_v.drift, forcing,
                                   initial[(z, v)], rtol, atol)
        t, traj = _integrate(
            mm_z.drift, mm_v.drift, forcing, initial[(z, v)], span, rtol, atol,
            num_points,
        )
        values[(z, v)] = traj
        times = t
    return MomentTrajectory(
        times=times if times is not None else np.zeros(0),
        values=values,
        sites=sites,
        step_policy=f"RK45 rtol={rtol:g} atol={atol:g}",
    )


@dataclass(frozen=True)
class FullChainMoments:
    """Dense second moments of a whole ring fragment.

    ``site_blocks[t, k]`` is the lag-0 moment matrix of site k at
    ``times[t]``; ``final`` is the full N*n by N*n moment matrix at the
    last time.
    """

    times: np.ndarray
    sites: int
    site_blocks: np.ndarray
    final: np.ndarray


def fullchain_moments(params, sites, horizon, num_points=101, rtol=1e-9, atol=1e-12):
    """Integrate the moment ODE of the assembled N-site ring.

    Dense path, capped at 64 sites and state size 8.  The steady lag-0
    site covariance equals the average of the per-mode steady
    covariances, which makes this an independent check of the mode
    decomposition.
    """
    if sites > FULLCHAIN_MAX_SITES or params.n > FULLCHAIN_MAX_STATE:
        raise ResourceLimitError(
            f"dense fragment integration capped at {FULLCHAIN_MAX_SITES} sites "
            f"and state size {FULLCHAIN_MAX_STATE}"
        )
    gen = assemble_chain_generator(params, sites)
    gain = assemble_chain_noise(params, sites)
    ito = np.kron(np.eye(sites), params.omega)
    forcing = gain @ ito @ gain.T

    t, traj = _integrate(
        gen.astype(complex), gen.astype(complex), forcing,
        np.zeros_like(forcing), horizon, rtol, atol, num_points,
    )
    n = params.n
    blocks = np.empty((len(t), sites, n, n), dtype=complex)
    for k in range(sites):
        blocks[:, k] = traj[:, k * n:(k + 1) * n, k * n:(k + 1) * n]
    return FullChainMoments(times=t, sites=sites, site_blocks=blocks, final=traj[-1])
