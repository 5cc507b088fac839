"""Seeded instance generators for models, tests and the CLI.

Random instances exercise the numerics with no structure beyond valid
dimensions.  Realizable instances are reverse-engineered so that every
realizability condition holds exactly: the local drift and noise gain
come from the standard oscillator parametrization (symmetric energy
matrix plus field coupling), the neighbour feedthroughs are rank one
with a shared right factor (which kills the theta-free conditions
identically), and the neighbour outputs are solved from the order-0
state-output condition.  Neighbour couplings are mirror symmetric by
default, which also makes the per-frequency steady covariance carry the
commutation matrix as its imaginary part at every frequency, not just on
average over the ring.
"""

from __future__ import annotations

import numpy as np

from . import performance
from .errors import ConfigurationError
from .network import AxisCoupling, BlockParams
from .realizability import solve_theta

__all__ = [
    "random_antisymmetric",
    "canonical_j",
    "random_instance",
    "pr_instance",
    "lattice_pr_instance",
    "stable_instance",
    "alias_instance",
    "scalar_ring_instance",
]


def random_antisymmetric(rng, n, min_det=1e-2):
    """Random antisymmetric matrix; invertible (redrawn) when n is even."""
    while True:
        g = rng.standard_normal((n, n))
        th = (g - g.T) / 2
        if n % 2 == 1 or abs(np.linalg.det(th)) > min_det:
            return th


def canonical_j(m0):
    """Block-diagonal antisymmetric J with 2x2 rotation blocks (unit radius)."""
    if m0 % 2:
        raise ConfigurationError("canonical J needs an even field dimension")
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.kron(np.eye(m0 // 2), block)


def _axis(rng, n, m0, m_plus, m_minus, coupling):
    return AxisCoupling(
        c_plus=coupling * rng.standard_normal((m_plus, n)),
        c_minus=coupling * rng.standard_normal((m_minus, n)),
        d_plus=coupling * rng.standard_normal((m_plus, m0)),
        d_minus=coupling * rng.standard_normal((m_minus, m0)),
        e_plus=coupling * rng.standard_normal((n, m_plus)),
        e_minus=coupling * rng.standard_normal((n, m_minus)),
    )


def random_instance(seed, n=2, m0=2, m_plus=1, m_minus=1, axes=1, coupling=0.3,
                    with_theta=True):
    """Unstructured random block with valid dimensions."""
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) - 1.5 * np.eye(n)
    b = rng.standard_normal((n, m0))
    if m0 % 2 == 0:
        j = canonical_j(m0)
    else:
        j = random_antisymmetric(rng, m0, min_det=0)
        radius = np.abs(np.linalg.eigvals(j)).max()
        if radius > 1.0:
            j = j / radius
    theta = random_antisymmetric(rng, n, min_det=0) if with_theta else None
    couplings = tuple(
        _axis(rng, n, m0, m_plus, m_minus, coupling) for _ in range(axes)
    )
    return BlockParams(a=a, b=b, j=j, couplings=couplings, theta=theta)


def _pr_parts(rng, n, m0, theta, energy_scale, field_scale):
    """Oscillator drift and noise gain consistent with ``theta``."""
    r = rng.standard_normal((n, n))
    r = energy_scale * (r + r.T) / 2
    m = field_scale * rng.standard_normal((m0, n))
    j = canonical_j(m0)
    b = 2.0 * theta @ m.T
    a = 2.0 * theta @ (r + m.T @ j @ m)
    return a, b, j


def _pr_axis(rng, n, m0, m_side, theta, b, j, d0, coupling, mirror):
    """One realizable coupling axis sharing the right factor ``d0``."""
    theta_inv = np.linalg.inv(theta)
    u_plus = coupling * rng.standard_normal(m_side)
    u_minus = u_plus.copy() if mirror else coupling * rng.standard_normal(m_side)
    d_plus = np.outer(u_plus, d0)
    d_minus = np.outer(u_minus, d0)
    c_plus = -d_plus @ j @ b.T @ theta_inv
    c_minus = -d_minus @ j @ b.T @ theta_inv
    e_plus = coupling * rng.standard_normal((n, m_side))
    e_minus = e_plus.copy() if mirror else coupling * rng.standard_normal((n, m_side))
    return AxisCoupling(
        c_plus=c_plus, c_minus=c_minus,
        d_plus=d_plus, d_minus=d_minus,
        e_plus=e_plus, e_minus=e_minus,
    )


def pr_instance(seed, n=2, m0=None, m_side=1, coupling=0.3, energy_scale=0.5,
                field_scale=0.8, mirror=True, free_tol=1e-10):
    """Realizable chain block, commutation matrix fitted by the solver.

    The construction guarantees a consistent fit exists; the returned
    block carries the fitted matrix, and generation fails if any
    theta-free residual is nonzero (it never is for this family).
    """
    if n % 2:
        raise ConfigurationError("realizable construction needs an even state size")
    rng = np.random.default_rng(seed)
    m0 = n if m0 is None else m0
    theta_draft = random_antisymmetric(rng, n)
    a, b, j = _pr_parts(rng, n, m0, theta_draft, energy_scale, field_scale)
    d0 = rng.standard_normal(m0)
    axis = _pr_axis(rng, n, m0, m_side, theta_draft, b, j, d0, coupling, mirror)
    params = BlockParams(a=a, b=b, j=j, couplings=(axis,))

    fit = solve_theta(params)
    bad_free = [(lbl, r) for lbl, r in fit.free_residuals if r > free_tol]
    if bad_free:
        raise ConfigurationError(
            f"constructed instance has nonzero theta-free residuals: {bad_free}"
        )
    if fit.residual > 1e-8 * (1.0 + np.linalg.norm(a)):
        raise ConfigurationError(
            f"commutation fit residual {fit.residual:.3e} is not consistent"
        )
    return params.with_theta(fit.theta)


def lattice_pr_instance(seed, n=2, m0=None, m_side=1, coupling=0.25,
                        energy_scale=0.5, field_scale=0.8, mirror=True):
    """Realizable torus block, realizable along each axis.

    Both axes share the rank-one right factor of the feedthroughs, so
    every cross-axis condition vanishes identically and the
    per-frequency check passes on the whole torus grid.
    """
    if n % 2:
        raise ConfigurationError("realizable construction needs an even state size")
    rng = np.random.default_rng(seed)
    m0 = n if m0 is None else m0
    theta = random_antisymmetric(rng, n)
    a, b, j = _pr_parts(rng, n, m0, theta, energy_scale, field_scale)
    d0 = rng.standard_normal(m0)
    axes = tuple(
        _pr_axis(rng, n, m0, m_side, theta, b, j, d0, coupling, mirror)
        for _ in range(2)
    )
    return BlockParams(a=a, b=b, j=j, couplings=axes, theta=theta)


def stable_instance(seed, factory, max_tries=400, margin=1e-3, grid=64, **kwargs):
    """First stable instance along the seed sequence seed, seed+1, ...

    ``factory`` is one of the instance builders above; stability of the
    mode drift over the frequency grid is certified with
    :func:`qlnet.performance.check_stability`.
    """
    for offset in range(max_tries):
        params = factory(seed + offset, **kwargs)
        report = performance.check_stability(params, grid_size=grid)
        if report.conclusive and report.stable and report.margin > margin:
            return params
    raise ConfigurationError(
        f"no stable instance found within {max_tries} seeds from {seed}"
    )


def alias_instance():
    """Chain block whose commutation drift cancels only on the 4-point grid.

    The order +-2 Laurent coefficients of the commutation drift are equal
    and opposite, so they alias away on every grid of size 4 (and the
    per-frequency check passes there) while the coefficient-level check
    fails.  Regression fixture for the minimum fragment size
    N >= max(5, n+1) required for equivalence of the two checks.
    """
    n = 2
    j = np.array([[0.0, 1.0], [-1.0, 0.0]])
    zeros = np.zeros((2, 2))
    axis = AxisCoupling(
        c_plus=zeros, c_minus=zeros,
        d_plus=np.eye(2), d_minus=-j,
        e_plus=np.eye(2), e_minus=np.eye(2),
    )
    return BlockParams(
        a=-np.eye(n), b=np.zeros((n, 2)), j=j, couplings=(axis,), theta=j.copy()
    )


def scalar_ring_instance(local=-3.0, hop=1.0):
    """Scalar chain with mode drift local + hop*(z + 1/z) and unit forcing.

    With the default values the drift is -3 + 2 cos(phi) on the circle,
    the steady variance is 1/(2(3 - 2 cos phi)) and the unit-weight cost
    limit is the Poisson integral 1/(2 sqrt(5)).
    """
    axis = AxisCoupling(
        c_plus=np.array([[1.0]]), c_minus=np.array([[1.0]]),
        d_plus=np.array([[0.0]]), d_minus=np.array([[0.0]]),
        e_plus=np.array([[hop]]), e_minus=np.array([[hop]]),
    )
    return BlockParams(
        a=np.array([[local]]),
        b=np.array([[1.0]]),
        j=np.zeros((1, 1)),
        couplings=(axis,),
        theta=np.zeros((1, 1)),
    )
