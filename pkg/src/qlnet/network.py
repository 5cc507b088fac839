"""Building-block declaration, validation and finite-fragment assembly.

A network is a ring (one axis) or torus (two axes) of identical linear
quantum stochastic blocks with nearest-neighbour coupling through field
channels and periodic boundary conditions.  The block is described by its
state-space matrices; neighbour coupling enters through per-axis output,
feedthrough and injection matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import cmatrix
from .errors import ConfigurationError, DimensionError, UnsupportedError

VALIDATION_TOL = 1e-12

__all__ = [
    "AxisCoupling",
    "BlockParams",
    "FragmentSpec",
    "validate",
    "assemble_chain_generator",
    "assemble_chain_noise",
    "dft_matrix",
]


def _lock(a):
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class AxisCoupling:
    """Neighbour coupling matrices along one lattice axis.

    ``c_plus``/``d_plus`` produce the output sent to the next site in the
    positive direction, ``e_plus`` injects the field arriving from the
    previous site; the minus family is the mirror channel.
    """

    c_plus: np.ndarray   # (m_plus, n)
    c_minus: np.ndarray  # (m_minus, n)
    d_plus: np.ndarray   # (m_plus, m0)
    d_minus: np.ndarray  # (m_minus, m0)
    e_plus: np.ndarray   # (n, m_plus)
    e_minus: np.ndarray  # (n, m_minus)

    def __post_init__(self):
        for name in ("c_plus", "c_minus", "d_plus", "d_minus", "e_plus", "e_minus"):
            object.__setattr__(self, name, _lock(getattr(self, name)))

    @property
    def m_plus(self):
        return self.c_plus.shape[0]

    @property
    def m_minus(self):
        return self.c_minus.shape[0]


@dataclass(frozen=True)
class BlockParams:
    """State-space data of one network block.

    ``a`` is the local drift, ``b`` the local noise gain against an
    ``m0``-dimensional vacuum field with Ito matrix ``I + i*j``, and
    ``couplings`` holds one :class:`AxisCoupling` per lattice axis (one
    for a chain, two for a torus).  ``theta`` is the real antisymmetric
    commutation matrix of the block variables; it may be omitted and
    solved for later.  Instances are immutable after construction.
    """

    a: np.ndarray            # (n, n)
    b: np.ndarray            # (n, m0)
    j: np.ndarray            # (m0, m0), antisymmetric
    couplings: tuple[AxisCoupling, ...]
    theta: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "a", _lock(self.a))
        object.__setattr__(self, "b", _lock(self.b))
        object.__setattr__(self, "j", _lock(self.j))
        object.__setattr__(self, "couplings", tuple(self.couplings))
        if self.theta is not None:
            object.__setattr__(self, "theta", _lock(self.theta))
        if len(self.couplings) not in (1, 2):
            raise DimensionError("couplings must list one or two axes")

    @property
    def n(self):
        return self.a.shape[0]

    @property
    def m0(self):
        return self.b.shape[1]

    @property
    def axes(self):
        return len(self.couplings)

    @property
    def m(self):
        """Total neighbour-channel dimension across axes and directions."""
        return sum(ax.m_plus + ax.m_minus for ax in self.couplings)

    @property
    def c(self):
        """Stacked neighbour output matrix, plus over minus, axis by axis."""
        return np.vstack([np.vstack([ax.c_plus, ax.c_minus]) for ax in self.couplings])

    @property
    def d(self):
        """Stacked neighbour feedthrough matrix, same row order as ``c``."""
        return np.vstack([np.vstack([ax.d_plus, ax.d_minus]) for ax in self.couplings])

    @property
    def e(self):
        """Stacked injection matrix, column order matching ``c`` rows."""
        return np.hstack([np.hstack([ax.e_plus, ax.e_minus]) for ax in self.couplings])

    @property
    def omega(self):
        """Field Ito matrix I + i*j."""
        return np.eye(self.m0) + 1j * self.j

    def require_theta(self):
        if self.theta is None:
            raise ConfigurationError(
                "block has no commutation matrix; supply theta or run solve_theta"
            )
        return self.theta

    def with_theta(self, theta):
        return replace(self, theta=theta)


@dataclass(frozen=True)
class FragmentSpec:
    """Finite fragment: N sites per axis, periodic boundary only."""

    sites: int
    axes: int = 1
    boundary: str = "periodic"

    def __post_init__(self):
        if self.sites < 1:
            raise ConfigurationError("fragment needs at least one site per axis")
        if self.axes not in (1, 2):
            raise ConfigurationError("only one or two axes are supported")
        if self.boundary != "periodic":
            raise UnsupportedError(
                "only periodic boundary conditions are supported"
            )

    def meets_coefficient_bound(self, n):
        """True when N is large enough for the coefficient-level
        realizability conditions to be equivalent to the per-frequency
        ones (N >= max(5, n+1))."""
        return self.sites >= max(5, n + 1)


def validate(params):
    """Check the structural invariants of a block, returning violations.

    An empty list means the block is well formed within ``1e-12``.
    Violations are data, not exceptions, so a caller can report all of
    them at once.
    """
    out = []
    n = params.a.shape[0]
    if params.a.ndim != 2 or params.a.shape[1] != n:
        out.append(f"A must be square, got shape {params.a.shape}")
        return out

    if params.b.ndim != 2 or params.b.shape[0] != n:
        out.append(f"B must have {n} rows, got shape {params.b.shape}")
    m0 = params.b.shape[1] if params.b.ndim == 2 else None

    if params.j.ndim != 2 or params.j.shape[0] != params.j.shape[1]:
        out.append(f"J must be square, got shape {params.j.shape}")
    elif m0 is not None and params.j.shape[0] != m0:
        out.append(f"J must have order {m0}, got {params.j.shape[0]}")
    else:
        if cmatrix.norm(params.j + params.j.T) > VALIDATION_TOL * (1 + cmatrix.norm(params.j)):
            out.append("J not antisymmetric")
        else:
            sr = cmatrix.spectral_radius(params.j)
            if sr > 1 + VALIDATION_TOL:
                out.append(f"spectral radius of J exceeds 1 (got {sr:.6g})")

    if params.theta is not None:
        th = params.theta
        if th.shape != (n, n):
            out.append(f"Theta must have shape {(n, n)}, got {th.shape}")
        elif cmatrix.norm(th + th.T) > VALIDATION_TOL * (1 + cmatrix.norm(th)):
            out.append("Theta not antisymmetric")

    for k, ax in enumerate(params.couplings):
        tag = f"axis {k}: "
        mp, mm = ax.m_plus, ax.m_minus
        checks = [
            ("C_plus", ax.c_plus, (mp, n)),
            ("C_minus", ax.c_minus, (mm, n)),
            ("D_plus", ax.d_plus, (mp, m0)),
            ("D_minus", ax.d_minus, (mm, m0)),
            ("E_plus", ax.e_plus, (n, mp)),
            ("E_minus", ax.e_minus, (n, mm)),
        ]
        for name, mat, shape in checks:
            if m0 is None and "D" in name:
                continue
            if mat.shape != shape:
                out.append(tag + f"{name} must have shape {shape}, got {mat.shape}")
    return out


def j_regime(params):
    """Report whether the field Ito matrix is strictly inside the unit
    disc ('strict') or touches it ('boundary')."""
    sr = cmatrix.spectral_radius(params.j)
    return "strict" if sr < 1 - VALIDATION_TOL else "boundary"


def _require_chain(params):
    if params.axes != 1:
        raise UnsupportedError("fragment assembly is implemented for one axis only")
    return params.couplings[0]


def _circulant_blocks(diag, sup, sub, sites):
    """Block circulant with ``diag`` on the diagonal, ``sup`` at (k, k+1)
    and ``sub`` at (k, k-1), indices modulo ``sites``."""
    r, c = diag.shape
    out = np.zeros((sites * r, sites * c))
    for k in range(sites):
        out[k * r:(k + 1) * r, k * c:(k + 1) * c] = diag
        kp = (k + 1) % sites
        km = (k - 1) % sites
        out[k * r:(k + 1) * r, kp * c:(kp + 1) * c] += sup
        out[k * r:(k + 1) * r, km * c:(km + 1) * c] += sub
    return out


def assemble_chain_generator(params, sites):
    """Full drift matrix of an N-site ring, order N*n.

    Eliminating the neighbour channels leaves a block-circulant matrix
    with the local drift on the diagonal, the backward coupling
    ``E_plus C_plus`` one block below and the forward coupling
    ``E_minus C_minus`` one block above, wrapped modulo N.  Conjugating
    by the block DFT diagonalizes it into the per-frequency drift
    matrices.
    """
    ax = _require_chain(params)
    if sites < 3:
        raise UnsupportedError(
            "ring assembly needs at least 3 sites so neighbour blocks do not collide"
        )
    return _circulant_blocks(
        params.a, ax.e_minus @ ax.c_minus, ax.e_plus @ ax.c_plus, sites
    )


def assemble_chain_noise(params, sites):
    """Full noise gain of an N-site ring, shape (N*n, N*m0).

    Row block k couples to the fields at sites k-1, k, k+1 through
    ``E_plus D_plus``, ``B`` and ``E_minus D_minus`` respectively.
    """
    ax = _require_chain(params)
    if sites < 3:
        raise UnsupportedError(
            "ring assembly needs at least 3 sites so neighbour blocks do not collide"
        )
    return _circulant_blocks(
        params.b, ax.e_minus @ ax.d_minus, ax.e_plus @ ax.d_plus, sites
    )


def dft_matrix(sites):
    """Unitary DFT matrix of order N, entries exp(-2 pi i l m / N)/sqrt(N)."""
    if sites < 1:
        raise DimensionError("DFT order must be positive")
    idx = np.arange(sites)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / sites) / np.sqrt(sites)
