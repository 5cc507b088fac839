"""Spatial-frequency machinery.

Under periodic boundary conditions the network decouples into independent
modes indexed by roots of unity (a pair of them on the torus).  This
module builds the per-mode state-space matrices, the diagonal phase-shift
coupling matrix, Laurent-coefficient extraction by circular sampling and
the recursive table of Laurent blocks of drift powers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import AliasingError, DimensionError, UnsupportedError

UNIT_MODULUS_TOL = 1e-12

__all__ = [
    "roots_of_unity",
    "torus_points",
    "as_point",
    "conj_point",
    "coupling_matrix",
    "ModeMatrices",
    "mode_matrices",
    "laurent_coeffs",
    "LaurentTable",
    "aps_table",
]


def roots_of_unity(sites):
    """The N-th roots of unity exp(2 pi i l / N) in index order l = 0..N-1."""
    if sites < 1:
        raise DimensionError("need at least one root")
    return np.exp(2j * np.pi * np.arange(sites) / sites)


def torus_points(sites):
    """All points of the N x N root-of-unity grid, row-major in (l1, l2)."""
    zs = roots_of_unity(sites)
    return [(z1, z2) for z1 in zs for z2 in zs]


def as_point(z, axes):
    """Normalize a frequency point to a tuple of unit-modulus components."""
    comps = (z,) if np.isscalar(z) or isinstance(z, complex) else tuple(z)
    if len(comps) != axes:
        raise DimensionError(
            f"frequency point has {len(comps)} components, expected {axes}"
        )
    comps = tuple(complex(c) for c in comps)
    for c in comps:
        if abs(abs(c) - 1.0) > UNIT_MODULUS_TOL:
            raise DimensionError(f"frequency component {c} is not unit modulus")
    return comps


def conj_point(z):
    """Componentwise inverse on the circle (equals complex conjugate)."""
    if np.isscalar(z) or isinstance(z, complex):
        return np.conj(complex(z))
    return tuple(np.conj(complex(c)) for c in z)


def coupling_matrix(z, dims):
    """Diagonal unitary relating neighbour inputs to outputs at frequency z.

    ``dims`` lists per-axis channel dimensions ``(m_plus, m_minus)``; the
    result is the direct sum over axes of
    ``diag(z_a^{-1} I_{m_plus}, z_a I_{m_minus})``.
    """
    comps = as_point(z, len(dims))
    blocks = []
    for za, (mp, mm) in zip(comps, dims):
        blocks.append(np.diag([1 / za] * mp + [za] * mm))
    return scipy.linalg.block_diag(*blocks) if blocks else np.zeros((0, 0))


@dataclass(frozen=True)
class ModeMatrices:
    """Per-frequency state-space pair: drift and noise gain at ``point``."""

    drift: np.ndarray  # (n, n) complex
    noise: np.ndarray  # (n, m0) complex
    point: tuple[complex, ...]


def mode_matrices(params, z):
    """Drift and noise-gain matrices of the decoupled mode at frequency z.

    drift = A + sum over axes of (z_a^{-1} E+ C+ + z_a E- C-), and the
    same sum with D in place of C and B in place of A for the noise gain.
    Evaluating at the componentwise conjugate point yields the entrywise
    conjugate matrices.
    """
    point = as_point(z, params.axes)
    n, m0 = params.n, params.m0
    drift = params.a.astype(complex)
    noise = params.b.astype(complex)
    for za, ax in zip(point, params.couplings):
        if ax.c_plus.shape[1] != n or ax.c_minus.shape[1] != n:
            raise DimensionError("coupling output matrices do not match state size")
        if ax.d_plus.shape[1] != m0 or ax.d_minus.shape[1] != m0:
            raise DimensionError("coupling feedthrough matrices do not match field size")
        drift = drift + (ax.e_plus @ ax.c_plus) / za + za * (ax.e_minus @ ax.c_minus)
        noise = noise + (ax.e_plus @ ax.d_plus) / za + za * (ax.e_minus @ ax.d_minus)
    return ModeMatrices(drift=drift, noise=noise, point=point)


def laurent_coeffs(samples, orders):
    """Recover Laurent coefficients from samples on the roots of unity.

    ``samples`` maps each of the N roots of unity to a matrix; the
    coefficient of order s is ``(1/N) sum_z z^{-s} samples[z]``.  The
    recovery is exact when the sampled map is a Laurent polynomial whose
    support lies within the requested orders and N exceeds twice the
    largest requested order; otherwise higher orders alias onto congruent
    ones modulo N.
    """
    orders = [int(s) for s in orders]
    if not orders:
        return {}
    span = max(abs(s) for s in orders)
    n_pts = len(samples)
    if n_pts <= 2 * span:
        raise AliasingError(
            f"{n_pts} sample points cannot resolve orders up to {span}; "
            f"need at least {2 * span + 1}",
            minimal_points=2 * span + 1,
        )
    out = {}
    items = list(samples.items())
    for s in orders:
        acc = None
        for z, mat in items:
            term = np.asarray(mat) * complex(z) ** (-s)
            acc = term if acc is None else acc + term
        out[s] = acc / n_pts
    return out


@dataclass(frozen=True)
class LaurentTable:
    """Laurent blocks of the p-th power of the chain mode drift.

    ``blocks[s]`` is the coefficient of z^s; entries vanish for |s| > p
    and ``sum_s z^s blocks[s]`` equals the drift power at every
    unit-modulus z.
    """

    order: int
    blocks: dict[int, np.ndarray]

    def block(self, s):
        if abs(s) > self.order:
            n = next(iter(self.blocks.values())).shape[0]
            return np.zeros((n, n))
        return self.blocks[s]

    def evaluate(self, z):
        """Sum of z^s * blocks[s]; equals the drift matrix power on the circle."""
        acc = None
        for s, mat in self.blocks.items():
            term = complex(z) ** s * mat
            acc = term if acc is None else acc + term
        return acc


def aps_table(params, order):
    """Laurent blocks of drift powers for a chain block, up to ``order``.

    Row p of the recursion plays z^s-coefficient bookkeeping for the p-th
    power of ``A + z^{-1} E+ C+ + z E- C-``: each new block is the local
    drift times the previous block plus the backward coupling times the
    block one order up and the forward coupling times the block one order
    down, starting from the identity.
    """
    if params.axes != 1:
        raise UnsupportedError("the Laurent block recursion is defined for chains only")
    if order < 0:
        raise ValueError("order must be nonnegative")
    ax = params.couplings[0]
    n = params.n
    back = ax.e_plus @ ax.c_plus    # multiplies z^{-1}
    fwd = ax.e_minus @ ax.c_minus   # multiplies z^{+1}

    prev = {0: np.eye(n)}
    for p in range(1, order + 1):
        cur = {}
        for s in range(-p, p + 1):
            acc = np.zeros((n, n))
            if abs(s) <= p - 1:
                acc = acc + params.a @ prev[s]
            if abs(s + 1) <= p - 1:
                acc = acc + back @ prev[s + 1]
            if abs(s - 1) <= p - 1:
                acc = acc + fwd @ prev[s - 1]
            cur[s] = acc
        prev = cur
    return LaurentTable(order=order, blocks=prev)
