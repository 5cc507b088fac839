"""Dense complex-matrix kernel used by every other module.

Matrices are plain ``numpy.ndarray`` values (complex or real, 2-D).  All
functions are pure: they never mutate their arguments, so results are safe
to share across threads.  Norms are Frobenius throughout.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import DimensionError, SolvabilityError

# Default numerical policy: double precision with ~n^3 error growth headroom.
DEFAULT_RESIDUAL_TOL = 1e-10
DEFAULT_PSD_TOL = 1e-9
DEFAULT_HURWITZ_MARGIN = 1e-10

__all__ = [
    "adjoint",
    "hermitize",
    "norm",
    "expm",
    "expm_integral",
    "solve_sylvester",
    "spectral_radius",
    "is_hurwitz",
    "psd_check",
    "DEFAULT_RESIDUAL_TOL",
    "DEFAULT_PSD_TOL",
    "DEFAULT_HURWITZ_MARGIN",
]


def _as_matrix(m, name="matrix"):
    a = np.asarray(m)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {a.shape}")
    return a


def _as_square(m, name="matrix"):
    a = _as_matrix(m, name)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    return a


def adjoint(m):
    """Conjugate transpose."""
    return _as_matrix(m).conj().T


def hermitize(m):
    """Hermitian part (m + m*)/2."""
    a = _as_square(m)
    return (a + a.conj().T) / 2


def norm(m):
    """Frobenius norm."""
    return float(np.linalg.norm(m))


def expm(m):
    """Matrix exponential via scaling-and-squaring with Pade approximants.

    Delegates to ``scipy.linalg.expm`` (Al-Mohy/Higham), which implements
    exactly that algorithm with backward error near machine precision on
    well-conditioned inputs.
    """
    a = _as_square(m)
    return scipy.linalg.expm(a)


def expm_integral(m, t, tol=1e-12, max_panels=4096):
    """Integral of the matrix exponential, ``int_0^t exp(s*m) ds``.

    Computed by composite Gauss-Legendre quadrature with panel doubling,
    never by inverting ``m``, so a singular ``m`` is safe.  The integrand
    is entire, so convergence is fast; panels double until two successive
    levels agree to ``tol`` relative to the result norm.
    """
    a = _as_square(m).astype(complex)
    n = a.shape[0]
    if t < 0:
        raise ValueError("integration horizon must be nonnegative")
    if t == 0:
        return np.zeros((n, n), dtype=complex)

    nodes, weights = np.polynomial.legendre.leggauss(10)

    def level(panels):
        edges = np.linspace(0.0, t, panels + 1)
        total = np.zeros((n, n), dtype=complex)
        for left, right in zip(edges[:-1], edges[1:]):
            half = (right - left) / 2
            mid = (right + left) / 2
            for x, w in zip(nodes, weights):
                total += (w * half) * scipy.linalg.expm((mid + half * x) * a)
        return total

    panels = 1
    prev = level(panels)
    while panels <= max_panels:
        panels *= 2
        cur = level(panels)
        if norm(cur - prev) <= tol * (1.0 + norm(cur)):
            return cur
        prev = cur
    raise SolvabilityError(
        f"exponential integral did not converge within {max_panels} panels"
    )


def solve_sylvester(a, b, q, residual_tol=DEFAULT_RESIDUAL_TOL):
    """Solve A X + X B + Q = 0 by Kronecker vectorization.

    Dense and bit-reproducible; intended for block sizes n <= 50.  The
    spectra of A and -B must be disjoint, otherwise the vectorized system
    is singular and a :class:`SolvabilityError` is raised carrying the
    smallest singular value found.
    """
    a = _as_square(a, "A")
    b = _as_square(b, "B")
    q = _as_matrix(q, "Q")
    r, c = a.shape[0], b.shape[0]
    if q.shape != (r, c):
        raise DimensionError(f"Q must have shape {(r, c)}, got {q.shape}")

    # column-major vec: vec(AX) = (I (x) A) vec X, vec(XB) = (B^T (x) I) vec X
    k = np.kron(np.eye(c), a) + np.kron(b.T, np.eye(r))
    rhs = -q.reshape(-1, order="F").astype(complex)
    try:
        x = np.linalg.solve(k.astype(complex), rhs)
    except np.linalg.LinAlgError:
        smallest = float(np.linalg.svd(k, compute_uv=False)[-1])
        raise SolvabilityError(
            "Sylvester system is singular (spectra of A and -B intersect)",
            smallest_singular_value=smallest,
        ) from None
    sol = x.reshape((r, c), order="F")

    residual = norm(a @ sol + sol @ b + q)
    bound = residual_tol * (norm(a) + norm(b)) * norm(sol) + 1e-12 * norm(q)
    if residual > bound:
        smallest = float(np.linalg.svd(k, compute_uv=False)[-1])
        raise SolvabilityError(
            f"Sylvester residual {residual:.3e} exceeds bound {bound:.3e} "
            "(near spectrum clash)",
            smallest_singular_value=smallest,
        )
    return sol


def spectral_radius(m):
    """Largest eigenvalue modulus."""
    a = _as_square(m)
    if a.size == 0:
        return 0.0
    return float(np.abs(np.linalg.eigvals(a)).max())


def is_hurwitz(m, margin=DEFAULT_HURWITZ_MARGIN):
    """True iff every eigenvalue has real part < -margin."""
    a = _as_square(m)
    if margin <= 0:
        raise ValueError("margin must be positive")
    if a.size == 0:
        return True
    return bool(np.linalg.eigvals(a).real.max() < -margin)


def psd_check(m, tol=DEFAULT_PSD_TOL):
    """True iff m is Hermitian within tol and its Hermitian part is >= -tol.

    Checks ``min eig((m + m*)/2) >= -tol`` and ``|m - m*| <= tol * |m|``.
    """
    a = _as_square(m)
    if a.size == 0:
        return True
    if norm(a - a.conj().T) > tol * norm(a):
        return False
    eigs = np.linalg.eigvalsh(hermitize(a))
    return bool(eigs.min() >= -tol)
