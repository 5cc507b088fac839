"""Stability, steady covariances and mean-square cost per site.

The running cost of a fragment weighs pairs of sites through a block
Toeplitz sequence.  Once every mode drift is Hurwitz on the frequency
grid, the steady cost per site is an exact triangle-weighted sum over
the grid, and as the fragment grows it converges to a contour integral
of the weight spectral density against the per-mode steady covariance.
Quadrature on the circle (or torus) is uniform trapezoid with adaptive
doubling, which is spectrally accurate for these smooth periodic
integrands.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import cmatrix
from .errors import ConfigurationError, DimensionError, InconclusiveError, StabilityError
from .frequency import as_point, mode_matrices

STABILITY_GRID_CAP_1D = 4096
STABILITY_GRID_CAP_2D = 256  # per axis; resource guard, see notes
QUADRATURE_CAP_1D = 8192
QUADRATURE_CAP_2D = 512      # per axis

__all__ = [
    "WeightSequence",
    "weight_spectrum",
    "fejer_truncation",
    "StabilityReport",
    "check_stability",
    "steady_covariance",
    "steady_ccr_solution",
    "CostResult",
    "finite_cost",
    "cost_limit",
    "spatial_covariance",
]


def _lag_key(lag, axes):
    key = (int(lag),) if np.isscalar(lag) else tuple(int(c) for c in lag)
    if len(key) != axes:
        raise DimensionError(f"lag {lag} does not match {axes} axes")
    return key


def _neg(key):
    return tuple(-c for c in key)


@dataclass(frozen=True)
class WeightSequence:
    """Block Toeplitz weighting sequence with enforced transpose symmetry.

    Either a finite family of blocks indexed by site separation, or the
    geometric family ``sigma_lag = prod_a rho_a^|lag_a| * base`` with
    each ``0 <= rho_a < 1`` and a symmetric base block.  The block at
    the negated lag is always the transpose of the block at the lag, and
    the sequence is absolutely summable by construction.
    """

    axes: int
    kind: str
    blocks: dict = field(default_factory=dict)
    rho: tuple = ()
    base: np.ndarray | None = None

    @classmethod
    def finite(cls, blocks, axes=1, tol=1e-12):
        """Finite-support weights from a mapping lag -> block.

        Missing negated lags are filled with transposes; if both members
        of a pair are given they must be transposes of each other.
        """
        full = {}
        for lag, mat in blocks.items():
            key = _lag_key(lag, axes)
            full[key] = np.array(mat, dtype=float)
        for key in list(full):
            nk = _neg(key)
            if nk in full:
                if cmatrix.norm(full[nk] - full[key].T) > tol * (1 + cmatrix.norm(full[key])):
                    raise ConfigurationError(
                        f"weight blocks at {key} and {nk} are not transposes"
                    )
            else:
                full[nk] = full[key].T.copy()
        return cls(axes=axes, kind="finite", blocks=full)

    @classmethod
    def geometric(cls, rho, base, axes=1, tol=1e-12):
        rho = (float(rho),) if np.isscalar(rho) else tuple(float(r) for r in rho)
        if len(rho) != axes:
            raise ConfigurationError(f"need one decay rate per axis, got {rho}")
        if any(not (0.0 <= r < 1.0) for r in rho):
            raise ConfigurationError("geometric decay rates must satisfy 0 <= rho < 1")
        base = np.array(base, dtype=float)
        if cmatrix.norm(base - base.T) > tol * (1 + cmatrix.norm(base)):
            raise ConfigurationError("geometric base block must be symmetric")
        return cls(axes=axes, kind="geometric", rho=rho, base=base)

    @property
    def dim(self):
        if self.kind == "finite":
            return next(iter(self.blocks.values())).shape[0]
        return self.base.shape[0]

    def block(self, lag):
        key = _lag_key(lag, self.axes)
        if self.kind == "finite":
            mat = self.blocks.get(key)
            if mat is None:
                return np.zeros((self.dim, self.dim))
            return mat
        factor = 1.0
        for r, c in zip(self.rho, key):
            factor *= r ** abs(c)
        return factor * self.base

    def tail_norm(self, sites):
        """Upper bound 2 sum_{l>=1} |sigma_l| min(1, l/N) on the uniform
        gap between the triangle-truncated and full spectra (chain only).
        """
        if self.axes != 1:
            raise ConfigurationError("tail bound implemented for one axis only")
        total, l = 0.0, 1
        while True:
            term = cmatrix.norm(self.block(l)) * min(1.0, l / sites)
            total += term
            if self.kind == "finite" and l > max(abs(k[0]) for k in self.blocks):
                break
            if self.kind == "geometric" and (term < 1e-17 * (1 + total) or self.rho[0] == 0):
                break
            l += 1
        return 2.0 * total


def _weight_support(w, sites=None):
    """Lags to include in a spectrum sum (finite support or truncated tail)."""
    if w.kind == "finite":
        lags = list(w.blocks.keys())
    else:
        cut = []
        for r in w.rho:
            if r == 0.0:
                cut.append(0)
            else:
                cut.append(max(1, int(np.ceil(np.log(1e-17) / np.log(r)))))
        if sites is not None:
            cut = [min(c, sites - 1) for c in cut]
        rng = [range(-c, c + 1) for c in cut]
        if w.axes == 1:
            lags = [(l,) for l in rng[0]]
        else:
            lags = [(l1, l2) for l1 in rng[0] for l2 in rng[1]]
    return lags


def weight_spectrum(w, z):
    """Spectral density of the weights, ``sum_lag z^{-lag} sigma_lag``.

    Hermitian for every unit-modulus z by the transpose symmetry of the
    sequence; the geometric family sums to a Poisson kernel times the
    base block.
    """
    point = as_point(z, w.axes)
    if w.kind == "geometric":
        factor = 1.0
        for r, za in zip(w.rho, point):
            phi = np.angle(za)
            factor *= (1 - r * r) / (1 - 2 * r * np.cos(phi) + r * r)
        return factor * w.base.astype(complex)
    acc = np.zeros((w.dim, w.dim), dtype=complex)
    for lag in _weight_support(w):
        phase = np.prod([za ** (-c) for za, c in zip(point, lag)])
        acc += phase * w.blocks[lag]
    return acc


def fejer_truncation(w, sites, z):
    """Triangle-weighted partial spectrum of order N.

    ``sum_{|lag_a| <= N-1} prod_a (1 - |lag_a|/N) z^{-lag} sigma_lag``;
    this is exactly the weight seen per site by the steady cost of an
    N-site fragment.
    """
    point = as_point(z, w.axes)
    dim = w.dim
    acc = np.zeros((dim, dim), dtype=complex)
    for lag in _weight_support(w, sites=sites):
        if any(abs(c) >= sites for c in lag):
            continue
        tri = np.prod([1.0 - abs(c) / sites for c in lag])
        phase = np.prod([za ** (-c) for za, c in zip(point, lag)])
        acc += tri * phase * w.block(lag)
    return acc


@dataclass(frozen=True)
class StabilityReport:
    """Grid-certified stability margin of the mode drift family.

    ``margin`` is minus the largest real eigenvalue part found on the
    densest grid used; stability on the whole circle (or torus) is
    certified only up to that grid, so ``conclusive`` is False when the
    refinement cap was reached before the margin settled.
    """

    stable: bool
    margin: float
    worst_point: tuple
    grid: int
    conclusive: bool


def check_stability(params, grid_size=8, settle_tol=1e-6, cap=None):
    """Sweep the mode drift eigenvalues over a doubling frequency grid.

    Doubling stops when the margin changes by less than ``settle_tol``
    between consecutive (nested) grids or the cap is reached.
    """
    if grid_size < 8:
        raise ConfigurationError("stability sweep needs a grid of at least 8")
    if cap is None:
        cap = STABILITY_GRID_CAP_1D if params.axes == 1 else STABILITY_GRID_CAP_2D

    def sweep(m):
        worst, worst_point = -np.inf, None
        fracs = [Fraction(k, m) for k in range(m)]
        if params.axes == 1:
            points = [(f,) for f in fracs]
        else:
            points = [(f1, f2) for f1 in fracs for f2 in fracs]
        for fp in points:
            z = tuple(np.exp(2j * np.pi * float(f)) for f in fp)
            top = float(np.linalg.eigvals(mode_matrices(params, z).drift).real.max())
            if top > worst:
                worst, worst_point = top, z
        return worst, worst_point

    m = grid_size
    top, point = sweep(m)
    while m < cap:
        m *= 2
        new_top, new_point = sweep(m)
        settled = abs(new_top - top) < settle_tol
        top, point = new_top, new_point
        if settled:
            return StabilityReport(
                stable=top < 0.0, margin=-top, worst_point=point, grid=m,
                conclusive=True,
            )
    return StabilityReport(
        stable=top < 0.0, margin=-top, worst_point=point, grid=m, conclusive=False,
    )


def steady_covariance(params, z):
    """Steady per-mode covariance: the Hermitian PSD solution of
    ``drift S + S drift* + noise (I + iJ) noise* = 0`` at frequency z.
    """
    mm = mode_matrices(params, z)
    if not cmatrix.is_hurwitz(mm.drift, margin=1e-12):
        raise StabilityError(
            f"mode drift is not Hurwitz at z={mm.point}", worst_point=mm.point
        )
    forcing = mm.noise @ params.omega @ mm.noise.conj().T
    return cmatrix.solve_sylvester(mm.drift, mm.drift.conj().T, forcing)


def steady_ccr_solution(params, z):
    """Companion solve with the antisymmetric part of the Ito matrix:
    ``drift Y + Y drift* + noise J noise* = 0``.

    The steady covariance decomposes as S = V + iY with V the solution
    for ``noise noise*``; on realizable blocks Y equals the commutation
    matrix at every frequency where the drift is Hurwitz.
    """
    mm = mode_matrices(params, z)
    if not cmatrix.is_hurwitz(mm.drift, margin=1e-12):
        raise StabilityError(
            f"mode drift is not Hurwitz at z={mm.point}", worst_point=mm.point
        )
    forcing = mm.noise @ params.j @ mm.noise.conj().T
    return cmatrix.solve_sylvester(mm.drift, mm.drift.conj().T, forcing)


@dataclass(frozen=True)
class CostResult:
    """Steady cost per site, finite fragment or thermodynamic limit.

    ``sites`` is None for the limit.  ``samples`` lists
    (angles, integrand value) over the final evaluation grid and
    ``mode_covariances`` retains the steady covariance at each of those
    grid points.  ``error_estimate`` is zero for exact finite-fragment
    sums and the last doubling difference for the limit.
    """

    sites: int | None
    cost: float
    points: int
    error_estimate: float
    converged: bool
    samples: list = field(default_factory=list)
    mode_covariances: list = field(default_factory=list)
    history: list = field(default_factory=list)


def _check_weight(params, w):
    if w.axes != params.axes:
        raise ConfigurationError(
            f"weights declare {w.axes} axes but the block has {params.axes}"
        )
    if w.dim != params.n:
        raise ConfigurationError(
            f"weight blocks are {w.dim}x{w.dim} but the state size is {params.n}"
        )


def _real_trace(a, b, tol=1e-8):
    val = complex(np.trace(a @ b))
    if abs(val.imag) > tol * (1.0 + abs(val.real)):
        raise ConfigurationError(f"cost integrand is not real: {val}")
    return val.real


def _grid_fractions(m, axes):
    fracs = [Fraction(k, m) for k in range(m)]
    if axes == 1:
        return [(f,) for f in fracs]
    return [(f1, f2) for f1 in fracs for f2 in fracs]


def _point(fp):
    return tuple(np.exp(2j * np.pi * float(f)) for f in fp)


def _angles(fp):
    return tuple(2.0 * np.pi * float(f) for f in fp)


def finite_cost(params, w, sites):
    """Exact steady cost per site of an N-site fragment.

    Averages the trace of the triangle-truncated weight spectrum against
    the steady per-mode covariance over the size-N frequency grid.
    Raises :class:`StabilityError` naming the first unstable mode.
    """
    _check_weight(params, w)
    if sites < 1:
        raise ConfigurationError("fragment needs at least one site per axis")
    fracs = _grid_fractions(sites, params.axes)

    worst_top, worst_z = -np.inf, None
    for fp in fracs:
        z = _point(fp)
        top = float(np.linalg.eigvals(mode_matrices(params, z).drift).real.max())
        if top > worst_top:
            worst_top, worst_z = top, z
    if worst_top >= 0.0:
        raise StabilityError(
            f"mode drift is not Hurwitz at z={worst_z}", worst_point=worst_z
        )

    total = 0.0
    samples, covs = [], []
    for fp in fracs:
        z = _point(fp)
        s = steady_covariance(params, z)
        val = _real_trace(fejer_truncation(w, sites, z), s)
        total += val
        samples.append((_angles(fp), val))
        covs.append((_angles(fp), s))
    count = len(fracs)
    return CostResult(
        sites=sites,
        cost=total / count,
        points=count,
        error_estimate=0.0,
        converged=True,
        samples=samples,
        mode_covariances=covs,
        history=[(count, total / count)],
    )


def _doubling_mean(evaluate, axes, start, tol, cap):
    """Adaptive doubling of the uniform circle/torus mean of ``evaluate``.

    ``evaluate(fraction point) -> value``; values are cached by exact
    rational grid position so refinements reuse earlier work.  Returns
    (value, points, estimate, history, final fractions, converged).
    """
    cache = {}

    def mean(m):
        fracs = _grid_fractions(m, axes)
        acc = None
        for fp in fracs:
            if fp not in cache:
                cache[fp] = evaluate(fp)
            acc = cache[fp] if acc is None else acc + cache[fp]
        return acc / len(fracs), fracs

    m = start
    value, fracs = mean(m)
    history = [(len(fracs), value)]
    while m < cap:
        m *= 2
        new_value, fracs = mean(m)
        history.append((len(fracs), new_value))
        gap = np.linalg.norm(np.atleast_1d(new_value - value))
        value = new_value
        if gap < tol:
            return value, len(fracs), float(gap), history, fracs, True
    return value, len(fracs), float(np.linalg.norm(
        np.atleast_1d(history[-1][1] - history[-2][1]))), history, fracs, False


def cost_limit(params, w, start_grid=16, tol=1e-9, cap=None, stability_grid=32):
    """Thermodynamic limit of the steady cost per site.

    Evaluates the circle (torus) mean of the trace of the full weight
    spectrum against the steady per-mode covariance, doubling the grid
    until successive values differ by less than ``tol``.  Stability over
    the whole circle is certified by :func:`check_stability` first.
    """
    _check_weight(params, w)
    if cap is None:
        cap = QUADRATURE_CAP_1D if params.axes == 1 else QUADRATURE_CAP_2D
    report = check_stability(params, grid_size=stability_grid)
    if not report.stable:
        raise StabilityError(
            f"mode drift is not Hurwitz at z={report.worst_point}",
            worst_point=report.worst_point,
        )
    if not report.conclusive:
        raise InconclusiveError(
            "stability sweep did not settle before its cap",
            last_values=(report.margin,),
        )

    cov_cache, val_cache = {}, {}

    def evaluate(fp):
        z = _point(fp)
        s = steady_covariance(params, z)
        cov_cache[fp] = s
        val_cache[fp] = _real_trace(weight_spectrum(w, z), s)
        return val_cache[fp]

    value, points, estimate, history, fracs, ok = _doubling_mean(
        evaluate, params.axes, start_grid, tol, cap
    )
    samples = [(_angles(fp), val_cache[fp]) for fp in fracs]
    covs = [(_angles(fp), cov_cache[fp]) for fp in fracs]
    return CostResult(
        sites=None,
        cost=float(value),
        points=points,
        error_estimate=estimate,
        converged=ok,
        samples=samples,
        mode_covariances=covs,
        history=[(p, float(v)) for p, v in history],
    )


def spatial_covariance(params, lag, start_grid=16, tol=1e-9, cap=None):
    """Fourier coefficient of the steady covariance map at a site lag.

    Lag zero is the per-site steady second-moment matrix in the
    thermodynamic limit; the coefficient at the negated lag is the
    adjoint of the coefficient at the lag.
    """
    if cap is None:
        cap = QUADRATURE_CAP_1D if params.axes == 1 else QUADRATURE_CAP_2D
    key = _lag_key(lag, params.axes)
    report = check_stability(params)
    if not report.stable:
        raise StabilityError(
            f"mode drift is not Hurwitz at z={report.worst_point}",
            worst_point=report.worst_point,
        )

    def evaluate(fp):
        z = _point(fp)
        s = steady_covariance(params, z)
        phase = np.prod([za ** c for za, c in zip(z, key)])
        return phase * s

    value, points, estimate, history, fracs, ok = _doubling_mean(
        evaluate, params.axes, start_grid, tol, cap
    )
    if not ok:
        raise InconclusiveError(
            "spatial covariance quadrature did not settle before its cap",
            last_values=tuple(float(np.linalg.norm(v)) for _, v in history[-2:]),
        )
    return value
