"""Acceptance suite.

One test per criterion, each printing a single pass/fail line.  Run with
``pytest tests/test_acceptance.py -v -s`` to see the lines as they
complete.  Tolerances are fixed here, not configurable.
"""

import functools
import json
import time

import numpy as np
import pytest

import qlnet
from qlnet import cmatrix, generators
from qlnet.cli import main as cli_main
from qlnet.frequency import laurent_coeffs, mode_matrices, roots_of_unity, torus_points
from qlnet.network import AxisCoupling, BlockParams, assemble_chain_generator, dft_matrix
from qlnet.performance import WeightSequence, check_stability, cost_limit, finite_cost, steady_covariance
from qlnet.realizability import check_pr_algebraic, check_pr_frequency, commutator_flow
from qlnet.simulate import fullchain_moments, integrate_moments


def criterion(num, title):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"[criterion {num}] {title}: FAIL", flush=True)
                raise
            print(f"[criterion {num}] {title}: PASS", flush=True)
        return wrapper
    return deco


@criterion(1, "DFT block-diagonalization of the assembled ring")
def test_criterion_1_dft_diagonalization():
    started = time.perf_counter()
    for seed in range(25):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 7))
        sites = int(rng.integers(4, 13))
        params = generators.random_instance(seed, n=n)
        full = assemble_chain_generator(params, sites)
        f = np.kron(dft_matrix(sites), np.eye(n))
        t = f @ full @ f.conj().T
        for l, z in enumerate(roots_of_unity(sites)):
            blk = t[l * n:(l + 1) * n, l * n:(l + 1) * n]
            assert np.abs(blk - mode_matrices(params, z).drift).max() <= 1e-10
            t[l * n:(l + 1) * n, l * n:(l + 1) * n] = 0.0
        assert np.abs(t).max() <= 1e-10
    assert time.perf_counter() - started < 10.0


@criterion(2, "per-frequency and coefficient-level checks agree above the size bound")
def test_criterion_2_check_equivalence():
    started = time.perf_counter()
    instances = []
    for k in range(50):
        instances.append(generators.pr_instance(k, n=2 + 2 * (k % 3)))
    for k in range(50):
        instances.append(generators.random_instance(k, n=2 + k % 5))
    agreements = 0
    for params in instances:
        sites = max(5, params.n + 1)
        freq = check_pr_frequency(params, sites, tol=1e-8)
        alg = check_pr_algebraic(params, tol=1e-8)
        assert freq.passed == alg.passed
        agreements += 1
    assert agreements == 100

    witness = generators.alias_instance()
    assert check_pr_frequency(witness, 4, tol=1e-8).passed
    assert not check_pr_algebraic(witness, tol=1e-8).passed
    assert not check_pr_frequency(witness, 5, tol=1e-8).passed
    assert time.perf_counter() - started < 30.0


@criterion(3, "Laurent block recursion matches circular sampling and hand tables")
def test_criterion_3_laurent_block_oracle():
    for seed in range(10):
        rng = np.random.default_rng(1000 + seed)
        n = int(rng.integers(1, 6))
        params = generators.random_instance(1000 + seed, n=n)
        for p in range(n + 1):
            sites = 2 * p + 1
            samples = {
                z: np.linalg.matrix_power(mode_matrices(params, z).drift, p)
                for z in roots_of_unity(sites)
            }
            coeffs = laurent_coeffs(samples, range(-p, p + 1))
            table = qlnet.aps_table(params, p)
            for s in range(-p, p + 1):
                assert np.linalg.norm(coeffs[s] - table.block(s)) <= 1e-9

    # exact small-integer tables for orders one and two
    a = np.array([[2.0, 1.0], [0.0, 3.0]])
    back = np.array([[1.0, 1.0], [0.0, 2.0]])
    fwd = np.array([[0.0, 1.0], [3.0, 0.0]])
    axis = AxisCoupling(
        c_plus=back, c_minus=fwd,
        d_plus=np.zeros((2, 2)), d_minus=np.zeros((2, 2)),
        e_plus=np.eye(2), e_minus=np.eye(2),
    )
    params = BlockParams(a=a, b=np.eye(2), j=np.zeros((2, 2)), couplings=(axis,))
    t1 = qlnet.aps_table(params, 1)
    assert np.array_equal(t1.block(-1), back)
    assert np.array_equal(t1.block(0), a)
    assert np.array_equal(t1.block(1), fwd)
    t2 = qlnet.aps_table(params, 2)
    assert np.array_equal(t2.block(-2), back @ back)
    assert np.array_equal(t2.block(-1), a @ back + back @ a)
    assert np.array_equal(t2.block(0), fwd @ back + a @ a + back @ fwd)
    assert np.array_equal(t2.block(1), fwd @ a + a @ fwd)
    assert np.array_equal(t2.block(2), fwd @ fwd)


@criterion(4, "steady covariance carries the commutation matrix at every frequency")
def test_criterion_4_heisenberg_in_frequency():
    for k in range(25):
        params = generators.stable_instance(100 + 17 * k, generators.pr_instance,
                                            n=2 + 2 * (k % 2))
        for z in roots_of_unity(32):
            s = steady_covariance(params, z)
            assert np.linalg.norm(s.imag - params.theta) <= 1e-8
            assert cmatrix.psd_check(s, 1e-9)


@criterion(5, "thermodynamic limit: closed form and 1/N convergence rate")
def test_criterion_5_thermodynamic_limit():
    params = generators.scalar_ring_instance()
    res = cost_limit(params, WeightSequence.finite({0: np.eye(1)}))
    assert abs(res.cost - 1.0 / (2.0 * np.sqrt(5.0))) <= 1e-9

    for k in range(10):
        params = generators.stable_instance(5000 + 61 * k, generators.random_instance,
                                            coupling=0.25)
        w = WeightSequence.geometric(0.5, np.eye(params.n))
        lim = cost_limit(params, w)
        # rate constant fitted at N = 8 from the uniform truncation bound:
        # |cost_N - limit| <= max|S| * tail(N), and tail(8) * 8 / N bounds
        # tail(N) up to the (verified) cancellation margin
        smax = max(np.linalg.norm(s) for _, s in lim.mode_covariances)
        c_fit = 8.0 * smax * w.tail_norm(8)
        for sites in (16, 32, 64):
            err = abs(finite_cost(params, w, sites).cost - lim.cost)
            assert err <= c_fit / sites


@criterion(6, "time-domain integration reproduces the frequency-domain steady state")
def test_criterion_6_time_domain_oracle():
    for k in range(10):
        params = generators.stable_instance(2000 + 31 * k, generators.pr_instance)
        margin = check_stability(params).margin
        sites = 3
        zs = roots_of_unity(sites)
        traj = integrate_moments(
            params, sites,
            {(z, z): np.zeros((params.n, params.n)) for z in zs},
            horizon=40.0 / margin, num_points=9,
        )
        for z in zs:
            target = sites * steady_covariance(params, z)
            assert np.linalg.norm(traj.values[(z, z)][-1] - target) <= 1e-6

    for sites in (4, 8):
        params = generators.stable_instance(3000, generators.pr_instance)
        margin = check_stability(params).margin
        out = fullchain_moments(params, sites, horizon=40.0 / margin, num_points=5)
        per_mode = sum(steady_covariance(params, z)
                       for z in roots_of_unity(sites)) / sites
        lag0 = out.site_blocks[-1].mean(axis=0)
        assert np.linalg.norm(lag0 - per_mode) <= 1e-6


@criterion(7, "commutation structure is preserved exactly on realizable blocks")
def test_criterion_7_commutator_preservation():
    sites = 6
    # stable realizable blocks: an exponentially growing mode would
    # amplify the machine-epsilon forcing through exp(10 * drift)
    for seed in (0, 40, 80):
        params = generators.stable_instance(seed, generators.pr_instance, n=4)
        for z in roots_of_unity(sites):
            for t in (0.0, 0.5, 2.0, 5.0, 10.0):
                drift, xy = commutator_flow(params, sites, z, z, t)
                assert np.linalg.norm(drift) <= 1e-9
                assert np.linalg.norm(xy) <= 1e-9

    params = generators.stable_instance(0, generators.pr_instance, n=4)
    eps = 1e-3
    delta = np.zeros((4, 4))
    delta[0, 1], delta[1, 0] = 1.0, -1.0
    perturbed = params.with_theta(params.theta + eps * delta)
    worst, predicted = 0.0, 0.0
    for z in roots_of_unity(sites):
        drift, _ = commutator_flow(perturbed, sites, z, z, 0.0)
        dm = mode_matrices(params, z).drift
        worst = max(worst, np.linalg.norm(drift))
        predicted = max(
            predicted,
            2.0 * sites * eps * np.linalg.norm(dm @ delta + delta @ dm.conj().T),
        )
    assert worst >= 0.5 * predicted


def _batched_eig_lyapunov(drift, forcing):
    """Independent Lyapunov oracle: eigendecomposition, batched."""
    lam, vec = np.linalg.eig(drift)
    vec_inv = np.linalg.inv(vec)
    q_t = vec_inv @ forcing @ vec_inv.conj().transpose(0, 2, 1)
    denom = lam[:, :, None] + lam.conj()[:, None, :]
    s_t = -q_t / denom
    return vec @ s_t @ vec.conj().transpose(0, 2, 1)


def _riemann_torus_cost(params, w, grid=1000, chunk=50):
    """One-million point Riemann double sum of trace(weights * covariance)."""
    n = params.n
    z = np.exp(2j * np.pi * np.arange(grid) / grid)
    ax1, ax2 = params.couplings
    om = params.omega
    total = 0.0
    for start in range(0, grid, chunk):
        z1 = np.repeat(z[start:start + chunk], grid)
        z2 = np.tile(z, len(z[start:start + chunk]))
        drift = (params.a[None]
                 + z1[:, None, None] ** -1 * (ax1.e_plus @ ax1.c_plus)[None]
                 + z1[:, None, None] * (ax1.e_minus @ ax1.c_minus)[None]
                 + z2[:, None, None] ** -1 * (ax2.e_plus @ ax2.c_plus)[None]
                 + z2[:, None, None] * (ax2.e_minus @ ax2.c_minus)[None])
        noise = (params.b[None]
                 + z1[:, None, None] ** -1 * (ax1.e_plus @ ax1.d_plus)[None]
                 + z1[:, None, None] * (ax1.e_minus @ ax1.d_minus)[None]
                 + z2[:, None, None] ** -1 * (ax2.e_plus @ ax2.d_plus)[None]
                 + z2[:, None, None] * (ax2.e_minus @ ax2.d_minus)[None])
        forcing = noise @ om[None] @ noise.conj().transpose(0, 2, 1)
        cov = _batched_eig_lyapunov(drift, forcing)
        sigma = np.zeros((len(z1), n, n), dtype=complex)
        for lag, blk in w.blocks.items():
            sigma += (z1 ** (-lag[0]) * z2 ** (-lag[1]))[:, None, None] * blk[None]
        total += np.einsum("mij,mji->m", sigma, cov).real.sum()
    return total / grid ** 2


@criterion(8, "torus: realizability residuals vanish and the cost limit matches brute force")
def test_criterion_8_torus():
    base = np.array([[1.0, 0.2], [0.2, 1.0]])
    checked = 0
    seed = 0
    while checked < 5:
        assert seed < 200, "no stable torus instances found"
        params = generators.lattice_pr_instance(seed)
        seed += 1
        report = check_stability(params, grid_size=8)
        if not (report.conclusive and report.stable and report.margin > 1e-2):
            continue
        checked += 1

        freq = check_pr_frequency(params, 4, tol=1e-8)
        assert freq.passed
        assert max(r for _, r in freq.residuals) <= 1e-8

        w = WeightSequence.finite({(0, 0): base, (1, 0): 0.1 * base}, axes=2)
        lim = cost_limit(params, w)
        oracle = _riemann_torus_cost(params, w)
        assert abs(lim.cost - oracle) <= 1e-7


@criterion(9, "repeated runs are byte identical")
def test_criterion_9_determinism(tmp_path):
    outputs = []
    for tag in ("first", "second"):
        gen_dir = tmp_path / f"gen-{tag}"
        assert cli_main(["gen", "--kind", "pr-consistent", "--seed", "5",
                         "--weights", "geometric", "--out-dir", str(gen_dir)]) == 0
        run_dir = tmp_path / f"run-{tag}"
        model = str(gen_dir / "model.json")
        assert cli_main(["check-pr", "--model", model, "--out-dir", str(run_dir)]) == 0
        assert cli_main(["cost", "--model", model, "--N", "limit",
                         "--out-dir", str(run_dir)]) == 0
        assert cli_main(["spectrum", "--model", model, "--grid", "32",
                         "--out-dir", str(run_dir)]) == 0
        outputs.append((gen_dir, run_dir))

    (gen_a, run_a), (gen_b, run_b) = outputs
    assert (gen_a / "model.json").read_bytes() == (gen_b / "model.json").read_bytes()
    for name in ("check_pr.json", "cost.json", "cost_modes.csv", "spectrum.csv"):
        assert (run_a / name).read_bytes() == (run_b / name).read_bytes(), name
