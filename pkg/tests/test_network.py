import numpy as np
import pytest
from numpy.testing import assert_allclose

import qlnet
from qlnet import generators
from qlnet.errors import ConfigurationError, UnsupportedError
from qlnet.network import (
    AxisCoupling,
    BlockParams,
    FragmentSpec,
    assemble_chain_generator,
    assemble_chain_noise,
    dft_matrix,
    validate,
)

J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def zero_axis(n, m0, mp=1, mm=1):
    return AxisCoupling(
        c_plus=np.zeros((mp, n)), c_minus=np.zeros((mm, n)),
        d_plus=np.zeros((mp, m0)), d_minus=np.zeros((mm, m0)),
        e_plus=np.zeros((n, mp)), e_minus=np.zeros((n, mm)),
    )


def scalar_chain(a, back, fwd):
    """n = 1 block with E+C+ = back and E-C- = fwd."""
    axis = AxisCoupling(
        c_plus=np.array([[back]]), c_minus=np.array([[fwd]]),
        d_plus=np.zeros((1, 1)), d_minus=np.zeros((1, 1)),
        e_plus=np.array([[1.0]]), e_minus=np.array([[1.0]]),
    )
    return BlockParams(a=np.array([[a]]), b=np.eye(1), j=np.zeros((1, 1)),
                       couplings=(axis,))


class TestValidate:
    def test_clean_block(self):
        params = BlockParams(a=-np.eye(2), b=np.eye(2), j=J2,
                             couplings=(zero_axis(2, 2),), theta=J2 / 2)
        assert validate(params) == []

    def test_j_radius_violation(self):
        params = BlockParams(a=-np.eye(2), b=np.eye(2), j=2 * J2,
                             couplings=(zero_axis(2, 2),))
        msgs = validate(params)
        assert any("spectral radius of J" in m for m in msgs)

    def test_j_not_antisymmetric(self):
        params = BlockParams(a=-np.eye(2), b=np.eye(2), j=np.eye(2),
                             couplings=(zero_axis(2, 2),))
        assert any("J not antisymmetric" in m for m in validate(params))

    def test_theta_not_antisymmetric(self):
        params = BlockParams(a=-np.eye(2), b=np.eye(2), j=J2,
                             couplings=(zero_axis(2, 2),), theta=np.eye(2))
        assert any("Theta not antisymmetric" in m for m in validate(params))

    def test_shape_violations_collected(self):
        axis = AxisCoupling(
            c_plus=np.zeros((1, 3)), c_minus=np.zeros((1, 2)),
            d_plus=np.zeros((1, 2)), d_minus=np.zeros((1, 2)),
            e_plus=np.zeros((2, 1)), e_minus=np.zeros((2, 1)),
        )
        params = BlockParams(a=-np.eye(2), b=np.eye(2), j=J2, couplings=(axis,))
        assert any("C_plus" in m for m in validate(params))


class TestAssemble:
    def test_zero_coupling_is_block_diagonal(self):
        params = BlockParams(a=-np.eye(2) + J2, b=np.eye(2), j=J2,
                             couplings=(zero_axis(2, 2),))
        full = assemble_chain_generator(params, 4)
        assert_allclose(full, np.kron(np.eye(4), params.a), atol=0)

    def test_scalar_stencil_first_row(self):
        params = scalar_chain(a=2.0, back=3.0, fwd=5.0)
        full = assemble_chain_generator(params, 4)
        assert_allclose(full[0], np.array([2.0, 5.0, 0.0, 3.0]), atol=0)

    def test_eigenvalues_match_mode_union(self):
        params = generators.random_instance(8, n=3)
        sites = 6
        full_eigs = np.linalg.eigvals(assemble_chain_generator(params, sites))
        mode_eigs = np.concatenate([
            np.linalg.eigvals(qlnet.mode_matrices(params, z).drift)
            for z in qlnet.roots_of_unity(sites)
        ])
        key = lambda v: (np.round(v.real, 9), np.round(v.imag, 9))
        assert_allclose(
            sorted(full_eigs, key=key), sorted(mode_eigs, key=key),
            rtol=0, atol=1e-9,
        )

    def test_dft_similarity_block_diagonalizes(self):
        params = generators.random_instance(17, n=2)
        sites = 5
        full = assemble_chain_generator(params, sites)
        f = np.kron(dft_matrix(sites), np.eye(params.n))
        t = f @ full @ f.conj().T
        for l, z in enumerate(qlnet.roots_of_unity(sites)):
            blk = t[l * 2:(l + 1) * 2, l * 2:(l + 1) * 2]
            assert_allclose(blk, qlnet.mode_matrices(params, z).drift, atol=1e-12)
            t[l * 2:(l + 1) * 2, l * 2:(l + 1) * 2] = 0
        assert np.abs(t).max() <= 1e-10

    def test_noise_dft_similarity(self):
        params = generators.random_instance(23, n=2, m0=2)
        sites = 6
        gain = assemble_chain_noise(params, sites)
        f_state = np.kron(dft_matrix(sites), np.eye(params.n))
        f_field = np.kron(dft_matrix(sites), np.eye(params.m0))
        t = f_state @ gain @ f_field.conj().T
        for l, z in enumerate(qlnet.roots_of_unity(sites)):
            blk = t[l * 2:(l + 1) * 2, l * 2:(l + 1) * 2]
            assert_allclose(blk, qlnet.mode_matrices(params, z).noise, atol=1e-12)

    def test_commutes_with_cyclic_shift(self):
        params = generators.random_instance(4, n=2)
        sites = 5
        full = assemble_chain_generator(params, sites)
        shift = np.kron(np.roll(np.eye(sites), 1, axis=1), np.eye(2))
        assert np.abs(full @ shift - shift @ full).max() <= 1e-14

    def test_small_fragment_rejected(self):
        params = scalar_chain(1.0, 1.0, 1.0)
        with pytest.raises(UnsupportedError):
            assemble_chain_generator(params, 2)
        with pytest.raises(UnsupportedError):
            assemble_chain_noise(params, 2)

    def test_two_axis_assembly_unsupported(self):
        params = generators.lattice_pr_instance(1)
        with pytest.raises(UnsupportedError):
            assemble_chain_generator(params, 4)


class TestDftMatrix:
    def test_order_one(self):
        assert_allclose(dft_matrix(1), np.array([[1.0]]), atol=0)

    def test_order_two(self):
        expected = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)
        assert_allclose(dft_matrix(2), expected, atol=1e-15)

    def test_unitary(self):
        f = dft_matrix(4)
        assert np.abs(f @ f.conj().T - np.eye(4)).max() <= 1e-14


class TestFragmentSpec:
    def test_defaults(self):
        spec = FragmentSpec(sites=8)
        assert spec.boundary == "periodic"
        assert spec.meets_coefficient_bound(2)
        assert not FragmentSpec(sites=4).meets_coefficient_bound(2)
        assert not FragmentSpec(sites=6).meets_coefficient_bound(6)

    def test_rejects_bad_values(self):
        with pytest.raises(ConfigurationError):
            FragmentSpec(sites=0)
        with pytest.raises(UnsupportedError):
            FragmentSpec(sites=4, boundary="open")


class TestBlockParams:
    def test_immutable_arrays(self):
        params = generators.random_instance(0)
        with pytest.raises(ValueError):
            params.a[0, 0] = 1.0

    def test_stacked_shapes(self):
        params = generators.random_instance(0, n=3, m0=2, m_plus=2, m_minus=1)
        assert params.c.shape == (3, 3)
        assert params.d.shape == (3, 2)
        assert params.e.shape == (3, 3)
        assert params.m == 3

    def test_missing_theta_reported(self):
        params = generators.random_instance(0, with_theta=False)
        with pytest.raises(ConfigurationError):
            params.require_theta()


class TestJRegime:
    def test_boundary_for_canonical_j(self):
        from qlnet.network import j_regime
        params = generators.random_instance(0, m0=2)
        assert j_regime(params) == "boundary"

    def test_strict_for_scaled_j(self):
        from qlnet.network import j_regime
        params = BlockParams(a=-np.eye(2), b=np.eye(2), j=0.5 * J2,
                             couplings=(zero_axis(2, 2),))
        assert j_regime(params) == "strict"
