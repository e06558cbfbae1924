"""Model-engine assembly: symplectic form, channels, coefficient matrices."""

import numpy as np
import pytest

from omcontrol.engine import (
    CoefficientMatrix,
    LindbladChannel,
    ModelError,
    QuadraticHamiltonian,
    assemble_from_coefficients,
    assemble_model,
    coefficients_from_channels,
    lindblad_diagonalize,
    symplectic_form,
)

J1 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def cavity_channel(kappa, **kwargs):
    return LindbladChannel(v=np.sqrt(kappa / 2.0) * np.array([1.0, 1.0j]), **kwargs)


class TestSymplecticForm:
    def test_single_mode(self):
        assert np.array_equal(symplectic_form(1).J, J1)

    def test_two_modes_block_diagonal(self):
        J = symplectic_form(2).J
        assert np.array_equal(J[:2, :2], J1)
        assert np.array_equal(J[2:, 2:], J1)
        assert not J[:2, 2:].any() and not J[2:, :2].any()

    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_defining_properties(self, n):
        J = symplectic_form(n).J
        assert np.array_equal(J.T, -J)
        assert np.allclose(J @ J, -np.eye(2 * n))

    def test_rejects_zero_modes(self):
        with pytest.raises(ModelError):
            symplectic_form(0)


class TestAssembleModel:
    def test_cavity_decay_only(self):
        # Hand evaluation: for v = sqrt(kappa/2)(1, i) the channel Gram
        # matrix is (kappa/2)[[1, i], [-i, 1]], giving pure damping at
        # kappa/2 and matching vacuum diffusion.
        kappa = 0.8
        ham = QuadraticHamiltonian(R=np.zeros((2, 2)))
        model = assemble_model(ham, [cavity_channel(kappa)])
        assert np.allclose(model.F, -(kappa / 2.0) * np.eye(2), atol=1e-14)
        assert np.allclose(model.N, (kappa / 2.0) * np.eye(2), atol=1e-14)

    def test_mechanical_bath_pair(self):
        gamma, nbar = 0.3, 2.5
        ham = QuadraticHamiltonian(R=np.zeros((2, 2)))
        up = LindbladChannel(v=np.sqrt(gamma * nbar / 2.0) * np.array([1.0, -1.0j]))
        down = LindbladChannel(
            v=np.sqrt(gamma * (nbar + 1.0) / 2.0) * np.array([1.0, 1.0j])
        )
        model = assemble_model(ham, [down, up])
        assert np.allclose(model.N, gamma * (nbar + 0.5) * np.eye(2), atol=1e-14)
        assert np.allclose(model.F, -(gamma / 2.0) * np.eye(2), atol=1e-14)

    def test_pure_hamiltonian_rotation(self):
        omega = 1.7
        ham = QuadraticHamiltonian(R=omega * np.eye(2))
        model = assemble_model(ham, [])
        assert np.allclose(model.F, J1 @ ham.R)
        assert not model.N.any()

    def test_dimension_mismatch_names_channel(self):
        ham = QuadraticHamiltonian(R=np.zeros((4, 4)))
        bad = LindbladChannel(v=np.array([1.0, 1.0j]))
        with pytest.raises(ModelError, match="channel 1"):
            assemble_model(ham, [cavity_channel(1.0).__class__(v=np.ones(4)), bad])

    def test_measurement_rows_only_for_measured(self):
        ham = QuadraticHamiltonian(R=np.zeros((2, 2)))
        model = assemble_model(
            ham, [cavity_channel(1.0, measured=True), cavity_channel(0.5)]
        )
        assert model.H.shape == (1, 2)
        assert model.M.shape == (2, 1)

    def test_efficiency_scales_only_measurement(self):
        ham = QuadraticHamiltonian(R=np.zeros((2, 2)))
        full = assemble_model(ham, [cavity_channel(1.0, measured=True, efficiency=1.0)])
        half = assemble_model(ham, [cavity_channel(1.0, measured=True, efficiency=0.5)])
        assert np.allclose(half.H, full.H / np.sqrt(2.0))
        assert np.allclose(half.M, full.M / np.sqrt(2.0))
        assert np.allclose(half.F, full.F)
        assert np.allclose(half.N, full.N)

    def test_lo_angle_pi_flips_sign(self):
        ham = QuadraticHamiltonian(R=np.zeros((2, 2)))
        base = assemble_model(ham, [cavity_channel(1.0, measured=True, lo_angle=0.3)])
        flipped = assemble_model(
            ham, [cavity_channel(1.0, measured=True, lo_angle=0.3 + np.pi)]
        )
        wrapped = assemble_model(
            ham, [cavity_channel(1.0, measured=True, lo_angle=0.3 + 2.0 * np.pi)]
        )
        assert np.allclose(flipped.H, -base.H)
        assert np.allclose(flipped.M, -base.M)
        assert np.allclose(wrapped.H, base.H, atol=1e-12)
        assert np.allclose(wrapped.M, base.M, atol=1e-12)

    def test_diffusion_symmetric_and_psd(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            n = int(rng.integers(1, 4))
            ham = QuadraticHamiltonian(R=np.zeros((2 * n, 2 * n)))
            chans = [
                LindbladChannel(v=rng.normal(size=2 * n) + 1j * rng.normal(size=2 * n))
                for _ in range(int(rng.integers(1, 4)))
            ]
            model = assemble_model(ham, chans)
            assert np.array_equal(model.N, model.N.T)
            assert np.min(np.linalg.eigvalsh(model.N)) >= -1e-12


class TestCoefficientAssembly:
    def test_rank_one_matches_channel_assembly(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n = int(rng.integers(1, 3))
            R = rng.normal(size=(2 * n, 2 * n))
            R = 0.5 * (R + R.T)
            ham = QuadraticHamiltonian(R=R)
            vs = [
                rng.normal(size=2 * n) + 1j * rng.normal(size=2 * n)
                for _ in range(int(rng.integers(1, 4)))
            ]
            via_channels = assemble_model(ham, [LindbladChannel(v=v) for v in vs])
            coeff = coefficients_from_channels([1.0] * len(vs), vs, 2 * n)
            via_coeff = assemble_from_coefficients(ham, coeff)
            assert np.allclose(via_channels.F, via_coeff.F, atol=1e-12)
            assert np.allclose(via_channels.N, via_coeff.N, atol=1e-12)

    def test_zero_coefficients(self):
        ham = QuadraticHamiltonian(R=np.diag([1.0, 1.0]))
        model = assemble_from_coefficients(ham, CoefficientMatrix(C=np.zeros((2, 2))))
        assert np.allclose(model.F, J1 @ ham.R)
        assert not model.N.any()

    def test_non_hermitian_rejected(self):
        with pytest.raises(ModelError, match="Hermitian"):
            CoefficientMatrix(C=np.array([[1.0, 2.0], [0.0, 1.0]]))


class TestLindbladDiagonalize:
    def test_identity(self):
        pairs = lindblad_diagonalize(CoefficientMatrix(C=np.eye(2)))
        assert [lam for lam, _ in pairs] == [1.0, 1.0]

    def test_ideal_bell_matrix(self):
        # [[1/2, i/2], [-i/2, 1/2]] has eigenvalues 1 and 0: a single jump
        # channel survives ideal detection of vacuum input.
        C = CoefficientMatrix(C=np.array([[0.5, 0.5j], [-0.5j, 0.5]]))
        lams = [lam for lam, _ in lindblad_diagonalize(C)]
        assert lams[0] == pytest.approx(1.0, abs=1e-12)
        assert lams[1] == 0.0

    def test_rank_one_gives_trace(self):
        v = np.array([1.0 + 0.5j, -2.0j, 0.3, 1.0])
        C = CoefficientMatrix(C=np.outer(v, v.conj()))
        pairs = lindblad_diagonalize(C)
        assert pairs[0][0] == pytest.approx(float(np.vdot(v, v).real), rel=1e-12)
        assert all(lam == 0.0 for lam, _ in pairs[1:])

    def test_reconstruction(self):
        rng = np.random.default_rng(3)
        A = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        C = CoefficientMatrix(C=A @ A.conj().T - 2.0 * np.eye(4))
        pairs = lindblad_diagonalize(C)
        recon = sum(lam * np.outer(v, v.conj()) for lam, v in pairs)
        assert np.max(np.abs(recon - C.C)) < 1e-10
        lams = [lam for lam, _ in pairs]
        assert lams == sorted(lams, reverse=True)
