"""Concrete optomechanical model builders."""

import numpy as np
import pytest

from omcontrol.engine import ModelError, symplectic_form
from omcontrol.measures import GaussianState, occupation, squeezing_db
from omcontrol.optomech import (
    OptomechParams,
    SwapConfig,
    adiabatic_rates,
    cooperativity,
    coupling_for_cooperativity,
    full_model,
    hamiltonian_matrix,
    pure_squeezed_noise,
    squeezed_noise,
    swap_model,
    teleport_model,
)
from omcontrol.solvers import is_hurwitz, physicality_defect, solve_lyapunov

FIG2 = dict(kappa=0.5, gamma=1.0 / 5e6, nbar=3.5e5, eta=1.0, phi=np.pi / 2)


class TestHamiltonian:
    def test_decoupled_at_zero_g(self):
        R = hamiltonian_matrix(OptomechParams(g=0.0, delta=0.3)).R
        assert not R[:2, 2:].any()

    def test_coupling_entry(self):
        R = hamiltonian_matrix(OptomechParams(g=0.1, delta=1.0)).R
        assert R[0, 2] == pytest.approx(0.2)
        assert R[1, 3] == 0.0

    def test_detuning_sign_flips_cavity_only(self):
        plus = hamiltonian_matrix(OptomechParams(g=0.1, delta=1.0)).R
        minus = hamiltonian_matrix(OptomechParams(g=0.1, delta=-1.0)).R
        assert np.allclose(plus[:2, :2], minus[:2, :2])
        assert np.allclose(plus[2:, 2:], -minus[2:, 2:])
        assert np.allclose(plus[:2, 2:], minus[:2, 2:])

    def test_params_validation(self):
        with pytest.raises(ModelError):
            OptomechParams(kappa=0.0)
        with pytest.raises(ModelError):
            OptomechParams(eta=0.0)
        with pytest.raises(ModelError):
            OptomechParams(nbar=-1.0)


class TestFullModel:
    def test_decoupled_mechanical_eigenvalues(self):
        p = OptomechParams(g=0.0, delta=0.4, gamma=1e-3, nbar=1.0)
        model = full_model(p)
        assert not model.F[:2, 2:].any() and not model.F[2:, :2].any()
        ev = np.linalg.eigvals(model.F[:2, :2])
        assert np.allclose(sorted(ev.imag), [-1.0, 1.0], atol=1e-12)
        assert np.allclose(ev.real, -p.gamma / 2.0, atol=1e-12)

    def test_vacuum_cavity_steady_state(self):
        p = OptomechParams(g=0.0, delta=0.2, kappa=0.5, gamma=1e-6, nbar=0.0)
        sigma = solve_lyapunov(full_model(p).F, full_model(p).N).sigma
        assert np.allclose(sigma, 0.5 * np.eye(4), atol=1e-6)

    def test_blue_sideband_instability(self):
        model = full_model(OptomechParams(delta=1.0, g=0.1, **FIG2))
        assert not is_hurwitz(model.F)

    def test_control_matrix_entries(self):
        p = OptomechParams(kappa=0.72)
        G = full_model(p).G
        expected = np.zeros((4, 2))
        expected[2, 0] = np.sqrt(2.0 * p.kappa)
        expected[3, 1] = -np.sqrt(2.0 * p.kappa)
        assert np.allclose(G, expected)

    def test_measurement_phase_convention(self):
        # phi = pi/2 reads the optical phase quadrature, phi = 0 the
        # amplitude quadrature.
        model_x = full_model(OptomechParams(phi=0.0))
        model_p = full_model(OptomechParams(phi=np.pi / 2))
        assert abs(model_x.H[0, 2]) > 1e-10 and abs(model_x.H[0, 3]) < 1e-12
        assert abs(model_p.H[0, 3]) > 1e-10 and abs(model_p.H[0, 2]) < 1e-12


class TestSqueezedNoise:
    def test_vacuum(self):
        n = squeezed_noise(0.0, 0.0)
        assert (n.w1, n.w2, n.w3) == (1.0, 1.0, 0.0)
        assert n.alpha == 0.0

    def test_minus_six_db_values(self):
        n = squeezed_noise(0.56, -np.sqrt(0.56 * 1.56))
        assert n.w1 == pytest.approx(0.625325, abs=1e-5)
        assert n.w2 == pytest.approx(2.494675, abs=1e-5)
        assert n.w3 == 0.0

    def test_pure_state_boundary_is_physical(self):
        for theta in (0.0, 0.9, 2.2):
            N = 0.7
            n = squeezed_noise(N, np.sqrt(N * (N + 1.0)) * np.exp(1j * theta))
            W = n.wiener_covariance()
            assert np.min(np.linalg.eigvalsh(W)) >= -1e-12

    def test_rejects_unphysical(self):
        with pytest.raises(ModelError, match="unphysical"):
            squeezed_noise(0.3, 1.0)

    def test_pure_squeezed_noise_roundtrip(self):
        n = pure_squeezed_noise(-6.0)
        assert 10.0 * np.log10(2 * n.N + 1 - 2 * np.sqrt(n.N * (n.N + 1))) == (
            pytest.approx(-6.0, abs=1e-12)
        )


class TestAdiabaticRates:
    def test_blue_sideband_response(self):
        p = OptomechParams(delta=1.0, kappa=0.4)
        r = adiabatic_rates(p)
        assert r.eta_plus == pytest.approx(2.0 / p.kappa)
        assert r.eta_plus.imag == 0.0

    def test_epsilon_value(self):
        r = adiabatic_rates(OptomechParams(kappa=0.1))
        assert r.epsilon == pytest.approx(1.0 / 1601.0, rel=1e-12)

    def test_zero_coupling(self):
        p = OptomechParams(g=0.0, gamma=0.02, nbar=3.0)
        r = adiabatic_rates(p)
        assert r.gamma_minus == pytest.approx(p.gamma * (p.nbar + 1.0))
        assert r.gamma_plus == pytest.approx(p.gamma * p.nbar)
        assert r.omega_eff == pytest.approx(1.0)

    def test_sideband_cooling_adds_damping(self):
        base = OptomechParams(delta=-1.0, g=0.0, gamma=0.01, nbar=0.0, kappa=0.5)
        coupled = base.replace(g=0.05)
        r0, r1 = adiabatic_rates(base), adiabatic_rates(coupled)
        assert (r1.gamma_minus - r1.gamma_plus) > (r0.gamma_minus - r0.gamma_plus)


class TestTeleportModel:
    def test_vacuum_dark_state(self):
        p = OptomechParams(kappa=0.1, g=0.01, gamma=1e-12, nbar=0.0, eta=1.0)
        model = teleport_model(p, squeezed_noise(0.0, 0.0), epsilon=0.0)
        sigma = solve_lyapunov(model.F, model.N).sigma
        assert np.allclose(sigma, 0.5 * np.eye(2), atol=1e-9)
        assert squeezing_db(sigma) == pytest.approx(0.0, abs=1e-8)

    def test_pure_input_transferred_exactly(self):
        # Ideal limit: the mechanical steady state equals the input
        # covariance [[w1-1/2, w3], [w3, w2-1/2]] for any physical (N, M).
        p = OptomechParams(kappa=0.1, g=0.01, gamma=1e-14, nbar=0.0, eta=1.0)
        rng = np.random.default_rng(8)
        for _ in range(8):
            N = float(rng.uniform(0.05, 1.5))
            theta = float(rng.uniform(0, 2 * np.pi))
            scale = float(rng.uniform(0.2, 1.0))
            noise = squeezed_noise(N, scale * np.sqrt(N * (N + 1)) * np.exp(1j * theta))
            model = teleport_model(p, noise, epsilon=0.0)
            sigma = solve_lyapunov(model.F, model.N).sigma
            expected = np.array(
                [[noise.w1 - 0.5, noise.w3], [noise.w3, noise.w2 - 0.5]]
            )
            assert np.max(np.abs(sigma - expected)) < 1e-9

    def test_minus_six_db_minimal_variance(self):
        p = OptomechParams(kappa=0.1, g=0.01, gamma=1e-14, nbar=0.0, eta=1.0)
        N = 0.56
        noise = squeezed_noise(N, -np.sqrt(N * (N + 1.0)))
        model = teleport_model(p, noise, epsilon=0.0)
        sigma = solve_lyapunov(model.F, model.N).sigma
        assert 2 * np.min(np.linalg.eigvalsh(sigma)) == pytest.approx(
            2 * N + 1 - 2 * np.sqrt(N * (N + 1.0)), abs=1e-10
        )

    def test_inefficient_detection_heats(self):
        p = OptomechParams(kappa=0.1, gamma=1.0 / 5e6, nbar=0.0, eta=0.6)
        p = p.replace(g=coupling_for_cooperativity(5.0, p))
        model = teleport_model(p, squeezed_noise(0.56, -np.sqrt(0.56 * 1.56)))
        sigma = solve_lyapunov(model.F, model.N).sigma
        assert squeezing_db(sigma) > 0.0

    def test_unconditional_model_has_no_outputs(self):
        p = OptomechParams(kappa=0.1, g=0.01)
        model = teleport_model(p, squeezed_noise(0.0, 0.0))
        assert model.H.shape == (0, 2)


class TestSwapModel:
    def test_decoupled_thermal(self):
        p = OptomechParams(g=0.0, gamma=0.05, nbar=2.0)
        model = swap_model(p, SwapConfig(0.75, 1.0), epsilon=0.0)
        sigma = solve_lyapunov(model.F, model.N).sigma
        assert np.allclose(sigma, (p.nbar + 0.5) * np.eye(4), atol=1e-10)

    def test_unit_cooperativity_entanglement(self):
        from omcontrol.measures import log_negativity

        p = OptomechParams(gamma=1.0 / 5e6, nbar=0.0, kappa=0.5, eta=1.0)
        p = p.replace(g=coupling_for_cooperativity(1.0, p))
        model = swap_model(p, SwapConfig(0.75, 1.0), epsilon=0.0)
        sigma = solve_lyapunov(model.F, model.N).sigma
        assert log_negativity(sigma) == pytest.approx(np.log(1.5), abs=1e-10)

    def test_large_cooperativity_limit(self):
        from omcontrol.measures import log_negativity

        p = OptomechParams(gamma=1.0 / 5e6, nbar=0.0, kappa=0.5, eta=1.0)
        p = p.replace(g=coupling_for_cooperativity(1e5, p))
        model = swap_model(p, SwapConfig(0.75, 1.0), epsilon=0.0)
        sigma = solve_lyapunov(model.F, model.N).sigma
        assert log_negativity(sigma) == pytest.approx(np.log(2.0), abs=1e-4)

    def test_mode_exchange_symmetry(self):
        p = OptomechParams(gamma=1e-4, nbar=0.3, kappa=0.5, g=0.02, eta=0.8)
        model = swap_model(p, SwapConfig(0.75, 1.2))
        sigma = solve_lyapunov(model.F, model.N).sigma
        perm = np.zeros((4, 4))
        perm[0, 2] = perm[1, 3] = perm[2, 0] = perm[3, 1] = 1.0
        swapped = perm @ sigma @ perm.T
        assert np.allclose(
            np.sort(np.linalg.eigvalsh(sigma)), np.sort(np.linalg.eigvalsh(swapped))
        )
        assert np.allclose(sigma, swapped, atol=1e-12)

    def test_steady_states_physical(self):
        rng = np.random.default_rng(2)
        J = symplectic_form(2).J
        for _ in range(20):
            p = OptomechParams(
                gamma=10 ** rng.uniform(-6, -1),
                nbar=10 ** rng.uniform(-2, 3),
                kappa=rng.uniform(0.1, 2.0),
                g=rng.uniform(0.001, 0.1),
                eta=rng.uniform(0.4, 1.0),
            )
            cfg = SwapConfig(rng.uniform(0.5, 0.74), rng.uniform(0.5, 2.0))
            model = swap_model(p, cfg)
            if not is_hurwitz(model.F):
                continue
            sigma = solve_lyapunov(model.F, model.N).sigma
            assert physicality_defect(sigma, J) > -1e-10


class TestCooperativity:
    def test_zero_coupling(self):
        assert cooperativity(OptomechParams(g=0.0)) == 0.0

    def test_unit_normalization(self):
        p = OptomechParams(kappa=0.7, gamma=0.001, nbar=4.0)
        g = np.sqrt(p.kappa * p.gamma * (p.nbar + 1.0) / 4.0)
        assert cooperativity(p.replace(g=g)) == pytest.approx(1.0, rel=1e-12)

    def test_figure_axis_value(self):
        p = OptomechParams(g=0.1, **FIG2)
        assert cooperativity(p) == pytest.approx(
            4 * 0.01 / (3.5e5 + 1.0) / (1.0 / 5e6) / 0.5, rel=1e-12
        )

    def test_inverse_helper(self):
        p = OptomechParams(kappa=0.3, gamma=2e-5, nbar=10.0)
        g = coupling_for_cooperativity(7.0, p)
        assert cooperativity(p.replace(g=g)) == pytest.approx(7.0, rel=1e-12)
