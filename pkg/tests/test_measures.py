"""Occupation, log-negativity, EPR variance, squeezing dB."""

import numpy as np
import pytest

from omcontrol.measures import (
    GaussianState,
    StateError,
    epr_variance,
    log_negativity,
    occupation,
    squeezing_db,
)


def two_mode_squeezed(r):
    c, s = np.cosh(2 * r), np.sinh(2 * r)
    Z = np.diag([1.0, -1.0])
    return 0.5 * np.block([[c * np.eye(2), s * Z], [s * Z, c * np.eye(2)]])


def local_rotation(phi1, phi2):
    def rot(p):
        return np.array([[np.cos(p), np.sin(p)], [-np.sin(p), np.cos(p)]])

    out = np.zeros((4, 4))
    out[:2, :2] = rot(phi1)
    out[2:, 2:] = rot(phi2)
    return out


class TestOccupation:
    def test_vacuum(self):
        state = GaussianState(np.zeros(2), 0.5 * np.eye(2))
        assert occupation(state) == pytest.approx(0.0, abs=1e-15)

    def test_thermal(self):
        nbar = 7.3
        state = GaussianState(np.zeros(2), (nbar + 0.5) * np.eye(2))
        assert occupation(state) == pytest.approx(nbar, rel=1e-12)

    def test_displacement_contributes(self):
        state = GaussianState(np.array([2.0, 0.0]), 0.5 * np.eye(2))
        assert occupation(state) == pytest.approx(2.0, rel=1e-12)

    def test_unchanged_by_vacuum_ancilla(self):
        nbar = 3.0
        sigma = np.diag([nbar + 0.5, nbar + 0.5, 0.5, 0.5])
        state = GaussianState(np.zeros(4), sigma)
        assert occupation(state, mode=0) == pytest.approx(nbar, rel=1e-12)
        assert occupation(state, mode=1) == pytest.approx(0.0, abs=1e-12)


class TestLogNegativity:
    def test_two_mode_vacuum(self):
        assert log_negativity(0.5 * np.eye(4)) == 0.0

    @pytest.mark.parametrize("r", [0.1, 0.5, 1.3])
    def test_two_mode_squeezed(self, r):
        # Oracle: the partial transpose of the r-squeezed covariance has
        # smallest symplectic eigenvalue e^{-2r}/2.
        assert log_negativity(two_mode_squeezed(r)) == pytest.approx(2 * r, rel=1e-10)

    def test_invariant_under_local_rotations(self):
        rng = np.random.default_rng(17)
        sigma = two_mode_squeezed(0.7)
        for _ in range(10):
            S = local_rotation(rng.uniform(0, np.pi), rng.uniform(0, np.pi))
            val = log_negativity(S @ sigma @ S.T)
            assert val == pytest.approx(1.4, abs=1e-9)

    def test_rejects_unphysical(self):
        with pytest.raises(StateError):
            log_negativity(0.1 * np.eye(4))


class TestEprVariance:
    def test_uncorrelated_vacua(self):
        assert epr_variance(0.5 * np.eye(4)) == pytest.approx(2.0, rel=1e-9)

    @pytest.mark.parametrize("r", [0.2, 0.8])
    def test_two_mode_squeezed(self, r):
        assert epr_variance(two_mode_squeezed(r)) == pytest.approx(
            2.0 * np.exp(-2 * r), rel=1e-7
        )

    def test_minimization_absorbs_local_rotations(self):
        sigma = two_mode_squeezed(0.5)
        base = epr_variance(sigma)
        S = local_rotation(0.4, -0.4)
        assert epr_variance(S @ sigma @ S.T) == pytest.approx(base, rel=1e-7)

    def test_flags_agree_with_log_negativity(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            r = rng.uniform(0.05, 1.0)
            nbar = rng.uniform(0.0, 0.4)
            sigma = two_mode_squeezed(r) + nbar * np.eye(4)
            entangled_en = log_negativity(sigma) > 0
            entangled_epr = epr_variance(sigma) < 2.0
            assert entangled_en == entangled_epr


class TestSqueezingDb:
    def test_vacuum(self):
        assert squeezing_db(0.5 * np.eye(2)) == pytest.approx(0.0, abs=1e-12)

    def test_pure_minus_six_db_input(self):
        # 2 sigma_min = 2N+1-2 sqrt(N(N+1)) = 0.2506685687... at N = 0.56.
        N = 0.56
        smin = N + 0.5 - np.sqrt(N * (N + 1.0))
        smax = N + 0.5 + np.sqrt(N * (N + 1.0))
        val = squeezing_db(np.diag([smin, smax]))
        assert val == pytest.approx(-6.009001187365, abs=1e-9)
        assert val == pytest.approx(-6.0, abs=0.05)

    def test_thermal_positive(self):
        nbar = 4.0
        assert squeezing_db((nbar + 0.5) * np.eye(2)) == pytest.approx(
            10.0 * np.log10(2 * nbar + 1.0), rel=1e-12
        )

    def test_rotation_invariant(self):
        sigma = np.diag([0.2, 1.3])
        phi = 0.77
        R = np.array([[np.cos(phi), np.sin(phi)], [-np.sin(phi), np.cos(phi)]])
        assert squeezing_db(R @ sigma @ R.T) == pytest.approx(
            squeezing_db(sigma), abs=1e-12
        )
