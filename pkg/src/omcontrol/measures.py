"""
Scalar figures of merit on Gaussian states: occupation, logarithmic
negativity, EPR variance, and squeezing in dB.

All measures assume the vacuum-variance-1/2 quadrature convention, so a
two-mode Gaussian state is entangled iff the EPR variance drops below 2 and
iff the smallest partial-transpose symplectic eigenvalue drops below 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize

from .engine import symplectic_form

PHYSICALITY_TOL = 1e-10


class StateError(ValueError):
    """Raised for unphysical covariance input."""


@dataclass
class GaussianState:
    """Mean vector and symmetric covariance of the quadratures."""

    mean: NDArray[np.float64]
    sigma: NDArray[np.float64]

    def __post_init__(self) -> None:
        self.mean = np.asarray(self.mean, dtype=float).reshape(-1)
        self.sigma = np.asarray(self.sigma, dtype=float)
        if self.sigma.shape != (self.mean.size, self.mean.size):
            raise StateError(
                f"covariance shape {self.sigma.shape} does not match mean "
                f"length {self.mean.size}"
            )
        _check_physical(self.sigma)

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2


def _check_physical(sigma: NDArray[np.float64]) -> None:
    n = sigma.shape[0]
    if n % 2 != 0 or sigma.shape != (n, n):
        raise StateError(f"covariance must be square with even size, got {sigma.shape}")
    if np.max(np.abs(sigma - sigma.T)) > 1e-9 * max(1.0, float(np.max(np.abs(sigma)))):
        raise StateError("covariance must be symmetric")
    J = symplectic_form(n // 2).J
    defect = np.min(np.linalg.eigvalsh(sigma.astype(complex) + 0.5j * J))
    if defect < -PHYSICALITY_TOL * max(1.0, float(np.max(np.abs(sigma)))):
        raise StateError(f"covariance violates the uncertainty relation by {defect:.3e}")


def occupation(state: GaussianState, mode: int = 0) -> float:
    """Mean excitation number ½(Σ_xx + Σ_pp + ⟨x⟩² + ⟨p⟩² - 1) of one mode."""
    i = 2 * mode
    s = state.sigma
    m = state.mean
    return float(0.5 * (s[i, i] + s[i + 1, i + 1] + m[i] ** 2 + m[i + 1] ** 2 - 1.0))


def log_negativity(sigma: NDArray[np.float64]) -> float:
    """
    Logarithmic negativity of a two-mode covariance.

    E_N = max(0, -ln 2ν̃₋) with ν̃₋ the smallest symplectic eigenvalue of
    the partial transpose (momentum sign flip on the second mode); the
    factor 2 matches the vacuum-variance-1/2 convention.
    """
    sigma = 0.5 * (np.asarray(sigma, dtype=float) + np.asarray(sigma, dtype=float).T)
    if sigma.shape != (4, 4):
        raise StateError(f"need a 4x4 two-mode covariance, got {sigma.shape}")
    _check_physical(sigma)
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    sigma_pt = flip @ sigma @ flip
    J = symplectic_form(2).J
    nu = np.abs(np.linalg.eigvals(1j * J @ sigma_pt))
    nu_min = float(np.min(nu))
    return max(0.0, -np.log(2.0 * nu_min))


def _epr_value(sigma: NDArray[np.float64], phi1: float, phi2: float) -> float:
    c1, s1 = np.cos(phi1), np.sin(phi1)
    c2, s2 = np.cos(phi2), np.sin(phi2)
    a = np.array([c1, s1, -c2, -s2])  # x₁^φ1 - x₂^φ2
    b = np.array([-s1, c1, -s2, c2])  # p₁^φ1 + p₂^φ2
    return float(a @ sigma @ a + b @ sigma @ b)


def epr_variance(sigma: NDArray[np.float64]) -> float:
    """
    EPR variance min over local phases of Δ²(x₁-x₂) + Δ²(p₁+p₂).

    Below 2 certifies entanglement.  The landscape is smooth and π-periodic;
    a coarse 64x64 phase grid seeds a simplex refinement.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (4, 4):
        raise StateError(f"need a 4x4 two-mode covariance, got {sigma.shape}")
    grid = np.linspace(0.0, np.pi, 64, endpoint=False)
    best = np.inf
    best_phi = (0.0, 0.0)
    for p1 in grid:
        for p2 in grid:
            val = _epr_value(sigma, p1, p2)
            if val < best:
                best, best_phi = val, (p1, p2)
    res = minimize(
        lambda p: _epr_value(sigma, p[0], p[1]),
        x0=np.array(best_phi),
        method="Nelder-Mead",
        options={"xatol": 1e-9, "fatol": 1e-12},
    )
    return float(min(best, res.fun))


def squeezing_db(sigma: NDArray[np.float64]) -> float:
    """
    Squeezing of a single-mode covariance in dB: ζ = 10 log₁₀(2 λ_min).

    0 dB is vacuum; negative values mean squeezing below vacuum.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (2, 2):
        raise StateError(f"need a 2x2 single-mode covariance, got {sigma.shape}")
    _check_physical(sigma)
    lam_min = float(np.min(np.linalg.eigvalsh(0.5 * (sigma + sigma.T))))
    return float(10.0 * np.log10(2.0 * lam_min))
