"""
Concrete cavity-optomechanical models.

Builds the full two-mode system (mechanical mode + driven cavity with
homodyne detection and modulation feedback inputs) and the effective
one- and two-mode mechanical models for time-continuous teleportation and
entanglement swapping.

Frames and units: ω_m = 1 sets the frequency unit; the effective
teleport/swap models live in the frame rotating at the spring-shifted
mechanical frequency, so their Hamiltonian part carries no free rotation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .engine import (
    CoefficientMatrix,
    LindbladChannel,
    LinearModel,
    ModelError,
    QuadraticHamiltonian,
    assemble_from_coefficients,
    assemble_model,
    coefficients_from_channels,
)

SQRT2 = np.sqrt(2.0)


@dataclass
class OptomechParams:
    """
    Physical rates of the optomechanical system plus detection settings.

    All rates are in units of the mechanical frequency; kappa and gamma are
    FWHM linewidths, nbar the mechanical bath occupation, eta the detection
    efficiency and phi the homodyne local-oscillator angle.
    """

    omega_m: float = 1.0
    delta: float = 0.0
    g: float = 0.1
    kappa: float = 0.5
    gamma: float = 2e-7
    nbar: float = 0.0
    eta: float = 1.0
    phi: float = np.pi / 2

    def __post_init__(self) -> None:
        if self.kappa <= 0 or self.gamma <= 0:
            raise ModelError("kappa and gamma must be positive")
        if self.nbar < 0 or self.g < 0:
            raise ModelError("nbar and g must be non-negative")
        if not 0.0 < self.eta <= 1.0:
            raise ModelError(f"eta must lie in (0, 1], got {self.eta}")

    def replace(self, **kwargs) -> "OptomechParams":
        fields = self.__dict__ | kwargs
        return OptomechParams(**fields)


@dataclass
class SqueezedNoise:
    """
    Squeezed white-noise input characterized by occupation N and
    correlation M (pure when |M|² = N(N+1)).

    w1, w2, w3 are the Wiener (co-)variances of the two Bell currents;
    alpha, mu, nu parametrize the squeezed-state eigenvalue relation.
    """

    N: float
    M: complex
    w1: float
    w2: float
    w3: float
    alpha: complex
    mu: complex
    nu: complex

    def wiener_covariance(self) -> NDArray[np.float64]:
        return np.array([[self.w1, self.w3], [self.w3, self.w2]])


def squeezed_noise(N: float, M: complex) -> SqueezedNoise:
    """Build a squeezed-noise record, rejecting unphysical (N, M)."""
    if N < 0:
        raise ModelError(f"N must be non-negative, got {N}")
    M = complex(M)
    if abs(M) ** 2 > N * (N + 1.0) * (1.0 + 1e-12) + 1e-15:
        raise ModelError(
            f"unphysical squeezing: |M|^2 = {abs(M) ** 2:.6g} exceeds "
            f"N(N+1) = {N * (N + 1.0):.6g}"
        )
    alpha = (N + M) / (N + np.conj(M) + 1.0)
    return SqueezedNoise(
        N=N,
        M=M,
        w1=N + 1.0 + M.real,
        w2=N + 1.0 - M.real,
        w3=M.imag,
        alpha=alpha,
        mu=1.0 - alpha,
        nu=1.0 + alpha,
    )


def pure_squeezed_noise(squeeze_db: float) -> SqueezedNoise:
    """
    Pure squeezed input with the requested minimal quadrature variance in
    dB (e.g. -6.0), i.e. 2N+1 - 2√(N(N+1)) = 10^(dB/10), with M real < 0.
    """
    target = 10.0 ** (squeeze_db / 10.0)
    # For a pure state 2σ_min = 2N+1-2√(N(N+1)) = e^{-2r}; invert for N.
    r = -0.5 * np.log(target)
    N = np.sinh(r) ** 2
    return squeezed_noise(N, -np.sqrt(N * (N + 1.0)))


@dataclass
class AdiabaticRates:
    """Cavity response and effective mechanical rates for weak coupling."""

    eta_plus: complex
    eta_minus: complex
    gamma_minus: float
    gamma_plus: float
    epsilon: float
    omega_eff: float


def adiabatic_rates(params: OptomechParams) -> AdiabaticRates:
    """
    Sideband response η± = [κ/2 + i(-Δ±ω_m)]⁻¹ and the derived cooling and
    heating rates, counter-rotating suppression ε, and spring-shifted
    frequency.
    """
    p = params
    eta_plus = 1.0 / (p.kappa / 2.0 + 1j * (-p.delta + p.omega_m))
    eta_minus = 1.0 / (p.kappa / 2.0 + 1j * (-p.delta - p.omega_m))
    gamma_minus = p.gamma * (p.nbar + 1.0) + 2.0 * p.g**2 * eta_minus.real
    gamma_plus = p.gamma * p.nbar + 2.0 * p.g**2 * eta_plus.real
    epsilon = 1.0 / (1.0 + (4.0 * p.omega_m / p.kappa) ** 2)
    omega_eff = p.omega_m + p.g**2 * (eta_plus + eta_minus).imag
    return AdiabaticRates(
        eta_plus=eta_plus,
        eta_minus=eta_minus,
        gamma_minus=gamma_minus,
        gamma_plus=gamma_plus,
        epsilon=epsilon,
        omega_eff=omega_eff,
    )


@dataclass
class SwapConfig:
    """Entanglement-swapping setup: stabilizer split, feedback gain, losses."""

    upsilon: float = 0.75
    sigma: float = 1.0
    eta: float | None = None  # None: inherit the detection efficiency

    def __post_init__(self) -> None:
        if not 0.0 < self.upsilon <= 1.0:
            raise ModelError(f"upsilon must lie in (0, 1], got {self.upsilon}")
        if self.sigma <= 0:
            raise ModelError(f"sigma must be positive, got {self.sigma}")


def hamiltonian_matrix(params: OptomechParams) -> QuadraticHamiltonian:
    """
    Quadratic Hamiltonian of the linearized system over (x_m, p_m, x_l, p_l):
    mechanical rotation at ω_m, cavity rotation at -Δ, radiation-pressure
    coupling 2g x_m x_l, and the laser-modulation drive entries so that the
    control matrix realizes √(2κ)(u_p x_l + u_x p_l).
    """
    p = params
    R = np.diag([p.omega_m, p.omega_m, -p.delta, -p.delta]).astype(float)
    R[0, 2] = R[2, 0] = 2.0 * p.g
    Rtilde = np.zeros((4, 2), dtype=complex)  # control columns (u_x, u_p)
    Rtilde[2, 1] = np.sqrt(p.kappa / 2.0)
    Rtilde[3, 0] = np.sqrt(p.kappa / 2.0)
    return QuadraticHamiltonian(R=R, Rtilde=Rtilde)


def _mode_vector(coeffs: dict[int, complex], n_modes: int, kind: str) -> NDArray:
    """Channel vector for Σ_j coeffs[j]·c_j (kind 'a') or c_j† (kind 'adag')."""
    v = np.zeros(2 * n_modes, dtype=complex)
    for j, c in coeffs.items():
        sign = 1.0 if kind == "a" else -1.0
        v[2 * j] += c / SQRT2
        v[2 * j + 1] += sign * 1j * c / SQRT2
    return v


def thermal_channels(gamma: float, nbar: float, mode: int, n_modes: int) -> list[LindbladChannel]:
    """Mechanical bath pair √(γ(n̄+1)) c and √(γn̄) c† on one mode."""
    out = [
        LindbladChannel(
            v=np.sqrt(gamma * (nbar + 1.0)) * _mode_vector({mode: 1.0}, n_modes, "a")
        )
    ]
    if nbar > 0:
        out.append(
            LindbladChannel(
                v=np.sqrt(gamma * nbar) * _mode_vector({mode: 1.0}, n_modes, "adag")
            )
        )
    return out


def full_model(params: OptomechParams) -> LinearModel:
    """
    Full two-mode model: cavity decay monitored by homodyne detection at
    angle phi with efficiency eta, unmonitored mechanical bath channels, and
    the two-quadrature laser-modulation control input.
    """
    p = params
    ham = hamiltonian_matrix(p)
    channels = [
        LindbladChannel(
            v=np.sqrt(p.kappa) * _mode_vector({1: 1.0}, 2, "a"),
            measured=True,
            efficiency=p.eta,
            lo_angle=p.phi,
        )
    ]
    channels += thermal_channels(p.gamma, p.nbar, mode=0, n_modes=2)
    return assemble_model(ham, channels)


def cooling_weights(h_m: float) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """LQG cost weights for cooling: state cost h_m(x_m²+p_m²), unit drive cost."""
    if h_m <= 0:
        raise ModelError(f"h_m must be positive, got {h_m}")
    return h_m * np.diag([1.0, 1.0, 0.0, 0.0]), np.eye(2)


def teleport_model(
    params: OptomechParams,
    noise: SqueezedNoise,
    epsilon: float | None = None,
) -> LinearModel:
    """
    Effective one-mode mechanical model of time-continuous teleportation
    (feedback master equation, unconditional, no measured channels).

    Dissipator weights, all over the rate 4g²/κ except the bath pair:
    γ(n̄+1) on c, γn̄ on c†, (1+ε) on c, w3/η on the cross-quadrature
    composite x-p, (w1-w3)/η - 1 on p, and (w2-w3)/η - 1 on x.  The last
    three may be negative for strong squeezing; physicality is judged on
    the steady state.  The x-p orientation of the composite operator is
    fixed by the dark-state requirement: in the ideal limit (γ = 0, ε = 0,
    η = 1) the steady state must equal the input covariance
    [[w1-1/2, w3], [w3, w2-1/2]] exactly for every physical (N, M); the
    opposite orientation reflects the off-diagonal.  epsilon may be
    overridden (e.g. 0 for ideal-limit checks); by default it follows from
    kappa and omega_m.
    """
    p = params
    eps = adiabatic_rates(p).epsilon if epsilon is None else float(epsilon)
    rate = 4.0 * p.g**2 / p.kappa
    v_c = _mode_vector({0: 1.0}, 1, "a")
    v_cdag = _mode_vector({0: 1.0}, 1, "adag")
    v_x = np.array([1.0, 0.0], dtype=complex)
    v_p = np.array([0.0, 1.0], dtype=complex)
    v_xp = np.array([1.0, -1.0], dtype=complex)
    weights = [
        p.gamma * (p.nbar + 1.0),
        p.gamma * p.nbar,
        rate * (1.0 + eps),
        rate * noise.w3 / p.eta,
        rate * ((noise.w1 - noise.w3) / p.eta - 1.0),
        rate * ((noise.w2 - noise.w3) / p.eta - 1.0),
    ]
    vectors = [v_c, v_cdag, v_c, v_xp, v_p, v_x]
    coeff = coefficients_from_channels(weights, vectors, dim=2)
    ham = QuadraticHamiltonian(R=np.zeros((2, 2)))
    return assemble_from_coefficients(ham, coeff)


def swap_model(
    params: OptomechParams,
    cfg: SwapConfig,
    epsilon: float | None = None,
) -> LinearModel:
    """
    Effective two-mode mechanical model of time-continuous entanglement
    swapping (feedback master equation over (x₁, p₁, x₂, p₂)).

    Contains, with Γ = 2g²/κ and c_± = c₁ ± c₂: thermal pairs on both
    modes; counter-rotating cooling ε·2Γ D[c_i]; the four Bell/stabilizer
    feedback channels Γ·D[J_i - iF_i]; detection-loss noise
    Γ(1-η)/η·D[F_i]; and the quadratic feedback Hamiltonian with prefactor
    [(1+σ)υ-1]·2g²/κ, which in quadratures is -2Γ[(1+σ)υ-1](x₁p₂+x₂p₁).

    The measured quadratures enter through the scattered (creation-side)
    sideband, so the combined channels are J₁-iF₁ = √υ[σc₊ + (1-σ)c₊†],
    J₂-iF₂ ∝ √υ[(1-σ)c₋† - σc₋], and the stabilizer pair reduces to plain
    damping √(1-υ)c₊, √(1-υ)c₋.
    """
    p = params
    eps = adiabatic_rates(p).epsilon if epsilon is None else float(epsilon)
    eta = p.eta if cfg.eta is None else cfg.eta
    if not 0.0 < eta <= 1.0:
        raise ModelError(f"eta must lie in (0, 1], got {eta}")
    ups, sig = cfg.upsilon, cfg.sigma
    big_gamma = 2.0 * p.g**2 / p.kappa

    plus = {0: 1.0, 1: 1.0}
    minus = {0: 1.0, 1: -1.0}

    channels: list[LindbladChannel] = []
    for mode in (0, 1):
        channels += thermal_channels(p.gamma, p.nbar, mode=mode, n_modes=2)
        if eps > 0:
            channels.append(
                LindbladChannel(
                    v=np.sqrt(2.0 * eps * big_gamma)
                    * _mode_vector({mode: 1.0}, 2, "a")
                )
            )

    # Bell pair with feedback gain sigma.
    v1 = sig * _mode_vector(plus, 2, "a") + (1.0 - sig) * _mode_vector(plus, 2, "adag")
    v2 = (1.0 - sig) * _mode_vector(minus, 2, "adag") - sig * _mode_vector(minus, 2, "a")
    # Stabilizer pair: feedback exactly cancels the back-action drive.
    v3 = _mode_vector(plus, 2, "a")
    v4 = _mode_vector(minus, 2, "a")
    channels.append(LindbladChannel(v=np.sqrt(big_gamma * ups) * v1))
    channels.append(LindbladChannel(v=np.sqrt(big_gamma * ups) * v2))
    channels.append(LindbladChannel(v=np.sqrt(big_gamma * (1.0 - ups)) * v3))
    channels.append(LindbladChannel(v=np.sqrt(big_gamma * (1.0 - ups)) * v4))

    if eta < 1.0:
        loss = big_gamma * (1.0 - eta) / eta
        f1 = -SQRT2 * np.sqrt(ups) * sig * np.array([0, 1, 0, 1], dtype=complex)
        f2 = SQRT2 * np.sqrt(ups) * sig * np.array([1, 0, -1, 0], dtype=complex)
        f3 = SQRT2 * np.sqrt(1.0 - ups) * np.array([1, 0, 1, 0], dtype=complex)
        f4 = -SQRT2 * np.sqrt(1.0 - ups) * np.array([0, 1, 0, -1], dtype=complex)
        for f in (f1, f2, f3, f4):
            channels.append(LindbladChannel(v=np.sqrt(loss) * f))

    R = np.zeros((4, 4))
    pref = -2.0 * big_gamma * ((1.0 + sig) * ups - 1.0)
    R[0, 3] = R[3, 0] = pref  # x₁ p₂
    R[2, 1] = R[1, 2] = pref  # x₂ p₁
    return assemble_model(QuadraticHamiltonian(R=R), channels)


def cooperativity(params: OptomechParams) -> float:
    """Optomechanical cooperativity C = 4g²/((n̄+1)γκ)."""
    p = params
    return 4.0 * p.g**2 / ((p.nbar + 1.0) * p.gamma * p.kappa)


def coupling_for_cooperativity(C: float, params: OptomechParams) -> float:
    """Coupling g that realizes cooperativity C at the given κ, γ, n̄."""
    if C < 0:
        raise ModelError(f"cooperativity must be non-negative, got {C}")
    p = params
    return float(np.sqrt(C * (p.nbar + 1.0) * p.gamma * p.kappa / 4.0))
