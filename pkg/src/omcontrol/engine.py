"""
Generic Gaussian model engine.

Converts quadratic Hamiltonians and linear Lindblad/measurement channels
into the matrices (F, N, H, M, G) of the linear moment equations: drift,
diffusion, measurement, noise cross-correlation, and control input.

Conventions (fixed project-wide):
    * ħ = 1, all rates in units of the mechanical frequency.
    * Quadratures x = (c + c†)/√2, p = -i(c - c†)/√2, vacuum variance 1/2.
    * Per-mode interleaved ordering (x₁, p₁, x₂, p₂, ...).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

HERMITICITY_TOL = 1e-12


class ModelError(ValueError):
    """Raised when a model definition is inconsistent."""


@dataclass
class SymplecticForm:
    """Canonical commutation matrix J with [X_i, X_j] = i J_ij."""

    n_modes: int
    J: NDArray[np.float64]


def symplectic_form(n_modes: int) -> SymplecticForm:
    """Block-diagonal symplectic form, one [[0,1],[-1,0]] block per mode."""
    if n_modes < 1:
        raise ModelError(f"need at least one mode, got {n_modes}")
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    J = np.kron(np.eye(n_modes), block)
    return SymplecticForm(n_modes=n_modes, J=J)


@dataclass
class QuadraticHamiltonian:
    """
    Quadratic Hamiltonian H = ½ Xᵀ R X + [Xᵀ R̃ u(t) + h.c.].

    R is real symmetric (units of frequency); Rtilde couples the quadratures
    to an external drive vector u(t) and may be complex.
    """

    R: NDArray[np.float64]
    Rtilde: NDArray[np.complex128] | None = None

    def __post_init__(self) -> None:
        self.R = np.asarray(self.R, dtype=float)
        if self.R.ndim != 2 or self.R.shape[0] != self.R.shape[1]:
            raise ModelError(f"R must be square, got shape {self.R.shape}")
        if not np.allclose(self.R, self.R.T, atol=HERMITICITY_TOL):
            raise ModelError("R must be symmetric")
        if self.Rtilde is not None:
            self.Rtilde = np.atleast_2d(np.asarray(self.Rtilde, dtype=complex))
            if self.Rtilde.shape[0] != self.R.shape[0]:
                raise ModelError(
                    f"Rtilde has {self.Rtilde.shape[0]} rows, expected {self.R.shape[0]}"
                )

    @property
    def dim(self) -> int:
        return self.R.shape[0]


@dataclass
class LindbladChannel:
    """
    Linear dissipation channel L = v·X (v complex, units √frequency).

    A measured channel feeds a homodyne detector with the given efficiency
    and local-oscillator angle; detection replaces L -> √η e^{iφ} L in the
    measurement matrices only, never in the dissipation.
    """

    v: NDArray[np.complex128]
    measured: bool = False
    efficiency: float = 1.0
    lo_angle: float = 0.0

    def __post_init__(self) -> None:
        self.v = np.asarray(self.v, dtype=complex).reshape(-1)
        if self.measured and not 0.0 <= self.efficiency <= 1.0:
            raise ModelError(f"efficiency must lie in [0, 1], got {self.efficiency}")


@dataclass
class LinearModel:
    """
    Linear Gaussian open-system model.

    d⟨X⟩/dt = F⟨X⟩ + G u,  dΣ/dt = FΣ + ΣFᵀ + N, and measured currents
    I dt = H X dt + dξ with noise cross-correlation ⟨dV dξᵀ⟩ = M dt.
    """

    F: NDArray[np.float64]
    N: NDArray[np.float64]
    H: NDArray[np.float64]
    M: NDArray[np.float64]
    G: NDArray[np.float64]
    J: SymplecticForm

    @property
    def dim(self) -> int:
        return self.F.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.H.shape[0]


@dataclass
class CoefficientMatrix:
    """
    Hermitian coefficient matrix C of the bilinear dissipator
    Σ_ij C_ij (X_i ρ X_j - ½{X_j X_i, ρ}).

    Negative eigenvalues are allowed (the generator need not be completely
    positive on its own); physicality is judged on the resulting steady state.
    """

    C: NDArray[np.complex128]

    def __post_init__(self) -> None:
        self.C = np.asarray(self.C, dtype=complex)
        if self.C.ndim != 2 or self.C.shape[0] != self.C.shape[1]:
            raise ModelError(f"coefficient matrix must be square, got {self.C.shape}")
        if np.max(np.abs(self.C - self.C.conj().T)) > 1e-12 * max(
            1.0, np.max(np.abs(self.C))
        ):
            raise ModelError("coefficient matrix must be Hermitian")
        self.C = 0.5 * (self.C + self.C.conj().T)

    @property
    def dim(self) -> int:
        return self.C.shape[0]


def _symmetrize(A: NDArray[np.float64]) -> NDArray[np.float64]:
    return 0.5 * (A + A.T)


def channel_vector_weighted(weight: float, v: NDArray) -> NDArray[np.complex128]:
    """Channel vector for √weight · (v·X); negative weights are rejected."""
    if weight < 0:
        raise ModelError(f"channel weight must be non-negative, got {weight}")
    return np.sqrt(weight) * np.asarray(v, dtype=complex)


def assemble_model(
    ham: QuadraticHamiltonian, channels: list[LindbladChannel]
) -> LinearModel:
    """
    Assemble the linear moment-equation matrices from a Hamiltonian and a
    list of Lindblad channels.

    All channels contribute at full strength to drift and diffusion;
    measurement rows exist only for measured channels and carry the
    efficiency scaling and LO rotation.
    """
    dim = ham.dim
    if dim % 2 != 0:
        raise ModelError(f"phase-space dimension must be even, got {dim}")
    n_modes = dim // 2
    for k, ch in enumerate(channels):
        if ch.v.shape[0] != dim:
            raise ModelError(
                f"channel {k} has vector length {ch.v.shape[0]}, expected {dim}"
            )

    sym = symplectic_form(n_modes)
    J = sym.J

    if channels:
        lam = np.array([ch.v for ch in channels])  # rows L_i = v_i · X
    else:
        lam = np.zeros((0, dim), dtype=complex)
    gram = lam.conj().T @ lam  # Λ†Λ

    F = J @ (ham.R + gram.imag)
    N = _symmetrize(J @ gram.real @ J.T)

    measured = [ch for ch in channels if ch.measured]
    if measured:
        lam_meas = np.array(
            [
                np.sqrt(ch.efficiency) * np.exp(1j * ch.lo_angle) * ch.v
                for ch in measured
            ]
        )
        H = (lam_meas + lam_meas.conj()).real
        M = (0.5j * J @ (lam_meas.T - lam_meas.conj().T)).real
    else:
        H = np.zeros((0, dim))
        M = np.zeros((dim, 0))

    if ham.Rtilde is not None:
        G = (J @ (ham.Rtilde + ham.Rtilde.conj())).real
    else:
        G = np.zeros((dim, 0))

    return LinearModel(F=F, N=N, H=H, M=M, G=G, J=sym)


def assemble_from_coefficients(
    ham: QuadraticHamiltonian, coeff: CoefficientMatrix
) -> LinearModel:
    """
    Assemble (F, N) from a Hermitian dissipator coefficient matrix.

    The map F_diss = -J·Im(C), N = J·Re(C)·Jᵀ agrees with the channel-list
    assembly whenever C = Σ_k v_kᵀ conj(v_k): for a single channel L = v·X
    one has C_ij = v_i conj(v_j), hence Λ†Λ = Cᵀ and, C being Hermitian,
    Im(Cᵀ) = -Im(C) and Re(Cᵀ) = Re(C).  No measured channels are produced.
    """
    dim = ham.dim
    if coeff.dim != dim:
        raise ModelError(
            f"coefficient matrix has dimension {coeff.dim}, expected {dim}"
        )
    sym = symplectic_form(dim // 2)
    J = sym.J
    F = J @ ham.R - J @ coeff.C.imag
    N = _symmetrize(J @ coeff.C.real @ J.T)
    if ham.Rtilde is not None:
        G = (J @ (ham.Rtilde + ham.Rtilde.conj())).real
    else:
        G = np.zeros((dim, 0))
    return LinearModel(
        F=F,
        N=N,
        H=np.zeros((0, dim)),
        M=np.zeros((dim, 0)),
        G=G,
        J=sym,
    )


def coefficients_from_channels(
    weights: list[float], vectors: list[NDArray], dim: int
) -> CoefficientMatrix:
    """Coefficient matrix Σ_k w_k v_kᵀ conj(v_k); weights may be negative."""
    C = np.zeros((dim, dim), dtype=complex)
    for w, v in zip(weights, vectors):
        vv = np.asarray(v, dtype=complex).reshape(-1)
        if vv.shape[0] != dim:
            raise ModelError(f"vector length {vv.shape[0]} does not match dim {dim}")
        C += w * np.outer(vv, vv.conj())
    return CoefficientMatrix(C=C)


def lindblad_diagonalize(
    coeff: CoefficientMatrix,
) -> list[tuple[float, NDArray[np.complex128]]]:
    """
    Eigen-decompose the coefficient matrix into jump channels.

    Returns (λ_i, v_i) pairs sorted by descending λ, with Σ λ_i v_i v_i†
    reconstructing C; eigenvalues below 1e-12 in magnitude are reported as
    exactly zero.
    """
    evals, evecs = np.linalg.eigh(coeff.C)
    order = np.argsort(evals)[::-1]
    pairs = []
    for idx in order:
        lam = float(evals[idx])
        if abs(lam) < 1e-12:
            lam = 0.0
        pairs.append((lam, evecs[:, idx].copy()))
    return pairs
