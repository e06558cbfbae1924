"""
Dense steady-state solvers: continuous-time Lyapunov and algebraic Riccati
equations (filter and control side), plus stability tests.

The Riccati solver uses the ordered real Schur decomposition of the
associated Hamiltonian matrix, selecting the stable invariant subspace, with
Newton refinement on the result.  Inputs are balanced (diagonal similarity)
before the Schur step and solutions un-balanced on return, which keeps the
residuals small when rates span many orders of magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import matrix_balance, schur, solve_continuous_lyapunov

from .engine import LinearModel

STABILITY_MARGIN = 1e-9
RESIDUAL_TOL = 1e-10


class SolverError(RuntimeError):
    """Raised when a steady-state equation has no acceptable solution."""


@dataclass
class SteadyState:
    """Covariance solving a steady-state equation, with its residual norm."""

    sigma: NDArray[np.float64]
    residual: float


@dataclass
class ControllerGain:
    """LQG feedback/filter gain pair with closed-loop decomposition."""

    Cgain: NDArray[np.float64]
    Omega: NDArray[np.float64]
    Kgain: NDArray[np.float64]
    sigma_cond: NDArray[np.float64]
    Xi: NDArray[np.float64] | None = None
    effort: float | None = None


def is_hurwitz(F: NDArray[np.float64]) -> bool:
    """True iff every eigenvalue of F has real part below -1e-9.

    Marginal systems are classified unstable; equivalent to the
    Routh-Hurwitz determinant test for the sizes used here.
    """
    return bool(np.max(np.linalg.eigvals(np.asarray(F, dtype=float)).real) < -STABILITY_MARGIN)


def _sym(A: NDArray[np.float64]) -> NDArray[np.float64]:
    return 0.5 * (A + A.T)


def solve_lyapunov(F: NDArray[np.float64], N: NDArray[np.float64]) -> SteadyState:
    """
    Solve F Σ + Σ Fᵀ + N = 0 for the steady-state covariance.

    Refuses unstable drift: the equation has no bounded steady state there.
    """
    F = np.asarray(F, dtype=float)
    N = np.asarray(N, dtype=float)
    if not is_hurwitz(F):
        lam = np.max(np.linalg.eigvals(F).real)
        raise SolverError(
            f"drift is not Hurwitz (max Re eigenvalue {lam:.3e}); no steady state"
        )
    sigma = _sym(solve_continuous_lyapunov(F, -N))
    res = float(np.linalg.norm(F @ sigma + sigma @ F.T + N))
    # Tolerance at the problem's scale: near-marginal drift inflates ‖Σ‖
    # and with it the attainable absolute residual.
    scale = max(1.0, float(np.linalg.norm(N)), float(np.linalg.norm(sigma)))
    if res > RESIDUAL_TOL * scale:
        raise SolverError(f"Lyapunov residual {res:.3e} exceeds tolerance")
    return SteadyState(sigma=sigma, residual=res)


def _detectable(F: NDArray, H: NDArray) -> tuple[bool, complex]:
    """PBH test: every unstable mode of F must be visible in H."""
    evals = np.linalg.eigvals(F)
    n = F.shape[0]
    for lam in evals:
        if lam.real < -STABILITY_MARGIN:
            continue
        pencil = np.vstack([lam * np.eye(n) - F, H.astype(complex)])
        if np.linalg.matrix_rank(pencil, tol=1e-10 * max(1.0, abs(lam))) < n:
            return False, lam
    return True, 0.0


def _stabilizing_care(
    A: NDArray[np.float64],
    G: NDArray[np.float64],
    Q: NDArray[np.float64],
    what: str,
) -> NDArray[np.float64]:
    """
    Stabilizing solution of AᵀX + XA - XGX + Q = 0 (G, Q symmetric PSD).

    Schur method on the Hamiltonian matrix [[A, -G], [-Q, -Aᵀ]] with
    balancing, followed by Newton refinement.
    """
    n = A.shape[0]
    Z = np.block([[A, -G], [-Q, -A.T]])
    Zb, T = matrix_balance(Z, permute=False)
    try:
        _, U, sdim = schur(Zb, output="real", sort="lhp")
    except np.linalg.LinAlgError as exc:  # pragma: no cover - scipy internal
        raise SolverError(f"{what}: Schur decomposition failed: {exc}") from exc
    if sdim != n:
        raise SolverError(
            f"{what}: Hamiltonian matrix has {sdim} stable eigenvalues, "
            f"expected {n}; no stabilizing solution"
        )
    U = T @ U[:, :n]
    U1, U2 = U[:n, :], U[n:, :]
    try:
        X = np.linalg.solve(U1.T, U2.T).T
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"{what}: stable subspace is not a graph; {exc}") from exc
    X = _sym(X.real)

    # Newton refinement: each step solves a Lyapunov equation in the
    # current closed loop; repeat only while it still helps.
    scale = max(1.0, float(np.linalg.norm(Q)), float(np.linalg.norm(X)))
    for _ in range(4):
        res_mat = A.T @ X + X @ A - X @ G @ X + Q
        res = float(np.linalg.norm(res_mat))
        if res < 1e-13 * scale:
            break
        Acl = A - G @ X
        try:
            delta = solve_continuous_lyapunov(Acl.T, -res_mat)
        except np.linalg.LinAlgError:
            break
        X = _sym(X + delta)
    return X


def solve_filter_riccati(model: LinearModel) -> SteadyState:
    """
    Stabilizing solution of the filter Riccati equation
    F Σ̂ + Σ̂ Fᵀ + N - (Σ̂Hᵀ + M)(Σ̂Hᵀ + M)ᵀ = 0.

    Exists whenever (F, H) is detectable, including for unstable drift: the
    conditional covariance can settle even while the means diverge.  With no
    measured channel this reduces to the Lyapunov equation.
    """
    F, N, H, M = model.F, model.N, model.H, model.M
    if H.shape[0] == 0 or not np.any(H):
        return solve_lyapunov(F, N)
    ok, lam = _detectable(F, H)
    if not ok:
        raise SolverError(
            f"(F, H) not detectable: unstable mode at eigenvalue {lam:.4g} "
            "is invisible to the measurement"
        )
    Abar = F - M @ H
    Qbar = _sym(N - M @ M.T)
    sigma = _stabilizing_care(Abar.T, H.T @ H, Qbar, what="filter Riccati")
    K = sigma @ H.T + M
    res = float(np.linalg.norm(F @ sigma + sigma @ F.T + N - K @ K.T))
    scale = max(1.0, float(np.linalg.norm(N)), float(np.linalg.norm(sigma)))
    if res > RESIDUAL_TOL * scale:
        raise SolverError(f"filter Riccati residual {res:.3e} exceeds tolerance")
    if not is_hurwitz(F - K @ H):
        raise SolverError("filter closed loop F - KH is not Hurwitz")
    return SteadyState(sigma=sigma, residual=res)


def solve_control_riccati(
    model: LinearModel,
    P: NDArray[np.float64],
    Q: NDArray[np.float64],
) -> ControllerGain:
    """
    LQG synthesis for the quadratic cost ⟨XᵀPX + uᵀQu⟩.

    Solves FᵀΩ + ΩF + P - ΩG Q⁻¹GᵀΩ = 0 for the stabilizing Ω, returns the
    feedback gain C = Q⁻¹GᵀΩ together with the filter gain K of the same
    model.  Requires (F, G) stabilizable and Q positive definite.
    """
    F, G = model.F, model.G
    P = _sym(np.asarray(P, dtype=float))
    Q = _sym(np.atleast_2d(np.asarray(Q, dtype=float)))
    if G.shape[1] == 0:
        raise SolverError("model has no control inputs")
    if np.min(np.linalg.eigvalsh(Q)) <= 0:
        raise SolverError("control weight Q must be positive definite")
    ok, lam = _detectable(F.T, G.T)  # stabilizability = detectability of the dual
    if not ok:
        raise SolverError(
            f"(F, G) not stabilizable: unstable mode at eigenvalue {lam:.4g} "
            "is unreachable from the control input"
        )
    Qinv = np.linalg.inv(Q)
    omega = _stabilizing_care(F, G @ Qinv @ G.T, P, what="control Riccati")
    res = float(
        np.linalg.norm(F.T @ omega + omega @ F + P - omega @ G @ Qinv @ G.T @ omega)
    )
    if res > RESIDUAL_TOL * max(1.0, float(np.linalg.norm(P)), float(np.linalg.norm(omega))):
        raise SolverError(f"control Riccati residual {res:.3e} exceeds tolerance")
    Cgain = Qinv @ G.T @ omega
    if np.any(P) and not is_hurwitz(F - G @ Cgain):
        raise SolverError("controller closed loop F - GC is not Hurwitz")

    filt = solve_filter_riccati(model)
    Kgain = filt.sigma @ model.H.T + model.M
    return ControllerGain(
        Cgain=Cgain, Omega=omega, Kgain=Kgain, sigma_cond=filt.sigma
    )


def closed_loop_covariance(
    model: LinearModel, gains: ControllerGain
) -> tuple[NDArray[np.float64], float]:
    """
    Steady-state covariance of the feedback-controlled system.

    Solves (F-GC)Ξ + Ξ(F-GC)ᵀ + KKᵀ = 0 for the covariance of the
    conditional mean and returns Σ_total = Σ̂ + Ξ together with the mean
    squared feedback amplitude tr(C Ξ Cᵀ).  Fills gains.Xi and gains.effort.
    """
    F, G = model.F, model.G
    C, K = gains.Cgain, gains.Kgain
    Acl = F - G @ C
    if not is_hurwitz(Acl):
        raise SolverError("closed loop F - GC is not Hurwitz")
    xi = solve_lyapunov(Acl, K @ K.T).sigma
    gains.Xi = xi
    gains.effort = float(np.trace(C @ xi @ C.T))
    sigma_total = _sym(gains.sigma_cond + xi)
    return sigma_total, gains.effort


def physicality_defect(sigma: NDArray[np.float64], J: NDArray[np.float64]) -> float:
    """Smallest eigenvalue of Σ + (i/2)J; ≥ 0 (up to roundoff) iff physical."""
    mat = np.asarray(sigma, dtype=complex) + 0.5j * np.asarray(J, dtype=float)
    return float(np.min(np.linalg.eigvalsh(mat)))
