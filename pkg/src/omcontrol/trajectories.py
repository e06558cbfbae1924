"""
Stochastic integration of conditional means, filter covariances,
photocurrents, and closed-loop dynamics.

Scheme: exponential propagation of the (constant, linear) drift with
Euler-Maruyama treatment of the diffusion term, and deterministic 4th-order
(RK4) stepping for the filter covariance.  The exact drift propagator
matters: a plain forward-Euler drift step on a lightly damped oscillator
adds an artificial dt·ω²/2 antidamping that can dwarf the physical
linewidth and inflate ensemble variances by orders of magnitude at any
affordable step size.  Noise increments enter through the half-step
propagator (midpoint quadrature of the driven covariance), keeping the
weak error at O(dt²).  Correlated measurement noise is
pre-whitened internally so the filter gain always acts on unit-variance
innovations; this is a representation choice, not physics.  Randomness
comes from counter-based Philox streams keyed by (master seed, path index),
so results are bit-identical regardless of batching or execution order.
The effective teleportation dynamics are treated as an exact SDE of the
coarse-grained model; no claim is made about faithfulness at time
resolutions finer than the coarse-graining window.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import expm

from .engine import LinearModel, ModelError
from .solvers import ControllerGain, SolverError, is_hurwitz, solve_lyapunov

DT_BUDGET = 0.05


class IntegrationError(RuntimeError):
    """Raised for ill-posed integration requests."""


@dataclass
class NoiseSpec:
    """Per-unit-time Wiener covariance of the measured channels."""

    covariance: NDArray[np.float64]

    def __post_init__(self) -> None:
        W = np.atleast_2d(np.asarray(self.covariance, dtype=float))
        if np.max(np.abs(W - W.T)) > 1e-12 * max(1.0, float(np.max(np.abs(W)))):
            raise IntegrationError("noise covariance must be symmetric")
        if np.min(np.linalg.eigvalsh(0.5 * (W + W.T))) < -1e-12:
            raise IntegrationError("noise covariance must be positive semidefinite")
        self.covariance = 0.5 * (W + W.T)

    def factor(self) -> NDArray[np.float64]:
        """Matrix square-root factor L with L Lᵀ equal to the covariance."""
        W = self.covariance
        try:
            return np.linalg.cholesky(W)
        except np.linalg.LinAlgError:
            evals, evecs = np.linalg.eigh(W)
            evals = np.clip(evals, 0.0, None)
            return evecs @ np.diag(np.sqrt(evals))


@dataclass
class TrajectoryPath:
    """One conditional trajectory sampled on a common time grid."""

    times: NDArray[np.float64]
    means: NDArray[np.float64]  # (n_times, 2n)
    covs: NDArray[np.float64]  # (n_times, 2n, 2n)
    currents: NDArray[np.float64]  # (n_times, m'); row 0 is zero padding
    seed: int


def path_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for one trajectory of one ensemble."""
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(index)])
    return np.random.Generator(np.random.Philox(key=key))


def correlated_increments(
    spec: NoiseSpec, dt: float, rng: np.random.Generator, size: int = 1
) -> NDArray[np.float64]:
    """
    Draw Wiener increments L·z·√dt with the requested per-unit-time
    covariance; shape (size, m).
    """
    if dt <= 0:
        raise IntegrationError(f"dt must be positive, got {dt}")
    L = spec.factor()
    z = rng.standard_normal(size=(size, L.shape[1]))
    return np.sqrt(dt) * z @ L.T


def _rate_scale(model: LinearModel) -> float:
    F, N, H = model.F, model.N, model.H
    scale = float(np.max(np.abs(np.linalg.eigvals(F))))
    scale = max(scale, float(np.linalg.norm(N, 2)))
    if H.size:
        scale = max(scale, float(np.linalg.norm(H, 2)) ** 2)
    return scale


def _check_dt(model: LinearModel, dt: float) -> None:
    if dt <= 0:
        raise IntegrationError(f"dt must be positive, got {dt}")
    rate = _rate_scale(model)
    if dt * rate > DT_BUDGET:
        raise IntegrationError(
            f"dt = {dt:g} too large: dt times the fastest rate {rate:.3g} "
            f"exceeds {DT_BUDGET}"
        )


def _riccati_rhs(sigma, F, N, H, M):
    K = sigma @ H.T + M
    return F @ sigma + sigma @ F.T + N - K @ K.T


def _advance_sigma(sigma, dt, F, N, H, M, f_rate):
    """
    One RK4 step of the covariance flow, internally substepped: far from
    the fixed point the quadratic term makes the flow stiff (rate ~ ‖KH‖,
    which can dwarf every model rate when starting from a hot state).
    """
    gain_rate = float(
        np.max(np.abs(sigma @ H.T + M).sum(axis=1), initial=0.0)
    ) * float(np.max(np.abs(H).sum(axis=1), initial=0.0))
    n_sub = max(1, int(np.ceil(dt * (f_rate + gain_rate) / 0.1)))
    h = dt / n_sub
    for _ in range(n_sub):
        k1 = _riccati_rhs(sigma, F, N, H, M)
        k2 = _riccati_rhs(sigma + 0.5 * h * k1, F, N, H, M)
        k3 = _riccati_rhs(sigma + 0.5 * h * k2, F, N, H, M)
        k4 = _riccati_rhs(sigma + h * k3, F, N, H, M)
        sigma = sigma + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        sigma = 0.5 * (sigma + sigma.T)
    return sigma


def simulate_conditional(
    model: LinearModel,
    T: float,
    dt: float,
    seed: int,
    noise: NoiseSpec | None = None,
    n_paths: int = 1,
    store_every: int = 1,
    x0: NDArray[np.float64] | None = None,
    sigma0: NDArray[np.float64] | None = None,
) -> list[TrajectoryPath]:
    """
    Integrate the conditional filter: deterministic RK4 for Σ̂(t) and
    exponential-propagator stepping of the means, driven by synthesized
    unit innovations.

    Emitted currents follow the output equation I dt = H X̂ dt + dξ with dξ
    carrying the (possibly correlated) measurement noise in the original,
    unwhitened coordinates.  Returns one path per ensemble member; the
    covariance history is shared, as it is measurement-independent.
    """
    _check_dt(model, dt)
    if n_paths < 1 or store_every < 1:
        raise IntegrationError("n_paths and store_every must be at least 1")
    F, N = model.F, model.N
    dim = model.dim
    m_out = model.n_outputs

    if noise is None:
        Lw = np.eye(m_out)
        Hw, Mw = model.H, model.M
    else:
        W = noise.covariance
        if W.shape != (m_out, m_out):
            raise IntegrationError(
                f"noise covariance shape {W.shape} does not match "
                f"{m_out} measured channels"
            )
        Lw = NoiseSpec(covariance=W).factor()
        if np.min(np.linalg.eigvalsh(W)) <= 1e-14:
            raise IntegrationError("degenerate noise covariance cannot be whitened")
        Hw = np.linalg.solve(Lw, model.H)
        Mw = np.linalg.solve(Lw, model.M.T).T

    if sigma0 is None:
        sigma = (
            solve_lyapunov(F, N).sigma if is_hurwitz(F) else np.eye(dim)
        )
    else:
        sigma = np.array(sigma0, dtype=float)
    x = np.zeros((dim, n_paths))
    if x0 is not None:
        x[:] = np.asarray(x0, dtype=float).reshape(dim, 1)

    n_steps = int(round(T / dt))
    stored = n_steps // store_every + 1
    times = np.empty(stored)
    means = np.empty((stored, dim, n_paths))
    covs = np.empty((stored, dim, dim))
    currents = np.zeros((stored, m_out, n_paths))
    times[0] = 0.0
    means[0] = x
    covs[0] = sigma

    rngs = [path_rng(seed, i) for i in range(n_paths)]
    phi = expm(F * dt)
    phi_half = expm(F * (dt / 2.0))
    f_rate = float(np.max(np.abs(F).sum(axis=1)))
    chunk = 1024
    step = 0
    ptr = 1
    while step < n_steps:
        todo = min(chunk, n_steps - step)
        if m_out:
            dw = np.empty((todo, m_out, n_paths))
            for i, rng in enumerate(rngs):
                dw[:, :, i] = rng.standard_normal(size=(todo, m_out))
            dw *= np.sqrt(dt)
        else:
            dw = np.zeros((todo, 0, n_paths))
        for k in range(todo):
            K = sigma @ Hw.T + Mw
            if m_out:
                cur = model.H @ x + (Lw @ dw[k]) / dt
                x = phi @ x + phi_half @ (K @ dw[k])
            else:
                x = phi @ x
            sigma = _advance_sigma(sigma, dt, F, N, Hw, Mw, f_rate)
            step += 1
            if step % store_every == 0:
                times[ptr] = step * dt
                means[ptr] = x
                covs[ptr] = sigma
                if m_out:
                    currents[ptr] = cur
                ptr += 1
    times = times[:ptr]
    paths = []
    covs_shared = covs[:ptr]
    for i in range(n_paths):
        paths.append(
            TrajectoryPath(
                times=times.copy(),
                means=means[:ptr, :, i].copy(),
                covs=covs_shared,
                currents=currents[:ptr, :, i].copy(),
                seed=seed,
            )
        )
    return paths


def simulate_closed_loop(
    model: LinearModel,
    gains: ControllerGain,
    T: float,
    dt: float,
    seed: int,
    n_paths: int = 1,
    store_every: int = 1,
) -> list[TrajectoryPath]:
    """
    Integrate the innovations-driven closed loop
    dX̂ = (F - GC) X̂ dt + K dW̃ with stationary gains.

    The long-time sample covariance of X̂ converges to the closed-loop mean
    covariance Ξ_ss.
    """
    _check_dt(model, dt)
    F, G = model.F, model.G
    A = F - G @ gains.Cgain
    if not is_hurwitz(A):
        raise SolverError("closed loop F - GC is not Hurwitz")
    K = gains.Kgain
    dim = model.dim
    m_out = K.shape[1]

    n_steps = int(round(T / dt))
    stored = n_steps // store_every + 1
    times = np.empty(stored)
    means = np.empty((stored, dim, n_paths))
    currents = np.zeros((stored, m_out, n_paths))
    x = np.zeros((dim, n_paths))
    times[0] = 0.0
    means[0] = x

    rngs = [path_rng(seed, i) for i in range(n_paths)]
    sigma_cond = gains.sigma_cond
    phi = expm(A * dt)
    phi_half = expm(A * (dt / 2.0))
    chunk = 1024
    step = 0
    ptr = 1
    while step < n_steps:
        todo = min(chunk, n_steps - step)
        dw = np.empty((todo, m_out, n_paths))
        for i, rng in enumerate(rngs):
            dw[:, :, i] = rng.standard_normal(size=(todo, m_out))
        dw *= np.sqrt(dt)
        for k in range(todo):
            cur = model.H @ x + dw[k] / dt
            x = phi @ x + phi_half @ (K @ dw[k])
            step += 1
            if step % store_every == 0:
                times[ptr] = step * dt
                means[ptr] = x
                currents[ptr] = cur
                ptr += 1
    times = times[:ptr]
    covs = np.broadcast_to(sigma_cond, (ptr, dim, dim))
    return [
        TrajectoryPath(
            times=times.copy(),
            means=means[:ptr, :, i].copy(),
            covs=np.array(covs),
            currents=currents[:ptr, :, i].copy(),
            seed=seed,
        )
        for i in range(n_paths)
    ]


def ensemble_covariance(paths: list[TrajectoryPath], t: float) -> NDArray[np.float64]:
    """
    Sample second-moment matrix of the conditional means across paths at
    time t (which must lie on the common stored grid).
    """
    if len(paths) < 2:
        raise IntegrationError("need at least two paths")
    ref = paths[0].times
    for p in paths[1:]:
        if p.times.shape != ref.shape or not np.allclose(p.times, ref):
            raise IntegrationError("paths do not share a common time grid")
    idx = np.flatnonzero(np.isclose(ref, t, rtol=0.0, atol=1e-12 + 1e-9 * abs(t)))
    if idx.size == 0:
        raise IntegrationError(f"time {t} is not on the stored grid")
    X = np.stack([p.means[idx[0]] for p in paths])  # (n_paths, dim)
    return X.T @ X / len(paths)
