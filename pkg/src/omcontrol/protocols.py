"""
High-level experiment pipelines: LQG feedback cooling, conditional-state
readout, time-continuous teleportation and entanglement swapping, plus the
scalar optimizers and closed-form benchmarks used to cross-check them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .engine import ModelError
from .measures import GaussianState, epr_variance, log_negativity, occupation
from .optomech import (
    OptomechParams,
    SqueezedNoise,
    SwapConfig,
    cooling_weights,
    full_model,
    swap_model,
    teleport_model,
)
from .solvers import (
    SolverError,
    closed_loop_covariance,
    is_hurwitz,
    solve_control_riccati,
    solve_filter_riccati,
    solve_lyapunov,
)


class CrossingError(RuntimeError):
    """Raised when a curve never brackets the requested threshold."""


@dataclass
class CoolingResult:
    """Closed-loop cooling outcome at one parameter point."""

    n_ss: float
    phi_opt: float
    effort: float
    stable: bool


@dataclass
class SwapResult:
    """Steady-state two-mode entanglement at one parameter point."""

    EN: float
    epr: float
    sigma_opt: float
    stable: bool


def cooling_point(params: OptomechParams, h_m: float = 100.0) -> CoolingResult:
    """
    Steady-state mechanical occupation under LQG feedback cooling at the
    given homodyne angle.

    Chains the full model through the filter and control Riccati equations
    and the closed-loop covariance; an unsolvable filter or controller is
    reported as stable=False rather than raised.
    """
    model = full_model(params)
    P, Q = cooling_weights(h_m)
    try:
        gains = solve_control_riccati(model, P, Q)
        sigma_total, effort = closed_loop_covariance(model, gains)
        state = GaussianState(mean=np.zeros(4), sigma=sigma_total)
    except (SolverError, ValueError):
        return CoolingResult(n_ss=np.nan, phi_opt=params.phi, effort=np.nan, stable=False)
    return CoolingResult(
        n_ss=occupation(state, mode=0),
        phi_opt=params.phi,
        effort=effort,
        stable=True,
    )


def optimize_phi(params: OptomechParams, h_m: float = 100.0) -> CoolingResult:
    """
    Minimize the cooled occupation over the homodyne angle φ ∈ [0, π).

    32-point grid seeding followed by simplex refinement; the objective is
    π-periodic, so angles are wrapped back into [0, π).
    """

    def objective(phi: float) -> float:
        res = cooling_point(params.replace(phi=phi % np.pi), h_m)
        return res.n_ss if res.stable else np.inf

    grid = np.linspace(0.0, np.pi, 32, endpoint=False)
    values = [objective(phi) for phi in grid]
    best_idx = int(np.argmin(values))
    if not np.isfinite(values[best_idx]):
        return CoolingResult(n_ss=np.nan, phi_opt=np.nan, effort=np.nan, stable=False)
    res = minimize(
        lambda v: objective(v[0]),
        x0=np.array([grid[best_idx]]),
        method="Nelder-Mead",
        options={"xatol": 1e-6, "fatol": 1e-12},
    )
    phi_opt = float(res.x[0]) % np.pi
    out = cooling_point(params.replace(phi=phi_opt), h_m)
    if out.stable and out.n_ss <= values[best_idx]:
        return CoolingResult(out.n_ss, phi_opt, out.effort, True)
    return CoolingResult(values[best_idx], float(grid[best_idx]), np.nan, True)


def conditional_occupation(params: OptomechParams) -> float:
    """
    Mechanical occupation of the conditional steady state Σ̂_ss.

    Defined even when the drift is unstable, as long as the filter Riccati
    equation has a stabilizing solution.
    """
    model = full_model(params)
    filt = solve_filter_riccati(model)
    state = GaussianState(mean=np.zeros(4), sigma=filt.sigma)
    return occupation(state, mode=0)


def teleport_point(
    params: OptomechParams,
    noise: SqueezedNoise,
    epsilon: float | None = None,
) -> tuple[float, np.ndarray]:
    """
    Steady-state mechanical squeezing (dB) of the teleportation protocol
    and the underlying 2x2 covariance.
    """
    from .measures import squeezing_db

    model = teleport_model(params, noise, epsilon=epsilon)
    sigma = solve_lyapunov(model.F, model.N).sigma
    return squeezing_db(sigma), sigma


def _swap_log_negativity(
    params: OptomechParams, cfg: SwapConfig, epsilon: float | None
) -> float | None:
    """Log-negativity of the swap steady state, or None when unstable."""
    model = swap_model(params, cfg, epsilon=epsilon)
    if not is_hurwitz(model.F):
        return None
    return log_negativity(solve_lyapunov(model.F, model.N).sigma)


def swap_point(
    params: OptomechParams,
    cfg: SwapConfig,
    epsilon: float | None = None,
) -> SwapResult:
    """Steady-state entanglement of the swapping protocol at fixed gain."""
    model = swap_model(params, cfg, epsilon=epsilon)
    if not is_hurwitz(model.F):
        return SwapResult(EN=np.nan, epr=np.nan, sigma_opt=cfg.sigma, stable=False)
    sigma = solve_lyapunov(model.F, model.N).sigma
    return SwapResult(
        EN=log_negativity(sigma),
        epr=epr_variance(sigma),
        sigma_opt=cfg.sigma,
        stable=True,
    )


def _swap_sigma_lower_bound(params: OptomechParams, upsilon: float, epsilon: float) -> float:
    """Smallest feedback gain keeping the swap drift Hurwitz at fixed υ."""
    big_gamma = 2.0 * params.g**2 / params.kappa
    margin = params.gamma / 2.0 + epsilon * big_gamma
    # 4υσΓ > Γ - margin, and σ > 0 overall.
    bound = (big_gamma - margin) / (4.0 * upsilon * big_gamma)
    return max(bound, 0.0)


def optimize_sigma(
    params: OptomechParams,
    upsilon: float = 0.75,
    eta: float | None = None,
    epsilon: float | None = None,
) -> SwapResult:
    """
    Maximize the swap log-negativity over the feedback gain σ inside the
    stable interval (golden-section search; plateaus break toward small σ).
    """
    from .optomech import adiabatic_rates

    eps = adiabatic_rates(params).epsilon if epsilon is None else float(epsilon)
    if 4.0 * upsilon >= 3.0 + eps + params.gamma * params.kappa / (4.0 * params.g**2):
        raise CrossingError(
            "no stable gain exists: the stabilizer split violates "
            f"4υ = {4 * upsilon:.3g} < 3 + ε + γκ/4g²"
        )
    lo = _swap_sigma_lower_bound(params, upsilon, eps) + 1e-9

    def negative_en(sigma: float) -> float:
        en = _swap_log_negativity(params, SwapConfig(upsilon, sigma, eta), eps)
        return -en if en is not None else np.inf

    hi = max(4.0, 4.0 * lo)
    seeds = np.linspace(max(lo, 1e-6), hi, 24)
    seed_vals = [negative_en(s) for s in seeds]
    k = int(np.argmin(seed_vals))
    if not np.isfinite(seed_vals[k]):
        raise CrossingError("no stable gain found on the search interval")
    left = seeds[k - 1] if k > 0 else max(lo, 1e-6)
    right = seeds[k + 1] if k + 1 < len(seeds) else hi
    res = minimize_scalar(
        negative_en, bounds=(left, right), method="bounded",
        options={"xatol": 1e-7},
    )
    best_sigma = float(res.x)
    out = swap_point(params, SwapConfig(upsilon, best_sigma, eta), epsilon=eps)
    if seed_vals[k] < -out.EN:
        best_sigma = float(seeds[k])
        out = swap_point(params, SwapConfig(upsilon, best_sigma, eta), epsilon=eps)
    return SwapResult(EN=out.EN, epr=out.epr, sigma_opt=best_sigma, stable=out.stable)


def analytic_EN(C: float, nbar: float, sigma: float, upsilon: float) -> float:
    """
    Closed-form steady-state log-negativity of the swapping protocol for
    ideal detection (η = 1) and fully suppressed counter-rotating terms
    (ε = 0), clamped at zero.
    """
    num = 0.5 * C * (nbar + 1.0) * (3.0 * sigma - 1.0) * (4.0 * upsilon - 1.0) + 1.0
    den = C * (nbar + 1.0) * (3.0 * sigma * (sigma - 1.0) + 1.0) + 2.0 * nbar + 1.0
    if num <= 0 or den <= 0:
        return 0.0
    return max(0.0, float(np.log(num / den)))


def optimal_sigma_analytic(C: float, nbar: float) -> float:
    """Gain maximizing the closed-form log-negativity at υ = 3/4."""
    A = C * (nbar + 1.0)
    if A <= 0:
        raise ModelError("need positive cooperativity")
    disc = (2.0 - 2.0 * A) ** 2 + 24.0 * A * (nbar + 1.0)
    return float(((2.0 * A - 2.0) + np.sqrt(disc)) / (6.0 * A))


def swap_stability(
    g: float,
    kappa: float,
    epsilon: float,
    upsilon: float,
    sigma: float,
    gamma: float = 1.0,
) -> bool:
    """
    Routh-Hurwitz stability of the swapping feedback loop, via the double
    inequality 3 + ε + γκ/4g² > 4υ > [(1-ε) - γκ/4g²]/σ.

    Equivalent to the drift eigenvalue test: in collective quadratures the
    drift is diagonal with damping margins γ/2 + εΓ + Γ(4υσ-1) and
    γ/2 + εΓ + Γ(3-4υ), Γ = 2g²/κ.  Matches is_hurwitz on the assembled
    model, including the marginal-case convention.
    """
    big_gamma = 2.0 * g**2 / kappa
    margin_strong = gamma / 2.0 + epsilon * big_gamma + big_gamma * (4.0 * upsilon * sigma - 1.0)
    margin_weak = gamma / 2.0 + epsilon * big_gamma + big_gamma * (3.0 - 4.0 * upsilon)
    return bool(min(margin_strong, margin_weak) > 1e-9)


def critical_crossing(
    curve: Sequence[tuple[float, float]], threshold: float
) -> float:
    """
    Abscissa where a sampled curve crosses the threshold, by linear
    interpolation inside the bracketing interval.
    """
    pts = sorted((float(x), float(y)) for x, y in curve)
    if len(pts) < 2:
        raise CrossingError("need at least two points to bracket a crossing")
    for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
        d0, d1 = y0 - threshold, y1 - threshold
        if d0 == 0.0:
            return x0
        if d0 * d1 < 0.0:
            return x0 + (x1 - x0) * d0 / (d0 - d1)
    if pts[-1][1] == threshold:
        return pts[-1][0]
    raise CrossingError(
        f"curve never crosses {threshold}: range "
        f"[{min(y for _, y in pts):.4g}, {max(y for _, y in pts):.4g}]"
    )
