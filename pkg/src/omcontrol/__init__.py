"""
omcontrol: linear Gaussian quantum systems under continuous measurement
and feedback, at desk scale.

Builds drift/diffusion/measurement models of cavity-optomechanical setups,
solves their Lyapunov and Riccati steady states, synthesizes LQG feedback,
evaluates entanglement and squeezing measures, and integrates conditional
trajectories.
"""

__version__ = "0.1.0"

from .engine import (
    CoefficientMatrix,
    LindbladChannel,
    LinearModel,
    ModelError,
    QuadraticHamiltonian,
    SymplecticForm,
    assemble_from_coefficients,
    assemble_model,
    coefficients_from_channels,
    lindblad_diagonalize,
    symplectic_form,
)
from .measures import (
    GaussianState,
    StateError,
    epr_variance,
    log_negativity,
    occupation,
    squeezing_db,
)
from .optomech import (
    AdiabaticRates,
    OptomechParams,
    SqueezedNoise,
    SwapConfig,
    adiabatic_rates,
    cooling_weights,
    cooperativity,
    coupling_for_cooperativity,
    full_model,
    hamiltonian_matrix,
    pure_squeezed_noise,
    squeezed_noise,
    swap_model,
    teleport_model,
)
from .protocols import (
    CoolingResult,
    CrossingError,
    SwapResult,
    analytic_EN,
    conditional_occupation,
    cooling_point,
    critical_crossing,
    optimal_sigma_analytic,
    optimize_phi,
    optimize_sigma,
    swap_point,
    swap_stability,
    teleport_point,
)
from .solvers import (
    ControllerGain,
    SolverError,
    SteadyState,
    closed_loop_covariance,
    is_hurwitz,
    physicality_defect,
    solve_control_riccati,
    solve_filter_riccati,
    solve_lyapunov,
)
from .trajectories import (
    IntegrationError,
    NoiseSpec,
    TrajectoryPath,
    correlated_increments,
    ensemble_covariance,
    path_rng,
    simulate_closed_loop,
    simulate_conditional,
)
