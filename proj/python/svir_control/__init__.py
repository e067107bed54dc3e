"""Optimal social-distancing control for the SVIR epidemic model.

Thin python layer over the C++ core: SVIR dynamics, the Pontryagin adjoint
system with the three closed-form control maps, the forward-backward sweep
solver, cost evaluation and parameter calibration.
"""

from ._core import (  # noqa: F401
    CostBreakdown,
    CostFamily,
    CostSpec,
    Costate,
    DailyRates,
    DomainError,
    Equilibrium,
    EquilibriumKind,
    EstimationResult,
    ExpostSeries,
    FbsConfig,
    InvalidInput,
    ModelParams,
    NumericalError,
    ObservedSeries,
    SocialCost,
    SolutionPath,
    SvirState,
    TimeGrid,
    controlled_rhs,
    costate_rhs,
    disease_free_equilibrium,
    endemic_equilibrium,
    estimate_baseline_beta,
    estimate_constant_params,
    estimate_time_varying_sir,
    evaluate_constant_policy,
    evaluate_costs,
    expost_control,
    hamiltonian,
    integrate_backward,
    integrate_forward,
    marginal_social_cost,
    optimal_control_exponential,
    optimal_control_linear,
    optimal_control_quadratic,
    reproduction_number,
    running_cost,
    simulate_discrete_svir,
    singular_control_coefficients,
    social_cost,
    solve,
    switching_function,
    switching_function_rate,
    transmission_rate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
