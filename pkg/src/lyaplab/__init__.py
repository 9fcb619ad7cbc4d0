"""Quenched Lyapunov exponents for Brownian motion among periodic and
Poissonian potentials: variational characterization, Feynman-Kac Monte Carlo,
and planar line-process models."""

from .potentials import (
    TorusPotential,
    Realization,
    eval_realization,
    grad_realization,
    mean_potential,
    symmetrize,
    torus_mean,
)
from .varform import (
    DensityField,
    GammaOptions,
    GammaResult,
    K_functional,
    B_functional,
    H_functional,
    gamma,
    gamma_upper_fp,
    fp_scan,
    cov_V_lnV,
    psi_fp,
)
from .lines import (
    LineRep,
    LineProcessSample,
    StripeParams,
    CheapPath,
    NoQualifyingLine,
    sample_lines,
    sample_marked_lines,
    thin_lines,
    line_distances,
    eval_stripe,
    construct_cheap_path,
    normal_vector,
    bessel_j0,
    lambda2,
    r0_for,
)
from .mc import (
    McConfig,
    TravelCostEstimate,
    AlphaEstimate,
    ConstantField,
    TorusField,
    StripeField,
    simulate_travel_cost,
    estimate_alpha,
    travel_cost_in_stripe,
    travel_costs_in_stripe,
)
from .scenarios import (
    ConfigError,
    ExperimentConfig,
    Verdict,
    ScenarioReport,
    SCENARIO_NAMES,
    default_config,
    load_config,
    run,
    write_artifacts,
    scaling_sandwich,
    discontinuity_demo,
)

__version__ = "0.1.0"

__all__ = [
    "TorusPotential", "Realization", "eval_realization", "grad_realization",
    "mean_potential", "symmetrize", "torus_mean",
    "DensityField", "GammaOptions", "GammaResult",
    "K_functional", "B_functional", "H_functional",
    "gamma", "gamma_upper_fp", "fp_scan", "cov_V_lnV", "psi_fp",
    "LineRep", "LineProcessSample", "StripeParams", "CheapPath",
    "NoQualifyingLine", "sample_lines", "sample_marked_lines", "thin_lines",
    "line_distances", "eval_stripe", "construct_cheap_path", "normal_vector",
    "bessel_j0", "lambda2", "r0_for",
    "McConfig", "TravelCostEstimate", "AlphaEstimate",
    "ConstantField", "TorusField", "StripeField",
    "simulate_travel_cost", "estimate_alpha",
    "travel_cost_in_stripe", "travel_costs_in_stripe",
    "ConfigError", "ExperimentConfig", "Verdict", "ScenarioReport",
    "SCENARIO_NAMES", "default_config", "load_config", "run",
    "write_artifacts", "scaling_sandwich", "discontinuity_demo",
    "__version__",
]
