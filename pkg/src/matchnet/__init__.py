"""matchnet: marriage-market matching through friends.

Closed-form meeting rates for a two-gender market where singles meet
partners directly or through the friendship networks that costly
socialization creates, equilibrium solvers for the one-type and
two-education-type models, comparative-statics sweeps, and a
finite-population Monte Carlo simulator that validates the large-market
limits.
"""
from .equilibrium import (
    EquilibriumResult,
    a_bar,
    ds_da_implicit,
    existence_threshold_homogeneous,
    existence_threshold_low,
    foc_high_lhs,
    foc_homogeneous_lhs,
    foc_low_lhs,
    solve_heterogeneous,
    solve_homogeneous,
)
from .params import (
    LinkProbability,
    MatchingRates,
    ModelParams,
    SocializationProfile,
    TypeRates,
)
from .rates import (
    aggregate_effort,
    expected_utility,
    link_probability,
    matching_rates,
    network_marriage_rate,
    pair_link_prob,
    phi_finite_n,
    psi_het,
    psi_het_dev,
    psi_homogeneous,
    psi_homogeneous_dev,
    upsilon_het,
    upsilon_homogeneous,
)
from .simulate import (
    SimEstimates,
    compare_to_closed_form,
    generate_population,
    monte_carlo,
    realize_network,
    run_round,
)
from .sweep import SweepTable, detect_peak, emit, numeric_derivative, sweep

__version__ = "0.1.0"

__all__ = [
    "EquilibriumResult",
    "LinkProbability",
    "MatchingRates",
    "ModelParams",
    "SimEstimates",
    "SocializationProfile",
    "SweepTable",
    "TypeRates",
    "a_bar",
    "aggregate_effort",
    "compare_to_closed_form",
    "detect_peak",
    "ds_da_implicit",
    "emit",
    "existence_threshold_homogeneous",
    "existence_threshold_low",
    "expected_utility",
    "foc_high_lhs",
    "foc_homogeneous_lhs",
    "foc_low_lhs",
    "generate_population",
    "link_probability",
    "matching_rates",
    "monte_carlo",
    "network_marriage_rate",
    "numeric_derivative",
    "pair_link_prob",
    "phi_finite_n",
    "psi_het",
    "psi_het_dev",
    "psi_homogeneous",
    "psi_homogeneous_dev",
    "realize_network",
    "run_round",
    "solve_heterogeneous",
    "solve_homogeneous",
    "sweep",
    "upsilon_het",
    "upsilon_homogeneous",
]
