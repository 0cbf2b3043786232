"""Analytic and simulated inter-arrival statistics of aggregated machine-type
traffic at a random-access cell."""
from .analytic import (AggregateMode, AnalyticReport, BatchResult, aggregate_cdf, analytic_report,
                       batch_pmf, exponential_closed_form_cdf, homogeneous_aggregate_cdf,
                       pairwise_win_prob, pareto_closed_form_cdf, single_user_cdf,
                       single_user_pdf, user_excess_cdf)
from .distributions import (BoundedPareto, Deterministic, Distribution, DistributionSpec,
                            Empirical, Exponential, Pareto, Uniform, make_distribution)
from .errors import (DegenerateSampleError, DomainError, InsufficientDataError,
                     InvalidParameterError, MissingInputError, QuadratureError)
from .io import load_scenario, dump_scenario
from .scenario import (CellConfig, FixedDistance, PacketPmf, RatePmf, Scenario, ShiftMixture,
                       UniformDistance, UserClass, shift_set, validate_scenario)
from .simulator import SimConfig, SimResult, run_scenario, simulate_user
from .stats import ks_distance, moments, tv_distance
from .validation import ComparisonReport, SweepSpec, compare, run_preset, run_sweep

__all__ = [
    "AggregateMode", "AnalyticReport", "BatchResult", "aggregate_cdf", "analytic_report", "batch_pmf",
    "exponential_closed_form_cdf", "homogeneous_aggregate_cdf", "pairwise_win_prob",
    "pareto_closed_form_cdf", "single_user_cdf", "single_user_pdf", "user_excess_cdf",
    "BoundedPareto", "Deterministic", "Distribution", "DistributionSpec", "Empirical", "Exponential",
    "Pareto", "Uniform", "make_distribution",
    "DegenerateSampleError", "DomainError", "InsufficientDataError", "InvalidParameterError",
    "MissingInputError", "QuadratureError",
    "load_scenario", "dump_scenario",
    "CellConfig", "FixedDistance", "PacketPmf", "RatePmf", "Scenario", "ShiftMixture",
    "UniformDistance", "UserClass", "shift_set", "validate_scenario",
    "SimConfig", "SimResult", "run_scenario", "simulate_user",
    "ks_distance", "moments", "tv_distance",
    "ComparisonReport", "SweepSpec", "compare", "run_preset", "run_sweep",
]

__version__ = "0.1.0"
