"""Exact and asymptotic laws for the range of a simple random walk and the
range-penalised polymer ``e^{-h |R_n|}``."""

__version__ = "0.1.0"

from .errors import DomainError, ResourceError
from .logreal import LogReal, log_signed_sum, log_sum
from .ruin import (
    Estimate,
    ExitSide,
    StripQuery,
    Validity,
    bruteforce_enumerate,
    bruteforce_probability,
    confinement_asymptotic,
    confinement_dp,
    confinement_exact,
    decay_rate,
    feller_exit_pmf,
    ruin_asymptotic,
)
from .range_law import (
    CenterLaw,
    RangeEvent,
    Regime,
    RegimeKind,
    center_conditional_pmf,
    psi,
    range_event_boundary,
    range_event_exact,
    range_event_fraction,
    range_event_simplified,
    range_shell_dyadic,
    theta_asymptotic,
)
from .partition import (
    CriticalQuantities,
    JointLaw,
    PenaltyRegime,
    PenaltyScheme,
    bar_phi,
    critical_fluct_pmf,
    fluctuation_law,
    local_partition_strong,
    local_partition_weak,
    partition_exact,
    partition_restricted,
    probability,
    phi,
    scales,
    strong_support_set,
    theta_n,
    log_theta_n,
    varsigma,
    z_asymptotic_critical,
    z_asymptotic_strong,
    z_asymptotic_weak,
)
from .gof import GofReport, gof_stats
from .sampler import (
    ConditionedPath,
    SampleBatch,
    chi_square_gof,
    conditioned_path_probability,
    sample_path_conditioned,
    sample_paths_conditioned,
    sample_range,
)
