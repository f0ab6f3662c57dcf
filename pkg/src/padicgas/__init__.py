"""Exact evaluation of log-Coulomb gas integrals over nonarchimedean local
fields: set-partition chains, convergence polytopes, the combinatorial
formula and its gas specializations, and an independent digit-enumeration
oracle."""

from .config import DEFAULT, Limits, load_limits
from .domain import (
    AffineForm,
    ChargeVector,
    ExponentAssignment,
    beta_threshold,
    branch_exponent,
    check_omega,
    in_omega,
    in_root_polytope,
    level_exponent,
    omega_constraints,
    pole_hyperplanes,
)
from .errors import (
    ConvergenceError,
    DimensionError,
    DomainError,
    PadicGasError,
    PoleError,
    SaturationError,
    SizeLimitError,
    UnsupportedRhoError,
)
from .evaluate import (
    LowTempResult,
    branch_function,
    closed_form_n2,
    closed_form_n3,
    diameter_moment,
    expectation,
    level_function,
    low_temp_limit,
    mehta_partition,
    z_full,
    z_reduced,
    z_restricted,
)
from .filtrations import (
    BranchPair,
    LevelPair,
    SplittingFiltration,
    all_filtrations,
    branch_to_level,
    enumerate_filtrations,
    falling_factorial,
    level_to_branch,
    orbit_representatives,
    orbit_weight,
    reduction_classes,
)
from .oracle import (
    DigitMatrix,
    MonteCarloResult,
    TruncatedResult,
    assign_level_pair,
    digit_profile_counts,
    exact_truncated_integral,
    max_depth_within_budget,
    measure_of_level_pair,
    monte_carlo_integral,
    valuation_matrix,
)
from .partitions import (
    Partition,
    enumerate_partitions,
    format_partition,
    parse_partition,
    rank,
    refines,
    strict_refines,
)
from .rho import RhoSpec, root_function
from .scalars import EXACT, FLOAT, Scalar

__all__ = [name for name in dir() if not name.startswith("_")]
