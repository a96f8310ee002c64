"""Tranche and subsidiary structuring under quantile-based capital rules.

The library models a bounded nonnegative loss, prices it under a strict
quantile rule and under expected shortfall, and builds the two constructions
that drive summed quantile capital to zero: interval tranches and randomized
subsidiary assignment. A small solver finds the cheapest tranche structure
when the number of units is capped or penalized, and the CLI wraps the whole
pipeline with seeded Monte Carlo verification.
"""

from .capital_solver import (
    MAX_ORACLE_ATOMS,
    MAX_SOLVER_ATOMS,
    OverheadSchedule,
    SolveResult,
    brute_force_oracle,
    solve_tranche_dp,
    solve_with_overhead,
)
from .cli import (
    RESTRICTION_NOTE,
    CapitalReport,
    CliCommand,
    TrancheRow,
    emit_report,
    main,
    parse_cli,
    run_simulation,
)
from .errors import (
    AtomTooHeavy,
    CsvFormatError,
    EmptySupport,
    InvalidBounds,
    InvalidLevel,
    NInsufficient,
    NegativeLoss,
    OutOfSupport,
    PartitionMismatch,
    ProbsNotNormalized,
    TooManyAtoms,
    VarsplitError,
)
from .loss_model import (
    Interval,
    LossModel,
    atoms,
    build_model,
    cdf,
    describe,
    distinct_atoms,
    empirical,
    intervals_from_cuts,
    load_losses_csv,
    mass_in,
    order_stat_rank,
    quantile_strict,
    sample,
    uniform,
)
from .risk_measures import (
    RiskLevel,
    additivity_gap,
    as_level,
    es_of_tranche,
    expected_shortfall,
    tail_integral,
    var,
    var_of_tranche,
)
from .structuring import (
    MASS_GUARD,
    Partition,
    RandomizedScheme,
    SchemeValidity,
    TrancheDecomposition,
    build_partition,
    decompose,
    min_subsidiaries,
    randomized_assign,
    randomized_unit_es,
    randomized_unit_var,
    split_realization,
    validate_scheme,
)

__version__ = "0.1.0"
