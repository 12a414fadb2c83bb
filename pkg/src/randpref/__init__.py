"""Stochastic revealed preference with possibly intransitive consumers.

Tests whether repeated cross-sections of demand are generated by a
population of WARP-consistent types (random preference model) or of
SARP-consistent types (random utility model), and bounds welfare
comparisons and counterfactual demand by linear programming.
"""

from .axioms import Axiom, DemandObservationSeries, check_axiom, build_revealed_relations
from .budgets import (
    ON_INTERSECTION,
    Budget,
    NormalizedBudget,
    Patch,
    PatchPartition,
    Side,
    TiePolicy,
    check_triangular_configuration,
    classify_bundle,
    compute_patch_partition,
    normalize_budgets,
    patch_linear_bounds,
)
from .cone import feasibility, lp_solve, nnls
from .errors import (
    ColumnCapExceeded,
    DuplicateBudgetError,
    NotRationalizable,
    RandPrefError,
    SolverError,
    ValidationError,
)
from .rational_types import (
    TypeMatrix,
    enumerate_types,
    pairwise_consistent,
    pairwise_type_matrix,
)
from .simulation import (
    PowerStudyConfig,
    monte_carlo_power,
    shafer_demand,
    shafer_value,
    simulate_population,
)
from .stochastic_test import (
    Observations,
    StochasticChoiceVector,
    TestReport,
    bonferroni,
    bootstrap_test,
    estimate_rho,
    jn_statistic,
    pairwise_rationality_test,
)
from .welfare import (
    budget_preference_indicator,
    counterfactual_expectation_bounds,
    counterfactual_patch_probability_bounds,
    counterfactual_setup,
    welfare_bounds,
)

__version__ = "0.1.0"
