"""Trimmed-sum strong law toolkit for heavy-tailed i.i.d. samples.

Builds the deterministic machinery around intermediately trimmed sums of
nonnegative laws with infinite mean: exact distribution functionals,
trimming plans with numeric hypothesis checkers, concentration bounds
with a summable deviation budget, and seeded single-path Monte Carlo
demonstrating that the trimmed sum over its scale settles at one while
the raw sum does not.
"""

__version__ = "0.1.0"

from .distributions import (Atom, AtomicStep, Distribution, DistributionError,
                            LogTail, ParetoTail, QuantileRangeError, Tabulated,
                            UnboundedQuantileError, point_mass, square_step)
from .trimming import (AllowanceTrimRule, ConditionReport, PlanError,
                       PowerThreshold, ProjectedPowerThreshold,
                       ProofVariantTrimRule, SquareStepThreshold,
                       StandardTrimRule, SummableFunction, TrimmingError,
                       TrimmingPlan, check_condition, fluctuation_allowance,
                       format_condition_report, geometric_grid, plan_default,
                       plan_general, plan_standard, rebase_summable)
from .bounds import (BernsteinInput, BoundsError, ProbabilityBound,
                     bernstein_max_tail, bernstein_relative,
                     borel_cantelli_budget, max_deviation_tail_exact)
from .montecarlo import (ConvergenceTrace, ExperimentConfig, MonteCarloError,
                         aggregate, dichotomy_summary, exceedance_counts,
                         run_replication, sample_mean_instability, simulate,
                         trimmed_sum, truncated_sum, untrimmed_extrema_trace)

__all__ = [name for name in dir() if not name.startswith("_")]
