"""Trimming plans for heavy-tailed sums and numeric checkers for their hypotheses.

A trimming plan fixes, for every sample size ``n``, a truncation threshold
``t(n)``, the expected exceedance counts above it, the deterministic scale
``d(n) = n * integral of x dF over [0, t(n)]`` against which the trimmed
sum is compared, and the trim count ``b(n)``.  The plan constructors
enforce the structural hypotheses (quantile fixed points, epsilon range,
pointwise trim floors); the asymptotic hypotheses are turned into grid
verdicts by :func:`check_condition`.

Thresholds are handled in log space throughout: the built-in step law
produces thresholds like ``2**1369`` that no float can hold, while every
quantity the hypotheses actually compare (threshold-to-scale ratios,
exceedance counts, trim counts) stays comfortably in range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .distributions import Distribution, LOG_FLOAT_MAX

_LN2 = math.log(2.0)

__all__ = [
    "SummableFunction",
    "RebasedSummable",
    "rebase_summable",
    "fluctuation_allowance",
    "PowerThreshold",
    "SquareStepThreshold",
    "ProjectedPowerThreshold",
    "StandardTrimRule",
    "ProofVariantTrimRule",
    "AllowanceTrimRule",
    "TrimmingPlan",
    "PlanPoint",
    "plan_standard",
    "plan_default",
    "plan_general",
    "check_condition",
    "ConditionReport",
    "format_condition_report",
    "geometric_grid",
    "TrimmingError",
    "PlanError",
    "CONDITIONS",
]


class TrimmingError(ValueError):
    """Arguments outside the domain of a trimming primitive."""


class PlanError(TrimmingError):
    """A plan hypothesis failed at construction time."""


# --------------------------------------------------------------------------
# functions with summable reciprocals
# --------------------------------------------------------------------------

_FAMILIES = ("power", "polylog", "exponential")


@dataclass(frozen=True)
class SummableFunction:
    """Positive function u on the naturals with a convergent sum of 1/u(n).

    Membership is guaranteed analytically through the parameter domain of
    each family rather than by numeric summation, which could never decide
    convergence:

    - ``power``:       u(n) = n**rho,                 rho > 1
    - ``polylog``:     u(n) = n * log(n+1)**rho,      rho > 1
    - ``exponential``: u(n) = base**n,                base > 1
    """

    family: str
    param: float

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise TrimmingError(f"unknown family {self.family!r}")
        if self.family in ("power", "polylog") and not self.param > 1.0:
            raise TrimmingError(
                f"{self.family} family needs an exponent > 1 for a summable "
                f"reciprocal, got {self.param}")
        if self.family == "exponential" and not self.param > 1.0:
            raise TrimmingError(f"exponential family needs base > 1, got {self.param}")

    @classmethod
    def power(cls, rho: float) -> "SummableFunction":
        return cls("power", float(rho))

    @classmethod
    def polylog(cls, rho: float) -> "SummableFunction":
        return cls("polylog", float(rho))

    @classmethod
    def exponential(cls, base: float) -> "SummableFunction":
        return cls("exponential", float(base))

    def __call__(self, n: int | float) -> float:
        if n < 1:
            raise TrimmingError(f"argument must be at least 1, got {n}")
        if self.family == "power":
            return float(n) ** self.param
        if self.family == "polylog":
            return float(n) * math.log(n + 1.0) ** self.param
        try:
            return self.param ** float(n)
        except OverflowError:
            return math.inf

    def log_value(self, n: int | float) -> float:
        """log u(n), stable for arguments where u itself would overflow."""
        if n < 1:
            raise TrimmingError(f"argument must be at least 1, got {n}")
        if self.family == "power":
            return self.param * math.log(n)
        if self.family == "polylog":
            return math.log(n) + self.param * math.log(math.log(n + 1.0))
        return float(n) * math.log(self.param)

    def values(self, ns: np.ndarray) -> np.ndarray:
        ns = np.asarray(ns, dtype=np.float64)
        if np.any(ns < 1):
            raise TrimmingError("arguments must be at least 1")
        if self.family == "power":
            return ns ** self.param
        if self.family == "polylog":
            return ns * np.log(ns + 1.0) ** self.param
        with np.errstate(over="ignore"):
            return self.param ** ns


@dataclass(frozen=True)
class RebasedSummable:
    """Minimum of a summable function over a shifted, rescaled index window.

    ``rebased(n) = min over j in 0..span of base(floor(n * log_a(b)) + j)``
    with ``span = ceil(log_a(b))``.  The construction guarantees
    ``rebased(floor(log_b(m))) <= base(floor(log_a(m)))`` for every m with
    ``floor(log_b m) >= 1``, and keeps the reciprocal sum convergent.
    Indices below 1 are clamped to 1.
    """

    base: SummableFunction
    log_ratio: float          # log_a(b)
    span: int

    def __call__(self, n: int | float) -> float:
        if n < 1:
            raise TrimmingError(f"argument must be at least 1, got {n}")
        anchor = math.floor(n * self.log_ratio)
        return min(self.base(max(1, anchor + j)) for j in range(self.span + 1))

    def values(self, ns: np.ndarray) -> np.ndarray:
        ns = np.asarray(ns, dtype=np.float64)
        if np.any(ns < 1):
            raise TrimmingError("arguments must be at least 1")
        anchor = np.floor(ns * self.log_ratio)
        stack = [self.base.values(np.maximum(1.0, anchor + j))
                 for j in range(self.span + 1)]
        return np.minimum.reduce(stack)


def rebase_summable(base: SummableFunction, a: float, b: float) -> RebasedSummable:
    """Carry a summable function from base-``a`` to base-``b`` logarithmic indexing.

    Returns w with ``w(floor(log_b m)) <= base(floor(log_a m))`` for all
    integers m with ``floor(log_b m) >= 1``, itself with a summable
    reciprocal.
    """
    if not a > 1.0 or not b > 1.0:
        raise TrimmingError(f"both log bases must exceed 1, got a={a}, b={b}")
    ratio = math.log(b) / math.log(a)
    return RebasedSummable(base, ratio, math.ceil(ratio))


# --------------------------------------------------------------------------
# fluctuation allowance for exceedance counts
# --------------------------------------------------------------------------

def fluctuation_allowance(count: float, n: int, epsilon: float,
                          summable: SummableFunction) -> float:
    """Deviation allowance for the number of exceedances among n draws.

    Evaluates ``8 * max(count, L)**(1/2+eps) * L**(1/2-eps)`` with
    ``L = log(summable(floor(log n)))``.  Strictly increasing in ``count``
    above L, and never below ``8 * L``.

    Parameters
    ----------
    count : expected number of exceedances, nonnegative.
    n : sample size, at least 3 so that floor(log n) >= 1.
    epsilon : exponent split, in (0, 1/4).
    summable : the weight function whose log enters the allowance.
    """
    if n < 3:
        raise TrimmingError(f"sample size must be at least 3, got {n}")
    if not 0.0 < epsilon < 0.25:
        raise TrimmingError(f"epsilon must lie in (0, 1/4), got {epsilon}")
    if count < 0.0:
        raise TrimmingError(f"count must be nonnegative, got {count}")
    log_term = summable.log_value(math.floor(math.log(n)))
    if log_term < 0.0:
        raise TrimmingError(
            f"log weight {log_term} is negative at floor(log n) = "
            f"{math.floor(math.log(n))}; allowance undefined there")
    return 8.0 * max(count, log_term) ** (0.5 + epsilon) * log_term ** (0.5 - epsilon)


# --------------------------------------------------------------------------
# threshold rules: n -> t(n), reported as log t(n)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerThreshold:
    """t(n) = coefficient * n**exponent."""

    exponent: float
    coefficient: float = 1.0

    def __post_init__(self):
        if not self.exponent > 0.0:
            raise TrimmingError(f"exponent must be positive, got {self.exponent}")
        if not self.coefficient > 0.0:
            raise TrimmingError(f"coefficient must be positive, got {self.coefficient}")

    @property
    def name(self) -> str:
        return f"power(exponent={self.exponent}, coefficient={self.coefficient})"

    def log_threshold(self, dist: Distribution, n: int) -> float:
        return math.log(self.coefficient) + self.exponent * math.log(n)


@dataclass(frozen=True)
class SquareStepThreshold:
    """t(n) = 2**(K*K) with K = floor(n**(1/4 - epsilon/2)).

    Matches the atoms of the built-in step law, so every threshold is a
    quantile fixed point there.
    """

    epsilon: float

    def __post_init__(self):
        if not 0.0 < self.epsilon < 0.25:
            raise TrimmingError(f"epsilon must lie in (0, 1/4), got {self.epsilon}")

    @property
    def name(self) -> str:
        return f"square-step(epsilon={self.epsilon})"

    def index(self, n: int) -> int:
        k = math.floor(float(n) ** (0.25 - self.epsilon / 2.0))
        if k < 1:
            raise TrimmingError(f"threshold index vanishes at n = {n}; start grids later")
        return k

    def log_threshold(self, dist: Distribution, n: int) -> float:
        k = self.index(n)
        return (k * k) * _LN2


@dataclass(frozen=True)
class ProjectedPowerThreshold:
    """t(n) = quantile(cdf(n**exponent)): the power target projected onto
    the set of quantile fixed points of the law, hence always admissible."""

    exponent: float

    def __post_init__(self):
        if not self.exponent > 0.0:
            raise TrimmingError(f"exponent must be positive, got {self.exponent}")

    @property
    def name(self) -> str:
        return f"projected-power(exponent={self.exponent})"

    def log_threshold(self, dist: Distribution, n: int) -> float:
        z = self.exponent * math.log(n)
        if z > LOG_FLOAT_MAX:
            raise TrimmingError(f"power target overflows at n = {n}")
        t = dist.quantile(dist.cdf(math.exp(z)))
        return math.log(t)


# --------------------------------------------------------------------------
# trim-count rules: (n, expected strict exceedances) -> b(n) before ceiling
# --------------------------------------------------------------------------

def _loglog(n: int) -> float:
    if n < 3:
        raise TrimmingError(f"sample size must be at least 3, got {n}")
    return math.log(math.log(n))


@dataclass(frozen=True)
class StandardTrimRule:
    """b(n) = ceil(a + 9 * max(a**(1/2+eps) * loglog(n)**(1/2-eps), loglog n))."""

    epsilon: float

    @property
    def name(self) -> str:
        return f"standard(epsilon={self.epsilon})"

    def raw_count(self, n: int, expect_gt: float) -> float:
        ll = _loglog(n)
        slack = 9.0 * max(expect_gt ** (0.5 + self.epsilon) * ll ** (0.5 - self.epsilon), ll)
        return expect_gt + slack


@dataclass(frozen=True)
class ProofVariantTrimRule:
    """Variant with log(n) in the second slot of the max instead of loglog(n)."""

    epsilon: float

    @property
    def name(self) -> str:
        return f"proof-variant(epsilon={self.epsilon})"

    def raw_count(self, n: int, expect_gt: float) -> float:
        ll = _loglog(n)
        slack = 9.0 * max(expect_gt ** (0.5 + self.epsilon) * ll ** (0.5 - self.epsilon),
                          math.log(n))
        return expect_gt + slack


@dataclass(frozen=True)
class AllowanceTrimRule:
    """b(n) = ceil(a + fluctuation_allowance(a, n)): the smallest trim the
    pointwise floor hypothesis admits."""

    epsilon: float
    summable: SummableFunction

    @property
    def name(self) -> str:
        return f"allowance(epsilon={self.epsilon})"

    def raw_count(self, n: int, expect_gt: float) -> float:
        return expect_gt + fluctuation_allowance(expect_gt, n, self.epsilon, self.summable)


# --------------------------------------------------------------------------
# plans
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PlanPoint:
    """All plan-derived quantities at one sample size."""

    n: int
    log_threshold: float
    threshold: float          # exp(log_threshold); inf when beyond float range
    expect_gt: float          # n * P(X > t)
    expect_ge: float          # n * P(X >= t)
    log_scale: float          # log(n * truncated first moment at t)
    scale: float              # exp(log_scale); inf when beyond float range
    trim: int                 # trim count, clamped to [0, n]
    clamped: bool
    allowance_gt: float       # fluctuation allowance at expect_gt
    allowance_ge: float
    margin: float             # max(trim - expect_gt, trim - expect_ge + allowance_ge)
    excess: float             # trim - expect_gt


def _safe_exp(z: float) -> float:
    if z == -math.inf:
        return 0.0
    return math.exp(z) if z <= LOG_FLOAT_MAX else math.inf


@dataclass(frozen=True)
class TrimmingPlan:
    """Threshold rule, trim rule and weight functions bound to one law.

    Immutable; every evaluator is a pure function of ``n``.  Construct via
    :func:`plan_standard`, :func:`plan_default` or :func:`plan_general`,
    which also validate the structural hypotheses on a grid.
    """

    distribution: Distribution
    epsilon: float
    threshold_rule: object
    trim_rule: object
    summable: SummableFunction
    summable_alt: SummableFunction
    label: str = ""
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not 0.0 < self.epsilon < 0.25:
            raise PlanError(f"epsilon must lie in (0, 1/4), got {self.epsilon}")

    def log_threshold(self, n: int) -> float:
        return self.threshold_rule.log_threshold(self.distribution, n)

    def checkpoint(self, n: int) -> PlanPoint:
        if n < 3:
            raise TrimmingError(f"sample size must be at least 3, got {n}")
        d = self.distribution
        log_t = self.log_threshold(n)
        expect_gt = n * d.survival_at_log(log_t)
        expect_ge = n * d.survival_left_at_log(log_t)
        log_scale = math.log(n) + d.log_truncated_moment(log_t)
        raw = self.trim_rule.raw_count(n, expect_gt)
        trim = math.ceil(raw)
        clamped = trim < 0 or trim > n
        trim = min(max(trim, 0), n)
        allow_gt = fluctuation_allowance(expect_gt, n, self.epsilon, self.summable)
        allow_ge = fluctuation_allowance(expect_ge, n, self.epsilon, self.summable)
        margin = max(trim - expect_gt, trim - expect_ge + allow_ge)
        return PlanPoint(
            n=n,
            log_threshold=log_t,
            threshold=_safe_exp(log_t),
            expect_gt=expect_gt,
            expect_ge=expect_ge,
            log_scale=log_scale,
            scale=_safe_exp(log_scale),
            trim=trim,
            clamped=clamped,
            allowance_gt=allow_gt,
            allowance_ge=allow_ge,
            margin=margin,
            excess=trim - expect_gt,
        )

    def table(self, grid: Sequence[int]) -> tuple[PlanPoint, ...]:
        return tuple(self.checkpoint(int(n)) for n in grid)


def geometric_grid(start: int = 16, stop: int = 1_000_000, points: int = 10) -> tuple[int, ...]:
    """Strictly increasing integer grid, geometrically spaced."""
    if start < 3 or stop <= start or points < 2:
        raise TrimmingError("need 3 <= start < stop and at least 2 points")
    raw = np.geomspace(start, stop, points)
    out: list[int] = []
    for v in raw:
        n = int(round(v))
        if not out or n > out[-1]:
            out.append(n)
    return tuple(out)


DEFAULT_VALIDATION_GRID = geometric_grid(16, 1_000_000, 10)


def _validate_plan(plan: TrimmingPlan, grid: Sequence[int], *,
                   require_fixed_points: bool, require_trim_floor: bool) -> tuple[str, ...]:
    warnings: list[str] = []
    if not grid:
        return ()
    points = []
    for n in grid:
        n = int(n)
        log_t = plan.log_threshold(n)
        if require_fixed_points and not plan.distribution.is_quantile_fixed_point(log_t):
            raise PlanError(
                f"threshold at n = {n} is not a quantile fixed point of the law; "
                f"rule {plan.threshold_rule.name} is inadmissible there")
        points.append(plan.checkpoint(n))
    for p, q in zip(points, points[1:]):
        if q.log_threshold < p.log_threshold:
            raise PlanError(f"threshold decreases between n = {p.n} and n = {q.n}")
        if q.expect_gt > q.expect_ge:
            raise PlanError(f"exceedance expectations out of order at n = {q.n}")
    # divergence heuristics are advisory: slow rules plateau on any desk grid
    for i, p in enumerate(points):
        for q in points[i + 1:]:
            if q.n >= 10 * p.n:
                if q.log_threshold <= p.log_threshold:
                    warnings.append(
                        f"threshold stalls between n = {p.n} and n = {q.n}; "
                        "divergence not visible on this grid")
                break
    first, last = points[0], points[-1]
    ratio_first = first.trim / first.n
    ratio_last = last.trim / last.n
    if ratio_last >= 0.5 or ratio_last > ratio_first:
        warnings.append(
            f"trim fraction does not shrink on this grid "
            f"({ratio_first:.3g} at n = {first.n}, {ratio_last:.3g} at n = {last.n})")
    if require_trim_floor:
        for p in points:
            if p.clamped:
                # the raw trim formula did not fit inside [0, n]; the floor
                # hypothesis is void at such transient n
                warnings.append(f"trim count clamped at n = {p.n}; floor not assessed")
                continue
            if p.trim < p.expect_gt + p.allowance_gt:
                raise PlanError(
                    f"trim count {p.trim} at n = {p.n} is below the exceedance "
                    f"floor {p.expect_gt + p.allowance_gt:.3f}")
    return tuple(dict.fromkeys(warnings))


def plan_standard(dist: Distribution, threshold_rule, epsilon: float,
                  grid: Sequence[int] | None = None, *,
                  trim_rule=None, label: str = "standard") -> TrimmingPlan:
    """Plan with the explicit ceiling trim formula and fixed internal weights.

    The weight functions are pinned to power(9/8) for the allowance and
    power(2) for the limit cap; the caller chooses only the threshold rule
    and epsilon.  Thresholds must be quantile fixed points of the law at
    every grid point, otherwise construction fails naming the offending n.
    """
    plan = TrimmingPlan(
        distribution=dist,
        epsilon=epsilon,
        threshold_rule=threshold_rule,
        trim_rule=trim_rule or StandardTrimRule(epsilon),
        summable=SummableFunction.power(9.0 / 8.0),
        summable_alt=SummableFunction.power(2.0),
        label=label,
    )
    g = DEFAULT_VALIDATION_GRID if grid is None else tuple(grid)
    w = _validate_plan(plan, g, require_fixed_points=True, require_trim_floor=False)
    object.__setattr__(plan, "warnings", w)
    return plan


def plan_default(dist: Distribution, epsilon: float,
                 grid: Sequence[int] | None = None) -> TrimmingPlan:
    """Plan whose threshold projects n**(1/2 - 2 epsilon) onto the quantile
    fixed points of the law, so the fixed-point hypothesis holds by
    construction for any law."""
    rule = ProjectedPowerThreshold(0.5 - 2.0 * epsilon)
    return plan_standard(dist, rule, epsilon, grid, label="default")


def plan_general(dist: Distribution, threshold_rule, trim_rule, epsilon: float,
                 summable: SummableFunction, summable_alt: SummableFunction,
                 grid: Sequence[int] | None = None, *,
                 label: str = "general") -> TrimmingPlan:
    """Fully caller-specified plan.

    Construction verifies the pointwise trim floor
    ``b(n) >= expect_gt + allowance(expect_gt, n)`` at every grid point,
    since it is a hypothesis rather than a limit; pass ``grid=()`` to
    skip validation when deliberately building a failing plan for
    diagnostics.
    """
    plan = TrimmingPlan(
        distribution=dist,
        epsilon=epsilon,
        threshold_rule=threshold_rule,
        trim_rule=trim_rule,
        summable=summable,
        summable_alt=summable_alt,
        label=label,
    )
    g = DEFAULT_VALIDATION_GRID if grid is None else tuple(grid)
    w = _validate_plan(plan, g, require_fixed_points=True, require_trim_floor=True)
    object.__setattr__(plan, "warnings", w)
    return plan


# --------------------------------------------------------------------------
# condition checking
# --------------------------------------------------------------------------

def _ratio(point: PlanPoint) -> float:
    """threshold / scale, finite even when both overflow floats."""
    z = point.log_threshold - point.log_scale
    return _safe_exp(z) if z <= LOG_FLOAT_MAX else math.inf


def _value_standard_limit(plan: TrimmingPlan, p: PlanPoint) -> float:
    ll = _loglog(p.n)
    fluct = max(p.expect_gt ** (0.5 + plan.epsilon) * ll ** (0.5 - plan.epsilon),
                math.log(p.n))
    return _ratio(p) * fluct


def _value_margin_limit(plan: TrimmingPlan, p: PlanPoint) -> float:
    return _ratio(p) * max(p.margin, plan.summable_alt.log_value(p.n))


def _value_excess_limit(plan: TrimmingPlan, p: PlanPoint) -> float:
    return _ratio(p) * max(p.excess, plan.summable_alt.log_value(p.n))


def _value_truncation_limit(plan: TrimmingPlan, p: PlanPoint) -> float:
    # (t / truncated moment) * log(summable(n)) / n == ratio * log(summable(n))
    return _ratio(p) * plan.summable.log_value(p.n)


def _margin_trim_floor(plan: TrimmingPlan, p: PlanPoint) -> float:
    return p.trim - (p.expect_gt + p.allowance_gt)


def _margin_excess_floor(plan: TrimmingPlan, p: PlanPoint) -> float:
    return p.excess - p.allowance_gt


CONDITIONS: dict[str, tuple[str, Callable, str]] = {
    "standard-limit": (
        "limit", _value_standard_limit,
        "threshold-to-scale ratio times the exceedance fluctuation term"),
    "trim-floor": (
        "pointwise", _margin_trim_floor,
        "trim count minus expected strict exceedances and their allowance"),
    "margin-limit": (
        "limit", _value_margin_limit,
        "threshold-to-scale ratio times max(trim margin, log alt weight)"),
    "excess-floor": (
        "pointwise", _margin_excess_floor,
        "excess trim over expected exceedances minus the allowance"),
    "excess-limit": (
        "limit", _value_excess_limit,
        "threshold-to-scale ratio times max(excess trim, log alt weight)"),
    "truncation-limit": (
        "limit", _value_truncation_limit,
        "threshold-to-moment ratio times log weight, per sample"),
}


@dataclass(frozen=True)
class ConditionReport:
    """Grid evaluation of one plan hypothesis.

    ``verdict`` is "satisfied", "violated" or "inconclusive".  Pointwise
    hypotheses are violated by any negative margin; limit hypotheses are
    satisfied only when the final value sits below the tolerance and the
    fitted log-log slope over the last half of the grid is negative,
    and are never "violated", merely inconclusive.
    """

    condition: str
    kind: str
    grid: tuple[int, ...]
    values: tuple[float, ...]
    final_value: float
    trend: float
    tolerance: float
    verdict: str
    notes: tuple[str, ...] = ()


def _slope(grid: Sequence[int], values: Sequence[float], logs: bool) -> float:
    half = len(values) // 2
    xs = np.log(np.asarray(grid[half:], dtype=np.float64))
    ys = np.asarray(values[half:], dtype=np.float64)
    if logs:
        ys = np.log(ys)
    xs = xs - xs.mean()
    denom = float(np.dot(xs, xs))
    if denom == 0.0:
        return 0.0
    return float(np.dot(xs, ys - ys.mean()) / denom)


def check_condition(plan: TrimmingPlan, condition: str, grid: Sequence[int],
                    tolerance: float = 1e-2) -> ConditionReport:
    """Evaluate one hypothesis of the plan on a grid and deliver a verdict.

    The grid must be strictly increasing with at least 8 points spanning
    at least three decades; asymptotic statements judged on fewer points
    would be noise.
    """
    if condition not in CONDITIONS:
        raise TrimmingError(f"unknown condition {condition!r}; "
                            f"known: {sorted(CONDITIONS)}")
    grid = tuple(int(n) for n in grid)
    if len(grid) < 8:
        raise TrimmingError("condition grids need at least 8 points")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise TrimmingError("condition grids must be strictly increasing")
    if grid[-1] < 1000 * grid[0]:
        raise TrimmingError("condition grids must span at least three decades")
    kind, fn, _ = CONDITIONS[condition]
    notes: list[str] = []
    points = plan.table(grid)
    for p in points:
        if p.clamped:
            notes.append(f"trim count clamped to [0, n] at n = {p.n}")
    values = []
    degenerate = False
    for p in points:
        if kind == "limit" and p.log_scale == -math.inf:
            degenerate = True
            notes.append(f"scale vanishes at n = {p.n}; threshold below the support")
            values.append(math.inf)
            continue
        values.append(fn(plan, p))
    final = values[-1]
    if kind == "pointwise":
        trend = _slope(grid, values, logs=False)
        # a clamped trim count voids the hypothesis at that n; the clamp is
        # already flagged in the notes
        bad = [str(p.n) for p, v in zip(points, values) if v < 0.0 and not p.clamped]
        verdict = "violated" if bad else "satisfied"
        if bad:
            notes.append("floor fails at n in {" + ", ".join(bad) + "}")
    else:
        finite = all(math.isfinite(v) and v > 0.0 for v in values)
        if degenerate or not finite:
            verdict = "inconclusive"
            trend = math.nan
            if not degenerate:
                notes.append("non-finite or non-positive values on the grid")
        else:
            trend = _slope(grid, values, logs=True)
            verdict = ("satisfied"
                       if final < tolerance and trend < 0.0
                       else "inconclusive")
    return ConditionReport(
        condition=condition,
        kind=kind,
        grid=grid,
        values=tuple(values),
        final_value=final,
        trend=trend,
        tolerance=tolerance,
        verdict=verdict,
        notes=tuple(dict.fromkeys(notes)),
    )


def conditions_for_plan(plan: TrimmingPlan) -> tuple[str, ...]:
    """Conditions meaningfully checkable for this plan.

    The excess-trim pair assumes the law is eventually continuous; it is
    disabled for laws whose atoms persist arbitrarily high.
    """
    base = ("standard-limit", "trim-floor", "margin-limit", "truncation-limit")
    if plan.distribution.atom_free_tail_start() is not None:
        return base + ("excess-floor", "excess-limit")
    return base


def format_condition_report(reports: Sequence[ConditionReport] | ConditionReport) -> str:
    """Structured text report, one condition per block."""
    if isinstance(reports, ConditionReport):
        reports = [reports]
    blocks = []
    for r in reports:
        lines = [
            f"condition {r.condition}",
            f"  kind: {r.kind}",
            f"  quantity: {CONDITIONS[r.condition][2]}",
            f"  verdict: {r.verdict}",
            f"  tolerance: {r.tolerance:.3e}",
            f"  final value: {r.final_value:.6e} at n = {r.grid[-1]}",
            f"  trend slope over last half: {r.trend:.4f}",
        ]
        for note in r.notes:
            lines.append(f"  note: {note}")
        lines.append("  n value")
        for n, v in zip(r.grid, r.values):
            lines.append(f"  {n} {v:.6e}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"
