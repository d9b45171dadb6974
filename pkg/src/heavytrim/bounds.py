"""Concentration bounds for bounded sums and the summable deviation budget.

The two Bernstein-type bounds are evaluated in log space so that
exponents in the tens of thousands survive; reports carry log10 of the
bound.  The module also hosts the exact maximal-deviation oracle used to
verify that the bounds dominate truth on small lattice instances, via
dynamic programming over prefix-sum distributions in exact rational
arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

from .trimming import TrimmingPlan

__all__ = [
    "BernsteinInput",
    "ProbabilityBound",
    "bernstein_max_tail",
    "bernstein_relative",
    "BudgetRow",
    "BudgetTable",
    "borel_cantelli_budget",
    "max_deviation_tail_exact",
    "max_deviation_tail_enumerate",
    "BoundsError",
]

_LN10 = math.log(10.0)


class BoundsError(ValueError):
    """Arguments outside the domain of a bound."""


@dataclass(frozen=True)
class BernsteinInput:
    """Inputs for the maximal-deviation bound on a sum of bounded variables.

    ``deviation`` is the deviation level t, ``variance`` the variance of
    the full sum, ``amplitude`` an almost-sure bound on each centered
    summand, ``count`` the number of summands (carried for reporting; the
    bound itself depends on it only through the variance).
    """

    deviation: float
    variance: float
    amplitude: float
    count: int = 0

    def __post_init__(self):
        if not self.deviation > 0.0:
            raise BoundsError(f"deviation must be positive, got {self.deviation}")
        if self.variance < 0.0:
            raise BoundsError(f"variance must be nonnegative, got {self.variance}")
        if not self.amplitude > 0.0:
            raise BoundsError(f"amplitude must be positive, got {self.amplitude}")


@dataclass(frozen=True)
class ProbabilityBound:
    """A probability bound stored as the natural log of its raw value.

    ``raw`` may exceed 1 (a vacuous bound); ``value`` clamps to [0, 1]
    for reporting.  ``log10`` stays finite far below the smallest
    positive float.
    """

    log_value: float

    @property
    def raw(self) -> float:
        return math.exp(self.log_value)

    @property
    def value(self) -> float:
        return min(1.0, self.raw)

    @property
    def log10(self) -> float:
        return self.log_value / _LN10

    def __float__(self) -> float:
        return self.value


def bernstein_max_tail(inp: BernsteinInput) -> ProbabilityBound:
    """Bound on P(max over prefixes of |sum - mean| >= deviation).

    Evaluates ``2 exp(-t**2 / (2 V + (2/3) M t))`` for independent
    summands with variance total V, each within M of its mean.
    """
    t = inp.deviation
    denom = 2.0 * inp.variance + (2.0 / 3.0) * inp.amplitude * t
    return ProbabilityBound(math.log(2.0) - t * t / denom)


def bernstein_relative(kappa: float, mean_total: float, upper: float) -> ProbabilityBound:
    """Bound on P(max over prefixes of |sum - mean| >= kappa * mean_total)
    for i.i.d. nonnegative summands bounded by ``upper``.

    Evaluates ``2 exp(-(3 kappa**2 / (6 + 2 kappa)) * mean_total / upper)``;
    equal to :func:`bernstein_max_tail` at deviation kappa * mean_total
    with variance upper * mean_total.
    """
    if not kappa > 0.0:
        raise BoundsError(f"kappa must be positive, got {kappa}")
    if not mean_total > 0.0:
        raise BoundsError(f"mean_total must be positive, got {mean_total}")
    if not upper > 0.0:
        raise BoundsError(f"upper must be positive, got {upper}")
    coef = 3.0 * kappa * kappa / (6.0 + 2.0 * kappa)
    return ProbabilityBound(math.log(2.0) - coef * mean_total / upper)


# --------------------------------------------------------------------------
# summable deviation budget along a plan
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BudgetRow:
    n: int
    exponent_arg: float       # (3 eps^2 / (6 + 2 eps)) * scale(n) / threshold(n)
    log10_summand: float
    partial_sum: float
    within_budget: bool       # summand <= 1 / summable(n)


@dataclass(frozen=True)
class BudgetTable:
    epsilon: float
    rows: tuple[BudgetRow, ...]

    @property
    def total(self) -> float:
        return self.rows[-1].partial_sum if self.rows else 0.0

    def tail_within_budget(self, tail: int = 2) -> bool:
        """Whether the last ``tail`` rows obey the pointwise budget."""
        return all(r.within_budget for r in self.rows[-tail:])

    def csv_rows(self):
        yield ("n", "exponent_arg", "log10_summand", "partial_sum")
        for r in self.rows:
            yield (r.n, repr(r.exponent_arg), repr(r.log10_summand), repr(r.partial_sum))


def borel_cantelli_budget(plan: TrimmingPlan, eps: float,
                          grid: Sequence[int]) -> BudgetTable:
    """Deviation budget making truncated-sum deviations summable.

    For each grid n tabulates the exponent argument
    ``(3 eps^2/(6+2 eps)) * d(n)/t(n)``, the log10 of the resulting
    summand ``exp(-arg)``, the running partial sum, and whether the
    summand is pointwise below ``1/summable(n)``, i.e. whether the
    exponent argument has caught up with ``log summable(n)``.
    """
    if not eps > 0.0:
        raise BoundsError(f"eps must be positive, got {eps}")
    coef = 3.0 * eps * eps / (6.0 + 2.0 * eps)
    rows = []
    running = 0.0
    for n in grid:
        p = plan.checkpoint(int(n))
        arg = coef * math.exp(min(p.log_scale - p.log_threshold, 700.0))
        summand = math.exp(-arg) if arg < 745.0 else 0.0
        running += summand
        rows.append(BudgetRow(
            n=int(n),
            exponent_arg=arg,
            log10_summand=-arg / _LN10,
            partial_sum=running,
            within_budget=arg >= plan.summable.log_value(int(n)),
        ))
    return BudgetTable(epsilon=eps, rows=tuple(rows))


# --------------------------------------------------------------------------
# exact maximal-deviation oracle on small lattice laws
# --------------------------------------------------------------------------

def _as_fractions(support: Sequence, probs: Sequence) -> tuple[list[Fraction], list[Fraction]]:
    sup = [Fraction(v) for v in support]
    pr = [Fraction(p) for p in probs]
    if len(sup) != len(pr) or not sup:
        raise BoundsError("support and probs must be equally sized and nonempty")
    if any(p < 0 for p in pr) or sum(pr) != 1:
        raise BoundsError("probs must be nonnegative and sum to exactly 1; "
                          "pass Fractions or strings for exactness")
    return sup, pr


def max_deviation_tail_exact(support: Sequence, probs: Sequence, n: int,
                             deviation) -> Fraction:
    """P(max over k <= n of |Z_k - E Z_k| >= deviation), exactly.

    Dynamic programming over the distribution of the prefix sum among
    paths that have not yet deviated; the absorbed mass accumulates the
    answer.  All arithmetic is rational, so the result is exact whenever
    support, probs and deviation are rational.
    """
    sup, pr = _as_fractions(support, probs)
    dev = Fraction(deviation)
    if dev <= 0:
        raise BoundsError("deviation must be positive")
    mean = sum(v * p for v, p in zip(sup, pr))
    alive: dict[Fraction, Fraction] = {Fraction(0): Fraction(1)}
    absorbed = Fraction(0)
    for k in range(1, n + 1):
        step_mean = k * mean
        nxt: dict[Fraction, Fraction] = {}
        for s, q in alive.items():
            for v, p in zip(sup, pr):
                if p == 0:
                    continue
                z = s + v
                if abs(z - step_mean) >= dev:
                    absorbed += q * p
                else:
                    nxt[z] = nxt.get(z, Fraction(0)) + q * p
        alive = nxt
    return absorbed


def max_deviation_tail_enumerate(support: Sequence, probs: Sequence, n: int,
                                 deviation) -> Fraction:
    """Same probability by brute-force path enumeration; n must stay small."""
    if len(support) ** n > 4_000_000:
        raise BoundsError("enumeration limited to |support|**n <= 4e6 paths")
    sup, pr = _as_fractions(support, probs)
    dev = Fraction(deviation)
    mean = sum(v * p for v, p in zip(sup, pr))
    total = Fraction(0)
    for path in product(range(len(sup)), repeat=n):
        z = Fraction(0)
        hit = False
        for k, i in enumerate(path, start=1):
            z += sup[i]
            if abs(z - k * mean) >= dev:
                hit = True
                break
        if hit:
            weight = Fraction(1)
            for i in path:
                weight *= pr[i]
            total += weight
    return total
