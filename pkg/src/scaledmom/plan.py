"""Closed-form sample sizes and failure bounds.

Three estimators are planned here:

* ``MEAN``: a single sample average, sized by Chebyshev's inequality.
* ``MOM``: the classic median of ``2k + 1`` averages of ``ceil(8 (c/eps)^2)`` draws.
* ``SCALED``: the median of ``2k + 1`` averages of ``ceil((c/eps)^2 f(eps))``
  draws, each multiplied by an independent Uniform[1 - eps, 1 + eps] factor.

The scaled group size uses the nuisance factor ``f`` unsquared. That is the
size at which a group mean has standard deviation at most ``eps * mu / sqrt(f)``,
which is what the per-group tail bound of 1/4 requires.
"""

import enum
import math
from dataclasses import dataclass

from ._validation import (
    MAX_EXACT_INT,
    DomainError,
    check_delta,
    check_epsilon,
    check_int,
    check_real,
    check_spread,
    guarded_ceil,
)

__all__ = [
    "Accuracy",
    "PlanKind",
    "SamplingPlan",
    "MOM_LEADING_CONSTANT",
    "SCALED_LEADING_CONSTANT",
    "nuisance_factor",
    "chebyshev_failure",
    "median_tail_bound",
    "mean_plan",
    "mom_plan",
    "scaled_plan",
    "make_plan",
]

LN_16_7 = math.log(16.0 / 7.0)
LN_4_3 = math.log(4.0 / 3.0)

#: Draws per unit of (c/eps)^2 ln(1/delta) to leading order.
MOM_LEADING_CONSTANT = 8.0 * 2.0 / LN_16_7
SCALED_LEADING_CONSTANT = 2.0 / LN_4_3


class PlanKind(str, enum.Enum):
    MEAN = "mean"
    MOM = "mom"
    SCALED = "scaled"


@dataclass(frozen=True)
class Accuracy:
    """Target ``P(|mu_hat / mu - 1| > epsilon) <= delta``."""

    epsilon: float
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "epsilon", check_epsilon(self.epsilon))
        object.__setattr__(self, "delta", check_delta(self.delta))


@dataclass(frozen=True)
class SamplingPlan:
    """How many draws an estimator takes: ``num_groups`` means of ``group_size`` draws.

    ``epsilon`` records the accuracy the plan was built for so the scaled
    kernel can reject a plan paired with a different scaling width.
    """

    group_size: int
    num_groups: int
    kind: PlanKind
    epsilon: float = None

    def __post_init__(self):
        check_int(self.group_size, "group_size", minimum=1)
        check_int(self.num_groups, "num_groups", minimum=1)
        if self.num_groups % 2 == 0:
            raise DomainError(f"num_groups must be odd, got {self.num_groups}")
        object.__setattr__(self, "kind", PlanKind(self.kind))
        if self.total > MAX_EXACT_INT:
            raise OverflowError(
                f"plan needs {self.total} draws, more than the largest exact integer {MAX_EXACT_INT}"
            )

    @property
    def total(self):
        return self.group_size * self.num_groups

    def as_dict(self):
        return {
            "kind": self.kind.value,
            "group_size": self.group_size,
            "num_groups": self.num_groups,
            "total": self.total,
        }


def nuisance_factor(epsilon):
    """``(1 - e)^-2 (1 + e - e^2)^-1 (1 + e)``; equals ``1 + 2e + O(e^2)``."""
    e = check_real(epsilon, "epsilon", low=0.0, high=1.0)
    return (1.0 + e) / ((1.0 - e) ** 2 * (1.0 + e - e * e))


def chebyshev_failure(c, epsilon, k):
    """Chebyshev bound ``min(1, c^2 / (eps^2 k))`` on the failure of a k-draw average."""
    c = check_spread(c)
    epsilon = check_real(epsilon, "epsilon", low=0.0)
    k = check_int(k, "k", minimum=1)
    return min(1.0, c * c / (epsilon * epsilon * k))


def median_tail_bound(p, k, two_sided=True):
    """Bound on the chance the median of ``2k + 1`` iid draws leaves ``[a, b]``.

    With ``two_sided=True`` the hypothesis is ``P(R <= a) <= p`` and
    ``P(R >= b) <= p`` and the prefactor is 4. With ``two_sided=False`` the
    hypothesis is ``P(R in [a, b]) >= 1 - p`` and the prefactor is 2.
    """
    p = check_real(p, "p", low=0.0, high=0.5)
    k = check_int(k, "k", minimum=0)
    prefactor = 4.0 if two_sided else 2.0
    bound = prefactor / math.sqrt(math.pi * (k + 1)) * (4.0 * p * (1.0 - p)) ** k
    return min(1.0, max(0.0, bound))


def _num_groups(log_ratio, log_base):
    return 2 * guarded_ceil(log_ratio / log_base) + 1


def mean_plan(c, acc):
    """Single average of ``ceil(c^2 / (eps^2 delta))`` draws (Chebyshev inversion)."""
    c = check_spread(c)
    k = guarded_ceil(c * c / (acc.epsilon**2 * acc.delta))
    return SamplingPlan(k, 1, PlanKind.MEAN, acc.epsilon)


def mom_plan(c, acc):
    c = check_spread(c)
    group_size = guarded_ceil(8.0 * (c / acc.epsilon) ** 2)
    num_groups = _num_groups(math.log(1.0 / acc.delta), LN_16_7)
    return SamplingPlan(group_size, num_groups, PlanKind.MOM, acc.epsilon)


def scaled_plan(c, acc):
    c = check_spread(c)
    group_size = guarded_ceil((c / acc.epsilon) ** 2 * nuisance_factor(acc.epsilon))
    num_groups = _num_groups(math.log(2.0 / acc.delta), LN_4_3)
    return SamplingPlan(group_size, num_groups, PlanKind.SCALED, acc.epsilon)


_PLANNERS = {PlanKind.MEAN: mean_plan, PlanKind.MOM: mom_plan, PlanKind.SCALED: scaled_plan}


def make_plan(kind, c, acc):
    return _PLANNERS[PlanKind(kind)](c, acc)
