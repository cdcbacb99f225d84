"""Mean, median-of-means and scaled median-of-means estimators.

Stream layout for a kernel call with seed ``s`` and a plan of ``n`` groups:
group ``i`` draws its X values from stream ``(s, i)`` and its scaling factor
from stream ``(s, n + i)``. Changing the scaling width therefore never moves
the group means, and every kernel output is a pure function of
``(source, plan, seed)``.

Two layers are provided. The functional kernels (``sample_mean``,
``mom_estimate``, ``scaled_median_estimate``, ``estimate``) pull draws from a
:class:`~scaledmom.distributions.SampleSource`. The estimator classes wrap
them in the scikit-learn ``fit`` / ``get_params`` protocol and also accept a
plain 1-D array of pre-drawn samples.
"""

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_int, check_spread
from .distributions import SampleSource
from .plan import Accuracy, PlanKind, SamplingPlan, make_plan
from .rng import RngStream

__all__ = [
    "NonFiniteDrawError",
    "PlanMismatchError",
    "Estimate",
    "EstimatorConfig",
    "sample_mean",
    "median",
    "group_means",
    "draw_scalers",
    "mean_estimate",
    "mom_estimate",
    "scaled_median_estimate",
    "estimate",
    "SampleMean",
    "MedianOfMeans",
    "ScaledMedianOfMeans",
]


class NonFiniteDrawError(ValueError):
    """A source produced NaN or an infinite draw."""


class PlanMismatchError(ValueError):
    """A plan was handed to a kernel it was not built for."""


@dataclass(frozen=True)
class Estimate:
    value: float
    plan: SamplingPlan
    draws_consumed: int


@dataclass(frozen=True)
class EstimatorConfig:
    epsilon: float
    delta: float
    c: float
    kind: PlanKind = PlanKind.SCALED
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", PlanKind(self.kind))
        object.__setattr__(self, "c", check_spread(self.c))
        check_int(self.seed, "seed", minimum=0)
        self.accuracy  # validates epsilon and delta

    @property
    def accuracy(self):
        return Accuracy(self.epsilon, self.delta)

    def plan(self):
        return make_plan(self.kind, self.c, self.accuracy)

    def as_dict(self):
        return {
            "kind": self.kind.value,
            "epsilon": float(self.epsilon),
            "delta": float(self.delta),
            "c": self.c,
            "seed": self.seed,
        }


def _generator(rng):
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def _exact_mean(values):
    # fsum is correctly rounded, so the result does not depend on summation order
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise NonFiniteDrawError("source produced a non-finite draw")
    return math.fsum(values.tolist()) / values.size


def sample_mean(src, k, rng):
    """Average of exactly ``k`` fresh draws from ``src``."""
    k = check_int(k, "k", minimum=1)
    return _exact_mean(src.draw(_generator(rng), k))


def median(values):
    """Middle order statistic of an odd-length sequence."""
    values = np.asarray(values, dtype=float).ravel()
    n = values.size
    if n == 0 or n % 2 == 0:
        raise ValueError(f"median needs an odd, nonzero number of values, got {n}")
    if not np.all(np.isfinite(values)):
        raise NonFiniteDrawError("median of non-finite values")
    return float(np.partition(values, n // 2)[n // 2])


def group_means(src, plan, rng):
    """``plan.num_groups`` group means, group ``i`` drawn from stream ``i``."""
    return np.array(
        [
            sample_mean(src, plan.group_size, rng.with_stream(i))
            for i in range(plan.num_groups)
        ]
    )


def _array_group_means(x, plan):
    x = np.asarray(x, dtype=float)
    if x.size < plan.total:
        raise ValueError(f"plan needs {plan.total} samples, got {x.size}")
    blocks = x[: plan.total].reshape(plan.num_groups, plan.group_size)
    return np.array([_exact_mean(row) for row in blocks])


def draw_scalers(plan, epsilon, rng):
    """One Uniform[1 - eps, 1 + eps] factor per group, from streams ``n .. 2n - 1``."""
    n = plan.num_groups
    u = np.array([rng.with_stream(n + i).generator().random() for i in range(n)])
    return (1.0 - epsilon) + 2.0 * epsilon * u


def _require_kind(plan, kind):
    if plan.kind is not kind:
        raise PlanMismatchError(f"expected a {kind.value} plan, got {plan.kind.value}")


def mean_estimate(src, plan, rng):
    _require_kind(plan, PlanKind.MEAN)
    value = sample_mean(src, plan.group_size, rng.with_stream(0))
    return Estimate(value, plan, plan.total)


def mom_estimate(src, plan, rng):
    _require_kind(plan, PlanKind.MOM)
    return Estimate(median(group_means(src, plan, rng)), plan, plan.total)


def scaled_median_estimate(src, plan, acc, rng, *, unit_scalers=False):
    """Median of group means, each multiplied by an independent uniform factor.

    ``unit_scalers=True`` replaces every factor by 1, which reduces the kernel
    to plain median-of-means over the same draws.
    """
    _require_kind(plan, PlanKind.SCALED)
    if plan.epsilon is not None and plan.epsilon != acc.epsilon:
        raise PlanMismatchError(
            f"plan was built for epsilon={plan.epsilon}, accuracy has {acc.epsilon}"
        )
    means = group_means(src, plan, rng)
    if unit_scalers:
        return Estimate(median(means), plan, plan.total)
    scalers = draw_scalers(plan, acc.epsilon, rng)
    return Estimate(median(means * scalers), plan, plan.total)


def estimate(config, src):
    """Plan and run the estimator ``config`` describes."""
    plan = config.plan()
    rng = RngStream(config.seed)
    if config.kind is PlanKind.MEAN:
        return mean_estimate(src, plan, rng)
    if config.kind is PlanKind.MOM:
        return mom_estimate(src, plan, rng)
    return scaled_median_estimate(src, plan, config.accuracy, rng)


class _PlannedMeanEstimator(BaseEstimator):
    _kind = None

    def __init__(self, epsilon=0.1, delta=0.05, c=1.0, random_state=0):
        self.epsilon = epsilon
        self.delta = delta
        self.c = c
        self.random_state = random_state

    def _seed(self):
        if self.random_state is None:
            return int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0])
        return check_int(self.random_state, "random_state", minimum=0)

    def _plan(self):
        acc = Accuracy(self.epsilon, self.delta)
        return acc, make_plan(self._kind, self.c, acc)

    def fit(self, X, y=None):
        """Estimate the mean of X.

        ``X`` is either a :class:`SampleSource`, from which exactly
        ``plan_.total`` draws are taken, or a 1-D array of iid samples whose
        first ``plan_.total`` entries are used in order.
        """
        acc, plan = self._plan()
        rng = RngStream(self._seed())
        if isinstance(X, SampleSource):
            means = group_means(X, plan, rng)
        else:
            X = check_array(X, ensure_2d=False, dtype=np.float64)
            if X.ndim == 2:
                if X.shape[1] != 1:
                    raise ValueError(f"expected a single column of samples, got shape {X.shape}")
                X = X[:, 0]
            means = _array_group_means(X, plan)
        self.location_ = self._combine(means, plan, acc, rng)
        self.plan_ = plan
        self.n_draws_ = plan.total
        self.group_means_ = means
        return self

    def _combine(self, means, plan, acc, rng):
        return median(means)

    @property
    def n_samples_required(self):
        return self._plan()[1].total

    def fit_estimate(self, X):
        """Fit and return the :class:`Estimate` record."""
        self.fit(X)
        return Estimate(self.location_, self.plan_, self.n_draws_)

    def relative_error(self, mean):
        check_is_fitted(self, "location_")
        return abs(self.location_ / mean - 1.0)


class SampleMean(_PlannedMeanEstimator):
    """Plain average of ``ceil(c^2 / (eps^2 delta))`` samples."""

    _kind = PlanKind.MEAN


class MedianOfMeans(_PlannedMeanEstimator):
    """Median of ``2k + 1`` averages of ``ceil(8 (c/eps)^2)`` samples.

    Examples
    --------
    >>> from scaledmom.distributions import Exponential
    >>> est = MedianOfMeans(epsilon=0.1, delta=0.05, c=1.0, random_state=3)
    >>> est.fit(Exponential(1.0)).n_draws_
    7200
    """

    _kind = PlanKind.MOM


class ScaledMedianOfMeans(_PlannedMeanEstimator):
    """Median of uniformly rescaled group means.

    Each group average of ``ceil((c/eps)^2 f(eps))`` samples is multiplied by
    an independent Uniform[1 - eps, 1 + eps] factor before the median is
    taken. The factors come from ``random_state`` even when samples are
    supplied as an array.

    Parameters
    ----------
    epsilon : float in (0, 1/3)
        Relative error target.
    delta : float in (0, 1)
        Allowed failure probability.
    c : float
        Known upper bound on sd(X) / mean(X).
    random_state : int or None
        Seed for the sampling streams; ``None`` draws fresh entropy.

    Examples
    --------
    >>> from scaledmom.distributions import Exponential
    >>> est = ScaledMedianOfMeans(epsilon=0.1, delta=0.05, c=1.0, random_state=3)
    >>> est.fit(Exponential(1.0)).n_draws_
    3375
    """

    _kind = PlanKind.SCALED

    def _combine(self, means, plan, acc, rng):
        return median(means * draw_scalers(plan, acc.epsilon, rng))
