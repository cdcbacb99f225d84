"""Test distributions with closed-form mean and relative spread.

Every source draws from a numpy ``Generator`` handed to it by the caller and
holds no mutable state, so a single instance can be shared across threads
and processes. ``true_mean`` and ``true_c`` (standard deviation over mean)
are the oracle values the harness scores estimates against.
"""

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from ._validation import DomainError, check_epsilon, check_real
from .plan import nuisance_factor

__all__ = [
    "SampleSource",
    "Constant",
    "TwoPoint",
    "Exponential",
    "ScaledBernoulli",
    "LogNormal",
    "UniformPositive",
    "ScaledSource",
    "CountingSource",
    "FAMILIES",
    "make_source",
    "parse_distribution",
    "worst_case_group_source",
]


class SampleSource:
    """An iid stream of draws of a random variable X."""

    name = "source"
    true_mean = None
    true_c = None

    def draw(self, rng, size):
        """Return ``size`` fresh iid draws as a float64 array."""
        raise NotImplementedError

    def next_draw(self, rng):
        return float(self.draw(rng, 1)[0])

    @property
    def params(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def describe(self):
        args = ",".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{self.name}:{args}"


@dataclass(frozen=True)
class Constant(SampleSource):
    value: float = 1.0
    name = "constant"

    def __post_init__(self):
        check_real(self.value, "value", low=0.0)

    @property
    def true_mean(self):
        return float(self.value)

    @property
    def true_c(self):
        return 0.0

    def draw(self, rng, size):
        return np.full(size, float(self.value))


@dataclass(frozen=True)
class TwoPoint(SampleSource):
    """``low`` with probability ``p_low``, otherwise ``high``."""

    low: float
    high: float
    p_low: float = 0.5
    name = "two_point"

    def __post_init__(self):
        check_real(self.low, "low")
        check_real(self.high, "high")
        check_real(self.p_low, "p_low", low=0.0, high=1.0, low_open=False, high_open=False)
        if not self.low <= self.high:
            raise DomainError("two_point needs low <= high")
        if self.true_mean <= 0:
            raise DomainError("two_point mean must be positive")

    @classmethod
    def symmetric(cls, mean, offset):
        """Equiprobable values ``mean - offset`` and ``mean + offset``."""
        return cls(mean - offset, mean + offset, 0.5)

    @property
    def true_mean(self):
        return self.p_low * self.low + (1.0 - self.p_low) * self.high

    @property
    def true_c(self):
        sd = (self.high - self.low) * math.sqrt(self.p_low * (1.0 - self.p_low))
        return sd / self.true_mean

    def draw(self, rng, size):
        return np.where(rng.random(size) < self.p_low, float(self.low), float(self.high))


@dataclass(frozen=True)
class Exponential(SampleSource):
    mean: float = 1.0
    name = "exponential"

    def __post_init__(self):
        check_real(self.mean, "mean", low=0.0)

    @property
    def true_mean(self):
        return float(self.mean)

    @property
    def true_c(self):
        return 1.0

    def draw(self, rng, size):
        return rng.exponential(self.mean, size)


@dataclass(frozen=True)
class ScaledBernoulli(SampleSource):
    """``scale`` with probability ``p``, otherwise 0."""

    p: float
    scale: float = 1.0
    name = "scaled_bernoulli"

    def __post_init__(self):
        check_real(self.p, "p", low=0.0, high=1.0, high_open=False)
        check_real(self.scale, "scale", low=0.0)

    @property
    def true_mean(self):
        return self.scale * self.p

    @property
    def true_c(self):
        return math.sqrt((1.0 - self.p) / self.p)

    def draw(self, rng, size):
        return np.where(rng.random(size) < self.p, float(self.scale), 0.0)


@dataclass(frozen=True)
class LogNormal(SampleSource):
    """Log-normal parameterized directly by its mean and relative spread ``c``."""

    mean: float = 1.0
    c: float = 1.0
    name = "lognormal"

    def __post_init__(self):
        check_real(self.mean, "mean", low=0.0)
        check_real(self.c, "c", low=0.0)

    @property
    def sigma(self):
        return math.sqrt(math.log1p(self.c * self.c))

    @property
    def mu_log(self):
        return math.log(self.mean) - 0.5 * self.sigma**2

    @property
    def true_mean(self):
        return float(self.mean)

    @property
    def true_c(self):
        return float(self.c)

    def draw(self, rng, size):
        return rng.lognormal(self.mu_log, self.sigma, size)


@dataclass(frozen=True)
class UniformPositive(SampleSource):
    low: float = 0.0
    high: float = 1.0
    name = "uniform"

    def __post_init__(self):
        check_real(self.low, "low", low=0.0, low_open=False)
        check_real(self.high, "high")
        if not self.high > self.low:
            raise DomainError("uniform needs high > low")

    @property
    def true_mean(self):
        return 0.5 * (self.low + self.high)

    @property
    def true_c(self):
        return (self.high - self.low) / math.sqrt(12.0) / self.true_mean

    def draw(self, rng, size):
        return rng.uniform(self.low, self.high, size)


@dataclass(frozen=True)
class ScaledSource(SampleSource):
    """Draws of ``factor * X`` using exactly the draws ``base`` would make."""

    base: SampleSource
    factor: float
    name = "scaled"

    def __post_init__(self):
        check_real(self.factor, "factor", low=0.0)

    @property
    def true_mean(self):
        return None if self.base.true_mean is None else self.factor * self.base.true_mean

    @property
    def true_c(self):
        return self.base.true_c

    def draw(self, rng, size):
        return self.factor * self.base.draw(rng, size)


class CountingSource(SampleSource):
    """Wrapper that tallies how many draws pass through it. Not thread safe."""

    name = "counting"

    def __init__(self, base):
        self.base = base
        self.count = 0

    @property
    def true_mean(self):
        return self.base.true_mean

    @property
    def true_c(self):
        return self.base.true_c

    @property
    def params(self):
        return {"base": self.base.describe()}

    def draw(self, rng, size):
        self.count += int(size)
        return self.base.draw(rng, size)


FAMILIES = {
    cls.name: cls
    for cls in (Constant, TwoPoint, Exponential, ScaledBernoulli, LogNormal, UniformPositive)
}


def make_source(family, **params):
    try:
        cls = FAMILIES[family]
    except KeyError:
        raise DomainError(f"unknown distribution family {family!r}; choose from {sorted(FAMILIES)}")
    try:
        return cls(**params)
    except TypeError as exc:
        raise DomainError(f"bad parameters for {family}: {exc}") from None


def parse_distribution(text):
    """Parse ``family:key=value,...``, e.g. ``exponential:mean=1`` or ``lognormal:mean=1,c=3``."""
    family, _, rest = text.strip().partition(":")
    params = {}
    for item in filter(None, (part.strip() for part in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise DomainError(f"expected key=value in distribution spec, got {item!r}")
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise DomainError(f"distribution parameter {key!r} is not a number: {value!r}") from None
    return make_source(family.strip().lower(), **params)


def source_to_dict(source):
    return {"family": source.name, "params": asdict(source)}


def worst_case_group_source(epsilon, mean=1.0):
    """Two-point source at ``mean * (1 +/- alpha)``, ``alpha = eps / sqrt(f(eps))``.

    One draw has the law of a group mean with the largest standard deviation
    the scaled plan allows, concentrated on two symmetric points.
    """
    epsilon = check_epsilon(epsilon)
    alpha = epsilon / math.sqrt(nuisance_factor(epsilon))
    return TwoPoint.symmetric(mean, alpha * mean)
