"""Input validation helpers shared by the planning, estimation and CLI layers."""

import math
import numbers

# Largest integer exactly representable in a binary64 float.
MAX_EXACT_INT = 2**53


class DomainError(ValueError):
    """A parameter lies outside the region where a formula or guarantee applies."""


def check_real(value, name, *, low=None, high=None, low_open=True, high_open=True):
    """Return ``value`` as a finite float inside the given interval.

    Bounds are open by default. Raises :class:`DomainError` otherwise.
    """
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise DomainError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    if low is not None and (value < low or (low_open and value == low)):
        bracket = "(" if low_open else "["
        raise DomainError(f"{name}={value!r} is below the allowed range {bracket}{low}, ...")
    if high is not None and (value > high or (high_open and value == high)):
        bracket = ")" if high_open else "]"
        raise DomainError(f"{name}={value!r} is above the allowed range ..., {high}{bracket}")
    return value


def check_int(value, name, *, minimum=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise DomainError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise DomainError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_epsilon(epsilon):
    """Relative-error target; the scaled guarantee needs 0 < epsilon < 1/3."""
    return check_real(epsilon, "epsilon", low=0.0, high=1.0 / 3.0)


def check_delta(delta):
    return check_real(delta, "delta", low=0.0, high=1.0)


def check_spread(c):
    return check_real(c, "c", low=0.0)


def guarded_ceil(x, rtol=1e-12):
    """Ceiling that ignores representation noise within ``rtol`` of an integer.

    ``8 * (1 / 0.1) ** 2`` evaluates to ``800.0000000000001``; a plain ceiling
    would report 801.
    """
    nearest = round(x)
    if abs(x - nearest) <= rtol * max(1.0, abs(x)):
        return int(nearest)
    return int(math.ceil(x))
