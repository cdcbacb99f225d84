"""Numerical certification of the per-group tail bound and the median bound.

The worst case for ``P(Y R >= 1 + eps)`` over mean-1 variables with standard
deviation at most ``alpha`` is attained by a two-point law. Parameterizing
that law by its upper offset ``k2`` gives the one-dimensional objective
:func:`h_upper`; the lower tail gives :func:`h_lower`. The bound of 1/4 per
tail holds iff both minima are at least 3/4.

Two independent routes reach that minimum:

* :func:`certify_h_min` grid-searches the closed-form objective and refines
  with golden-section search;
* :func:`lemma3_two_point_scan` builds explicit :class:`TwoPointSpec` laws and
  evaluates their exact tail probabilities with :func:`exact_scaled_tails`.

For the median step, :func:`beta_median_tail_exact` gives the exact chance
that the median of ``2k + 1`` uniforms exceeds ``1 - p``, for comparison
with :func:`scaledmom.plan.median_tail_bound`.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import betainc

from ._validation import DomainError, check_int, check_real
from .plan import (
    MOM_LEADING_CONSTANT,
    SCALED_LEADING_CONSTANT,
    median_tail_bound,
    nuisance_factor,
)

__all__ = [
    "TwoPointSpec",
    "exact_scaled_tails",
    "h_upper",
    "h_lower",
    "f1",
    "f1_derivative",
    "k2_star",
    "alpha_plus",
    "alpha_minus",
    "golden_section_min",
    "certify_h_min",
    "lemma3_two_point_scan",
    "beta_median_tail_exact",
    "Check",
    "default_epsilon_grid",
    "run_certification",
]

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TwoPointSpec:
    """``Y = 1 + k1`` with probability ``p1``, else ``1 + k2``."""

    p1: float
    k1: float
    k2: float

    def __post_init__(self):
        check_real(self.p1, "p1", low=0.0, high=1.0, low_open=False, high_open=False)
        if self.k1 > 0:
            raise DomainError(f"k1 must be <= 0, got {self.k1}")
        if self.k2 <= 0:
            raise DomainError(f"k2 must be > 0, got {self.k2}")

    @classmethod
    def from_upper(cls, k2, alpha):
        """Mean 1, standard deviation ``alpha``, upper value ``1 + k2``."""
        a2 = alpha * alpha
        return cls(k2 * k2 / (k2 * k2 + a2), -a2 / k2, k2)

    @classmethod
    def from_lower(cls, k1, alpha):
        """Mean 1, standard deviation ``alpha``, lower value ``1 + k1`` (``k1 < 0``)."""
        a2 = alpha * alpha
        return cls(a2 / (k1 * k1 + a2), k1, -a2 / k1)

    @property
    def mean_offset(self):
        return self.p1 * self.k1 + (1.0 - self.p1) * self.k2

    @property
    def variance(self):
        return self.p1 * self.k1**2 + (1.0 - self.p1) * self.k2**2


def _prob_r_at_least(x, eps):
    if x >= 1.0 + eps:
        return 0.0
    if x <= 1.0 - eps:
        return 1.0
    return 0.5 - (x - 1.0) / (2.0 * eps)


def exact_scaled_tails(spec, epsilon):
    """Exact ``(P(YR >= 1 + eps), P(YR <= 1 - eps))`` for ``R ~ U[1 - eps, 1 + eps]``.

    With ``R = 1 + eps * (2U - 1)``, ``P(R >= x) = 1/2 - (x - 1) / (2 eps)``
    inside the window; centering on 1 keeps the symmetric case exact in
    floating point.
    """
    eps = check_real(epsilon, "epsilon", low=0.0, high=1.0)
    q_plus = q_minus = 0.0
    for prob, value in ((spec.p1, 1.0 + spec.k1), (1.0 - spec.p1, 1.0 + spec.k2)):
        if prob == 0.0:
            continue
        if value <= 0.0:
            raise DomainError(f"two-point value {value} is not positive")
        q_plus += prob * _prob_r_at_least((1.0 + eps) / value, eps)
        q_minus += prob * (1.0 - _prob_r_at_least((1.0 - eps) / value, eps))
    return q_plus, q_minus


def _check_h_args(epsilon, alpha):
    return (
        check_real(epsilon, "epsilon", low=0.0, high=1.0),
        check_real(alpha, "alpha", low=0.0),
    )


def h_upper(k2, epsilon, alpha):
    """``P(W R < 1 + eps)`` for the mean-1, sd-``alpha`` two-point law with upper offset ``k2``."""
    eps, alpha = _check_h_args(epsilon, alpha)
    k2 = check_real(k2, "k2", low=0.0)
    a2, s2 = alpha * alpha, k2 * k2
    value = s2 / (s2 + a2)
    if k2 <= 2.0 * eps / (1.0 - eps):
        value += a2 / (s2 + a2) * ((1.0 + eps) / (1.0 + k2) - (1.0 - eps)) / (2.0 * eps)
    return value


def h_lower(k1, epsilon, alpha):
    """``P(W R > 1 - eps)`` for the mean-1, sd-``alpha`` two-point law with lower offset ``k1``.

    The scaled lower point straddles ``1 - eps`` only for ``k1 >= -2 eps / (1 + eps)``;
    below that edge its contribution is zero and the objective is continuous.
    """
    eps, alpha = _check_h_args(epsilon, alpha)
    k1 = check_real(k1, "k1", low=-1.0, high=0.0, high_open=False)
    a2, s2 = alpha * alpha, k1 * k1
    value = s2 / (s2 + a2)
    if k1 >= -2.0 * eps / (1.0 + eps):
        value += a2 / (s2 + a2) * (1.0 + eps - (1.0 - eps) / (1.0 + k1)) / (2.0 * eps)
    return value


def f1(k2, epsilon):
    """Largest ``alpha^2`` with ``h_upper(k2) >= 3/4`` when ``k2 > eps / (eps + 2)``."""
    eps = check_real(epsilon, "epsilon", low=0.0, high=1.0)
    denom = k2 * (eps + 2.0) - eps
    if denom == 0.0:
        raise ZeroDivisionError(f"f1 has a pole at k2 = eps / (eps + 2) = {k2}")
    return k2 * k2 * (k2 + 1.0) * eps / denom


def f1_derivative(k2, epsilon):
    eps = check_real(epsilon, "epsilon", low=0.0, high=1.0)
    denom = k2 * (eps + 2.0) - eps
    if denom == 0.0:
        raise ZeroDivisionError("f1 derivative has a pole at k2 = eps / (eps + 2)")
    quad = k2 * k2 * (eps + 2.0) + k2 * (1.0 - eps) - eps
    return 2.0 * k2 * eps * quad / denom**2


def k2_star(epsilon):
    """Minimizer of :func:`f1` on ``k2 > eps / (eps + 2)``."""
    eps = check_real(epsilon, "epsilon", low=0.0, high=1.0)
    return (eps - 1.0 + math.sqrt(5.0 * eps * eps + 6.0 * eps + 1.0)) / (2.0 * (eps + 2.0))


def alpha_plus(epsilon):
    """Upper-tail sd bound ``eps * sqrt((1 - e)^2 (1 + e - e^2) / (1 + e))`` = ``eps / sqrt(f(eps))``."""
    e = check_real(epsilon, "epsilon", low=0.0, high=1.0)
    return e * math.sqrt((1.0 - e) ** 2 * (1.0 + e - e * e) / (1.0 + e))


def alpha_minus(epsilon):
    """Lower-tail sd bound ``eps * sqrt((1 + e)^3 (1 - 2e) / (1 - 3e + 2e^2))``."""
    e = check_real(epsilon, "epsilon", low=0.0, high=0.5)
    return e * math.sqrt((1.0 + e) ** 3 * (1.0 - 2.0 * e) / (1.0 - 3.0 * e + 2.0 * e * e))


def golden_section_min(func, lo, hi, tol=1e-10, max_iter=200):
    """Minimize a unimodal ``func`` on ``[lo, hi]``; returns ``(x, func(x))``."""
    a, b = lo, hi
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1_, f2_ = func(x1), func(x2)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if f1_ <= f2_:
            b, x2, f2_ = x2, x1, f1_
            x1 = b - INV_PHI * (b - a)
            f1_ = func(x1)
        else:
            a, x1, f1_ = x1, x2, f2_
            x2 = a + INV_PHI * (b - a)
            f2_ = func(x2)
    x = 0.5 * (a + b)
    return x, func(x)


def _side_interval(eps, side):
    if side == "upper":
        return 0.0, 2.0 * eps / (1.0 - eps)
    if side == "lower":
        return -2.0 * eps / (1.0 + eps), 0.0
    raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")


def certify_h_min(epsilon, alpha, side="upper", grid_points=2000):
    """Minimum of :func:`h_upper` over ``k2 > 0`` (or :func:`h_lower` over ``k1 <= 0``).

    Outside the indicator window each objective reduces to its first term,
    which grows with ``|k|``, so the window plus its edge covers the whole
    half-line. The best grid point is refined by golden-section search to
    1e-10. Returns ``(min_value, argmin)``; comparing with 3/4 is up to the
    caller.
    """
    eps, alpha = _check_h_args(epsilon, alpha)
    grid_points = check_int(grid_points, "grid_points", minimum=1000)
    lo, hi = _side_interval(eps, side)
    h = h_upper if side == "upper" else h_lower
    step = (hi - lo) / grid_points
    if side == "upper":
        grid = lo + step * np.arange(1, grid_points + 1)
    else:
        grid = lo + step * np.arange(0, grid_points)
    values = np.array([h(float(k), eps, alpha) for k in grid])
    i = int(np.argmin(values))
    best_k, best = float(grid[i]), float(values[i])
    a = float(grid[max(i - 1, 0)])
    b = float(grid[min(i + 1, grid_points - 1)])
    k, val = golden_section_min(lambda x: h(x, eps, alpha), a, b)
    if val < best:
        best_k, best = k, val
    return best, best_k


def _scan_worst(tail, lo, hi, grid_points, rounds):
    best_x, best_q = lo, -math.inf
    for _ in range(rounds):
        grid = np.linspace(lo, hi, grid_points)
        qs = np.array([tail(float(x)) for x in grid])
        i = int(np.argmax(qs))
        if qs[i] > best_q:
            best_x, best_q = float(grid[i]), float(qs[i])
        lo, hi = float(grid[max(i - 1, 0)]), float(grid[min(i + 1, grid_points - 1)])
    return best_q, best_x


def lemma3_two_point_scan(epsilon, alpha, grid_points=1000, side="upper", rounds=4):
    """Largest exact tail over mean-1, sd-``alpha`` two-point laws.

    ``side="upper"`` scans the upper offset ``k2`` and reports the worst
    ``P(YR >= 1 + eps)``; ``side="lower"`` scans ``k1`` for
    ``P(YR <= 1 - eps)``; ``side="both"`` returns the larger of the two.
    Laws whose lower point is not positive are skipped. Each round zooms a
    uniform grid onto the neighbors of the current best point.
    """
    eps, alpha = _check_h_args(epsilon, alpha)
    if side == "both":
        return max(
            lemma3_two_point_scan(eps, alpha, grid_points, s, rounds) for s in ("upper", "lower")
        )
    a2 = alpha * alpha
    if side == "upper":
        # k1 = -alpha^2 / k2 must stay above -1
        lo = a2 * (1.0 + 1e-9) + 1e-15
        hi = 6.0 * eps / (1.0 - eps)

        def tail(k2):
            return exact_scaled_tails(TwoPointSpec.from_upper(k2, alpha), eps)[0]

    elif side == "lower":
        lo = max(-6.0 * eps / (1.0 + eps), -1.0 + 1e-9)
        hi = -1e-15

        def tail(k1):
            return exact_scaled_tails(TwoPointSpec.from_lower(k1, alpha), eps)[1]

    else:
        raise ValueError(f"side must be 'upper', 'lower' or 'both', got {side!r}")
    if lo >= hi:
        return 0.0
    return _scan_worst(tail, lo, hi, grid_points, rounds)[0]


def beta_median_tail_exact(p, k):
    """``P(M > 1 - p)`` for ``M`` the median of ``2k + 1`` iid uniforms.

    ``M ~ Beta(k + 1, k + 1)`` is symmetric about 1/2, so this equals the
    regularized incomplete beta ``I_p(k + 1, k + 1)``.
    """
    p = check_real(p, "p", low=0.0, high=1.0)
    k = check_int(k, "k", minimum=0)
    return float(betainc(k + 1, k + 1, p))


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    threshold: float
    relation: str
    detail: dict = field(default_factory=dict)
    gating: bool = True

    def as_dict(self):
        return asdict(self)


def default_epsilon_grid():
    return [i / 100 for i in range(1, 34)]


def _worst(name, relation, threshold, items, gating=True):
    """Fold ``(value, where)`` pairs into one check, keeping the least favorable value."""
    if relation == ">=":
        value, where = min(items, key=lambda t: t[0])
        passed = value >= threshold
    else:
        value, where = max(items, key=lambda t: t[0])
        passed = value <= threshold
    return Check(name, bool(passed), float(value), float(threshold), relation, {"at": where}, gating)


def run_certification(
    epsilon_grid=None,
    grid_points=2000,
    scan_points=1000,
    alpha_inflation=1.0,
    h_tol=1e-9,
    tail_tol=1e-6,
    agree_tol=1e-6,
    median_p_grid=None,
):
    """Run every numerical check and return a list of :class:`Check`.

    ``alpha_inflation`` multiplies the standard-deviation bound used by the
    tail checks; values above 1 must make those checks fail.

    The closed-form median bound is gated on ``median_p_grid`` (default
    0.05 to 0.35). Its derivation drops a ``1 / (1 - 2p)`` factor, so it only
    holds while ``p (1 - p) <= 1 - 2p``, i.e. ``p <= (3 - sqrt 5) / 2``. The
    comparison up to p = 0.45 is reported as a non-gating entry, as is the
    lower-tail minimum at the larger ``alpha_minus`` width, which falls below
    3/4.
    """
    p_grid = [j / 20 for j in range(1, 8)] if median_p_grid is None else list(median_p_grid)
    grid = default_epsilon_grid() if epsilon_grid is None else list(epsilon_grid)
    for eps in grid:
        check_real(eps, "epsilon", low=0.0, high=1.0 / 3.0, high_open=False)
    checks = [
        Check("scaled_leading_constant", SCALED_LEADING_CONSTANT <= 6.96,
              SCALED_LEADING_CONSTANT, 6.96, "<="),
        Check("mom_leading_constant", abs(MOM_LEADING_CONSTANT - 19.35) <= 0.01,
              MOM_LEADING_CONSTANT, 19.35, "~0.01"),
    ]

    h_up, h_lo, scan_up, scan_lo, agree = [], [], [], [], []
    k2_low, k2_high, dominance, f1_bound, identity = [], [], [], [], []
    for eps in grid:
        alpha = alpha_plus(eps) * alpha_inflation
        up, _ = certify_h_min(eps, alpha, "upper", grid_points)
        lo, _ = certify_h_min(eps, alpha, "lower", grid_points)
        q_up = lemma3_two_point_scan(eps, alpha, scan_points, "upper")
        q_lo = lemma3_two_point_scan(eps, alpha, scan_points, "lower")
        h_up.append((up, eps))
        h_lo.append((lo, eps))
        scan_up.append((q_up, eps))
        scan_lo.append((q_lo, eps))
        agree.append((max(abs(1.0 - up - q_up), abs(1.0 - lo - q_lo)), eps))
        ks = k2_star(eps)
        k2_low.append((ks - (eps - eps * eps), eps))
        k2_high.append((ks - eps, eps))
        dominance.append((alpha_plus(eps) - alpha_minus(eps), eps))
        f1_bound.append((f1(ks, eps) - eps * eps / nuisance_factor(eps), eps))
        identity.append((abs(alpha_plus(eps) * math.sqrt(nuisance_factor(eps)) - eps), eps))

    checks += [
        _worst("h_upper_min", ">=", 0.75 - h_tol, h_up),
        _worst("h_lower_min", ">=", 0.75 - h_tol, h_lo),
        _worst("two_point_upper_tail", "<=", 0.25 + tail_tol, scan_up),
        _worst("two_point_lower_tail", "<=", 0.25 + tail_tol, scan_lo),
        _worst("oracle_agreement", "<=", agree_tol, agree),
        _worst("k2_star_lower_bound", ">=", 0.0, k2_low),
        _worst("k2_star_upper_bound", "<=", 0.0, k2_high),
        _worst("alpha_dominance", "<=", 0.0, dominance),
        _worst("f1_at_k2_star", ">=", 0.0, f1_bound),
        _worst("alpha_plus_identity", "<=", 1e-12, identity),
    ]

    def margins(ps):
        return [
            (beta_median_tail_exact(p, k) / median_tail_bound(p, k, two_sided=False),
             {"p": p, "k": k})
            for k in range(1, 51)
            for p in ps
        ]

    # ratio exact / bound; at most 1 when the bound holds
    checks.append(_worst("median_tail_bound", "<=", 1.0, margins(p_grid)))
    checks.append(_worst("median_tail_bound_to_p045", "<=", 1.0,
                         margins([j / 20 for j in range(1, 10)]), gating=False))
    k0 = [(abs(beta_median_tail_exact(j / 20, 0) - j / 20), j / 20) for j in range(1, 20)]
    checks.append(_worst("median_tail_k0_exact", "<=", 1e-12, k0))
    lower_at_minus = [
        (certify_h_min(eps, alpha_minus(eps) * alpha_inflation, "lower", grid_points)[0], eps)
        for eps in grid
    ]
    checks.append(_worst("h_lower_min_alpha_minus", ">=", 0.75 - h_tol, lower_at_minus,
                         gating=False))
    return checks
