from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scaledmom._validation import DomainError, guarded_ceil
from scaledmom.plan import (
    MOM_LEADING_CONSTANT,
    SCALED_LEADING_CONSTANT,
    Accuracy,
    PlanKind,
    SamplingPlan,
    chebyshev_failure,
    mean_plan,
    median_tail_bound,
    mom_plan,
    nuisance_factor,
    scaled_plan,
)

mpmath.mp.dps = 50

epsilons = st.floats(min_value=1e-4, max_value=1 / 3, exclude_max=True)
deltas = st.floats(min_value=1e-12, max_value=0.999)
spreads = st.floats(min_value=0.01, max_value=20.0)


def f_exact(eps):
    e = Fraction(eps)
    return (1 + e) / ((1 - e) ** 2 * (1 + e - e * e))


def ceil_exact(x):
    return -((-x.numerator) // x.denominator) if isinstance(x, Fraction) else int(mpmath.ceil(x))


class TestNuisanceFactor:
    def test_limit_at_zero(self):
        assert nuisance_factor(1e-12) == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("eps", [0.1, 0.3, 0.01, 0.25])
    def test_matches_rational_evaluation(self, eps):
        assert nuisance_factor(eps) == pytest.approx(float(f_exact(eps)), rel=1e-15)

    def test_point_values(self):
        assert nuisance_factor(0.1) == pytest.approx(1.2458942122550685, abs=1e-12)
        assert nuisance_factor(0.3) == pytest.approx(1.3 / (0.49 * 1.21), rel=1e-15)

    @pytest.mark.parametrize("eps", [0.0, 1.0, -0.1, 1.5, float("nan")])
    def test_domain(self, eps):
        with pytest.raises(DomainError):
            nuisance_factor(eps)

    @given(epsilons)
    def test_expansion_envelope(self, eps):
        assert 1.0 < nuisance_factor(eps) < 1 + 2 * eps + 10 * eps**2


class TestChebyshev:
    def test_one_eighth(self):
        assert chebyshev_failure(1.0, 0.1, 800) == pytest.approx(0.125, rel=1e-14)

    def test_clamped(self):
        assert chebyshev_failure(1.0, 1.0, 1) == 1.0
        assert chebyshev_failure(2.0, 0.1, 400) == pytest.approx(1.0, rel=1e-12)
        assert chebyshev_failure(3.0, 0.1, 400) == 1.0

    def test_bad_k(self):
        with pytest.raises(DomainError):
            chebyshev_failure(1.0, 0.1, 0)


class TestMedianTailBound:
    def test_two_sided_example(self):
        expected = 4 / mpmath.sqrt(6 * mpmath.pi) * (mpmath.mpf(7) / 16) ** 5
        assert median_tail_bound(1 / 8, 5, two_sided=True) == pytest.approx(float(expected), abs=1e-12)
        assert median_tail_bound(1 / 8, 5) == pytest.approx(0.014767, abs=1e-6)

    def test_clamp_at_k0(self):
        assert median_tail_bound(0.25, 0, two_sided=True) == 1.0

    def test_one_sided_example(self):
        expected = 2 / mpmath.sqrt(14 * mpmath.pi) * mpmath.mpf(0.75) ** 13
        assert median_tail_bound(0.25, 13, two_sided=False) == pytest.approx(float(expected), abs=1e-12)

    @pytest.mark.parametrize("p", [0.0, 0.5, 0.7, -0.1])
    def test_domain(self, p):
        with pytest.raises(DomainError):
            median_tail_bound(p, 3)

    @given(st.floats(min_value=1e-3, max_value=0.499), st.integers(0, 200), st.booleans())
    def test_nonincreasing_in_k(self, p, k, two):
        assert median_tail_bound(p, k + 1, two) <= median_tail_bound(p, k, two)

    @given(st.floats(min_value=1e-3, max_value=0.49), st.integers(1, 200))
    def test_nondecreasing_in_p(self, p, k):
        assert median_tail_bound(p, k, False) <= median_tail_bound(p + 0.005, k, False)


def test_guarded_ceil():
    assert guarded_ceil(8 * (1 / 0.1) ** 2) == 800
    assert guarded_ceil(800.5) == 801
    assert guarded_ceil(3.0) == 3
    assert guarded_ceil(3.0000001) == 4


class TestPlans:
    def test_mom_example(self):
        plan = mom_plan(1.0, Accuracy(0.1, 0.05))
        assert (plan.group_size, plan.num_groups, plan.total) == (800, 9, 7200)
        assert plan.kind is PlanKind.MOM

    def test_mom_half(self):
        plan = mom_plan(1.0, Accuracy(0.1, 0.5))
        assert (plan.num_groups, plan.total) == (3, 2400)

    def test_scaled_example(self):
        plan = scaled_plan(1.0, Accuracy(0.1, 0.05))
        assert (plan.group_size, plan.num_groups, plan.total) == (125, 27, 3375)
        assert plan.total / mom_plan(1.0, Accuracy(0.1, 0.05)).total < 1

    def test_mean_plan_inverts_chebyshev(self):
        acc = Accuracy(0.1, 0.05)
        plan = mean_plan(2.0, acc)
        assert plan.num_groups == 1
        assert plan.group_size == 8000
        assert chebyshev_failure(2.0, acc.epsilon, plan.group_size) <= acc.delta

    def test_leading_constants(self):
        assert SCALED_LEADING_CONSTANT == pytest.approx(6.952, abs=1e-3)
        assert SCALED_LEADING_CONSTANT <= 6.96
        assert MOM_LEADING_CONSTANT == pytest.approx(19.354, abs=1e-3)

    @pytest.mark.parametrize("eps", [1 / 3, 0.4, 0.0])
    def test_accuracy_rejects(self, eps):
        with pytest.raises(DomainError):
            Accuracy(eps, 0.1)

    def test_even_groups_rejected(self):
        with pytest.raises(DomainError):
            SamplingPlan(10, 4, PlanKind.MOM)

    def test_overflow(self):
        with pytest.raises(OverflowError):
            scaled_plan(1e6, Accuracy(1e-6, 1e-6))

    @settings(max_examples=200)
    @given(spreads, epsilons, deltas)
    def test_against_high_precision_oracle(self, c, eps, delta):
        c_, e_, d_ = Fraction(c), Fraction(eps), mpmath.mpf(delta)
        mom_g = ceil_exact(8 * (c_ / e_) ** 2)
        mom_n = 2 * ceil_exact(mpmath.log(1 / d_) / mpmath.log(mpmath.mpf(16) / 7)) + 1
        sc_g = ceil_exact((c_ / e_) ** 2 * f_exact(eps))
        sc_n = 2 * ceil_exact(mpmath.log(2 / d_) / mpmath.log(mpmath.mpf(4) / 3)) + 1
        acc = Accuracy(eps, delta)
        m, s = mom_plan(c, acc), scaled_plan(c, acc)
        # the 1e-12 guard may round down an exact value within 1e-12 of an integer
        assert m.group_size in (mom_g, mom_g - 1)
        assert m.num_groups in (mom_n, mom_n - 2)
        assert s.group_size in (sc_g, sc_g - 1)
        assert s.num_groups in (sc_n, sc_n - 2)

    @given(spreads, epsilons, deltas)
    def test_ceiling_tightness(self, c, eps, delta):
        plan = scaled_plan(c, Accuracy(eps, delta))
        exact = (c / eps) ** 2 * nuisance_factor(eps)
        assert exact * (1 - 1e-9) <= plan.group_size < exact + 1

    @given(spreads, epsilons, st.floats(min_value=1e-12, max_value=0.49))
    def test_odd_groups_at_least_three(self, c, eps, delta):
        acc = Accuracy(eps, delta)
        for plan in (mom_plan(c, acc), scaled_plan(c, acc)):
            assert plan.num_groups % 2 == 1
            assert plan.num_groups >= 3
            assert plan.total == plan.group_size * plan.num_groups

    def test_ratio_approaches_leading_constant_ratio(self):
        # the finite-delta ratio climbs towards 19.354 / 6.952 = 2.784 as delta shrinks
        ratios = []
        for delta in (1e-6, 1e-12, 1e-100):
            acc = Accuracy(1e-3, delta)
            ratios.append(mom_plan(1.0, acc).total / scaled_plan(1.0, acc).total)
        assert ratios == sorted(ratios)
        assert ratios[-1] == pytest.approx(2.78, rel=0.02)
        assert MOM_LEADING_CONSTANT / SCALED_LEADING_CONSTANT == pytest.approx(2.784, abs=1e-3)
