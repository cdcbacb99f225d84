"""Acceptance suite: one PASS/FAIL line per criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -s`` to see the summary lines.
"""

import math
import time

import numpy as np
import pytest

from scaledmom.distributions import Exponential, worst_case_group_source
from scaledmom.estimators import draw_scalers, group_means
from scaledmom.harness import ExperimentConfig, dumps_json, rows_to_csv, simulate
from scaledmom.lemmas import (
    TwoPointSpec,
    alpha_plus,
    beta_median_tail_exact,
    certify_h_min,
    exact_scaled_tails,
    f1,
    f1_derivative,
    k2_star,
    lemma3_two_point_scan,
)
from scaledmom.plan import (
    MOM_LEADING_CONSTANT,
    SCALED_LEADING_CONSTANT,
    Accuracy,
    PlanKind,
    SamplingPlan,
    median_tail_bound,
    mom_plan,
    scaled_plan,
)
from scaledmom.rng import RngStream

EPS_GRID = [i / 100 for i in range(1, 34)]


def report(name, passed, detail):
    print(f"\n[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    assert passed, detail


@pytest.fixture(scope="module")
def simulations():
    out = {}
    for kind in ("scaled", "mom"):
        config = ExperimentConfig(kind, 0.1, 0.25, 1.0, Exponential(1.0), trials=2000, master_seed=1)
        t0 = time.perf_counter()
        rep, rows = simulate(config, jobs=1)
        out[kind] = (config, rep, rows, time.perf_counter() - t0)
    return out


def test_c1_leading_constants():
    ok = SCALED_LEADING_CONSTANT <= 6.96 and abs(MOM_LEADING_CONSTANT - 19.35) <= 0.01
    report("1 leading constants", ok,
           f"scaled {SCALED_LEADING_CONSTANT:.6f} (<= 6.96), mom {MOM_LEADING_CONSTANT:.6f} (19.35 +- 0.01)")


def test_c2_plan_arithmetic():
    acc = Accuracy(0.1, 0.05)
    s, m = scaled_plan(1.0, acc), mom_plan(1.0, acc)
    got = ((s.group_size, s.num_groups, s.total), (m.group_size, m.num_groups, m.total))
    report("2 plan arithmetic", got == ((125, 27, 3375), (800, 9, 7200)), f"scaled {got[0]}, mom {got[1]}")


def test_c3_tail_certification():
    t0 = time.perf_counter()
    h_min, tail_max, disagree = math.inf, -math.inf, 0.0
    for eps in EPS_GRID:
        alpha = alpha_plus(eps)
        for side in ("upper", "lower"):
            h, _ = certify_h_min(eps, alpha, side)
            q = lemma3_two_point_scan(eps, alpha, side=side)
            h_min, tail_max = min(h_min, h), max(tail_max, q)
            disagree = max(disagree, abs((1.0 - h) - q))
    elapsed = time.perf_counter() - t0
    ok = h_min >= 0.75 - 1e-9 and tail_max <= 0.25 + 1e-6 and disagree <= 1e-6 and elapsed < 10
    report("3 tail certification", ok,
           f"min h {h_min:.12f}, max tail {tail_max:.12f}, disagreement {disagree:.2e}, {elapsed:.1f}s")


def test_c4_median_tail_bound():
    t0 = time.perf_counter()
    violations = []
    for j in range(1, 10):
        p = j / 20
        for k in range(1, 51):
            exact, bound = beta_median_tail_exact(p, k), median_tail_bound(p, k, two_sided=False)
            if exact > bound:
                violations.append((p, k, exact / bound))
    k0 = max(abs(beta_median_tail_exact(j / 20, 0) - j / 20) for j in range(1, 10))
    elapsed = time.perf_counter() - t0
    worst = max(violations, key=lambda v: v[2]) if violations else None
    detail = (f"{len(violations)} of 450 (p, k) pairs exceed the bound"
              + (f", worst ratio {worst[2]:.4f} at p={worst[0]}, k={worst[1]}" if worst else "")
              + f"; k=0 equality error {k0:.1e}; {elapsed:.2f}s")
    report("4 median tail bound", not violations and k0 <= 1e-12 and elapsed < 5, detail)


def test_c5_minimizer_internals():
    lo_bad = [e for e in EPS_GRID if not e - e * e <= k2_star(e) <= e]
    worst_rel = 0.0
    for eps in EPS_GRID:
        pole, ks = eps / (eps + 2), k2_star(eps)
        for x in (pole + 0.3 * (ks - pole), pole + 0.6 * (ks - pole), 1.5 * ks, 3 * ks, 1.0):
            h = 1e-6 * x
            fd = (f1(x + h, eps) - f1(x - h, eps)) / (2 * h)
            worst_rel = max(worst_rel, abs(fd - f1_derivative(x, eps)) / abs(f1_derivative(x, eps)))
    ok = not lo_bad and worst_rel <= 1e-6
    report("5 minimizer internals", ok,
           f"k2* bound violations {lo_bad}, worst derivative rel error {worst_rel:.2e}")


def test_c6_end_to_end(simulations):
    lines, ok = [], True
    for kind in ("scaled", "mom"):
        config, rep, _, secs = simulations[kind]
        ok &= rep.cp_upper_99 <= 0.25
        lines.append(f"{kind}: {rep.failures}/{rep.trials} failures, cp99 {rep.cp_upper_99:.5f}, "
                     f"{rep.total_draws_per_trial} draws/trial, {secs:.1f}s")
    ok &= simulations["scaled"][1].total_draws_per_trial < simulations["mom"][1].total_draws_per_trial
    total = sum(s[3] for s in simulations.values())
    ok &= total < 30
    report("6 end-to-end failure rate", ok, "; ".join(lines))


def test_c7_worst_case_construction():
    eps = 0.1
    exact_pm = exact_scaled_tails(TwoPointSpec(0.5, -eps, eps), eps)
    src = worst_case_group_source(eps)
    q_plus, q_minus = exact_scaled_tails(TwoPointSpec(0.5, src.low - 1.0, src.high - 1.0), eps)
    n = 100_001
    plan = SamplingPlan(1, n, PlanKind.SCALED, eps)
    rng = RngStream(2024)
    scaled = group_means(src, plan, rng) * draw_scalers(plan, eps, rng)
    mc_plus = float(np.mean(scaled >= 1 + eps))
    mc_minus = float(np.mean(scaled <= 1 - eps))
    ok = (exact_pm == (0.25, 0.25) and abs(mc_plus - q_plus) <= 0.01 and abs(mc_minus - q_minus) <= 0.01)
    report("7 worst-case construction", ok,
           f"+-eps tails {exact_pm}; exact ({q_plus:.5f}, {q_minus:.5f}) vs MC ({mc_plus:.5f}, {mc_minus:.5f})")


def test_c8_determinism(simulations):
    ok = True
    for kind in ("scaled", "mom"):
        config, rep, rows, _ = simulations[kind]
        again, rows_again = simulate(config, jobs=2)
        ok &= dumps_json(rep.as_dict()) == dumps_json(again.as_dict())
        ok &= rows_to_csv(rows) == rows_to_csv(rows_again)
    report("8 determinism", ok, "serial and 2-worker reruns byte-identical" if ok else "outputs differ")


def test_asymptotic_ratio():
    acc = Accuracy(1e-3, 1e-6)
    ratio = mom_plan(1.0, acc).total / scaled_plan(1.0, acc).total
    report("asymptotic ratio", abs(ratio / 2.78 - 1.0) <= 0.02,
           f"mom/scaled total at eps=1e-3, delta=1e-6 is {ratio:.4f} (2.78 +- 2%)")
