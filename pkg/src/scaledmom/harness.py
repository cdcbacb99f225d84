"""Monte Carlo failure-rate harness.

Trial ``i`` of a run with master seed ``m`` estimates with seed
``derive_trial_seed(m, i)``. Trials are independent, so they can be spread
over worker processes; rows come back in trial order and the aggregates use
exact integer counts and ``math.fsum``. The serialized report is therefore
byte-identical for any number of workers.
"""

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from scipy.stats import beta

from . import __version__
from ._validation import check_int, check_real
from .distributions import SampleSource, source_to_dict
from .estimators import EstimatorConfig, estimate
from .rng import derive_trial_seed

__all__ = [
    "ExperimentConfig",
    "FailureRateReport",
    "TrialRow",
    "clopper_pearson_upper",
    "run_trial",
    "simulate",
    "dumps_json",
    "report_document",
    "rows_to_csv",
]


def clopper_pearson_upper(failures, trials, confidence=0.99):
    """Exact one-sided upper confidence bound on a binomial proportion."""
    trials = check_int(trials, "trials", minimum=1)
    failures = check_int(failures, "failures", minimum=0)
    if failures > trials:
        raise ValueError("failures cannot exceed trials")
    check_real(confidence, "confidence", low=0.0, high=1.0)
    if failures == trials:
        return 1.0
    return float(beta.ppf(confidence, failures + 1, trials - failures))


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    epsilon: float
    delta: float
    c: float
    distribution: SampleSource
    trials: int = 1000
    master_seed: int = 0
    output: str = "json"

    def __post_init__(self):
        check_int(self.trials, "trials", minimum=1)
        check_int(self.master_seed, "master_seed", minimum=0)
        if self.output not in ("json", "csv"):
            raise ValueError(f"output must be json or csv, got {self.output!r}")
        if self.distribution.true_mean is None:
            raise ValueError("simulate needs a distribution with a known mean")
        self.estimator_config(0)

    def estimator_config(self, seed):
        return EstimatorConfig(self.epsilon, self.delta, self.c, self.kind, seed)

    def as_dict(self):
        cfg = self.estimator_config(self.master_seed).as_dict()
        del cfg["seed"]
        cfg.update(
            distribution=source_to_dict(self.distribution),
            trials=self.trials,
            output=self.output,
        )
        return cfg


@dataclass(frozen=True)
class TrialRow:
    trial_index: int
    estimate: float
    rel_error: float
    failed: bool


@dataclass
class FailureRateReport:
    trials: int
    failures: int
    empirical_rate: float
    cp_upper_99: float
    total_draws_per_trial: int
    mean_rel_error: float
    wall_time: float = field(default=0.0, compare=False)

    def as_dict(self, include_timing=False):
        out = {
            "trials": self.trials,
            "failures": self.failures,
            "empirical_rate": self.empirical_rate,
            "cp_upper_99": self.cp_upper_99,
            "total_draws_per_trial": self.total_draws_per_trial,
            "mean_rel_error": self.mean_rel_error,
        }
        if include_timing:
            out["wall_time"] = self.wall_time
        return out


def run_trial(config, trial_index):
    seed = derive_trial_seed(config.master_seed, trial_index)
    value = estimate(config.estimator_config(seed), config.distribution).value
    mu = config.distribution.true_mean
    rel = abs(value / mu - 1.0)
    return TrialRow(trial_index, value, rel, rel > config.epsilon)


def _run_chunk(config, start, stop):
    return [run_trial(config, i) for i in range(start, stop)]


def simulate(config, jobs=1):
    """Run every trial and return ``(FailureRateReport, rows)``."""
    jobs = check_int(jobs, "jobs", minimum=1)
    t0 = time.perf_counter()
    n = config.trials
    if jobs == 1 or n < 2:
        rows = _run_chunk(config, 0, n)
    else:
        size = math.ceil(n / (4 * jobs))
        bounds = [(s, min(s + size, n)) for s in range(0, n, size)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = pool.map(_run_chunk, [config] * len(bounds), *zip(*bounds))
            rows = [row for part in parts for row in part]
    failures = sum(row.failed for row in rows)
    report = FailureRateReport(
        trials=n,
        failures=failures,
        empirical_rate=failures / n,
        cp_upper_99=clopper_pearson_upper(failures, n, 0.99),
        total_draws_per_trial=config.estimator_config(0).plan().total,
        mean_rel_error=math.fsum(row.rel_error for row in rows) / n,
        wall_time=time.perf_counter() - t0,
    )
    return report, rows


def _encode(obj):
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"cannot serialize non-finite value {obj}")
        text = format(obj, ".17g")
        return text if any(ch in text for ch in ".en") else text + ".0"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k), ensure_ascii=False)}: {_encode(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(obj):
    """JSON text with every float printed to 17 significant digits."""
    return _encode(obj) + "\n"


def report_document(plan, config, result, seed):
    """The fixed top-level layout shared by every JSON output."""
    return {
        "plan": plan,
        "config": config,
        "result": result,
        "seed": seed,
        "version": __version__,
    }


def rows_to_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["trial_index", "estimate", "rel_error", "failed"])
    for row in rows:
        writer.writerow(
            [row.trial_index, format(row.estimate, ".17g"), format(row.rel_error, ".17g"),
             int(row.failed)]
        )
    return buf.getvalue()
