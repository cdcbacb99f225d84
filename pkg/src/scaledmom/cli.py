"""Command-line interface: ``scaledmom {plan,estimate,simulate,verify-lemmas}``.

Exit status is 0 on success, 2 on a usage or domain error and 1 when a
certification check fails. Settings may come from ``--config FILE`` (a JSON
object keyed by flag name, dashes or underscores); flags given on the
command line override the file.
"""

import argparse
import json
import math
import sys

from . import __version__
from ._validation import DomainError
from .distributions import parse_distribution, source_to_dict
from .estimators import EstimatorConfig, estimate
from .harness import (
    ExperimentConfig,
    dumps_json,
    report_document,
    rows_to_csv,
    simulate,
)
from .lemmas import run_certification
from .plan import MOM_LEADING_CONSTANT, SCALED_LEADING_CONSTANT

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "kind": "scaled",
    "c": 1.0,
    "epsilon": 0.1,
    "delta": 0.05,
    "distribution": "exponential:mean=1",
    "trials": 1000,
    "seed": 0,
    "output": "json",
    "jobs": 1,
    "grid_points": 2000,
    "scan_points": 1000,
    "alpha_inflation": 1.0,
    "h_tol": 1e-9,
    "tail_tol": 1e-6,
    "agree_tol": 1e-6,
    "epsilon_grid": None,
}


class UsageError(Exception):
    pass


def _add_accuracy(p):
    p.add_argument("--kind", choices=["mean", "mom", "scaled"])
    p.add_argument("--c", type=float, help="upper bound on sd(X) / mean(X)")
    p.add_argument("--epsilon", type=float, help="relative error target, in (0, 1/3)")
    p.add_argument("--delta", type=float, help="failure probability target, in (0, 1)")


def _add_common(p, outputs=("json", "csv")):
    p.add_argument("--config", help="JSON file of default settings")
    p.add_argument("--output", choices=list(outputs))


def build_parser():
    parser = argparse.ArgumentParser(prog="scaledmom", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="sample sizes for an estimator")
    _add_accuracy(p)
    _add_common(p)

    p = sub.add_parser("estimate", help="run one estimate on a test distribution")
    _add_accuracy(p)
    _add_common(p)
    p.add_argument("--distribution", help="family:key=value,... e.g. exponential:mean=1")
    p.add_argument("--seed", type=int)

    p = sub.add_parser("simulate", help="Monte Carlo failure rate over many seeded trials")
    _add_accuracy(p)
    _add_common(p)
    p.add_argument("--distribution")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, help="master seed; trial seeds derive from it")
    p.add_argument("--jobs", type=int, help="worker processes (output does not depend on it)")
    p.add_argument("--timing", action="store_true", help="include wall time in the JSON result")

    p = sub.add_parser("verify-lemmas", help="numerically certify the tail and median bounds")
    _add_common(p)
    p.add_argument("--epsilon-grid", help="comma list or start:stop:step (default 0.01:0.33:0.01)")
    p.add_argument("--grid-points", type=int)
    p.add_argument("--scan-points", type=int)
    p.add_argument("--h-tol", type=float)
    p.add_argument("--tail-tol", type=float)
    p.add_argument("--agree-tol", type=float)
    p.add_argument("--alpha-inflation", type=float, help=argparse.SUPPRESS)
    return parser


def _settings(args):
    file_values = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}")
        if not isinstance(raw, dict):
            raise UsageError("config file must hold a JSON object")
        file_values = {k.replace("-", "_"): v for k, v in raw.items()}
    merged = {}
    for key, default in DEFAULTS.items():
        flag = getattr(args, key, None)
        merged[key] = flag if flag is not None else file_values.get(key, default)
    return merged


def _parse_grid(text):
    if text is None:
        return None
    if isinstance(text, list):
        return [float(x) for x in text]
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        n = int(round((stop - start) / step))
        return [round(start + i * step, 12) for i in range(n + 1)]
    return [float(x) for x in text.split(",") if x.strip()]


def _estimator_config(s):
    return EstimatorConfig(s["epsilon"], s["delta"], s["c"], s["kind"], s["seed"])


def cmd_plan(s, out):
    cfg = _estimator_config(s)
    plan = cfg.plan()
    info = plan.as_dict()
    info["leading_constant"] = plan.total * cfg.epsilon**2 / (cfg.c**2 * math.log(1.0 / cfg.delta))
    if s["output"] == "csv":
        out.write(",".join(info) + "\n")
        out.write(",".join(_csv_value(v) for v in info.values()) + "\n")
    else:
        config = cfg.as_dict()
        del config["seed"]
        out.write(dumps_json(report_document(info, config, None, None)))
    return EXIT_OK


def _csv_value(v):
    return format(v, ".17g") if isinstance(v, float) else str(v)


def cmd_estimate(s, out):
    cfg = _estimator_config(s)
    src = parse_distribution(s["distribution"])
    est = estimate(cfg, src)
    result = {"estimate": est.value, "draws_consumed": est.draws_consumed}
    if src.true_mean is not None:
        result["true_mean"] = src.true_mean
        result["rel_error"] = abs(est.value / src.true_mean - 1.0)
    config = cfg.as_dict()
    del config["seed"]
    config["distribution"] = source_to_dict(src)
    if s["output"] == "csv":
        out.write(",".join(result) + "\n")
        out.write(",".join(_csv_value(v) for v in result.values()) + "\n")
    else:
        out.write(dumps_json(report_document(est.plan.as_dict(), config, result, cfg.seed)))
    return EXIT_OK


def cmd_simulate(s, out, timing=False):
    config = ExperimentConfig(
        kind=s["kind"],
        epsilon=s["epsilon"],
        delta=s["delta"],
        c=s["c"],
        distribution=parse_distribution(s["distribution"]),
        trials=s["trials"],
        master_seed=s["seed"],
        output=s["output"],
    )
    report, rows = simulate(config, jobs=s["jobs"])
    if config.output == "csv":
        out.write(rows_to_csv(rows))
    else:
        plan = config.estimator_config(0).plan().as_dict()
        out.write(dumps_json(report_document(
            plan, config.as_dict(), report.as_dict(include_timing=timing), config.master_seed)))
    return EXIT_OK


def cmd_verify_lemmas(s, out, err):
    checks = run_certification(
        epsilon_grid=_parse_grid(s["epsilon_grid"]),
        grid_points=s["grid_points"],
        scan_points=s["scan_points"],
        alpha_inflation=s["alpha_inflation"],
        h_tol=s["h_tol"],
        tail_tol=s["tail_tol"],
        agree_tol=s["agree_tol"],
    )
    ok = all(c.passed for c in checks if c.gating)
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        if not c.gating:
            status += " (info)"
        err.write(f"{status:12s} {c.name}: {c.value:.12g} {c.relation} {c.threshold:.12g}\n")
    if s["output"] == "csv":
        out.write("name,status,value,relation,threshold,gating\n")
        for c in checks:
            out.write(f"{c.name},{'PASS' if c.passed else 'FAIL'},{c.value:.17g},"
                      f"{c.relation},{c.threshold:.17g},{int(c.gating)}\n")
    else:
        result = {
            "status": "PASS" if ok else "FAIL",
            "constants": {
                "scaled_leading_constant": SCALED_LEADING_CONSTANT,
                "mom_leading_constant": MOM_LEADING_CONSTANT,
            },
            "checks": [
                dict(c.as_dict(), status="PASS" if c.passed else "FAIL") for c in checks
            ],
        }
        config = {k: s[k] for k in ("grid_points", "scan_points", "alpha_inflation",
                                    "h_tol", "tail_tol", "agree_tol")}
        config["epsilon_grid"] = _parse_grid(s["epsilon_grid"])
        out.write(dumps_json(report_document(None, config, result, None)))
    return EXIT_OK if ok else EXIT_FAIL


def main(argv=None, out=None, err=None):
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        s = _settings(args)
        if args.command == "plan":
            return cmd_plan(s, out)
        if args.command == "estimate":
            return cmd_estimate(s, out)
        if args.command == "simulate":
            return cmd_simulate(s, out, timing=args.timing)
        return cmd_verify_lemmas(s, out, err)
    except (UsageError, DomainError, ValueError, TypeError, OverflowError) as exc:
        err.write(f"scaledmom: error: {exc}\n")
        return EXIT_USAGE
