"""
    File: cli.py
    Date: October 17, 2026

    Command line interface:

        density-coverage validate <config>
        density-coverage run <config> [--runs N] [--seed S] [--out DIR]
        density-coverage diagnose <metrics>
        density-coverage compare <metricsA> <metricsB>

    Exit codes: 0 on success, 2 when a scenario fails validation, 1 on any other failure.
"""

import argparse
import logging
import os
import sys

from tabulate import tabulate

from density_coverage import __version__
from density_coverage.analysis import DEFAULT_RESIDUAL_FRACTION, compare_logs, convergence_diagnostics, view_w2_band
from density_coverage.io.readers import ConfigError, MetricsIOError, load_config, read_metrics
from density_coverage.io.writers import emit_metrics
from density_coverage.simulation import run_batch, stamp

logger = logging.getLogger(__name__)

OUT_ENV = "DENSITY_COVERAGE_OUT"
DEFAULT_OUT = "results"


def parse_args(argv=None):
    parser = argparse.ArgumentParser(prog="density-coverage",
                                     description="Density-driven multi-agent coverage simulations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for progress, -vv for debug logging.")
    sub = parser.add_subparsers(dest="command", required=True)

    validate = sub.add_parser("validate", help="Validate a scenario file.")
    validate.add_argument("config", help="Scenario TOML file or bundled scenario name.")

    run = sub.add_parser("run", help="Run a scenario and write its metrics.")
    run.add_argument("config", help="Scenario TOML file or bundled scenario name.")
    run.add_argument("--runs", type=int, default=None, help="Number of runs (default: from the scenario).")
    run.add_argument("--seed", type=int, default=None, help="Base seed; run i uses seed + i.")
    run.add_argument("--out", default=None, help=f"Output directory (default: ${OUT_ENV} or ./{DEFAULT_OUT}).")
    run.add_argument("--same-seed", action="store_true", help="Use the base seed for every run.")
    run.add_argument("--parallel", action="store_true", help="Run the batch in parallel processes.")
    run.add_argument("--num-cpus", type=int, default=4)
    run.add_argument("--plot", action="store_true", help="Also write the W2^2 band figure.")

    diagnose = sub.add_parser("diagnose", help="Fit W2^2 ~ eps + C/k to a metrics file.")
    diagnose.add_argument("metrics", help="JSON-lines metrics file.")
    diagnose.add_argument("--fraction", type=float, default=DEFAULT_RESIDUAL_FRACTION,
                          help="Residual fraction of the tail variance for consistency.")

    compare = sub.add_parser("compare", help="Compare the mean W2^2 of two metrics files.")
    compare.add_argument("metrics_a")
    compare.add_argument("metrics_b")

    return parser.parse_args(argv)


def cmd_validate(args):
    config = load_config(args.config)
    print(f"{config.name}: valid ({config.num_agents} agents, {len(config.models)} model(s), "
          f"H = {config.control.horizon}, K = {config.run.mission_length}, {config.run.runs} run(s))")
    return 0


def cmd_run(args):
    config = load_config(args.config)
    out_dir = args.out or os.environ.get(OUT_ENV, DEFAULT_OUT)
    log = run_batch(config, runs=args.runs, base_seed=args.seed, same_seed=args.same_seed,
                    use_parallel=args.parallel, num_cpus=args.num_cpus, verbose=args.verbose > 0)
    stamp(log)

    base = os.path.join(out_dir, config.name)
    written = [emit_metrics(log, f"{base}.jsonl"), emit_metrics(log, f"{base}_summary.csv", file_format="csv")]
    if args.plot:
        written.append(view_w2_band(log, f"{base}_w2.png", title=config.name))

    rows = [[s["run"], s["seed"], s["status"], s["final_w2sq"], s["fit_eps"], s["fit_C"]] for s in log.run_summaries]
    print(tabulate(rows, headers=["run", "seed", "status", "final W2^2", "eps", "C"], floatfmt=".6g"))
    for filename in written:
        print(f"written: {filename}")

    failed = log.failed_runs()
    for s in failed:
        print(f"run {s['run']} failed at step {s['failed_step']}: {s['error']}", file=sys.stderr)
    return 1 if failed else 0


def cmd_diagnose(args):
    log = read_metrics(args.metrics)
    rows = list()
    for run in log.runs:
        series = log.w2_series(run)
        if len(series) < 10:
            rows.append([run, len(series), None, None, None, "too short"])
            continue
        fit = convergence_diagnostics(series, residual_fraction=args.fraction)
        rows.append([run, fit.num_points, fit.eps, fit.C, fit.residual, fit.consistent])

    summary = log.summary()
    mean_series = list(zip(summary["step"].tolist(), summary["mean_w2sq"].tolist()))
    if len(mean_series) >= 10:
        fit = convergence_diagnostics(mean_series, residual_fraction=args.fraction)
        rows.append(["mean", fit.num_points, fit.eps, fit.C, fit.residual, fit.consistent])

    print(tabulate(rows, headers=["run", "points", "eps", "C", "residual", "consistent"], floatfmt=".6g"))
    return 0


def cmd_compare(args):
    log_a = read_metrics(args.metrics_a)
    log_b = read_metrics(args.metrics_b)
    labels = (log_a.meta.get("scenario", "A"), log_b.meta.get("scenario", "B"))
    if labels[0] == labels[1]:
        labels = ("A", "B")
    compare_logs(log_a, log_b, labels=labels)
    return 0


COMMANDS = {
    "validate": cmd_validate,
    "run": cmd_run,
    "diagnose": cmd_diagnose,
    "compare": cmd_compare,
}


def main(argv=None):
    args = parse_args(argv)
    level = logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose == 1 else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        return COMMANDS[args.command](args)
    except ConfigError as err:
        print(str(err), file=sys.stderr)
        return 2
    except (MetricsIOError, AssertionError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except Exception:
        logger.exception("Command %s failed.", args.command)
        return 1


if __name__ == "__main__":
    sys.exit(main())
