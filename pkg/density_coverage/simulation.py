"""
    File: simulation.py
    Date: October 17, 2026

    Mission execution: a single run of the coverage cycle with periodic evaluation of the
    squared Wasserstein distance between the swarm's empirical output distribution and
    the target samples, and Monte Carlo batches of runs.
"""

import logging
from datetime import datetime, timezone
from functools import partial

import numpy as np
import pandas as pd
from multiprocess import Pool

from density_coverage.analysis import convergence_diagnostics
from density_coverage.coordinator import comm_graph, run_cycle
from density_coverage.scenario import build_agents, build_field, build_settings
from density_coverage.transport import DiscreteMeasure, EmpiricalDistribution, subsample_measure, update_empirical, wasserstein2

logger = logging.getLogger(__name__)

RECORD_FIELDS = (
    "step",
    "run",
    "w2sq",
    "comm_edges",
    "proj_dist_mean",
    "obj_mean",
    "const_term",
    "cost_mean",
    "input_norm_mean",
    "num_points",
    "support_size",
)
SUMMARY_FIELDS = ("step", "mean_w2sq", "std_w2sq", "num_runs")
MIN_FIT_POINTS = 10


class MetricsLog(object):
    """
    The metrics of one or more runs.

    Attributes:
        records (list(dict)): Evaluation records, step indices strictly increasing within a run.
            Besides RECORD_FIELDS a record may carry ``new_edges`` (edges that appeared since
            the previous record) and ``in_ellipsoid_frac`` (not at step 0). The step 0 record
            also carries the initial measured ``outputs``, one row per agent.
        run_summaries (list(dict)): One entry per run: seed, status, failure step and cause,
            final W2^2 and the decay fit.
        meta (dict): Scenario name and creation timestamp.
    """

    def __init__(self, records=None, run_summaries=None, meta=None):
        self.records = list() if records is None else list(records)
        self.run_summaries = list() if run_summaries is None else list(run_summaries)
        self.meta = dict() if meta is None else dict(meta)

    @property
    def runs(self):
        return sorted({r["run"] for r in self.records} | {s["run"] for s in self.run_summaries})

    @property
    def num_evaluations(self):
        return len(self.records)

    def frame(self):
        """Records as a DataFrame with the RECORD_FIELDS columns first."""
        df = pd.DataFrame(self.records)
        if df.empty:
            return pd.DataFrame(columns=list(RECORD_FIELDS))
        extra = [c for c in df.columns if c not in RECORD_FIELDS]
        return df[[c for c in RECORD_FIELDS if c in df.columns] + extra]

    def w2_series(self, run):
        """List of (step, W2^2) of one run, evaluated steps only."""
        return [(r["step"], r["w2sq"]) for r in self.records
                if r["run"] == run and r["w2sq"] is not None and np.isfinite(r["w2sq"])]

    def summary(self):
        """Per-step mean and (population) standard deviation of W2^2 across runs."""
        df = self.frame()
        if df.empty:
            return pd.DataFrame(columns=list(SUMMARY_FIELDS))
        df = df[np.isfinite(df["w2sq"].astype(float))]
        grouped = df.groupby("step")["w2sq"]
        return pd.DataFrame({
            "step": grouped.mean().index.astype(int),
            "mean_w2sq": grouped.mean().values,
            "std_w2sq": grouped.std(ddof=0).fillna(0.0).values,
            "num_runs": grouped.count().values,
        })

    def failed_runs(self):
        return [s for s in self.run_summaries if s["status"] != "ok"]

    def merge(self, other):
        """A log holding the records and run summaries of both logs, ordered by run."""
        records = sorted(self.records + other.records, key=lambda r: (r["run"], r["step"]))
        summaries = sorted(self.run_summaries + other.run_summaries, key=lambda s: s["run"])
        return MetricsLog(records, summaries, meta=self.meta or other.meta)

    def __eq__(self, other):
        if not isinstance(other, MetricsLog):
            return NotImplemented
        return _same(self.records, other.records) and _same(self.run_summaries, other.run_summaries)

    def __repr__(self):
        return f"MetricsLog(runs={len(self.runs)}, records={len(self.records)})"


def _same(a, b):
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(_same(a[k], b[k]) for k in a)
    if isinstance(a, (list, tuple)) and isinstance(b, (list, tuple)):
        return len(a) == len(b) and all(_same(x, y) for x, y in zip(a, b))
    if isinstance(a, float) and isinstance(b, float) and np.isnan(a) and np.isnan(b):
        return True
    return a == b


def evaluate_w2sq(empirical, target, cap, rng):
    """
    W2^2 between the empirical distribution and the target measure, on a seeded subsample of
    the empirical support when it exceeds ``cap`` points.

    Returns:
        tuple: (w2sq, support size used)
    """
    rho = empirical.as_measure()
    if rho.num_points > cap:
        logger.debug("Subsampling %d empirical points to %d for W2 evaluation.", rho.num_points, cap)
        rho = subsample_measure(rho, cap, rng)
    w2 = wasserstein2(rho, target)
    return w2 * w2, rho.num_points


def _record(step, run, w2sq, support, num_points, num_edges, event=None, new_edges=None, ellipsoid=None, outputs=None):
    record = {
        "step": step,
        "run": run,
        "w2sq": float(w2sq),
        "comm_edges": int(num_edges),
        "proj_dist_mean": float("nan"),
        "obj_mean": float("nan"),
        "const_term": float("nan"),
        "cost_mean": float("nan"),
        "input_norm_mean": float("nan"),
        "num_points": int(num_points),
        "support_size": int(support),
    }
    if event is not None:
        obj = float(np.mean(event.objectives))
        const = float(np.mean(event.constants))
        record.update({
            "proj_dist_mean": float(np.mean(event.projection_distances)),
            "obj_mean": obj,
            "const_term": const,
            "cost_mean": obj + const,
            "input_norm_mean": float(np.mean(np.linalg.norm(event.inputs, axis=1))),
        })
    if new_edges is not None:
        record["new_edges"] = [list(e) for e in new_edges]
    if ellipsoid is not None:
        record["in_ellipsoid_frac"] = float(ellipsoid)
    if outputs is not None:
        record["outputs"] = np.asarray(outputs, dtype=float).tolist()
    return record


def run_scenario(config, run_index=0, seed=None):
    """
    Executes one mission of ``config.run.mission_length`` cycles.

    W2^2 is evaluated at step 0, every ``w2_stride`` steps and at the final step. A run that
    raises is recorded as failed with its step and cause; its records up to the failure are kept.

    Args:
        config (ScenarioConfig): A validated scenario.
        run_index (int, default=0): Index of the run within its batch.
        seed (int, optional): Overrides the seed ``base_seed + run_index``.

    Returns:
        MetricsLog
    """
    seed = config.run.base_seed + run_index if seed is None else seed
    run = config.run
    log = MetricsLog(meta={"scenario": config.name})

    agents, eval_rng = build_agents(config, seed)
    field = build_field(config)
    settings = build_settings(config)
    target = DiscreteMeasure(field.samples)
    empirical = EmpiricalDistribution([agent.last_output for agent in agents])
    graph = comm_graph([agent.position() for agent in agents], settings.comm_range)

    w2sq, support = evaluate_w2sq(empirical, target, run.w2_subsample, eval_rng)
    log.records.append(_record(0, run_index, w2sq, support, empirical.num_points, graph.num_edges,
                               new_edges=graph.edges, outputs=empirical.points))

    status, failed_step, error = "ok", None, None
    pending_edges, inside = list(), list()
    step = 0
    try:
        for step in range(1, run.mission_length + 1):
            event, graph = run_cycle(agents, field, settings, previous_graph=graph)
            empirical = update_empirical(empirical, event.outputs)
            pending_edges.extend(e for e in event.new_edges if e not in pending_edges)
            inside.extend(event.in_ellipsoid)

            if step % run.w2_stride == 0 or step == run.mission_length:
                w2sq, support = evaluate_w2sq(empirical, target, run.w2_subsample, eval_rng)
                ellipsoid = float(np.mean(inside)) if run.ellipsoid_diagnostics else None
                log.records.append(_record(step, run_index, w2sq, support, empirical.num_points,
                                           event.num_edges, event=event, new_edges=pending_edges,
                                           ellipsoid=ellipsoid))
                pending_edges, inside = list(), list()
    except Exception as err:
        logger.exception("Run %d failed at step %d.", run_index, step)
        status, failed_step, error = "failed", step, f"{type(err).__name__}: {err}"

    log.run_summaries.append(run_summary(log.w2_series(run_index), run_index, seed, status, failed_step, error))
    return log


def run_summary(series, run_index, seed, status="ok", failed_step=None, error=None):
    """The summary row of one run, with the decay fit when the series is long enough."""
    summary = {
        "run": run_index,
        "seed": seed,
        "status": status,
        "failed_step": failed_step,
        "error": error,
        "final_step": series[-1][0] if series else None,
        "final_w2sq": series[-1][1] if series else None,
        "fit_C": None,
        "fit_eps": None,
        "fit_residual": None,
        "fit_consistent": None,
    }
    if len(series) >= MIN_FIT_POINTS:
        diag = convergence_diagnostics(series)
        summary.update({
            "fit_C": diag.C,
            "fit_eps": diag.eps,
            "fit_residual": diag.residual,
            "fit_consistent": diag.consistent,
        })
    return summary


def run_batch(config, runs=None, base_seed=None, same_seed=False, use_parallel=False, num_cpus=4, verbose=False):
    """
    Runs a Monte Carlo batch; run i uses the seed base_seed + i.

    Args:
        config (ScenarioConfig): A validated scenario.
        runs (int, optional): Number of runs. Defaults to ``config.run.runs``.
        base_seed (int, optional): Defaults to ``config.run.base_seed``.
        same_seed (bool, default=False): If True, every run uses ``base_seed``.
        use_parallel (bool, default=False): If True, then use parallel processing.
        num_cpus (int, default=4): The number of (virtual) cpus to use if using parallel processing.
        verbose (bool, default=False): If True, then print progress information.

    Returns:
        MetricsLog: All runs, ordered by run index.
    """
    runs = config.run.runs if runs is None else runs
    base_seed = config.run.base_seed if base_seed is None else base_seed
    assert runs >= 1, "A batch needs at least one run."

    seeds = [base_seed if same_seed else base_seed + i for i in range(runs)]
    get_log = partial(_run_with_seed, config)
    jobs = list(enumerate(seeds))

    if use_parallel:
        with Pool(num_cpus) as pool:
            logs = pool.map(get_log, jobs)
    else:
        logs = list()
        for job in jobs:
            logs.append(get_log(job))
            if verbose:
                final = logs[-1].run_summaries[-1]["final_w2sq"]
                print(f"run {job[0] + 1}/{runs} (seed {job[1]}): final W2^2 = {final}")

    batch = MetricsLog(meta={"scenario": config.name})
    for log in logs:
        batch.records.extend(log.records)
        batch.run_summaries.extend(log.run_summaries)
    if verbose and batch.failed_runs():
        print(f"{len(batch.failed_runs())} of {runs} runs failed")
    return batch


def _run_with_seed(config, job):
    run_index, seed = job
    return run_scenario(config, run_index, seed=seed)


def stamp(log):
    """Adds the creation timestamp to the log's metadata."""
    log.meta["created"] = datetime.now(timezone.utc).isoformat()
    return log
