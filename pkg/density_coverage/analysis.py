"""
    File: analysis.py
    Date: October 17, 2026

    Functions to analyze coverage metrics: the fit of W2^2(k) to a floor plus O(1/k) decay,
    side by side comparison of two metrics logs and the band figure of a batch.
"""

import numpy as np
import pandas as pd
import matplotlib.pyplot as plt
from tabulate import tabulate

DEFAULT_RESIDUAL_FRACTION = 0.25


class ConvergenceFit(object):
    """
    The fit W2^2(k) ~ eps + C / k.

    Attributes:
        C (float): Decay constant.
        eps (float): Estimated floor.
        residual (float): Mean squared fit residual over the fitted points.
        tail_variance (float): Variance of the fitted W2^2 values.
        num_points (int): Number of points fitted.
        consistent (bool): C > 0 and residual < fraction * tail_variance.
    """

    def __init__(self, C, eps, residual, tail_variance, num_points, consistent):
        self.C = C
        self.eps = eps
        self.residual = residual
        self.tail_variance = tail_variance
        self.num_points = num_points
        self.consistent = consistent

    def predict(self, k):
        return self.eps + self.C / np.asarray(k, dtype=float)

    def as_dict(self):
        return {
            "C": self.C,
            "eps": self.eps,
            "residual": self.residual,
            "tail_variance": self.tail_variance,
            "num_points": self.num_points,
            "consistent": self.consistent,
        }

    def __repr__(self):
        return f"ConvergenceFit(C={self.C:.6g}, eps={self.eps:.6g}, residual={self.residual:.3g}, consistent={self.consistent})"


def convergence_diagnostics(series, residual_fraction=DEFAULT_RESIDUAL_FRACTION):
    """
    Least-squares fit of W2^2(k) ~ eps + C / k over the tail half of a series.

    Args:
        series (list): (k, W2^2) pairs, at least 10 of them.
        residual_fraction (float, default=0.25): The series is reported consistent with decay to a
            floor when C > 0 and the mean squared residual is below this fraction of the tail variance.

    Returns:
        ConvergenceFit. A constant tail gives eps = that constant and C = 0.
    """
    assert len(series) >= 10, "The series must contain at least 10 points."
    data = np.array(sorted(series), dtype=float)
    data = data[data[:, 0] > 0]
    assert data.shape[0] >= 2, "At least two points with k > 0 are needed."
    tail = data[data.shape[0] // 2:]
    k, values = tail[:, 0], tail[:, 1]
    variance = float(np.var(values))

    if np.ptp(values) == 0:
        return ConvergenceFit(0.0, float(values[0]), 0.0, 0.0, len(values), False)

    design = np.column_stack([np.ones_like(k), 1.0 / k])
    (eps, C), *_ = np.linalg.lstsq(design, values, rcond=None)
    residual = float(np.mean((design @ np.array([eps, C]) - values) ** 2))
    consistent = bool(C > 0 and residual < residual_fraction * variance)
    return ConvergenceFit(float(C), float(eps), residual, variance, len(values), consistent)


def compare_logs(log_a, log_b, labels=("A", "B"), verbose=True):
    """
    Per-step mean W2^2 of two logs side by side.

    When both logs hold the same run indices, the paired difference of the final-step W2^2
    (A minus B, averaged over runs) is reported as well.

    Returns:
        tuple: (DataFrame with columns step, mean_<A>, mean_<B>, difference; paired difference or None)
    """
    sa = log_a.summary()[["step", "mean_w2sq"]].rename(columns={"mean_w2sq": f"mean_{labels[0]}"})
    sb = log_b.summary()[["step", "mean_w2sq"]].rename(columns={"mean_w2sq": f"mean_{labels[1]}"})
    table = pd.merge(sa, sb, on="step", how="outer").sort_values("step").reset_index(drop=True)
    table["difference"] = table[f"mean_{labels[0]}"] - table[f"mean_{labels[1]}"]

    paired = None
    if log_a.runs and log_a.runs == log_b.runs:
        final_a = {s["run"]: s["final_w2sq"] for s in log_a.run_summaries}
        final_b = {s["run"]: s["final_w2sq"] for s in log_b.run_summaries}
        diffs = [final_a[r] - final_b[r] for r in log_a.runs
                 if final_a.get(r) is not None and final_b.get(r) is not None]
        if diffs:
            paired = float(np.mean(diffs))

    if verbose:
        print(tabulate(table.values.tolist(), headers=list(table.columns), floatfmt=".6g"))
        if paired is not None:
            print(f"\nPaired final-step difference ({labels[0]} - {labels[1]}): {paired:.6g}")
    return table, paired


def view_w2_band(log, filename, title=None, log_scale=True):
    """
    Writes the batch mean of W2^2 with a one standard deviation band to ``filename``.
    """
    summary = log.summary()
    assert not summary.empty, "The log has no W2^2 evaluations."
    steps = summary["step"].values
    mean = summary["mean_w2sq"].values
    std = summary["std_w2sq"].values

    lower = mean - std
    if log_scale:
        lower = np.maximum(lower, 1e-12)

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(steps, mean, color="blue", label="mean")
    ax.fill_between(steps, lower, mean + std, color="blue", alpha=0.2, label="std")
    if log_scale:
        ax.set_yscale("log")
    ax.set_xlabel("step k")
    ax.set_ylabel("W2^2")
    if title is not None:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(filename)
    plt.close(fig)
    return filename
