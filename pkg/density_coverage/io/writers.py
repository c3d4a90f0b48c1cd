"""
    File: writers.py
    Date: October 17, 2026

    Functions to write scenario files and metrics logs.
"""

import json
import os

import tomli_w

from density_coverage.io.readers import MetricsIOError

METRICS_FORMATS = ("jsonl", "csv")


def dump_config(config, filename):
    """
    Writes a scenario to a TOML file; ``load_config`` reads it back to an equal scenario.

    Returns:
        The name of the file the scenario was written to.
    """
    if not str(filename).endswith(".toml"):
        filename = f"{filename}.toml"
    with open(filename, "wb") as f:
        tomli_w.dump(config.model_dump(mode="json", exclude_none=True), f)
    return filename


def _lines(log):
    yield {"type": "meta", **log.meta}
    for record in log.records:
        yield {"type": "record", **record}
    for summary in log.run_summaries:
        yield {"type": "run_summary", **summary}
    for row in log.summary().to_dict(orient="records"):
        yield {"type": "step_summary", "step": int(row["step"]), "mean_w2sq": float(row["mean_w2sq"]),
               "std_w2sq": float(row["std_w2sq"]), "num_runs": int(row["num_runs"])}


def emit_metrics(log, filename, file_format="jsonl"):
    """
    Writes a metrics log.

    Args:
        log (MetricsLog): The metrics.
        filename (str): Destination path; parent directories are created.
        file_format (str, default="jsonl"): ``"jsonl"`` writes a metadata line, one line per record,
            one per run summary and one per step summary. ``"csv"`` writes the W2^2 summary
            with columns step, mean_w2sq, std_w2sq.

    Returns:
        The name of the file the metrics were written to.

    Raises:
        MetricsIOError: When the file cannot be written.
    """
    assert file_format in METRICS_FORMATS, f"File format {file_format} not recognized."
    try:
        parent = os.path.dirname(str(filename))
        if parent:
            os.makedirs(parent, exist_ok=True)
        if file_format == "csv":
            log.summary()[["step", "mean_w2sq", "std_w2sq"]].to_csv(filename, index=False)
        else:
            with open(filename, "w") as f:
                for entry in _lines(log):
                    f.write(json.dumps(entry) + "\n")
    except OSError as err:
        raise MetricsIOError(f"Could not write metrics to {filename}: {err}") from err
    return filename
