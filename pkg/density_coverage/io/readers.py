"""
    File: readers.py
    Date: October 17, 2026

    Functions to read scenario files and metrics logs.
"""

import json

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path

from pydantic import ValidationError

from density_coverage.scenario import ScenarioConfig, bundled_scenario_path
from density_coverage.simulation import MetricsLog


class ConfigError(ValueError):
    """
    A scenario file that cannot be parsed or violates the schema. ``violations`` lists every
    problem found as ``"section.field: message"``.
    """

    def __init__(self, violations, path=None):
        self.violations = list(violations)
        self.path = path
        where = f"{path}: " if path is not None else ""
        lines = "\n".join(f"  - {v}" for v in self.violations)
        super().__init__(f"{where}{len(self.violations)} violation(s)\n{lines}")


class MetricsIOError(OSError):
    """A metrics file that cannot be read or written."""


def _location(loc):
    text = ""
    for part in loc:
        if isinstance(part, int):
            text += f"[{part}]"
        else:
            text += f".{part}" if text else str(part)
    return text


def validation_violations(err):
    """Flattens a pydantic ValidationError into ``"section.field: message"`` strings."""
    violations = list()
    for e in err.errors():
        msg = e["msg"]
        if msg.startswith("Value error, "):
            msg = msg[len("Value error, "):]
        where = _location(e["loc"])
        if not where:
            # cross-section checks already name their fields
            violations.extend(msg.split("; "))
        else:
            violations.append(f"{where}: {msg}")
    return violations


def load_config(path):
    """
    Reads and validates a TOML scenario file.

    Args:
        path (str or Path): A file path, or the name of a bundled scenario (e.g. ``"quadrotor_paper"``).

    Returns:
        ScenarioConfig

    Raises:
        ConfigError: With the parse position for malformed TOML, or with every schema violation.
    """
    if isinstance(path, str) and not path.endswith(".toml") and not Path(path).exists():
        try:
            path = bundled_scenario_path(path)
        except AssertionError as err:
            raise ConfigError([str(err)], path) from err
    elif isinstance(path, str):
        path = Path(path)

    try:
        with path.open("rb") as f:
            data = tomllib.load(f)
    except tomllib.TOMLDecodeError as err:
        raise ConfigError([f"TOML parse error: {err}"], path) from err
    except OSError as err:
        raise ConfigError([f"cannot read file: {err}"], path) from err

    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(validation_violations(err), path) from err


def read_metrics(filename):
    """
    Reads a JSON-lines metrics file written by ``emit_metrics``. Step summary lines are
    skipped since they are recomputed from the records.

    Returns:
        MetricsLog
    """
    log = MetricsLog()
    try:
        with open(filename, "r") as f:
            for lineno, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    entry = json.loads(line)
                except json.JSONDecodeError as err:
                    raise MetricsIOError(f"{filename}, line {lineno}: {err}") from err
                kind = entry.pop("type", None)
                if kind == "meta":
                    log.meta = entry
                elif kind == "record":
                    log.records.append(entry)
                elif kind == "run_summary":
                    log.run_summaries.append(entry)
                elif kind != "step_summary":
                    raise MetricsIOError(f"{filename}, line {lineno}: unknown entry type {kind!r}")
    except OSError as err:
        if isinstance(err, MetricsIOError):
            raise
        raise MetricsIOError(f"Could not read metrics from {filename}: {err}") from err
    return log
