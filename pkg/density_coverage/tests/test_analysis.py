import matplotlib
matplotlib.use("Agg")

import numpy as np
import pytest
from density_coverage.analysis import compare_logs, convergence_diagnostics, view_w2_band
from density_coverage.simulation import MetricsLog


def log_from_series(series_by_run, name="log"):
    records = [{"step": k, "run": run, "w2sq": v} for run, series in series_by_run.items() for k, v in series]
    summaries = [{"run": run, "status": "ok", "final_w2sq": series[-1][1]} for run, series in series_by_run.items()]
    return MetricsLog(records, summaries, meta={"scenario": name})


def test_fit_recovers_floor_and_decay():
    series = [(k, 0.5 + 3.0 / k) for k in range(5, 505, 5)]
    fit = convergence_diagnostics(series)
    assert fit.eps == pytest.approx(0.5, abs=1e-9)
    assert fit.C == pytest.approx(3.0, abs=1e-6)
    assert fit.residual == pytest.approx(0.0, abs=1e-18)
    assert fit.consistent
    assert fit.predict(10) == pytest.approx(0.8)


def test_fit_ignores_step_zero():
    series = [(0, 100.0)] + [(k, 0.5 + 3.0 / k) for k in range(5, 105, 5)]
    fit = convergence_diagnostics(series)
    assert fit.eps == pytest.approx(0.5, abs=1e-9)


def test_fit_of_constant_series():
    fit = convergence_diagnostics([(k, 0.25) for k in range(1, 21)])
    assert fit.C == 0.0
    assert fit.eps == 0.25
    assert not fit.consistent


def test_fit_of_noisy_decay():
    rng = np.random.default_rng(71)
    hits = 0
    for _ in range(50):
        series = [(k, 0.2 + 5.0 / k + 0.001 * rng.standard_normal()) for k in range(5, 505, 5)]
        fit = convergence_diagnostics(series)
        assert fit.eps == pytest.approx(0.2, abs=0.01)
        hits += fit.consistent
    assert hits >= 45


def test_fit_needs_ten_points():
    with pytest.raises(AssertionError, match="The series must contain at least 10 points."):
        convergence_diagnostics([(k, 1.0 / k) for k in range(1, 10)])


def test_fit_as_dict():
    fit = convergence_diagnostics([(k, 1.0 + 1.0 / k) for k in range(1, 21)])
    assert set(fit.as_dict()) == {"C", "eps", "residual", "tail_variance", "num_points", "consistent"}
    assert fit.num_points == 10


def test_compare_logs(capsys):
    a = log_from_series({0: [(0, 4.0), (5, 2.0)], 1: [(0, 4.0), (5, 1.0)]})
    b = log_from_series({0: [(0, 4.0), (5, 3.0)], 1: [(0, 4.0), (5, 3.0)]})
    table, paired = compare_logs(a, b, labels=("density", "greedy"))
    assert list(table.columns) == ["step", "mean_density", "mean_greedy", "difference"]
    np.testing.assert_allclose(table["difference"], [0.0, -1.5])
    assert paired == pytest.approx(-1.5)
    out = capsys.readouterr().out
    assert "mean_density" in out
    assert "Paired final-step difference" in out


def test_compare_logs_unpaired():
    a = log_from_series({0: [(0, 1.0)]})
    b = log_from_series({3: [(0, 2.0)]})
    _, paired = compare_logs(a, b, verbose=False)
    assert paired is None


def test_w2_band_figure(tmp_path):
    log = log_from_series({0: [(0, 4.0), (5, 1.0), (10, 0.5)], 1: [(0, 4.0), (5, 2.0), (10, 0.5)]})
    filename = view_w2_band(log, str(tmp_path / "band.png"), title="band")
    assert (tmp_path / "band.png").stat().st_size > 0
    assert filename.endswith("band.png")


def test_w2_band_needs_data(tmp_path):
    with pytest.raises(AssertionError, match="The log has no W2"):
        view_w2_band(MetricsLog(), str(tmp_path / "empty.png"))


def test_fit_floor_under_measurement_noise():
    rng = np.random.default_rng(72)
    for _ in range(50):
        series = [(k, 0.5 + 3.0 / k + 0.01 * rng.standard_normal()) for k in range(1, 101)]
        fit = convergence_diagnostics(series)
        assert 0.4 <= fit.eps <= 0.6
