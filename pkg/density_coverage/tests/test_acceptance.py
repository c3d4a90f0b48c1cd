import pytest
from density_coverage.analysis import convergence_diagnostics
from density_coverage.cli import main
from density_coverage.io import load_config
from density_coverage.simulation import run_batch

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def desk_config():
    return load_config("double_integrator_2d")


@pytest.fixture(scope="module")
def desk_batch(desk_config):
    return run_batch(desk_config, runs=20, base_seed=0)


def final_mean(log):
    summary = log.summary()
    return float(summary["mean_w2sq"].iloc[-1])


def test_desk_scale_convergence(desk_batch):
    summary = desk_batch.summary().set_index("step")
    assert summary.loc[300, "mean_w2sq"] < 0.2 * summary.loc[5, "mean_w2sq"]
    series = list(zip(summary.index.tolist(), summary["mean_w2sq"].tolist()))
    fit = convergence_diagnostics(series)
    assert fit.C > 0
    assert fit.consistent


def test_desk_scale_spread_under_noise(desk_batch):
    summary = desk_batch.summary().set_index("step")
    assert summary.loc[5, "std_w2sq"] > 0
    assert desk_batch.failed_runs() == []


def test_greedy_baseline_is_worse(desk_batch):
    baseline = run_batch(load_config("greedy_baseline"), runs=20, base_seed=0)
    assert final_mean(baseline) > final_mean(desk_batch)


def test_cli_run_is_reproducible(tmp_path):
    outputs = list()
    for name in ("first", "second"):
        out_dir = tmp_path / name
        assert main(["run", "double_integrator_2d", "--seed", "42", "--runs", "2", "--out", str(out_dir)]) == 0
        with open(out_dir / "double_integrator_2d.jsonl") as f:
            # the first line holds the creation timestamp
            outputs.append(f.readlines()[1:])
    assert outputs[0] == outputs[1]
    assert len(outputs[0]) > 0
