"""End-to-end tests of the command-line interface."""

import json

import pandas as pd
import pytest
from typer.testing import CliRunner

from poisson_tests.cli import TABLE1_EPSILONS, app

runner = CliRunner()


def _invoke(*args, **kwargs):
    return runner.invoke(app, [str(a) for a in args], **kwargs)


class TestFisherCommand:
    def test_paper_model(self):
        result = _invoke("fisher", "--model", "paper", "--n", 100)
        assert result.exit_code == 0, result.output
        assert "19.8" in result.output
        assert "u_max" in result.output

    def test_linear_model(self):
        # I(θ) = τ/θ
        result = _invoke("fisher", "--model", "linear", "--theta1", 2)
        assert result.exit_code == 0, result.output
        assert "1.500000" in result.output

    def test_unknown_model_lists_registry(self):
        result = _invoke("fisher", "--model", "nope")
        assert result.exit_code == 2
        assert "paper" in result.output

    def test_degenerate_information(self):
        result = _invoke("fisher", "--model", "constant")
        assert result.exit_code == 3

    def test_table_model(self, model_table_csv):
        result = _invoke("fisher", "--table", model_table_csv, "--model", "slope")
        assert result.exit_code == 0, result.output
        assert "Model: slope" in result.output


class TestSimulateCommand:
    def test_writes_experiment(self, output_directory):
        result = _invoke("simulate", "--n", 5, "--u", 2, "--seed", 42, "-o", output_directory)
        assert result.exit_code == 0, result.output
        assert (output_directory / "experiment.csv").exists()
        meta = json.loads((output_directory / "experiment.json").read_text())
        assert meta["n"] == 5 and meta["seed"] == 42 and meta["model"] == "paper"

    def test_repeatable(self, tmp_path):
        for name in ("a", "b"):
            result = _invoke("simulate", "--n", 5, "--seed", 7, "--name", name, "-o", tmp_path)
            assert result.exit_code == 0, result.output
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_theta_directly(self, output_directory):
        result = _invoke("simulate", "--n", 3, "--theta", 5.5, "-o", output_directory)
        assert result.exit_code == 0, result.output
        assert json.loads((output_directory / "experiment.json").read_text())["theta"] == 5.5

    def test_u_out_of_range(self, output_directory):
        result = _invoke("simulate", "--n", 5, "--u", 1e6, "-o", output_directory)
        assert result.exit_code == 2
        assert not (output_directory / "experiment.csv").exists()

    def test_u_and_theta_exclusive(self, output_directory):
        result = _invoke("simulate", "--u", 1, "--theta", 4, "-o", output_directory)
        assert result.exit_code == 2

    def test_output_from_environment(self, output_directory):
        result = _invoke("simulate", "--n", 2, env={"POISSON_TESTS_OUTPUT": str(output_directory)})
        assert result.exit_code == 0, result.output
        assert (output_directory / "experiment.csv").exists()


class TestThresholdsCommand:
    def test_writes_table(self, output_directory):
        result = _invoke("thresholds", "-t", "SFT", "-t", "BT1", "-e", 0.05, "--M", 2000,
                         "-o", output_directory)
        assert result.exit_code == 0, result.output
        df = pd.read_csv(output_directory / "thresholds.csv")
        assert list(df.columns) == ["test", "epsilon", "threshold", "M", "seed"]
        assert df["test"].tolist() == ["SFT", "BT1"]
        assert df["M"].tolist() == [0, 2000]
        assert df["threshold"].iloc[0] == pytest.approx(1.6449, abs=1e-4)

    def test_closed_form(self, output_directory):
        result = _invoke("thresholds", "-t", "BT1", "-e", 0.05, "--closed-form",
                         "-o", output_directory)
        assert result.exit_code == 0, result.output
        df = pd.read_csv(output_directory / "thresholds.csv")
        assert df["threshold"].iloc[0] == pytest.approx(1.7535, abs=1e-4)
        assert df["M"].iloc[0] == 0

    def test_bt2_likelihood_level(self, output_directory):
        result = _invoke("thresholds", "-t", "BT2", "--M", 2000, "--n", 100,
                         "-o", output_directory)
        assert result.exit_code == 0, result.output
        assert "BT2 likelihood level" in result.output

    def test_invalid_epsilon(self, output_directory):
        result = _invoke("thresholds", "-e", 1.5, "-o", output_directory)
        assert result.exit_code == 2

    def test_reproduce_table1(self, output_directory):
        result = _invoke("reproduce", "table1", "--M", 5000, "-o", output_directory)
        assert result.exit_code == 0, result.output
        df = pd.read_csv(output_directory / "table1.csv")
        assert df["epsilon"].tolist() == TABLE1_EPSILONS
        assert (df["test"] == "BT1").all()
        assert df["threshold"].is_monotonic_decreasing


class TestPowerCommand:
    def test_writes_curves(self, output_directory):
        result = _invoke(
            "power", "-t", "SFT", "-t", "WALD", "--n", 10, "--N", 100,
            "--u-stop", 2, "--u-count", 3, "--drift", "-o", output_directory,
        )
        assert result.exit_code == 0, result.output
        power = pd.read_csv(output_directory / "power.csv")
        assert len(power) == 6
        assert power["u"].tolist()[:3] == [0.0, 1.0, 2.0]
        assert len(pd.read_csv(output_directory / "limit.csv")) == 6
        assert len(pd.read_csv(output_directory / "score_drift.csv")) == 3

    def test_no_limit(self, output_directory):
        result = _invoke("power", "-t", "SFT", "--n", 10, "--N", 100, "--u-count", 1,
                         "--no-limit", "-o", output_directory)
        assert result.exit_code == 0, result.output
        assert not (output_directory / "limit.csv").exists()

    def test_flags_override_config(self, tmp_path, output_directory):
        path = tmp_path / "run.json"
        path.write_text('{"n": 10, "N": 100, "tests": ["SFT"], "u_count": 1}')
        result = _invoke("power", "-c", path, "--n", 12, "-o", output_directory)
        assert result.exit_code == 0, result.output
        assert pd.read_csv(output_directory / "power.csv")["n"].tolist() == [12]

    def test_bayes_with_prior_flags(self, output_directory):
        result = _invoke(
            "power", "-t", "BT1", "--n", 10, "--N", 100, "--M", 2000, "--u-count", 1,
            "--prior", "triangular", "--prior-mode", 3, "--no-limit", "-o", output_directory,
        )
        assert result.exit_code == 0, result.output

    def test_unnormalized_prior(self, output_directory):
        result = _invoke(
            "power", "-t", "BT1", "--n", 10, "--N", 100, "--u-count", 1,
            "--prior-upper", 9, "-o", output_directory,
        )
        assert result.exit_code == 2
        assert "integrates" in result.output

    def test_prior_table_alone_is_read(self, tmp_path, output_directory):
        table = tmp_path / "heavy_prior.csv"
        table.write_text("theta,density\n3.0,0.5\n7.0,0.5\n")
        result = _invoke(
            "power", "-t", "BT1", "--n", 10, "--N", 100, "--u-count", 1,
            "--prior-table", table, "-o", output_directory,
        )
        assert result.exit_code == 2
        assert "integrates" in result.output

    def test_prior_table_runs(self, prior_table_csv, output_directory):
        result = _invoke(
            "power", "-t", "BT2", "--n", 10, "--N", 100, "--M", 2000, "--u-count", 1,
            "--prior-table", prior_table_csv, "--no-limit", "-o", output_directory,
        )
        assert result.exit_code == 0, result.output

    def test_prior_flag_replaces_config_table(self, tmp_path, prior_table_csv, output_directory):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"prior": {"path": str(prior_table_csv)}}))
        result = _invoke(
            "power", "-c", path, "-t", "BT1", "--n", 10, "--N", 100, "--M", 2000,
            "--u-count", 1, "--prior", "triangular", "--prior-mode", 3, "--no-limit",
            "-o", output_directory,
        )
        assert result.exit_code == 0, result.output

    def test_too_few_replicates(self, output_directory):
        result = _invoke("power", "-t", "SFT", "--N", 10, "-o", output_directory)
        assert result.exit_code == 2

    def test_reproduce_fig2(self, output_directory):
        result = _invoke("reproduce", "fig2", "--n", 10, "--N", 100, "--u-stop", 1,
                         "--u-count", 2, "-o", output_directory)
        assert result.exit_code == 0, result.output
        power = pd.read_csv(output_directory / "fig2_power.csv")
        assert set(power["test"]) == {"GLRT", "WALD", "SFT"}
        assert (output_directory / "fig2_limit.csv").exists()
        assert (output_directory / "fig2_score_drift.csv").exists()
