"""Scenario loading and CLI contract tests."""
import csv
import json

import pytest
from click.testing import CliRunner

from gridshield import config
from gridshield.cli import cli
from gridshield.config import (
    ConstraintViolation,
    ScenarioParseError,
    UnknownKeyError,
    default_scenario_path,
    load_scenario,
)
from gridshield.report import SWEEP_COLUMNS

SMALL_SCENARIO = """\
[scenario]
duration = 300.0
attack_period = 150.0
"""


@pytest.fixture
def small_scenario(tmp_path):
    path = tmp_path / "small.toml"
    path.write_text(SMALL_SCENARIO)
    return path


class TestLoadScenario:
    def test_shipped_default_loads(self):
        resolved = load_scenario(default_scenario_path())
        assert resolved.scenario.defender_count == 1
        assert resolved.scenario.bot_count == 400
        assert resolved.scenario.link_capacity == 10_000_000.0
        assert resolved.cost.theta == 3.5

    def test_defaults_fill_missing_sections(self, tmp_path):
        path = tmp_path / "empty.toml"
        path.write_text("")
        resolved = load_scenario(path)
        assert resolved.quote.population == 400_000
        assert resolved.output_format == "csv"

    def test_unknown_key_named_in_error(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("[scenario]\nbotz = 3\n")
        with pytest.raises(UnknownKeyError) as excinfo:
            load_scenario(path)
        assert excinfo.value.key == "scenario.botz"

    def test_unknown_section_rejected(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("[attacker]\nx = 1\n")
        with pytest.raises(UnknownKeyError):
            load_scenario(path)

    def test_constraint_violation_named(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("[scenario]\nbot_count = -4\n")
        with pytest.raises(ConstraintViolation) as excinfo:
            load_scenario(path)
        assert excinfo.value.key == "scenario.bot_count"
        assert "bot_count" in str(excinfo.value)

    def test_type_mismatch_rejected(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("[scenario]\nbot_count = \"many\"\n")
        with pytest.raises(ConstraintViolation):
            load_scenario(path)

    def test_malformed_toml_rejected(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("[scenario\n")
        with pytest.raises(ScenarioParseError):
            load_scenario(path)

    def test_schema_version_mismatch_rejected(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("schema_version = 99\n")
        with pytest.raises(ConstraintViolation):
            load_scenario(path)

    def test_serialize_round_trip(self, tmp_path, small_scenario):
        resolved = load_scenario(small_scenario)
        serialized = resolved.serialize()
        rewritten = tmp_path / "round.toml"
        lines = [f"schema_version = {serialized['schema_version']}"]
        for section, values in serialized.items():
            if section == "schema_version":
                continue
            lines.append(f"[{section}]")
            for key, value in values.items():
                lines.append(f"{key} = {json.dumps(value)}")
        rewritten.write_text("\n".join(lines) + "\n")
        assert load_scenario(rewritten).serialize() == serialized


class TestManifest:
    def test_to_dict_shape(self):
        manifest = config.RunManifest(config={"a": 1}, seeds=[2, 1],
                                      outputs=["b", "a"])
        payload = manifest.to_dict()
        assert payload["outputs"] == ["a", "b"]
        assert payload["seeds"] == [2, 1]
        assert payload["config"] == {"a": 1}
        assert payload["tool_version"]


def _invoke(args):
    return CliRunner().invoke(cli, args, catch_exceptions=False)


class TestExpenseTableCommand:
    def test_writes_csv_and_figure(self, tmp_path):
        out = tmp_path / "out"
        result = _invoke(["expense-table", "--out", str(out)])
        assert result.exit_code == 0
        with (out / "expense_table.csv").open() as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["base"] + [f"peers_{p}" for p in range(1, 10)]
        assert rows[1] == ["1", "7", "10.5", "14", "17.5", "21", "24.5",
                           "28", "31.5", "35"]
        assert (out / "expense_table.png").exists()
        assert (out / "manifest.json").exists()

    def test_bad_bases_is_usage_error(self, tmp_path):
        result = CliRunner().invoke(
            cli, ["expense-table", "--bases", "x,y", "--out", str(tmp_path)]
        )
        assert result.exit_code != 0


class TestLvAnalyzeCommand:
    def test_writes_report_and_trajectory(self, tmp_path):
        out = tmp_path / "out"
        result = _invoke(["lv-analyze", "--out", str(out), "--no-plot"])
        assert result.exit_code == 0
        payload = json.loads((out / "lv_report.json").read_text())
        assert payload["max_relative_k_drift"] < 1e-6
        assert payload["equilibria"]["coexistence"] == [1.0, 1.0]
        with (out / "lv_trajectory.csv").open() as fh:
            header = fh.readline().strip().split(",")
        assert header == ["t", "num_unit", "num_actv"]

    def test_plot_renders_phase_portrait(self, tmp_path):
        out = tmp_path / "out"
        result = _invoke(["lv-analyze", "--out", str(out), "--horizon", "2.0"])
        assert result.exit_code == 0
        assert (out / "phase_portrait.png").stat().st_size > 0


class TestSimulateCommand:
    def test_artifacts_and_summary_line(self, tmp_path, small_scenario):
        out = tmp_path / "out"
        result = _invoke(["simulate", "--scenario", str(small_scenario),
                          "--out", str(out)])
        assert result.exit_code == 0
        assert "util=" in result.output
        payload = json.loads((out / "report.json").read_text())
        assert payload["defender_count"] == 1
        with (out / "series.csv").open() as fh:
            header = fh.readline().strip().split(",")
        assert header == ["time_s", "utilization", "active_bots",
                          "engaged_defenders", "alarm_level"]
        assert (out / "delays.csv").exists()
        assert (out / "utilization.png").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seeds"] == [42]

    def test_overrides_reach_the_run(self, tmp_path, small_scenario):
        out = tmp_path / "out"
        result = _invoke(["simulate", "--scenario", str(small_scenario),
                          "--seed", "9", "--defenders", "3",
                          "--out", str(out), "--no-plot"])
        assert result.exit_code == 0
        payload = json.loads((out / "report.json").read_text())
        assert payload["seed"] == 9
        assert payload["defender_count"] == 3

    def test_config_error_exit_code_and_no_artifacts(self, tmp_path):
        bad = tmp_path / "bad.toml"
        bad.write_text("[scenario]\nbot_count = -1\n")
        out = tmp_path / "out"
        result = CliRunner().invoke(
            cli, ["simulate", "--scenario", str(bad), "--out", str(out)]
        )
        assert result.exit_code == 2
        assert "configuration error" in result.output
        assert not any(out.iterdir())

    def test_missing_scenario_file_is_io_error(self, tmp_path):
        result = CliRunner().invoke(
            cli, ["simulate", "--scenario", str(tmp_path / "nope.toml"),
                  "--out", str(tmp_path / "out")]
        )
        assert result.exit_code == 4


class TestSweepCommand:
    def test_summary_csv_contract(self, tmp_path, small_scenario):
        out = tmp_path / "out"
        result = _invoke(["sweep", "--scenario", str(small_scenario),
                          "--defenders", "1,2", "--seeds", "3,4",
                          "--out", str(out), "--no-plot"])
        assert result.exit_code == 0
        with (out / "sweep_summary.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        assert list(rows[0].keys()) == list(SWEEP_COLUMNS)
        assert [(r["defender_count"], r["seed"]) for r in rows] == [
            ("1", "3"), ("1", "4"), ("2", "3"), ("2", "4")
        ]
        assert (out / "report_d2_s4.json").exists()

    def test_figure_rendered_by_default(self, tmp_path, small_scenario):
        out = tmp_path / "out"
        result = _invoke(["sweep", "--scenario", str(small_scenario),
                          "--defenders", "1", "--seeds", "1",
                          "--out", str(out)])
        assert result.exit_code == 0
        assert (out / "sweep_curves.png").stat().st_size > 0
