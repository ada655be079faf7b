"""Command-line tests."""

import json

from typer.testing import CliRunner

import cli
from core.utils import read_set_file
from models import ExperimentReport
from version import __version__

runner = CliRunner()


def test_version():
    result = runner.invoke(cli.app, ["version"])
    assert result.exit_code == 0
    assert __version__ in result.stdout


def test_list():
    result = runner.invoke(cli.app, ["list"])
    assert result.exit_code == 0
    assert "moments" in result.stdout


def test_field_check():
    result = runner.invoke(cli.app, ["field", "--q", "2^2"])
    assert result.exit_code == 0
    assert "180" in result.stdout


def test_field_rejects_non_prime_power():
    result = runner.invoke(cli.app, ["field", "--q", "6"])
    assert result.exit_code == cli.EXIT_ERROR


def test_construct_to_stdout():
    result = runner.invoke(cli.app, ["construct", "FullGL2", "--q", "2"])
    assert result.exit_code == 0
    assert result.stdout.startswith("q=2^1\n")


def test_construct_to_file(tmp_path):
    path = tmp_path / "a.txt"
    result = runner.invoke(
        cli.app, ["construct", "X23Restricted", "--q", "3", "-p", "X=0,1", "--out", str(path)]
    )
    assert result.exit_code == 0
    assert len(read_set_file(path)) == 54


def test_experiment_report_file(tmp_path):
    path = tmp_path / "report.json"
    args = ["j_count", "--q", "2", "--out", str(path)]
    for role in "abcd":
        args += [f"--set-{role}", "construction:FullM2"]
    result = runner.invoke(cli.app, args)
    assert result.exit_code == 0
    report = json.loads(path.read_text())
    assert report["experiment"] == "j_count"
    assert report["measured"]["j"] == 4096
    assert report["measured"]["deviation"] == 0


def test_experiment_config_document(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"q": "3", "trials": 1, "size": 4, "seed": 2}))
    path = tmp_path / "report.csv"
    result = runner.invoke(
        cli.app, ["moments", "--config", str(config), "--trials", "2", "-f", "csv", "-o", str(path)]
    )
    assert result.exit_code == 0
    lines = path.read_text().splitlines()
    assert len(lines) == 3


def test_experiment_errors(tmp_path):
    assert runner.invoke(cli.app, ["spectrum", "--q", "5"]).exit_code == cli.EXIT_ERROR
    assert runner.invoke(cli.app, ["moments", "--param", "oops"]).exit_code == cli.EXIT_ERROR
    config = tmp_path / "bad.json"
    config.write_text('{"bogus": 1}')
    assert runner.invoke(cli.app, ["moments", "--config", str(config)]).exit_code == cli.EXIT_ERROR
    missing = runner.invoke(cli.app, ["pigeonhole", "--set-a", str(tmp_path / "none.txt")])
    assert missing.exit_code == cli.EXIT_ERROR


def test_failed_check_exit_code(monkeypatch, tmp_path):
    def failing(name, config):
        return ExperimentReport(experiment=name, q=2, pass_flags={"holds": False})

    monkeypatch.setattr(cli, "run_experiment", failing)
    path = tmp_path / "report.json"
    result = runner.invoke(cli.app, ["regularity", "--out", str(path)])
    assert result.exit_code == cli.EXIT_FAILED
    assert json.loads(path.read_text())["pass_flags"] == {"holds": False}


def test_experiment_alias_command(tmp_path):
    path = tmp_path / "report.json"
    args = ["j_count_thm25", "--q", "2", "--out", str(path)]
    for role in "abcd":
        args += [f"--set-{role}", "construction:FullM2"]
    result = runner.invoke(cli.app, args)
    assert result.exit_code == 0
    assert json.loads(path.read_text())["measured"]["j"] == 4096
