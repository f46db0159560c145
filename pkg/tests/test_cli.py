"""Unit tests for the qws command-line interface."""

import csv
import json
import math
import subprocess
import sys

import pytest
from click.testing import CliRunner

from qws.cli import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, cli, main


def _run(capsys, *args):
    code = main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


class TestCLI:
    """Test cases for the qws command-line interface."""

    def test_cli_help(self):
        result = subprocess.run([sys.executable, "-m", "qws.cli", "--help"], capture_output=True, text=True)
        assert result.returncode == 0
        assert "Continuous-time quantum walk analysis" in result.stdout
        for command in ("analyze", "census", "repro"):
            assert command in result.stdout

    def test_cli_version(self):
        result = subprocess.run([sys.executable, "-m", "qws.cli", "--version"], capture_output=True, text=True)
        assert result.returncode == 0
        assert result.stdout.startswith("qws ")

    def test_cli_missing_file(self):
        result = subprocess.run(
            [sys.executable, "-m", "qws.cli", "analyze", "nonexistent.txt"], capture_output=True, text=True
        )
        assert result.returncode == EXIT_USAGE
        assert "Error: File not found" in result.stderr


class TestAnalyze:
    def test_pst_pair(self, capsys):
        code, out, _ = _run(capsys, "analyze", "complete:2", "--pst", "0", "1", "--verify")
        assert code == EXIT_OK
        report = json.loads(out)
        assert report["pst"]["pst"] is True
        assert report["pst"]["certificate"]["tau"] == pytest.approx(math.pi / 2)
        assert report["pst"]["certificate"]["verified"] is True

    def test_default_sections(self, capsys):
        code, out, _ = _run(capsys, "analyze", "path:4")
        assert code == EXIT_OK
        report = json.loads(out)
        assert set(report) >= {"schema", "graph", "config", "spectrum", "pst_all", "periodic"}
        assert "pst" not in report
        assert report["pst_all"]["certificates"] == []
        assert report["periodic"]["graph"]["periodic"] is False

    def test_options_reach_config(self, capsys):
        code, out, _ = _run(
            capsys, "analyze", "cube:3", "--periodic", "--tolerance", "fidelity=1e-10", "--t-max", "7", "--seed", "3"
        )
        assert code == EXIT_OK
        config = json.loads(out)["config"]
        assert (config["fidelity_tol"], config["t_max"], config["seed"]) == (1e-10, 7.0, 3)

    def test_mixing(self, capsys):
        code, out, _ = _run(capsys, "analyze", "complete:2", "--mixing", "--average-mixing", "--t-max", "2")
        assert code == EXIT_OK
        report = json.loads(out)
        assert report["mixing"]["flat_times"][0] == pytest.approx(math.pi / 4, abs=1e-6)
        assert report["average_mixing"]["uniform"] is True

    def test_pgst_csv(self, capsys, tmp_path):
        path = tmp_path / "p4.csv"
        code, out, _ = _run(capsys, "analyze", "path:4", "--pgst", "0", "3", "--t-max", "5", "--csv", str(path))
        assert code == EXIT_OK
        assert json.loads(out)["pgst"]["filter_passed"] is True
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["u", "v", "t", "fidelity"]
        assert len(rows) > 100

    def test_csv_needs_a_section(self, capsys, tmp_path):
        code, _, err = _run(capsys, "analyze", "path:4", "--periodic", "--csv", str(tmp_path / "x.csv"))
        assert code == EXIT_USAGE
        assert "--csv needs" in err

    @pytest.mark.parametrize(
        "args,message",
        [
            (["analyze", "wheel:5"], "Unknown graph kind"),
            (["analyze", "complete:2", "--pst", "0", "5"], "out of range"),
            (["analyze", "complete:2", "--tolerance", "fidelity"], "name=value"),
            (["analyze", "complete:2", "--tolerance", "fidelity=0.5"], "fidelity_tol"),
        ],
    )
    def test_usage_errors(self, capsys, args, message):
        code, _, err = _run(capsys, *args)
        assert code == EXIT_USAGE
        assert err.startswith("Error: ")
        assert message in err


class TestCensus:
    def test_circulant(self, capsys):
        code, out, _ = _run(capsys, "census", "circulant", "-n", "4")
        assert code == EXIT_OK
        lines = [json.loads(line) for line in out.splitlines()]
        assert len(lines) == 4
        assert lines[-1]["summary"]["count"] == 3
        assert lines[-1]["summary"]["pst"] == 2

    def test_cubelike(self, capsys):
        code, out, _ = _run(capsys, "census", "cubelike", "-d", "2", "--dedup")
        assert code == EXIT_OK
        assert json.loads(out.splitlines()[-1])["summary"]["count"] == 5

    @pytest.mark.parametrize(
        "args",
        [
            ["census", "circulant"],
            ["census", "circulant", "-n", "4", "--max-n", "6"],
            ["census", "circulant", "-n", "0"],
            ["census", "cubelike", "-d", "0"],
        ],
    )
    def test_bad_arguments(self, capsys, args):
        code, _, _ = _run(capsys, *args)
        assert code == EXIT_USAGE


class TestRepro:
    def test_single_check(self, capsys):
        code, out, _ = _run(capsys, "repro", "--only", "k2")
        assert code == EXIT_OK
        assert "1/1 checks without failure" in out

    def test_unknown_check(self, capsys):
        code, _, err = _run(capsys, "repro", "--only", "nope")
        assert code == EXIT_USAGE
        assert "Unknown check" in err

    def test_failing_check_sets_exit_code(self, capsys, monkeypatch):
        from qws import repro

        def broken(cfg):
            raise repro.CheckFailed("deliberate")

        monkeypatch.setitem(repro.CHECKS, "broken", broken)
        code, out, _ = _run(capsys, "repro", "--only", "broken")
        assert code == EXIT_FAILURE
        assert "deliberate" in out


class TestRunner:
    def test_invoke_group(self):
        result = CliRunner().invoke(cli, ["analyze", "cube:3", "--pst-all"])
        assert result.exit_code == 0
        pairs = {(c["u"], c["v"]) for c in json.loads(result.stdout)["pst_all"]["certificates"]}
        assert pairs == {(0, 7), (1, 6), (2, 5), (3, 4)}
