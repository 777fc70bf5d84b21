import json
import subprocess
import sys

import pytest

from asglearn.cli import main
from asglearn.config import bundled


def test_subcommands_in_sequence(tmp_path, capsys):
    out = str(tmp_path / "r")
    assert main(["explore", "--out", out, "--seed", "1"]) == 0
    assert "330 sequences" in capsys.readouterr().out
    assert main(["learn", "--out", out, "--seed", "1"]) == 0
    assert "learned cost" in capsys.readouterr().out
    assert main(["exploit", "--out", out, "--samples", "40"]) == 0
    assert "100.0%" in capsys.readouterr().out
    assert main(["eval", "--out", out, "--samples", "20", "--lmax", "9"]) == 0
    text = capsys.readouterr().out
    assert "recovered" in text and "len <= 9" in text


def test_run_all_with_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("task = anbncm\nsamples_per_temperature = 10\nout = out\n")
    assert main(["run-all", "--config", str(cfg), "--samples", "30", "--provider", "ngram"]) == 0
    assert (tmp_path / "out" / "report.txt").is_file()
    first = json.loads((tmp_path / "out" / "report.jsonl").read_text().splitlines()[0])
    assert first["task"] == "anbncm"


def test_unconstrained_flag(tmp_path, capsys):
    out = str(tmp_path / "u")
    assert main(["exploit", "--out", out, "--unconstrained", "--samples", "50"]) == 0
    assert "unconstrained" in capsys.readouterr().out


def test_equiv_exit_codes(capsys):
    l1, l2 = bundled("anbncn.asg"), bundled("anbncm.asg")
    assert main(["equiv", l1, l1]) == 0
    assert main(["equiv", l1, l2, "--lmax", "6"]) == 1
    assert "'aabbc'" in capsys.readouterr().out


def test_errors_exit_nonzero(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("oracle = cmd:/no/such/oracle\nout = x\n")
    assert main(["explore", "--config", str(cfg)]) == 2
    assert "OracleFailure" in capsys.readouterr().err
    assert main(["learn", "--out", str(tmp_path / "empty")]) == 2


def test_provider_choice_is_validated():
    with pytest.raises(SystemExit):
        main(["explore", "--provider", "gpt"])


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "asglearn", "equiv", bundled("anbncn.asg"),
                           bundled("anbncn.asg"), "--lmax", "5"], capture_output=True, text=True)
    assert proc.returncode == 0 and "equivalent" in proc.stdout
