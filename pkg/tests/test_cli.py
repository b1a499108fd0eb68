import json

import numpy as np
import pytest
from click.testing import CliRunner

from treespeller.cli import main
from treespeller.lm import WittenBellNgram


@pytest.fixture()
def runner():
    return CliRunner()


def test_normalize_command(runner, tmp_path):
    src = tmp_path / "raw.txt"
    src.write_text("Hello, World!  What's up?")
    dst = tmp_path / "clean.txt"
    result = runner.invoke(main, ["normalize", str(src), str(dst)])
    assert result.exit_code == 0, result.output
    assert dst.read_text() == "hello world.whats up."


def test_normalize_missing_source(runner, tmp_path):
    result = runner.invoke(main, ["normalize", str(tmp_path / "nope.txt"), str(tmp_path / "o.txt")])
    assert result.exit_code != 0


def test_train_lm_command(runner, tmp_path):
    src = tmp_path / "corpus.txt"
    src.write_text("the cat sat. the dog sat. the cat ran.")
    out = tmp_path / "model.json"
    result = runner.invoke(main, ["train-lm", str(src), str(out), "--order", "2"])
    assert result.exit_code == 0, result.output
    assert "bits/char" in result.output
    model = WittenBellNgram.load(out)
    assert model.order == 2


def test_capacity_command(runner, tmp_path):
    counts = tmp_path / "counts.csv"
    rows = np.eye(10, dtype=int) * 900 + np.full((10, 10), 11, dtype=int) - np.eye(10, dtype=int) * 11
    counts.write_text("\n".join(",".join(str(v) for v in row) for row in rows) + "\n")
    result = runner.invoke(main, ["capacity", str(counts)])
    assert result.exit_code == 0, result.output
    report = json.loads(result.output)
    assert report["capacity_bits"] == pytest.approx(2.54, abs=0.01)
    assert len(report["optimal_prior"]) == 10


def test_capacity_command_smooth_flag(runner, tmp_path):
    counts = tmp_path / "counts.csv"
    counts.write_text("5,0\n0,0\n")
    assert runner.invoke(main, ["capacity", str(counts)]).exit_code != 0
    result = runner.invoke(main, ["capacity", str(counts), "--smooth"])
    assert result.exit_code == 0, result.output


def test_sim_command_small_grid(runner, tmp_path):
    out = tmp_path / "report"
    result = runner.invoke(
        main,
        [
            "sim",
            "--target", "the.",
            "--modes", "multi",
            "--leafs", "8",
            "--trials", "1",
            "--seed", "0",
            "--out", str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    assert (out / "trials.csv").exists()
    assert (out / "queries.csv").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert summary["cells"][0]["mode"] == "multi"


def test_sim_strict_flag_passes_when_correct(runner, tmp_path):
    out = tmp_path / "report"
    result = runner.invoke(
        main,
        [
            "sim",
            "--target", "the.",
            "--modes", "multi",
            "--leafs", "10",
            "--trials", "1",
            "--strict",
            "--out", str(out),
        ],
    )
    assert result.exit_code == 0, result.output


def test_caplab_command(runner, tmp_path):
    out = tmp_path / "convergence.csv"
    result = runner.invoke(main, ["caplab", "--m-counts", "32,128", "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert "PASS" in result.output
    lines = out.read_text().splitlines()
    assert len(lines) == 3


def test_caplab_algorithm1_source(runner, tmp_path):
    out = tmp_path / "convergence.csv"
    result = runner.invoke(
        main, ["caplab", "--m-counts", "8,16", "--source", "algorithm1", "--out", str(out)]
    )
    assert result.exit_code == 0, result.output


def test_help_lists_commands(runner):
    result = runner.invoke(main, ["--help"])
    assert result.exit_code == 0
    for cmd in ("normalize", "train-lm", "capacity", "sim", "caplab", "serve"):
        assert cmd in result.output
