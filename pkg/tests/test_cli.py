import json
import os
import stat
import subprocess
import sys

import pytest

from pairtune.cli import main
from pairtune.classifier import load_model
from pairtune.driver import load_db
from pairtune.space import load_space

SPACE = """\
params:
  - {name: buffer_mb, kind: integer, min: 16, max: 1024, default: 128}
  - {name: ratio, kind: continuous, min: 0.0, max: 1.0}
  - {name: mode, kind: categorical, levels: [fast, safe, balanced]}
"""

RUNNER = """\
import math, sys
v = dict(line.split('=', 1) for line in open(sys.argv[1]).read().split())
bonus = {'fast': 0.5, 'safe': 0.0, 'balanced': 0.2}[v['mode']]
print(math.log(float(v['buffer_mb'])) - (float(v['ratio']) - 0.3) ** 2 + bonus)
"""


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "space.yaml").write_text(SPACE)
    run = tmp_path / "run.sh"
    run.write_text(f"#!/bin/sh\nexec {sys.executable} {tmp_path / 'runner.py'} \"$1\"\n")
    run.chmod(run.stat().st_mode | stat.S_IXUSR)
    (tmp_path / "runner.py").write_text(RUNNER)
    return tmp_path


def error_line(capsys):
    err = capsys.readouterr().err.strip().splitlines()
    return err[-1]


class TestTune:
    def test_happy_path(self, workdir, capsys):
        code = main(["-q", "tune", "--space", "space.yaml", "--driver-cmd", "./run.sh",
                     "--budget", "20", "--seed", "7"])
        assert code == 0
        for name in ("pairtune-report.json", "pairtune-samples.csv", "pairtune-model.json"):
            assert (workdir / name).exists()
        space = load_space("space.yaml")
        assert len(load_db("pairtune-samples.csv", space)) == 20
        load_model("pairtune-model.json")
        out = json.loads(capsys.readouterr().out)
        assert set(out["best"]) == {"buffer_mb", "ratio", "mode"}

    def test_budget_overrun(self, workdir, capsys):
        code = main(["tune", "--space", "space.yaml", "--driver-cmd", "./run.sh",
                     "--budget", "30", "--init-samples", "20", "--validate-samples", "20"])
        assert code == 1
        assert error_line(capsys).startswith("pairtune: config: ")
        assert not (workdir / "pairtune-samples.csv").exists()

    def test_unknown_flag_has_no_side_effects(self, workdir, capsys):
        code = main(["tune", "--space", "space.yaml", "--driver-cmd", "./run.sh", "--bogus"])
        assert code == 1
        assert error_line(capsys).startswith("pairtune: usage: ")
        assert sorted(os.listdir(workdir)) == ["run.sh", "runner.py", "space.yaml"]

    def test_driver_failure(self, workdir, capsys):
        code = main(["-q", "tune", "--space", "space.yaml", "--driver-cmd", "false", "--budget", "6"])
        assert code == 2
        assert error_line(capsys) == "pairtune: evaluation: command exited with status 1"
        assert not (workdir / "pairtune-report.json").exists()

    def test_both_or_neither_driver(self, workdir):
        assert main(["tune", "--space", "space.yaml"]) == 1
        assert main(["tune", "--space", "space.yaml", "--driver-cmd", "x",
                     "--benchmark", "monotone"]) == 1

    def test_resume_from_database(self, workdir):
        assert main(["-q", "sample", "--space", "space.yaml", "--driver-cmd", "./run.sh",
                     "--init-samples", "8", "--db", "db.csv"]) == 0
        before = load_db("db.csv", load_space("space.yaml")).rows
        assert main(["-q", "tune", "--space", "space.yaml", "--driver-cmd", "./run.sh",
                     "--budget", "16", "--db", "db.csv"]) == 0
        after = load_db("db.csv", load_space("space.yaml")).rows
        assert after[:8] == before and len(after) == 16

    def test_fingerprint_mismatch(self, workdir, capsys):
        assert main(["-q", "sample", "--dims", "2", "--benchmark", "monotone",
                     "--init-samples", "4", "--db", "db.csv"]) == 0
        code = main(["tune", "--dims", "3", "--benchmark", "monotone", "--db", "db.csv"])
        assert code == 3
        assert error_line(capsys).startswith("pairtune: data: ")

    def test_missing_space_file(self, workdir, capsys):
        assert main(["tune", "--space", "absent.yaml", "--benchmark", "monotone"]) == 3

    def test_bad_space_file(self, workdir, capsys):
        (workdir / "bad.yaml").write_text("params:\n  - {name: x, kind: integer, min: 1, max: 1}\n")
        assert main(["tune", "--space", "bad.yaml", "--benchmark", "monotone"]) == 3

    def test_reports_byte_identical(self, workdir):
        for tag in ("a", "b"):
            assert main(["-q", "tune", "--dims", "3", "--benchmark", "multimodal", "--seed", "11",
                         "--budget", "30", "--report-out", f"{tag}.json", "--db", f"{tag}.csv",
                         "--model-out", f"{tag}.model"]) == 0
        assert (workdir / "a.json").read_bytes() == (workdir / "b.json").read_bytes()
        assert (workdir / "a.model").read_bytes() == (workdir / "b.model").read_bytes()
        assert (workdir / "a.csv").read_bytes() == (workdir / "b.csv").read_bytes()


class TestOtherCommands:
    def test_sample_then_train(self, workdir, capsys):
        assert main(["-q", "sample", "--space", "space.yaml", "--driver-cmd", "./run.sh",
                     "--init-samples", "10", "--db", "db.csv"]) == 0
        assert main(["train", "--space", "space.yaml", "--db", "db.csv",
                     "--classifier", "decision-tree", "--model-out", "m.json"]) == 0
        assert load_model("m.json").kind == "decision-tree"

    def test_train_with_rules(self, workdir):
        (workdir / "rules.txt").write_text("buffer_mb increasing-improves\n")
        assert main(["-q", "sample", "--space", "space.yaml", "--driver-cmd", "./run.sh",
                     "--init-samples", "6", "--db", "db.csv"]) == 0
        assert main(["train", "--space", "space.yaml", "--db", "db.csv", "--rules", "rules.txt"]) == 0

    def test_train_bad_rules(self, workdir, capsys):
        (workdir / "rules.txt").write_text("nope increasing-improves\n")
        assert main(["-q", "sample", "--space", "space.yaml", "--driver-cmd", "./run.sh",
                     "--init-samples", "4", "--db", "db.csv"]) == 0
        assert main(["train", "--space", "space.yaml", "--db", "db.csv", "--rules", "rules.txt"]) == 3

    def test_train_degenerate(self, workdir, capsys):
        assert main(["-q", "sample", "--dims", "2", "--driver-cmd", "sh -c 'echo 5'",
                     "--init-samples", "4", "--db", "db.csv"]) == 0
        assert main(["train", "--dims", "2", "--db", "db.csv"]) == 3
        assert "single label class" in error_line(capsys)

    def test_bench_table(self, workdir, capsys):
        code = main(["-q", "bench", "--benchmark", "multimodal", "--dims", "2", "--budget", "20",
                     "--seeds", "2", "--report-out", "bench.json"])
        assert code == 0
        out = capsys.readouterr().out.splitlines()
        assert out[1].split() == ["method", "median", "mean", "min", "max"]
        assert [line.split()[0] for line in out[2:]] == ["comparison", "random", "initial_best"]
        doc = json.loads((workdir / "bench.json").read_text())
        assert [r["seed"] for r in doc["runs"]] == [0, 1]

    def test_report(self, workdir, capsys):
        assert main(["-q", "tune", "--dims", "2", "--benchmark", "monotone", "--budget", "10"]) == 0
        capsys.readouterr()
        assert main(["report"]) == 0
        text = capsys.readouterr().out
        assert "best setting" in text and "timings" in text
        assert main(["report", "--json"]) == 0
        assert json.loads(capsys.readouterr().out)["evaluations"] == 10

    def test_report_not_a_report(self, workdir, capsys):
        (workdir / "x.json").write_text("{}")
        assert main(["report", "x.json"]) == 3

    def test_progress_on_stderr(self, workdir, capsys):
        assert main(["tune", "--dims", "2", "--benchmark", "monotone", "--budget", "6"]) == 0
        captured = capsys.readouterr()
        assert "eval 1:" in captured.err and "eval" not in captured.out

    def test_module_entry_point(self, workdir):
        proc = subprocess.run([sys.executable, "-m", "pairtune", "--version"],
                              capture_output=True, text=True)
        assert proc.returncode == 0 and proc.stdout.startswith("pairtune ")

    def test_no_subcommand(self, capsys):
        assert main([]) == 1
