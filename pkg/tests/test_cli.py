import json
import os

import pytest

from main import EXIT_OK, EXIT_SOLVER, EXIT_VALIDATION, main

_SHORT_RUN = ["run", "--problem", "advection-shapes", "--mode", "AP", "--cells", "100", "--dt", "0.008",
              "--t-end", "0.08"]


def test_run_writes_artifacts(tmp_path, capsys):
    out = str(tmp_path / "shapes")
    assert main(_SHORT_RUN + ["--out", out]) == EXIT_OK
    assert sorted(os.listdir(out)) == ["manifest.json", "metrics.json", "solution_t0.080000.csv"]
    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert summary["mode"] == "AP"


def test_run_from_config_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"problem": "advection-shapes", "cells": 100, "dt": 0.008, "t_end": 0.08,
                                "mode": "LP"}))
    out = str(tmp_path / "from-file")
    assert main(["run", "--config", str(path), "--mode", "AP", "--out", out]) == EXIT_OK
    with open(os.path.join(out, "manifest.json")) as fh:
        assert json.load(fh)["run"]["mode"] == "AP"


def test_run_default_output_dir(tmp_path):
    from fctlp import config

    assert main(_SHORT_RUN) == EXIT_OK
    assert os.path.isdir(os.path.join(config.OUTPUT_DIR, "advection-shapes_AP_sigma0"))


def test_unknown_problem_exit_code(tmp_path):
    assert main(["run", "--problem", "heat-equation", "--out", str(tmp_path)]) == EXIT_VALIDATION


def test_missing_problem_exit_code(tmp_path):
    assert main(["run", "--out", str(tmp_path)]) == EXIT_VALIDATION


def test_unreadable_config_exit_code(tmp_path):
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == EXIT_VALIDATION


def test_cfl_violation_exit_code(tmp_path):
    argv = ["run", "--problem", "advection-shapes", "--cells", "100", "--dt", "0.08", "--t-end", "0.16",
            "--out", str(tmp_path)]
    assert main(argv) == EXIT_SOLVER


def test_compare(tmp_path, capsys):
    out = str(tmp_path / "shapes")
    main(_SHORT_RUN + ["--out", out])
    capsys.readouterr()
    path = os.path.join(out, "solution_t0.080000.csv")
    assert main(["compare", path, path]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["l1_distance"] == 0.0


def test_compare_missing_file(tmp_path):
    assert main(["compare", str(tmp_path / "a.csv"), str(tmp_path / "b.csv")]) == EXIT_VALIDATION


def test_bench_rejects_unknown_id():
    with pytest.raises(SystemExit):
        main(["bench", "table9"])


def test_selftest(capsys):
    assert main(["selftest", "--lps", "10", "--fields", "3"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["lp_mismatches"] == 0


def test_run_has_no_seed_flag(tmp_path):
    with pytest.raises(SystemExit):
        main(_SHORT_RUN + ["--seed", "1", "--out", str(tmp_path)])


def test_config_file_with_unknown_key(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"problem": "advection-shapes", "seed": 7}))
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "out")]) == EXIT_VALIDATION
