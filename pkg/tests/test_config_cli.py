import json
from pathlib import Path

import numpy as np
import pytest

from polyergo.cli import main
from polyergo.config import SUBCOMMANDS, ExperimentConfig
from polyergo.errors import ConfigError
from polyergo.reporting import Series, jsonable


def test_config_roundtrip():
    cfg = ExperimentConfig(
        subcommand="rm-check", seed=7, trials=12, budget=3, tolerance=2.5e-8,
        matrix=[[1, 0], [3, 1]], axes=[[1.0, 2.0], [1.0, 4.0, 8.0]],
        extra={"k0": "2", "L": "4"},
    )
    text = cfg.to_ini()
    back = ExperimentConfig.from_ini(text)
    assert back.to_ini() == text
    assert back.matrix == [[1, 0], [3, 1]]
    assert back.axes == [[1.0, 2.0], [1.0, 4.0, 8.0]]
    assert back.extra == {"k0": "2", "L": "4"}
    assert back.digest() == cfg.digest()


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(subcommand="nope")
    with pytest.raises(ConfigError):
        ExperimentConfig(subcommand="rm-check", seed=-1)
    with pytest.raises(ConfigError):
        ExperimentConfig(subcommand="rm-check", trials=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(subcommand="rm-check", tolerance=0.0)
    with pytest.raises(ConfigError):
        ExperimentConfig(subcommand="rm-check", matrix=[[1], [2, 3]])
    with pytest.raises(ConfigError):
        ExperimentConfig(subcommand="rm-check", axes=[[2.0, 1.0]])
    with pytest.raises(ConfigError):
        ExperimentConfig.from_ini("[experiment]\n")


def test_jsonable_and_series():
    doc = jsonable({"a": np.float64(1.5), "b": np.int64(2), "c": 1 + 2j,
                    "d": np.arange(3), "e": np.bool_(True)})
    assert doc == {"a": 1.5, "b": 2, "c": {"re": 1.0, "im": 2.0},
                   "d": [0, 1, 2], "e": True}
    s = Series(["x", "y"], [[1, 0.5], [2, 0.25]])
    assert s.as_csv() == "x,y\n1,0.5\n2,0.25\n"


def test_cli_unknown_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


def test_cli_empty_config_is_validation_error(tmp_path):
    cfg = tmp_path / "empty.ini"
    cfg.write_text("")
    assert main(["variation", "--config", str(cfg), "--out", str(tmp_path)]) == 3


def test_cli_mismatched_config_subcommand(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[experiment]\nsubcommand = rm-check\n")
    assert main(["variation", "--config", str(cfg), "--out", str(tmp_path)]) == 3


def test_cli_bad_matrix_is_validation_error(tmp_path):
    assert main(["gluing", "--matrix", "1 x; 2 2", "--out", str(tmp_path)]) == 3


def test_cli_violation_exit_code(tmp_path):
    # an absurdly small constant limit forces the inequality check to fail
    code = main(["splitting-check", "--trials", "3", "--out", str(tmp_path),
                 "--set", "climit=1e-6", "--no-plot"])
    assert code == 1


def test_cli_config_file_run(tmp_path):
    cfg = tmp_path / "rm.ini"
    cfg.write_text(
        "[experiment]\nsubcommand = rm-check\nseed = 3\ntrials = 20\n"
        "budget = 4\ntolerance = 1e-09\n\n[extra]\nk0 = 1\nL = 4\n"
    )
    out = tmp_path / "results"
    assert main(["rm-check", "--config", str(cfg), "--out", str(out), "--no-plot"]) == 0
    doc = json.loads((out / "rm-check.json").read_text())
    assert doc["results"]["passed"] is True
    assert doc["results"]["outputs"]["k0"] == 1
    assert set(doc) == {"config", "results", "version"}


@pytest.mark.parametrize("name", SUBCOMMANDS)
def test_cli_every_subcommand_runs_and_produces_files(tmp_path, name):
    args = [name, "--seed", "9", "--trials", "3", "--out", str(tmp_path / name),
            "--no-plot"]
    if name in ("gluing", "offdiag-scan"):
        args += ["--budget", "2"]
    if name == "decay-scan":
        args += ["--budget", "3"]
    if name == "ergodic-run":
        args += ["--budget", "10"]
    code = main(args)
    assert code == 0, name
    outdir = tmp_path / name
    files = sorted(p.name for p in outdir.iterdir())
    assert f"{name}.json" in files
    assert any(f.endswith(".csv") for f in files)
    doc = json.loads((outdir / f"{name}.json").read_text())
    assert doc["results"]["experiment_id"] == name


def test_cli_emits_figures_by_default(tmp_path):
    code = main(["rm-check", "--seed", "4", "--trials", "5", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "rm-check__trials.png").exists()


def test_cli_out_env_default(tmp_path, monkeypatch):
    monkeypatch.setenv("POLYERGO_OUT", str(tmp_path / "envout"))
    monkeypatch.chdir(tmp_path)
    assert main(["rm-check", "--seed", "4", "--trials", "3", "--no-plot"]) == 0
    assert (tmp_path / "envout" / "rm-check.json").exists()
