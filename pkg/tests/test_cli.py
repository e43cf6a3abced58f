import json
import re
from pathlib import Path

import pytest

from aniso4nls.cli import main
from aniso4nls.config import ConfigError, ExploratoryWarning, Suite, load_config, parse_config

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

SMALL = """
schema_version = 1
name = "small"
suite = "propagate"
[model]
lam = 1.0
p = 3.0
[grid]
half_length = 16.0
n_points = 128
[profile]
width = 1.5
[propagate]
t_final = 1.0
dt = 0.01
snapshots = [0.5]
"""


def _write(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.toml")), ids=lambda p: p.stem)
def test_shipped_configs_validate(path):
    cfg = load_config(path)
    assert cfg.name == path.stem
    assert main(["validate", str(path)]) == 0


def test_parse_roundtrip_fields(tmp_path):
    cfg = load_config(_write(tmp_path, SMALL))
    assert cfg.suite is Suite.PROPAGATE and cfg.grid.d == 1
    assert cfg.params["snapshots"] == [0.5] and cfg.params["tail_guard"] is True
    assert cfg.raw["grid"]["n_points"] == 128


@pytest.mark.parametrize(
    "edit",
    [
        ("schema_version = 1", "schema_version = 2"),
        ('suite = "propagate"', 'suite = "nonsense"'),
        ("dt = 0.01", "dt = 0.01\nstep = 3"),
        ("width = 1.5", "width = 1.5\ncolour = 1"),
        ("n_points = 128", "n_points = 0"),
        ("half_length = 16.0", "half_length = 16.0\nspacing = 2"),
        ("[model]", "[model]\nform = \"elliptic-ish\""),
        ('name = "small"', ""),
        ("t_final = 1.0", "t_final = 1.0 +"),
    ],
)
def test_invalid_configs_exit_1(tmp_path, edit, capsys):
    path = _write(tmp_path, SMALL.replace(*edit))
    with pytest.raises(ConfigError):
        load_config(path)
    assert main(["validate", str(path)]) == 1
    assert main(["run", str(path), "--out", str(tmp_path / "runs")]) == 1


def test_missing_file_and_usage_errors(tmp_path):
    assert main(["validate", str(tmp_path / "none.toml")]) == 1
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["table", "gamma", "two", "2.5"])
    assert e.value.code == 1


def test_exploratory_scatter_warns():
    data = {
        "schema_version": 1, "name": "x", "suite": "scatter",
        "model": {"p": 3.5}, "grid": {"half_length": [8.0, 8.0], "n_points": [32, 32]},
    }
    with pytest.warns(ExploratoryWarning):
        cfg = parse_config(data)
    assert cfg.exploratory


def test_tail_guard_abort_exit_2(tmp_path):
    text = SMALL.replace("half_length = 16.0", "half_length = 4.0").replace("n_points = 128", "n_points = 16")
    text = text.replace("width = 1.5", "width = 0.3")
    path = _write(tmp_path, text)
    out = tmp_path / "runs"
    assert main(["run", str(path), "--out", str(out)]) == 2
    summary = json.loads((out / "small" / "summary.json").read_text())
    assert summary["exit_code"] == 2 and "tail mass" in summary["message"]
    assert not summary["all_passed"]


def test_run_directory_contents(tmp_path):
    path = _write(tmp_path, SMALL)
    out = tmp_path / "runs"
    assert main(["run", str(path), "--out", str(out)]) == 0
    run = out / "small"
    names = {p.name for p in run.iterdir()}
    assert {"config.json", "summary.json", "mass.csv", "mass_drift.svg", "initial.afld", "u_t0.5.afld"} <= names
    assert json.loads((run / "config.json").read_text())["grid"]["n_points"] == 128
    lines = (run / "mass.csv").read_text().splitlines()
    assert lines[0].split(",")[0] == "time"
    row = lines[5].split(",")
    float(row[0])
    assert len(re.sub(r"[-.]|e.*", "", row[1]).lstrip("0")) == 17
    summary = json.loads((run / "summary.json").read_text())
    assert summary["all_passed"] and summary["exit_code"] == 0
    assert {a["name"] for a in summary["assertions"]} >= {"mass_drift", "backward_forward_roundtrip"}
    assert sorted(summary["files"]) == sorted(names)
    assert (run / "mass_drift.svg").read_text().lstrip().startswith("<?xml")


def test_runs_are_deterministic(tmp_path):
    path = _write(tmp_path, SMALL)
    main(["run", str(path), "--out", str(tmp_path / "a")])
    main(["run", str(path), "--out", str(tmp_path / "b")])
    for f in (tmp_path / "a" / "small").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / "small" / f.name).read_bytes(), f.name


def test_threads_env(tmp_path, monkeypatch):
    from aniso4nls.grid import fft_workers

    monkeypatch.setenv("ANISO4NLS_THREADS", "3")
    assert fft_workers() == 3
    monkeypatch.setenv("ANISO4NLS_THREADS", "many")
    assert fft_workers() == 1
    monkeypatch.delenv("ANISO4NLS_THREADS")
    assert fft_workers() == 1


def test_table_gamma(capsys):
    assert main(["table", "gamma", "3", "2"]) == 0
    out = capsys.readouterr().out
    assert "gamma = 0.25" in out and "1/(p-1)-d/4" in out and "theorem range: yes" in out
    assert main(["table", "gamma", "4", "2"]) == 1


def test_oracle_command(capsys):
    assert main(["oracle", "20", "3", "--width", "0.5"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("kernel") and "relative difference" in out
    rel = float(out.strip().split()[-1])
    assert rel < 0.05
    assert main(["oracle", "0", "1"]) == 1


def test_gamma_table_run(tmp_path):
    out = tmp_path / "runs"
    assert main(["run", str(CONFIGS / "gamma_table.toml"), "--out", str(out)]) == 0
    csv = (out / "gamma_table" / "gamma.csv").read_text().splitlines()
    assert csv[0].startswith("d,") or "gamma" in csv[0]
