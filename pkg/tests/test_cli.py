"""Command-line interface: outputs, exit codes, determinism, flags."""
from __future__ import annotations

import copy
import json
import subprocess
import sys

import pytest

from poromoist.cli import main


@pytest.fixture()
def small_config(smoke_config, tmp_path):
    """Smoke problem shrunk to n=32, T=0.05 so CLI tests stay quick."""
    data = copy.deepcopy(smoke_config)
    data["grid"]["n"] = 32
    data["physical"]["t_end"] = 0.05
    data["output"]["cadence"] = 0.025
    path = tmp_path / "small.json"
    path.write_text(json.dumps(data))
    return path, data


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def test_run_writes_outputs(small_config, tmp_path, capsys):
    path, _ = small_config
    out = tmp_path / "out"
    assert main(["run", str(path), "--out", str(out)]) == 0
    assert "certification: PASS" in capsys.readouterr().out

    series = (out / "series.csv").read_text().splitlines()
    assert series[0].startswith("t,total_mass,")
    assert len(series) == 52          # header plus one row per state

    snapshots = (out / "snapshots.csv").read_text().splitlines()
    assert snapshots[0] == "t,x,rho,theta,u"
    assert len(snapshots) == 1 + 3 * 32   # t = 0, 0.025, 0.05

    report = json.loads((out / "report.json").read_text())
    assert report["certification"]["passed"] is True
    assert report["steps"] == 50
    assert report["advection"] == "upwind"


def test_run_is_byte_deterministic(small_config, tmp_path):
    path, _ = small_config
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(path), "--out", str(out1), "--quiet"]) == 0
    assert main(["run", str(path), "--out", str(out2), "--quiet"]) == 0
    for name in ("series.csv", "snapshots.csv", "report.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_run_flags_override_config(small_config, tmp_path):
    path, _ = small_config
    out = tmp_path / "flagged"
    assert main(["run", str(path), "--out", str(out), "--quiet",
                 "--cadence", "0.05", "--advection", "central"]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["advection"] == "central"
    snapshots = (out / "snapshots.csv").read_text().splitlines()
    assert len(snapshots) == 1 + 2 * 32   # t = 0 and t = 0.05 only


def test_missing_config_is_usage_error(tmp_path):
    assert main(["run", str(tmp_path / "absent.json"), "--quiet"]) == 2


def test_broken_json_is_usage_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{ not json")
    assert main(["run", str(path), "--quiet"]) == 2


def test_invalid_config_is_usage_error(smoke_config, tmp_path):
    data = copy.deepcopy(smoke_config)
    data["regularization"]["nu"] = 0.5
    path = write_config(tmp_path, data)
    assert main(["run", str(path), "--quiet"]) == 2


def test_solver_breakdown_exits_one(smoke_config, tmp_path, capsys):
    data = copy.deepcopy(smoke_config)
    data["grid"]["n"] = 16
    data["physical"]["t_end"] = 0.5
    data["stepping"]["dt"] = 0.05
    data["output"]["cadence"] = 0.5
    data["initial"]["rho"] = {"profile": "constant", "value": 1.0}
    data["initial"]["theta"] = {"profile": "step", "left": 0.6,
                                "right": 1.4, "at": 0.5}
    path = write_config(tmp_path, data)
    assert main(["run", str(path), "--quiet", "--out", str(tmp_path)]) == 1
    assert "dominant" in capsys.readouterr().err


def test_bad_flag_value_raises_system_exit(small_config):
    path, _ = small_config
    with pytest.raises(SystemExit):
        main(["run", str(path), "--advection", "sideways"])


def test_mms_passes_with_central(smoke_config, tmp_path):
    data = copy.deepcopy(smoke_config)
    data["mms"] = {"grid_sizes": [16, 32, 64], "t_end": 0.1,
                   "advection": "central"}
    path = write_config(tmp_path, data)
    out = tmp_path / "mms"
    assert main(["mms", str(path), "--out", str(out), "--quiet"]) == 0
    rows = (out / "mms.csv").read_text().splitlines()
    assert len(rows) == 4
    report = json.loads((out / "report.json").read_text())
    assert report["passed"] is True
    assert report["rho_orders"][-1] > 1.9


def test_mms_flags_too_coarse_upwind_ladder(smoke_config, tmp_path):
    # first-order floor is just missed on a deliberately short ladder
    data = copy.deepcopy(smoke_config)
    data["mms"] = {"grid_sizes": [16, 32, 64], "t_end": 0.1,
                   "steps_coarse": 20}
    path = write_config(tmp_path, data)
    out = tmp_path / "mms"
    assert main(["mms", str(path), "--out", str(out), "--quiet",
                 "--advection", "upwind"]) == 1
    report = json.loads((out / "report.json").read_text())
    assert report["passed"] is False
    assert report["theta_orders"][-1] < 0.9


def test_ladder_command(smoke_config, tmp_path):
    data = copy.deepcopy(smoke_config)
    data["grid"]["n"] = 32
    data["physical"]["t_end"] = 0.05
    data["output"]["cadence"] = 0.05
    data["ladder"] = {"rungs": 3}
    path = write_config(tmp_path, data)
    out = tmp_path / "ladder"
    assert main(["ladder", str(path), "--out", str(out), "--quiet"]) == 0
    rows = (out / "ladder.csv").read_text().splitlines()
    assert len(rows) == 4
    report = json.loads((out / "report.json").read_text())
    assert report["monotone"] is True
    assert report["passed"] is True


def test_sweep_command_isolates_bad_cells(smoke_config, tmp_path):
    data = copy.deepcopy(smoke_config)
    data["grid"]["n"] = 16
    data["physical"]["t_end"] = 0.02
    data["output"]["cadence"] = 0.02
    data["sweep"] = {"axes": {"regularization.eps": [0.01, 2.0]}}
    path = write_config(tmp_path, data)
    out = tmp_path / "sweep"
    assert main(["sweep", str(path), "--out", str(out), "--quiet"]) == 1
    rows = (out / "sweep.csv").read_text().splitlines()
    assert len(rows) == 3
    assert rows[1].endswith("ok,true,")
    assert "ValidationError" in rows[2]

    good = copy.deepcopy(data)
    good["sweep"] = {"axes": {"physical.lambda": [0.5, 1.0]}}
    path2 = write_config(tmp_path, good, "good.json")
    assert main(["sweep", str(path2), "--out", str(out), "--quiet"]) == 0


def test_sweep_requires_axes(small_config, tmp_path):
    path, _ = small_config
    assert main(["sweep", str(path), "--quiet", "--out", str(tmp_path)]) == 2


def test_validate_saturation_exit_codes(smoke_config, tmp_path):
    path = write_config(tmp_path, smoke_config, "power.json")
    out = tmp_path / "val"
    assert main(["validate-saturation", str(path), "--out", str(out),
                 "--quiet"]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["passed"] is True

    data = copy.deepcopy(smoke_config)
    data["saturation"] = {"kind": "exponential", "a": 2.0, "b": 1.0,
                          "eta": 1.0}
    path2 = write_config(tmp_path, data, "exp.json")
    assert main(["validate-saturation", str(path2), "--quiet"]) == 1


def test_console_script_entry_point(small_config, tmp_path):
    path, _ = small_config
    proc = subprocess.run(
        ["poromoist", "run", str(path), "--out", str(tmp_path / "cli"),
         "--quiet"],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "cli" / "report.json").exists()
