import csv
import json

import numpy as np
import pytest

from highfield.cli import main


def write_config(path, **overrides):
    d = {
        "params": {"hbar": 1.0, "m": 1.0, "beta": 1.0, "nu": 2.0, "eps": 0.1},
        "grid": {"n_x": 64, "length": 2.0 * np.pi, "n_v": 64, "v_max": 10.0},
        "potential": {"kind": "cosine", "amplitude": 0.3, "wavenumber": 1.0},
        "initial": {"density": {"baseline": 1.0, "amplitude": 0.2, "mode": 1},
                     "fluctuation": {"amplitude": 0.2, "mode": 1}},
        "time": {"t_final": 0.3, "dt_kinetic": 0.002, "dt_qdd": 0.005,
                  "output_times": [0.3]},
        "sweep": {"eps_list": [0.2, 0.1, 0.05, 0.025], "fit_time": 0.3,
                   "floor_control": False},
    }
    for key, val in overrides.items():
        sect, k = key.split(".")
        d.setdefault(sect, {})[k] = val
    path.write_text(json.dumps(d))
    return path


def read_csv(path):
    meta, rows = [], []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                meta.append(line.strip())
            else:
                rows.append(line)
    parsed = list(csv.reader(rows))
    return meta, parsed[0], parsed[1:]


def test_coeffs_zero_potential(tmp_path):
    cfg = write_config(tmp_path / "c.json", **{"potential.kind": "zero"})
    out = tmp_path / "coeffs.csv"
    assert main(["coeffs", "--config", str(cfg), "--out", str(out)]) == 0
    meta, header, rows = read_csv(out)
    assert header == ["x", "D", "W", "E"]
    d_col = np.array([float(r[1]) for r in rows])
    # D = 1/(nu beta m) = 0.5 for nu=2
    assert np.allclose(d_col, 0.5)
    assert any("periodic_truncation" in m for m in meta)


def test_missing_config_exit_2(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    code = main(["coeffs", "--config", str(missing), "--out", str(tmp_path / "o.csv")])
    assert code == 2
    assert str(missing) in capsys.readouterr().err


def test_invalid_config_exit_2(tmp_path):
    cfg = write_config(tmp_path / "c.json", **{"sweep.eps_list": [0.1, 0.2]})
    assert main(["coeffs", "--config", str(cfg), "--out",
                 str(tmp_path / "o.csv")]) == 2


def test_moments_check(tmp_path):
    cfg = write_config(tmp_path / "c.json")
    out = tmp_path / "m.csv"
    assert main(["moments-check", "--config", str(cfg), "--out", str(out)]) == 0
    meta, header, rows = read_csv(out)
    assert header[:3] == ["x", "m0_num", "m0_exact"]
    assert len(rows) == 64


def test_qdd_run(tmp_path):
    cfg = write_config(tmp_path / "c.json")
    out = tmp_path / "q.csv"
    assert main(["qdd-run", "--config", str(cfg), "--out", str(out)]) == 0
    meta, header, rows = read_csv(out)
    assert header == ["t", "x", "n"]
    assert len(rows) == 64  # one output time


def test_kinetic_run_density_only(tmp_path):
    cfg = write_config(tmp_path / "c.json")
    out = tmp_path / "k.csv"
    assert main(["kinetic-run", "--config", str(cfg), "--out", str(out),
                 "--density-only"]) == 0
    meta, header, rows = read_csv(out)
    assert header == ["t", "x", "n"]
    # mass at the output time matches the datum mass
    n = np.array([float(r[2]) for r in rows])
    assert n.size == 64


def test_selftest_exit_zero(capsys):
    assert main(["selftest", "--seed", "7"]) == 0
    out = capsys.readouterr().out
    assert "dft round trip: ok" in out


def test_converge_sweep_deterministic_csv(tmp_path):
    cfg = write_config(tmp_path / "c.json")
    out1, out2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
    assert main(["converge-sweep", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["converge-sweep", "--config", str(cfg), "--out", str(out2),
                 "--threads", "2"]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    meta, header, rows = read_csv(out1)
    fitted = [m for m in meta if m.startswith("# fitted_order:")]
    assert len(fitted) == 1
    assert 1.5 <= float(fitted[0].split(":")[1]) <= 2.5
    assert header == ["eps", "t", "composite_error", "layer_error", "bulk_error"]
    assert len(rows) == 4


def test_converge_sweep_single_eps_exit_3(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", **{"sweep.eps_list": [0.1]})
    out = tmp_path / "s.csv"
    assert main(["converge-sweep", "--config", str(cfg), "--out", str(out)]) == 3
    assert "numerical failure" in capsys.readouterr().err
