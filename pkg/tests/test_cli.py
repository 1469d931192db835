from __future__ import annotations

import csv
import json
import math

import numpy as np
import pytest

from abwave.cli import read_config, run
from abwave.spectrum import PolarField, read_polar_field, write_polar_field

SPEC_ROW = ["kernel", "--mode", "sine", "--alpha", "0", "--t", "1", "--r1", "0.3", "--r2", "0.3",
            "--theta1", "0", "--theta2", "0"]


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_kernel_free_coincident_points(tmp_path):
    out = tmp_path / "k.csv"
    assert run(SPEC_ROW + ["--out", str(out)]) == 0
    (row,) = rows(out)
    assert float(row["G_re"]) == pytest.approx(1 / (2 * math.pi), rel=1e-14)
    assert float(row["G_im"]) == 0 and float(row["D_re"]) == 0 and float(row["D_im"]) == 0
    assert row["region"] == "III"


def test_kernel_stdout(capsys):
    assert run(SPEC_ROW) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "t,r1,theta1,r2,theta2,region,G_re,G_im,D_re,D_im"
    assert len(lines) == 2


def test_unknown_flag_is_usage_error(capsys):
    assert run(["kernel", "--bogus"]) == 1
    assert "usage" in capsys.readouterr().err
    assert run([]) == 1
    assert run(["nosuch"]) == 1


def test_missing_point_is_usage_error():
    assert run(["kernel", "--mode", "sine", "--t", "1", "--r1", "0.3"]) == 1


def test_verify_identity(tmp_path, capsys):
    rep = tmp_path / "r.json"
    assert run(["verify", "--suite", "identity", "--report", str(rep)]) == 0
    data = json.loads(rep.read_text())
    assert data["pass"] is True and data["max_residual"] <= 1e-12
    assert data["config"]["suite"] == "identity"
    assert "identity: pass" in capsys.readouterr().out


def test_grid_is_sorted_and_deterministic(tmp_path):
    args = ["kernel", "--mode", "fwt", "--w-re", "0.75", "--alpha", "0.3", "--t", "1.5",
            "--grid", "0.5:1.5:3,0:1:2,0.7:0.7:1,0.2:0.2:1"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(args + ["--out", str(a), "--threads", "3"]) == 0
    assert run(args + ["--out", str(b), "--threads", "1"]) == 0
    assert a.read_bytes() == b.read_bytes()
    got = rows(a)
    assert len(got) == 6
    keys = [tuple(float(r[k]) for k in ("r1", "theta1")) for r in got]
    assert keys == sorted(keys)


def test_boundary_points_are_flagged(tmp_path):
    out = tmp_path / "k.csv"
    assert run(["kernel", "--mode", "sine", "--t", "2", "--r1", "1", "--r2", "1", "--theta1", "0",
                "--theta2", "0", "--out", str(out)]) == 0
    (row,) = rows(out)
    assert row["region"] == "boundary" and math.isnan(float(row["G_re"]))


def test_numbers_round_trip(tmp_path):
    out = tmp_path / "k.csv"
    run(["kernel", "--mode", "sine", "--alpha", "0.3", "--t", "3", "--r1", "1", "--r2", "0.8",
         "--theta1", "1.2", "--theta2", "0.2", "--out", str(out)])
    (row,) = rows(out)
    for k in ("G_re", "D_re", "D_im"):
        assert repr(float(row[k])) == row[k]


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# free kernel\nmode = sine\nalpha=0\nt=1\nr1=0.3\nr2=0.3\ntheta1=0\ntheta2=0\n")
    assert read_config(cfg)["mode"] == "sine"
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["kernel", "--config", str(cfg), "--out", str(a)]) == 0
    assert float(rows(a)[0]["G_re"]) == pytest.approx(1 / (2 * math.pi), rel=1e-14)
    assert run(["kernel", "--config", str(cfg), "--r2", "0.5", "--out", str(b)]) == 0
    assert float(rows(b)[0]["r2"]) == 0.5


def test_config_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("mode=sine\nfrobnicate=3\n")
    assert run(["kernel", "--config", str(cfg)]) == 1
    cfg.write_text("no equals sign\n")
    assert run(["kernel", "--config", str(cfg)]) == 1


def test_threads_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("ABWAVE_THREADS", "2")
    rep = tmp_path / "r.json"
    assert run(SPEC_ROW + ["--out", str(tmp_path / "k.csv"), "--report", str(rep)]) == 0
    assert json.loads(rep.read_text())["config"]["threads"] is None


def test_specfun_table(tmp_path):
    out = tmp_path / "s.csv"
    assert run(["specfun-table", "--order-re", "0.5,1", "--order-im", "0,2", "--s", "0.5:4:8",
                "--out", str(out)]) == 0
    got = rows(out)
    assert len(got) == 32
    first = got[0]
    assert float(first["order_re"]) == 0.5 and float(first["s"]) == 0.5
    s = float(first["s"])
    assert float(first["J_re"]) == pytest.approx(math.sqrt(2 / (math.pi * s)) * math.sin(s), rel=1e-12)
    w1 = [r for r in got if float(r["order_re"]) == 1 and float(r["order_im"]) == 0 and float(r["s"]) == 0.5][0]
    assert float(w1["W_re"]) == pytest.approx(-2 * math.sin(0.5), rel=1e-13)


def test_modesum_csv(tmp_path, capsys):
    out = tmp_path / "m.csv"
    rep = tmp_path / "m.json"
    assert run(["modesum", "--mode", "heat", "--tau", "0.5", "--alpha", "0.3", "--t", "1", "--r1", "1",
                "--r2", "1", "--theta1", "0.3", "--theta2", "0", "--k-max", "8", "--out", str(out),
                "--report", str(rep)]) == 0
    got = rows(out)
    assert got[0].keys() == {"k", "nu_k", "K_re", "K_im", "tail_estimate"}
    assert "." not in got[0]["k"]
    for r in got:
        assert float(r["nu_k"]) == pytest.approx(abs(int(r["k"]) + 0.3), abs=1e-15)
    data = json.loads(rep.read_text())
    assert data["config"]["mode"] == "heat" and "runtime_s" in data
    assert capsys.readouterr().out.startswith("K = ")


def test_modesum_rejects_complex_w():
    assert run(["modesum", "--mode", "fwt", "--w-re", "0.7", "--w-im", "0.2", "--t", "1", "--r1", "1",
                "--r2", "1", "--theta1", "0", "--theta2", "0"]) == 1


def test_propagate_round_trip(tmp_path):
    g = PolarField.on_grid(lambda r, th: np.exp(-r ** 2 / 2) + 0 * th, n_r=64, n_theta=8, r_max=14.0)
    src, dst, rep = tmp_path / "in.csv", tmp_path / "out.csv", tmp_path / "r.json"
    write_polar_field(src, g)
    args = ["propagate", "--kind", "sine", "--t", "1e-3", "--alpha", "0.3", "--input", str(src),
            "--out", str(dst), "--report", str(rep)]
    assert run(args) == 0
    u = read_polar_field(dst)
    assert u.values.shape == g.values.shape
    rel = np.linalg.norm(u.values - 1e-3 * g.values) / np.linalg.norm(1e-3 * g.values)
    assert rel <= 1e-3
    data = json.loads(rep.read_text())
    assert data["config"]["kind"] == "sine" and data["config"]["seed"] == 0
    assert set(data["norms"]) == {"L1", "L2", "L4", "Linf"}
    first = dst.read_bytes()
    assert run(args) == 0
    assert dst.read_bytes() == first


def test_missing_input_is_runtime_error(tmp_path, capsys):
    assert run(["propagate", "--kind", "sine", "--t", "1", "--input", str(tmp_path / "none.csv")]) == 1
    assert "abwave" in capsys.readouterr().err


def test_flux_file(tmp_path):
    ff = tmp_path / "flux.txt"
    th = np.linspace(0, 2 * np.pi, 65)
    np.savetxt(ff, 0.3 + 0.2 * np.cos(th))
    out_a, out_c = tmp_path / "a.csv", tmp_path / "c.csv"
    base = ["kernel", "--mode", "sine", "--t", "3", "--r1", "1", "--r2", "0.8", "--theta1", "0", "--theta2", "0"]
    assert run(base + ["--flux-file", str(ff), "--out", str(out_a)]) == 0
    assert run(base + ["--alpha", "0.3", "--out", str(out_c)]) == 0
    ga, gc = (complex(float(rows(p)[0]["D_re"]), float(rows(p)[0]["D_im"])) for p in (out_a, out_c))
    # theta1 = theta2 = 0: the gauge phase cancels
    assert abs(ga - gc) <= 1e-12
    assert run(base + ["--alpha", "0.3", "--flux-file", str(ff)]) == 1


def test_verify_failure_exit_code(monkeypatch):
    import abwave.verify as v

    monkeypatch.setitem(v.SUITES, "identity", lambda: {"suite": "identity", "cases": [], "measured_constants": {},
                                                        "max_residual": 1.0, "pass": False})
    assert run(["verify", "--suite", "identity"]) == 2


def test_modesum_deterministic_across_threads(tmp_path):
    base = ["modesum", "--mode", "sine", "--alpha", "0.3", "--t", "3", "--r1", "1", "--r2", "0.8",
            "--theta1", "1.2", "--theta2", "0.2", "--k-max", "12", "--k-cap", "12"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(base + ["--threads", "1", "--out", str(a)]) == 0
    assert run(base + ["--threads", "3", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
