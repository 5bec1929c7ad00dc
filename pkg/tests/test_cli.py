import json
import subprocess
import sys
from pathlib import Path

import pytest

from hons.cli import main
from hons.config import load_config
from hons.invariants import CSV_HEADER

ROOT = Path(__file__).resolve().parents[1]
DEFAULT = ROOT / "configs" / "default.cfg"

SMALL = """
q = 1.0
beta = 1.0
mu = 0.5
alpha = 1.0
n_modes = 32
T = 0.1
dt = 1e-3
save_every = 20
"""


def write_cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_default_config_parses():
    cfg = load_config(DEFAULT)
    assert cfg.n_modes == 64


def test_verify_default_exits_zero(tmp_path):
    out = tmp_path / "v"
    assert main(["verify", "--config", str(DEFAULT), "--out", str(out)]) == 0
    lines = (out / "verify.csv").read_text().splitlines()
    assert lines[0] == "check,value,tolerance,passed"
    assert all(l.endswith(("True", "skipped")) for l in lines[1:])
    assert not (out / "error.json").exists()


def test_simulate_deterministic(tmp_path):
    cfg = write_cfg(tmp_path, SMALL)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", cfg, "--seed", "3", "--out", str(a)]) == 0
    assert main(["simulate", "--config", cfg, "--seed", "3", "--out", str(b)]) == 0
    names = sorted(p.name for p in a.iterdir() if p.name != "run.cfg")
    assert "diagnostics.csv" in names and "snapshot_00005.hnls" in names
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()
    rows = (a / "diagnostics.csv").read_text().splitlines()
    assert rows[0] == CSV_HEADER and len(rows) == 1 + 6
    c = tmp_path / "c"
    assert main(["simulate", "--config", cfg, "--seed", "4", "--out", str(c)]) == 0
    assert (c / "diagnostics.csv").read_bytes() != (a / "diagnostics.csv").read_bytes()


def test_simulate_blowup(tmp_path):
    cfg = write_cfg(tmp_path, SMALL.replace("T = 0.1", "T = 1.0").replace("dt = 1e-3", "dt = 0.01")
                    + "init_amplitude = 200.0\ninit_decay = 0.0\ninit_kmax = 15\n")
    out = tmp_path / "blow"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 3
    rec = json.loads((out / "error.json").read_text())
    assert rec["exit_code"] == 3 and rec["error"] == "BlowUpError"
    assert (out / "diagnostics.csv").exists() and (out / "snapshot_00000.hnls").exists()


def test_picard_success_and_failure(tmp_path):
    cfg = write_cfg(tmp_path, SMALL + "init_amplitude = 0.05\n")
    out = tmp_path / "p"
    assert main(["picard", "--config", cfg, "--out", str(out)]) == 0
    rows = (out / "picard.csv").read_text().splitlines()
    assert rows[0] == "iteration,distance,contraction_ratio"
    cfg = write_cfg(tmp_path, SMALL + "picard_max_iter = 2\n", "p2.cfg")
    out = tmp_path / "p2"
    assert main(["picard", "--config", cfg, "--out", str(out)]) == 2
    assert json.loads((out / "error.json").read_text())["error"] == "CheckFailed"


def test_config_error(tmp_path):
    cfg = write_cfg(tmp_path, "q = 1\nbogus = 3\n")
    out = tmp_path / "e"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 2
    rec = json.loads((out / "error.json").read_text())
    assert rec["line"] == 2 and "bogus" in rec["message"]


def test_norms(tmp_path):
    cfg = write_cfg(tmp_path, SMALL.replace("save_every = 20", "save_every = 5"))
    out = tmp_path / "n"
    assert main(["norms", "--config", cfg, "--out", str(out)]) == 0
    rows = (out / "norms.csv").read_text().splitlines()
    assert rows[0] == "component,s,x_s_half,z_s,y_s" and len(rows) == 3


def test_estimate(tmp_path, monkeypatch):
    cfg = write_cfg(tmp_path, SMALL + "sigma_beta = 1.5\nensemble_size = 3\n")
    out = tmp_path / "est"
    monkeypatch.setenv("HONS_THREADS", "2")
    assert main(["estimate", "--config", cfg, "--out", str(out)]) == 0
    lin = (out / "estimate_linear.csv").read_text().splitlines()
    tri = (out / "estimate_trilinear.csv").read_text().splitlines()
    assert lin[0] == "N,member_id,lhs,rhs,ratio" and len(lin) == 1 + 3 * 3
    assert tri[0].startswith("N,member_id,lhs,rhs,ratio") and len(tri) == 1 + 2 * 3
    monkeypatch.setenv("HONS_THREADS", "zero")
    assert main(["estimate", "--config", cfg, "--out", str(tmp_path / "bad")]) == 2


def test_module_entry_point(tmp_path):
    cfg = write_cfg(tmp_path, SMALL)
    res = subprocess.run([sys.executable, "-m", "hons.cli", "simulate", "--config", cfg, "--out", str(tmp_path / "s")],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    res = subprocess.run([sys.executable, "-m", "hons.cli", "fly"], capture_output=True, text=True)
    assert res.returncode == 2
