import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from entanglab.cli import FIELDS, ConfigError, load_config, main, parse_config, read_rows, run, sweep_points
from entanglab.correlators import write_spectrum_table

CONFIGS = Path(__file__).resolve().parent.parent / "demos" / "configs"

PAIR = """
model_id = "pair"
flavor = "mode"

[model]
preset = "pairing_toy"
params = { pairs = [[0.0, 1.0]] }

[[probes]]
energy = 0.0
mode = 0

[[probes]]
energy = 0.0
mode = 1
"""


def _write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_pairing_point_row(tmp_path, capsys):
    cfg = _write(tmp_path, PAIR)
    assert main(["alpha", "--config", cfg]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == ",".join(FIELDS)
    row = dict(zip(FIELDS, lines[1].split(",")))
    assert abs(float(row["alpha"]) - 1) < 1e-12
    assert abs(float(row["E1"]) - math.log(2)) < 1e-12
    assert row["status"] == "ok"


def test_free_chain_sweep_all_zero(tmp_path):
    out = tmp_path / "free.csv"
    assert main(["sweep", "--config", str(CONFIGS / "free_sweep.toml"), "--output", str(out)]) == 0
    rows = read_rows(out)
    assert len(rows) == 4
    for r in rows:
        assert abs(r.alpha) < 1e-12 and r.E1 == 0.0 and r.status == "ok"


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_round_trip(tmp_path, fmt):
    cfg = load_config(CONFIGS / "free_sweep.toml")
    rows = run(cfg)
    out = tmp_path / f"rows.{fmt}"
    assert main(["sweep", "--config", str(CONFIGS / "free_sweep.toml"), "--output", str(out), "--format", fmt]) == 0
    back = read_rows(out)
    for a, b in zip(rows, back):
        for f in FIELDS:
            assert getattr(a, f) == getattr(b, f)


def test_idempotent_output_and_thread_order(tmp_path):
    cfg = str(CONFIGS / "free_sweep.toml")
    a, b, c = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
    assert main(["sweep", "--config", cfg, "--output", str(a)]) == 0
    assert main(["sweep", "--config", cfg, "--output", str(b)]) == 0
    assert main(["sweep", "--config", cfg, "--output", str(c), "--threads", "4"]) == 0
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()
    assert not list(tmp_path.glob(".*.tmp"))


def test_sweep_points_linspace():
    cfg = load_config(CONFIGS / "proximity_sweep.toml")
    pts = sweep_points(cfg)
    assert len(pts) == 40
    assert pts[0].probes[1].energy == pytest.approx(0.05)
    assert pts[-1].probes[1].energy == pytest.approx(2.0)


def test_unknown_key_is_config_error(tmp_path, capsys):
    cfg = _write(tmp_path, PAIR + '\ncolour = "red"\n')
    assert main(["alpha", "--config", cfg]) == 1
    with pytest.raises(ConfigError):
        parse_config({"model_id": "x", "flavor": "mode", "modle": {}})


def test_bad_sweep_path_and_steps(tmp_path):
    bad_path = PAIR + '\n[sweep]\nparameter = "probes.1.nope"\nfrom = 0\nto = 1\nsteps = 3\n'
    assert main(["sweep", "--config", _write(tmp_path, bad_path)]) == 1
    bad_steps = PAIR + '\n[sweep]\nparameter = "probes.1.energy"\nfrom = 0\nto = 1\nsteps = 1\n'
    assert main(["sweep", "--config", _write(tmp_path, bad_steps, "b.toml")]) == 1


def test_malformed_toml_and_missing_config(tmp_path):
    assert main(["alpha", "--config", _write(tmp_path, "model_id = ")]) == 1
    assert main(["alpha"]) == 1


def test_numerical_failure_exit_code(tmp_path, capsys):
    degenerate = PAIR.replace("[[0.0, 1.0]]", "[[0.0, 0.0]]")
    assert main(["alpha", "--config", _write(tmp_path, degenerate)]) == 2
    out = capsys.readouterr()
    assert "error" in out.out.splitlines()[1]


def test_negative_alpha_row_has_no_e1(tmp_path, capsys):
    text = """
model_id = "chain"
flavor = "mode"

[model]
preset = "interacting_chain"
params = { M = 6, t = 1.0, V = 0.8, N0 = 3 }

[[probes]]
energy = 0.0
character = "particle"
mode = 1

[[probes]]
energy = 0.0
character = "particle"
mode = 4
"""
    row = run(load_config(_write(tmp_path, text)))[0]
    assert row.alpha < 0
    assert row.E1 is None and row.status == "negative_alpha"
    row = run(load_config(_write(tmp_path, text.replace('"particle"\nmode = 4', '"hole"\nmode = 4'), "h.toml")))[0]
    assert row.alpha > 0 and row.E1 is not None and row.status == "ok"


def test_solve_command(tmp_path, capsys):
    cfg = _write(tmp_path, PAIR)
    assert main(["solve", "--config", cfg, "--k", "4", "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["levels"][0]["energy"] == pytest.approx(-1.0, abs=1e-12)
    assert data["dimension"] == 4


def test_entangle_command(tmp_path, capsys):
    assert main(["entangle", "--alpha", "1.0"]) == 0
    assert json.loads(capsys.readouterr().out)["E1"] == pytest.approx(math.log(2), abs=1e-12)
    assert main(["entangle", "--qd", "10,0.01,0.01,-0.5,0.5"]) == 0
    assert json.loads(capsys.readouterr().out)["E1"] == pytest.approx(7.9078e-3, abs=1e-6)
    assert main(["entangle", "--alpha", "-0.5"]) == 0
    assert json.loads(capsys.readouterr().out)["status"] == "negative_alpha"
    assert main(["entangle", "--config", _write(tmp_path, PAIR)]) == 0
    assert json.loads(capsys.readouterr().out)["weights"] == pytest.approx([0.5, 0.5], abs=1e-12)
    assert main(["entangle"]) == 1


@pytest.mark.parametrize("kind", ["flat", "zero", "lorentzian"])
def test_kernel_command(tmp_path, capsys, kind):
    gamma = 0.5
    w = np.linspace(-1000 * gamma, 1000 * gamma, 200001)
    lam = gamma / 2
    s = {"flat": np.ones_like(w), "zero": np.zeros_like(w), "lorentzian": 2 * lam / (w**2 + lam**2)}[kind]
    path = tmp_path / f"{kind}.txt"
    write_spectrum_table(path, w, s)
    assert main(["kernel", str(path), "--gamma", str(gamma), "--means", "1", "1"]) == 0
    report = json.loads(capsys.readouterr().out)
    if kind == "lorentzian":
        from entanglab.verify import lorentzian_kernel_oracle

        assert report["alpha"] == pytest.approx(lorentzian_kernel_oracle(gamma, 1 / gamma, lam, 1.0, (1, 1)), rel=1e-6)
    else:
        assert abs(report["alpha"]) < 1e-8


def test_kernel_command_bad_file(tmp_path):
    assert main(["kernel", str(tmp_path / "missing.txt"), "--gamma", "0.5", "--means", "1", "1"]) == 1


def test_verify_subset_passes(capsys):
    assert main(["verify", "--only", "algebra", "qd", "cone"]) == 0
    assert "checks passed" in capsys.readouterr().out


def test_verify_sign_mutation_fails(capsys):
    assert main(["verify", "--mutate", "sign", "--only", "algebra", "table1"]) == 2
    assert "[FAIL]" in capsys.readouterr().out


def test_verify_tightened_tolerance_is_reported(capsys):
    assert main(["verify", "--only", "kernel", "--tolerance", "kernel=1e-30"]) == 2
    out = capsys.readouterr().out
    assert "[FAIL] kernel" in out and "Traceback" not in out
    assert main(["verify", "--tolerance", "bogus=1"]) == 1


def test_proximity_peak_via_cli(tmp_path):
    out = tmp_path / "prox.csv"
    assert main(["sweep", "--config", str(CONFIGS / "proximity_sweep.toml"), "--output", str(out)]) == 0
    rows = read_rows(out)
    eps1 = np.array([r.eps1 for r in rows])
    alpha = np.array([abs(r.alpha) for r in rows])
    assert eps1[np.argmax(alpha)] == pytest.approx(eps1[np.argmin(abs(eps1 - 0.943))])


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "entanglab", "entangle", "--alpha", "3"],
                       capture_output=True, text=True, check=True)
    assert json.loads(r.stdout)["E1"] == pytest.approx(0.5623351446188083, abs=1e-12)
