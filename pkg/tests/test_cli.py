from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest

from finitegap import cli, synthesis

# max |q| of the genus-2 reference waveform over one period at 512 samples (captured once the NLSE residual passed)
GOLDEN_MAX_Q = 5.201489502945299


@pytest.fixture
def spec_file(tmp_path):
    def make(points, name="s.json"):
        p = tmp_path / name
        p.write_text(json.dumps({"points": [{"re": z.real, "im": z.imag} for z in points]}))
        return str(p)
    return make


@pytest.fixture
def t1_file(spec_file):
    return spec_file([-1 + 3j, 5j, 1 + 3j])


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_params_genus2_reference(t1_file, capsys):
    code, out, _ = run(["params", t1_file], capsys)
    assert code == 0
    data = json.loads(out)
    assert np.round(data["omega"], 4).tolist() == [0.0, 8.4308]


def test_params_genus3_reference_tau_shape(spec_file, capsys):
    f = spec_file([-30 + 5j, -10 + 7j, 10 + 7j, 30 + 5j])
    code, out, _ = run(["params", f], capsys)
    assert code == 0
    tau = json.loads(out)["tau"]
    assert len(tau) == 3 and all(len(r) == 3 for r in tau)


def test_params_empty_spectrum_is_input_error(spec_file, capsys):
    code, _, err = run(["params", spec_file([])], capsys)
    assert code == cli.EXIT_INPUT
    rec = json.loads(err)
    assert rec["error"] == "input" and rec["exit_code"] == 2


def test_missing_and_malformed_files(tmp_path, capsys):
    assert run(["params", str(tmp_path / "nope.json")], capsys)[0] == cli.EXIT_INPUT
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["params", str(bad)], capsys)[0] == cli.EXIT_INPUT
    assert run(["roundtrip", str(bad)], capsys)[0] == cli.EXIT_INPUT


def test_synth_golden_and_deterministic(t1_file, tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["synth", t1_file, "-o", str(a)], capsys)[0] == 0
    assert run(["synth", t1_file, "-o", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    d = np.loadtxt(a, delimiter=",", skiprows=1)
    assert np.max(np.hypot(d[:, 1], d[:, 2])) == pytest.approx(GOLDEN_MAX_Q, rel=1e-12)


def test_synth_two_rows(t1_file, capsys):
    code, out, _ = run(["synth", t1_file, "-n", "2", "--t1", "1"], capsys)
    assert code == 0 and len(out.strip().splitlines()) == 3


def test_synth_needs_period(spec_file, capsys):
    f = spec_file([-30 + 5j, -10 + 7j, 10 + 7j, 30 + 5j])
    assert run(["synth", f], capsys)[0] == cli.EXIT_INPUT


def test_roundtrip_genus2_reference(t1_file, capsys):
    code, out, _ = run(["roundtrip", t1_file, "--max-error", "5e-2"], capsys)
    assert code == 0 and json.loads(out)["max_error"] < 5e-2


def test_roundtrip_genus_zero(spec_file, capsys):
    code, out, _ = run(["roundtrip", spec_file([1.5j]), "-n", "256"], capsys)
    assert code == 0 and json.loads(out)["max_error"] < 1e-3


def test_roundtrip_validation_failure(t1_file, capsys):
    assert run(["roundtrip", t1_file, "-n", "64", "--max-error", "1e-12"], capsys)[0] == cli.EXIT_VALIDATION


def test_numerical_failure_code(t1_file, capsys, monkeypatch):
    monkeypatch.setattr(synthesis, "DENOMINATOR_FLOOR", 1e300)
    code, _, err = run(["synth", t1_file, "-n", "4"], capsys)
    assert code == cli.EXIT_NUMERIC and json.loads(err)["error"] == "numerical"


def test_no_partial_output_on_error(t1_file, tmp_path, capsys, monkeypatch):
    out = tmp_path / "w.csv"
    monkeypatch.setattr(synthesis, "DENOMINATOR_FLOOR", 1e300)
    run(["synth", t1_file, "-o", str(out)], capsys)
    assert not out.exists() and list(tmp_path.glob("*.tmp")) == []


def test_env_override_applied_and_validated(t1_file, capsys, monkeypatch):
    monkeypatch.setenv("FINITEGAP_THETA_TOL", "oops")
    assert run(["params", t1_file], capsys)[0] == cli.EXIT_INPUT
    monkeypatch.setattr(cli.theta, "DEFAULT_TOL", cli.theta.DEFAULT_TOL)
    applied = cli.apply_env_overrides({"FINITEGAP_THETA_TOL": "1e-12"})
    assert applied == {"FINITEGAP_THETA_TOL": 1e-12} and cli.theta.DEFAULT_TOL == 1e-12


def test_help_documents_env_vars(capsys):
    assert cli.main(["params", "--help"]) == 0
    out = capsys.readouterr().out
    for key in cli.TOLERANCE_KNOBS:
        assert key in out


def test_nfam_sim_explicit_symbols(tmp_path, capsys):
    code, out, _ = run(["nfam-sim", "--symbols", "14,a5", "--cache-dir", str(tmp_path)], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["n_symbols"] == 2 and rep["bit_errors"] == 0


def test_nfam_sim_bad_hex(capsys):
    assert run(["nfam-sim", "--symbols", "zz"], capsys)[0] == cli.EXIT_INPUT


def test_genus_demo(capsys):
    code, out, _ = run(["genus-demo", "--g-max", "3", "-n", "512"], capsys)
    data = json.loads(out)
    assert code == 0 and data["maxima_nondecreasing"] and len(data["rows"]) == 3


def test_channel_report_and_propagation(tmp_path, capsys):
    n = 64
    t = 2 * np.pi * np.arange(n) / n
    src = tmp_path / "in.csv"
    src.write_text("t,re,im\n" + "\n".join(f"{float(x)!r},1.5,0.0" for x in t) + "\n")
    dst = tmp_path / "out.csv"
    code, out, _ = run(["channel", "--spans", "20", "--input", str(src), "--distance", "0.1",
                        "--wave-out", str(dst)], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["cyclic_prefix_s"] == pytest.approx(1.621e-9, rel=1e-3)
    assert data["propagation"]["energy_out"] == pytest.approx(data["propagation"]["energy_in"], rel=1e-12)
    q = np.loadtxt(dst, delimiter=",", skiprows=1)
    np.testing.assert_allclose(q[:, 1] + 1j * q[:, 2], 1.5 * np.exp(2j * 2.25 * 0.1), rtol=1e-10)


def test_console_script_entry_point(t1_file):
    res = subprocess.run([sys.executable, "-m", "finitegap.cli", "params", t1_file], capture_output=True, text=True)
    assert res.returncode == 0 and '"genus": 2' in res.stdout
