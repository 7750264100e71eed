"""Command-line behavior: output schemas, determinism, exit codes."""

import json

import numpy as np
import pytest

from qswitch.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main

FIG4_HEADER = "t_ns,n_A,n_B,n_C,Jz_alpha,Jz_beta,trace,min_eig"


def fig4_doc(t_final=5.0, sample=1.0, dt=0.02):
    return {
        "resonators": [
            {"label": "A", "omega_ghz": 5.18, "fock_dim": 5, "kappa_ghz": 0.005,
             "role": "storage"},
            {"label": "B", "omega_ghz": 5.20, "fock_dim": 3, "kappa_ghz": 0.200,
             "role": "bus"},
            {"label": "C", "omega_ghz": 5.18, "fock_dim": 5, "kappa_ghz": 0.005,
             "role": "storage"},
        ],
        "switches": [
            {"label": "alpha", "endpoints": ["A", "B"], "n_qubits": 2,
             "omega_q_ghz": 5.00, "g_ghz": {"A": 0.018, "B": 0.020},
             "gamma_ghz": 0.020, "gamma_phi_ghz": 0.020,
             "state": {"pattern": ["gg"]}},
            {"label": "beta", "endpoints": ["B", "C"], "n_qubits": 2,
             "omega_q_ghz": 5.00, "g_ghz": {"B": 0.020, "C": 0.018},
             "gamma_ghz": 0.020, "gamma_phi_ghz": 0.020,
             "state": {"pattern": ["gg"]}},
        ],
        "initial": {"A": 2},
        "integrator": {"dt_ns": dt, "t_final_ns": t_final,
                       "sample_every_ns": sample},
    }


@pytest.fixture
def short_config(tmp_path):
    path = tmp_path / "short.json"
    path.write_text(json.dumps(fig4_doc()))
    return str(path)


def write_doc(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    rows = np.array([[float(x) for x in line.split(",")] for line in lines[1:]])
    return header, rows


def column(path, name):
    header, rows = read_csv(path)
    return rows[:, header.index(name)]


# ---------------------------------------------------------------------------
# validate

def test_validate_preset(capsys):
    assert main(["validate", "fig4_chain"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "config ok: 3 resonators, 2 switches" in out
    assert "|Delta/g| at A = 10" in out
    assert "|Delta_sb/g_ab| = 10.5263" in out
    assert "truncation headroom" in out
    assert "source: preset:fig4_chain" in out


def test_validate_flags_resonant_switch(tmp_path, capsys):
    doc = fig4_doc()
    doc["switches"][0]["omega_q_ghz"] = 5.18
    assert main(["validate", write_doc(tmp_path, doc)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "dispersive model invalid at resonance" in out


def test_validate_missing_config(capsys):
    assert main(["validate", "no_such_preset"]) == EXIT_CONFIG
    assert "no such config file or preset" in capsys.readouterr().err


def test_validate_malformed_json(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{nope")
    assert main(["validate", str(path)]) == EXIT_CONFIG
    assert "not valid JSON" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# simulate

def test_simulate_csv_schema_and_determinism(short_config, tmp_path):
    first = tmp_path / "run1.csv"
    second = tmp_path / "run2.csv"
    assert main(["simulate", short_config, "--out", str(first)]) == EXIT_OK
    assert main(["simulate", short_config, "--out", str(second)]) == EXIT_OK
    header, rows = read_csv(first)
    assert ",".join(header) == FIG4_HEADER
    assert rows.shape == (6, 8)
    np.testing.assert_allclose(rows[:, 0], np.arange(6.0))
    assert first.read_bytes() == second.read_bytes()

    manifest = json.loads((tmp_path / "run1.manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert manifest["preset"] is None
    assert manifest["columns"] == FIG4_HEADER.split(",")
    assert len(manifest["config_sha256"]) == 64
    assert manifest["integrator"]["dt_ns"] == 0.02
    other = json.loads((tmp_path / "run2.manifest.json").read_text())
    assert other["config_sha256"] == manifest["config_sha256"]


def test_simulate_zero_duration(tmp_path):
    doc = fig4_doc(t_final=0.0)
    del doc["integrator"]["sample_every_ns"]
    out = tmp_path / "zero.csv"
    assert main(["simulate", write_doc(tmp_path, doc), "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines == [FIG4_HEADER, "0,2,0,0,-2,-2,1,0"]


def test_simulate_switch_override_blocks_transfer(short_config, tmp_path):
    out = tmp_path / "off.csv"
    code = main(["simulate", short_config, "--switch", "alpha=off", "--out", str(out)])
    assert code == EXIT_OK
    assert np.all(column(out, "Jz_alpha") == 0.0)
    assert column(out, "n_C").max() < 1e-12
    manifest = json.loads((tmp_path / "off.manifest.json").read_text())
    assert manifest["switch_overrides"] == {"alpha": "off"}


def test_simulate_unknown_switch(short_config, tmp_path, capsys):
    out = tmp_path / "x.csv"
    code = main(["simulate", short_config, "--switch", "nope=off", "--out", str(out)])
    assert code == EXIT_CONFIG
    assert "no switch labeled 'nope'" in capsys.readouterr().err


def test_simulate_bad_state_token(short_config, tmp_path, capsys):
    out = tmp_path / "x.csv"
    code = main(["simulate", short_config, "--switch", "alpha=banana", "--out", str(out)])
    assert code == EXIT_CONFIG
    assert "on, off, or an integer" in capsys.readouterr().err


def test_simulate_coarse_step_is_a_numerical_failure(tmp_path, capsys):
    doc = fig4_doc(t_final=4.0, sample=4.0, dt=4.0)
    out = tmp_path / "coarse.csv"
    code = main(["simulate", write_doc(tmp_path, doc), "--out", str(out)])
    assert code == EXIT_NUMERICAL
    assert "numerical failure" in capsys.readouterr().err
    assert not out.exists()


# ---------------------------------------------------------------------------
# protocol

def test_protocol_report(tmp_path, capsys):
    out = tmp_path / "protocol.json"
    code = main(["protocol", "fig4_chain", "--j", "1", "--jprime", "1",
                 "--out", str(out)])
    assert code == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["switch"] == "alpha"
    assert doc["j_final"] == 0
    assert doc["t2_ns"] == pytest.approx(32.89473684210526, rel=1e-12)
    assert [s["kind"] for s in doc["steps"]] == [
        "qubit_flip", "free_evolution", "phase_rotation",
    ]
    assert doc["final_fidelity"] == pytest.approx(1.0, abs=1e-9)
    assert doc["jz_timeline"][0] == pytest.approx(-2.0, abs=1e-12)
    assert doc["jz_timeline"][-1] == pytest.approx(0.0, abs=1e-9)
    assert doc["coupling_mhz"]["before"] == pytest.approx(3.8, rel=1e-9)
    assert abs(doc["coupling_mhz"]["after"]) < 1e-9
    assert "final fidelity 1.000000" in capsys.readouterr().out


def test_protocol_range_check(tmp_path, capsys):
    out = tmp_path / "x.json"
    code = main(["protocol", "fig4_chain", "--j", "1", "--jprime", "2",
                 "--out", str(out)])
    assert code == EXIT_CONFIG
    assert "0 <= jprime <= j" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# couplings

def test_couplings_text(capsys):
    assert main(["couplings", "fig4_chain"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert "A-B  +3.800000 MHz" in lines
    assert "B-C  +3.800000 MHz" in lines
    assert "A-C  -0.722000 MHz  (0.3800 of bare A-B)" in lines


def test_couplings_json(capsys):
    assert main(["couplings", "fig4_chain", "--json"]) == EXIT_OK
    rows = json.loads(capsys.readouterr().out)
    by_pair = {tuple(r["pair"]): r for r in rows}
    assert by_pair[("A", "C")]["g_mhz"] == pytest.approx(-0.722, rel=1e-9)
    assert by_pair[("A", "C")]["ratio_to_bare"] == pytest.approx(0.38, rel=1e-9)
    assert "ratio_to_bare" not in by_pair[("A", "B")]


# ---------------------------------------------------------------------------
# sweep

def test_sweep_writes_points_and_summary(short_config, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("QSWITCH_THREADS", "2")
    out_dir = tmp_path / "sweep"
    code = main(["sweep", short_config,
                 "--param", "resonators.B.omega_ghz=5.20,5.21",
                 "--out", str(out_dir)])
    assert code == EXIT_OK
    names = sorted(p.name for p in out_dir.iterdir())
    assert "point00_omega_ghz_5.2.csv" in names
    assert "point01_omega_ghz_5.21.csv" in names
    assert "summary.csv" in names
    assert "point00_omega_ghz_5.2.manifest.json" in names
    summary = (out_dir / "summary.csv").read_text().splitlines()
    assert summary[0] == "resonators.B.omega_ghz,csv,swap_rate_ghz,decay_rate_per_ns"
    assert len(summary) == 3
    assert summary[1].startswith("5.2,point00_")
    manifest = json.loads((out_dir / "point01_omega_ghz_5.21.manifest.json").read_text())
    assert manifest["value"] == 5.21


def test_sweep_wildcard_rescales_switch_states(short_config, tmp_path):
    out_dir = tmp_path / "sweep"
    code = main(["sweep", short_config,
                 "--param", "switches.*.n_qubits=4",
                 "--out", str(out_dir)])
    assert code == EXIT_OK
    jz = column(out_dir / "point00_n_qubits_4.csv", "Jz_alpha")
    assert jz[0] == pytest.approx(-4.0, abs=1e-12)


@pytest.mark.parametrize(
    "param,fragment",
    [
        ("resonators.B.omega_ghz=", "empty sweep range"),
        ("resonators.B.omega_ghz=a,b", "non-numeric"),
        ("resonators.B.label=1,2", "not a numeric field"),
        ("nowhere.B.omega_ghz=1", "unknown config section"),
        ("resonators.Z.omega_ghz=5.2", "no resonator labeled"),
        ("switches.alpha.n_qubits=3.5", "integer values"),
        ("resonators.B.omega_ghz", "expected PATH=V1,V2"),
    ],
)
def test_sweep_rejects_bad_params(short_config, tmp_path, capsys, param, fragment):
    code = main(["sweep", short_config, "--param", param,
                 "--out", str(tmp_path / "sweep")])
    assert code == EXIT_CONFIG
    assert fragment in capsys.readouterr().err


def test_sweep_thread_cap_validation(short_config, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("QSWITCH_THREADS", "0")
    code = main(["sweep", short_config,
                 "--param", "integrator.dt_ns=0.02",
                 "--out", str(tmp_path / "sweep")])
    assert code == EXIT_CONFIG
    assert "QSWITCH_THREADS" in capsys.readouterr().err
