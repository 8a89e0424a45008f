import hashlib
import json
import subprocess
import sys

import pytest

from qsha import qsim
from qsha.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_hash_classical(capsys):
    code, out, _ = run(capsys, "hash", "--message", "DMU", "--backend", "classical")
    assert code == 0
    assert out.splitlines()[0] == hashlib.sha256(b"DMU").hexdigest()


def test_hash_ideal(capsys):
    code, out, _ = run(capsys, "hash", "--message", "A", "--backend", "quantum-ideal",
                       "--window", "8")
    assert out.startswith("559aead08264d5795d3909718cdd05abd49572e84fe55590eef31a88a08fdffd\n")


def test_hash_noisy_reports_agreement(capsys):
    code, out, _ = run(capsys, "hash", "--message", "A", "--backend", "quantum-noisy",
                       "--p", "0.05", "--shots", "1022", "--seed", "7")
    lines = out.splitlines()
    assert lines[0] == hashlib.sha256(b"A").hexdigest()
    assert "seed=7" in lines[1]
    assert lines[2].startswith("agreement_rate ")


def test_hash_inputs(capsys, tmp_path):
    f = tmp_path / "m.bin"
    f.write_bytes(b"\x00\xffabc")
    _, by_file, _ = run(capsys, "hash", "--file", str(f))
    _, by_hex, _ = run(capsys, "hash", "--hex", "00ff616263")
    assert by_file == by_hex
    assert by_file.split()[0] == hashlib.sha256(b"\x00\xffabc").hexdigest()
    code, _, _ = run(capsys, "hash", "--message", "a", "--hex", "00")
    assert code == 2


def test_hash_json_and_env_seed(capsys, monkeypatch):
    monkeypatch.setenv("QSHA_SEED", "13")
    code, out, _ = run(capsys, "--format", "json", "hash", "--message", "A",
                       "--backend", "quantum-noisy", "--shots", "31", "--p", "0.1")
    rec = json.loads(out)
    assert rec["seed"] == 13 and rec["shots"] == 31 and rec["window_bits"] == 8
    assert rec["matches_reference"] is (rec["digest"] == hashlib.sha256(b"A").hexdigest())


def test_hash_xor_feed_forward_is_not_sha256(capsys):
    _, out, _ = run(capsys, "hash", "--message", "A", "--feed-forward", "xor")
    assert out.split()[0] != hashlib.sha256(b"A").hexdigest()


def test_trace_out_and_audit(capsys, tmp_path):
    path = tmp_path / "t.jsonl"
    code, out, _ = run(capsys, "hash", "--message", "DMU", "--backend", "quantum-noisy",
                       "--p", "0.2", "--shots", "15", "--trace-out", str(path), "--audit")
    assert code == 0 and "trace windows=2560" in out
    recs = [json.loads(line) for line in path.read_text().splitlines()]
    assert recs[0]["type"] == "trace" and recs[-1]["type"] == "summary"
    assert all({"a", "b", "decoded", "agreed", "shots"} <= set(r) for r in recs[1:-1])
    code, out, _ = run(capsys, "--format", "json", "audit", str(path))
    rec = json.loads(out)
    assert rec["windows"] == 2560
    assert len(rec["disagreements"]) == rec["disagreed"]


def test_circuit_export_round_trip(capsys, tmp_path):
    path = tmp_path / "x.circ"
    code, out, _ = run(capsys, "circuit", "xor", "01101010", "01110100", "--out", str(path))
    assert code == 0 and "decoded 00011110" in out
    circ = qsim.loads(path.read_text())
    assert circ.num_qubits == 24
    _, ran, _ = run(capsys, "--format", "json", "circuit", "run", str(path))
    assert json.loads(ran)["histogram"] == {"00011110": 1022}


def test_circuit_zero_operands(capsys):
    _, out, _ = run(capsys, "--format", "json", "circuit", "xor", "0", "0")
    rec = json.loads(out)
    assert rec["x_gates"] == 0 and rec["cnot_gates"] == 2


def test_circuit_dense_capacity(capsys):
    code, _, err = run(capsys, "circuit", "xor", "0" * 9, "1" * 9, "--dense")
    assert code == 4 and "cap" in err


def test_circuit_bad_operands(capsys):
    code, _, _ = run(capsys, "circuit", "xor", "01", "011")
    assert code == 3


def test_malformed_circuit_file(capsys, tmp_path):
    p = tmp_path / "bad.circ"
    p.write_text("qubits 2\nh 0\n")
    code, _, err = run(capsys, "circuit", "run", str(p))
    assert code == 8 and "line 2" in err


def test_qhash_delta(capsys):
    _, out, _ = run(capsys, "--format", "json", "qhash", "delta", "--n", "2", "--keys", "1")
    rec = json.loads(out)
    assert rec["delta"] == pytest.approx(1.0) and rec["difference"] == 2


def test_qhash_generated_and_errors(capsys):
    _, out, _ = run(capsys, "--format", "json", "qhash", "delta", "--n", "4", "--d", "4",
                    "--seed", "42")
    assert json.loads(out)["keys"] == [7, 1, 9, 10]
    assert run(capsys, "qhash", "delta", "--n", "2", "--d", "5")[0] == 6
    assert run(capsys, "qhash", "delta", "--n", "15", "--keys", "1")[0] == 4
    assert run(capsys, "qhash", "delta", "--n", "2", "--keys", "9")[0] == 3


def test_qhash_state_and_fidelity(capsys):
    _, out, _ = run(capsys, "--format", "json", "qhash", "fidelity", "--n", "3", "--keys", "1,3",
                    "--m1", "5", "--m2", "5")
    assert json.loads(out)["fidelity"] == pytest.approx(1.0)
    _, out, _ = run(capsys, "--format", "json", "qhash", "state", "--n", "3", "--keys", "1,3",
                    "--m", "2")
    assert json.loads(out)["norm"] == pytest.approx(1.0)


def test_anneal_xor_exhaustive(capsys):
    _, out, _ = run(capsys, "--format", "json", "anneal", "xor", "--width", "1", "--exhaustive")
    rec = json.loads(out)
    assert rec["ground_energy"] == 0 and len(rec["ground_states"]) == 4


def test_anneal_export_and_solve(capsys, tmp_path):
    p = tmp_path / "q.txt"
    run(capsys, "anneal", "xor", "--width", "2", "--export", str(p), "--seed", "3")
    _, out, _ = run(capsys, "--format", "json", "anneal", "solve", str(p), "--seed", "3")
    rec = json.loads(out)
    assert rec["energy"] == 0 and rec["seed"] == 3 and rec["sweeps"] == 2000


def test_energy(capsys):
    _, out, _ = run(capsys, "--format", "json", "energy", "--classical-source", "80")
    figs = {f["name"]: f for f in json.loads(out)["figures"]}
    assert figs["consumption_ratio"]["value"] == 3.2e9
    assert figs["per_miner_energy"]["value"] == 80
    assert all(f["source"] for f in figs.values())


def test_energy_config_and_assumption(capsys, tmp_path):
    cfg = tmp_path / "p.json"
    cfg.write_text(json.dumps({"quantum_kwh_per_year": {"value": 50, "source": "lab meter"}}))
    _, out, _ = run(capsys, "--format", "json", "energy-report", "--config", str(cfg))
    figs = {f["name"]: f for f in json.loads(out)["figures"]}
    assert figs["consumption_ratio"]["value"] == 1.6e9
    assert run(capsys, "energy", "--attempts", "5")[0] == 7
    code, out, _ = run(capsys, "energy", "--attempts", "5", "--per-hash-joules", "2")
    assert code == 0 and "classical_mining_energy" in out
    cfg.write_text("{")
    assert run(capsys, "energy", "--config", str(cfg))[0] == 8


def test_mine(capsys):
    _, out, _ = run(capsys, "--format", "json", "mine", "--header", "DMU", "--difficulty", "8",
                    "--reference")
    rec = json.loads(out)
    assert rec["nonce"] == 532 and rec["found"]
    _, out, _ = run(capsys, "--format", "json", "mine", "--header", "DMU", "--difficulty", "20",
                    "--max-nonce", "3", "--reference")
    assert json.loads(out)["found"] is False


def test_usage_error_code(capsys):
    assert run(capsys, "hash")[0] == 2
    assert run(capsys, "nonsense")[0] == 2


def test_console_script_is_reproducible(tmp_path):
    argv = [sys.executable, "-m", "qsha.cli", "--format", "json", "hash", "--message", "DMV",
            "--backend", "quantum-noisy", "--shots", "15", "--p", "0.2", "--seed", "4"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and a
