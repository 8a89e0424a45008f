import hashlib
import io
import random

import pytest

from qsha import hybrid, qsim
from qsha import sha256_core as core
from qsha.errors import ContractViolation, FormatError
from qsha.hybrid import XorBackend


def xor_chain_oracle(message: bytes) -> str:
    state = core.initial_state()
    for block in core.pad_message(message):
        state = core.compress_xor(state, block)
    return state.hex()


@pytest.mark.parametrize("window", [1, 3, 5, 8, 13, 16])
def test_ideal_matches_hashlib_for_every_window(window):
    rng = random.Random(window)
    for _ in range(5):
        msg = rng.randbytes(rng.randrange(0, 150))
        digest, trace = hybrid.hybrid_sha256(msg, XorBackend.ideal(window_bits=window))
        assert digest.hex == hashlib.sha256(msg).hexdigest()
        blocks = len(core.pad_message(msg))
        assert len(trace) == blocks * hybrid.XORS_PER_BLOCK * hybrid.windows_per_word(window)
        assert trace.agreement_rate == 1.0


def test_classical_trace_is_shotless():
    digest, trace = hybrid.hybrid_sha256(b"DMV")
    assert digest == core.sha256(b"DMV")
    assert trace.backend["backend"] == hybrid.CLASSICAL
    assert trace.modal_count.max() == 0


def test_remainder_window_is_low_end():
    # 32 = 3*10 + 2: three full windows then a 2-bit window
    _, trace = hybrid.hybrid_sha256(b"", XorBackend.ideal(window_bits=10))
    assert list(trace.width[:4]) == [10, 10, 10, 2]


def test_xor_feed_forward_mode():
    for msg in (b"", b"DMU", bytes(100)):
        digest, trace = hybrid.hybrid_sha256(msg, XorBackend.ideal(), feed_forward="xor")
        assert digest.hex == xor_chain_oracle(msg)
        blocks = len(core.pad_message(msg))
        assert len(trace) == blocks * (hybrid.XORS_PER_BLOCK + 8) * 4


def test_noisy_records_replay_individually():
    be = XorBackend.noisy(0.15, shots=40, seed=5)
    digest, trace = hybrid.hybrid_sha256(b"A", be)
    rng = random.Random(0)
    for i in rng.sample(range(len(trace)), 40):
        r = trace.record(i)
        assert hybrid.quantum_xor(r.a, r.b, be, stream=i) == r.decoded
    assert 0.0 < trace.agreement_rate < 1.0


def test_kernel_route_equals_circuit_route():
    be = XorBackend.noisy(0.2, shots=16, seed=3)
    d1, t1 = hybrid.hybrid_sha256(b"DMU", be)
    d2, t2 = hybrid.hybrid_sha256(b"DMU", be, route="circuit")
    assert d1 == d2
    for name, arr in t1.arrays().items():
        assert (arr == t2.arrays()[name]).all(), name


def test_dense_method_ideal():
    digest, _ = hybrid.hybrid_sha256(b"A", XorBackend.ideal(window_bits=4, method="dense"))
    assert digest == core.sha256(b"A")


def test_noisy_p05_default_shots_recovers_digest():
    digest, trace = hybrid.hybrid_sha256(b"A", XorBackend.noisy(0.05, seed=7))
    assert digest == core.sha256(b"A")
    assert trace.agreement_rate == 1.0


def test_xor_circuit_shape():
    c = hybrid.xor_circuit("01101010", "01110100")
    assert c.num_qubits == 24
    assert c.count(qsim.CNOT) == 16
    assert c.count(qsim.X) == 8
    assert qsim.run(c, 10).counts == {"00011110": 10}
    zero = hybrid.xor_circuit("0", "0")
    assert zero.count(qsim.X) == 0 and zero.count(qsim.CNOT) == 2


def test_decode_majority_ties_and_empty():
    assert hybrid.decode_majority({"10": 3, "01": 3, "11": 1}) == "01"
    assert hybrid.decode_majority({"1": 5}) == "1"
    with pytest.raises(ContractViolation):
        hybrid.decode_majority({})


def test_quantum_xor_checks():
    be = XorBackend.ideal(window_bits=4)
    assert hybrid.quantum_xor("1100", "1010", be) == "0110"
    assert hybrid.quantum_xor("1100", "1010", XorBackend.classical()) == "0110"
    with pytest.raises(ContractViolation):
        hybrid.quantum_xor("11000", "10100", be)
    with pytest.raises(ContractViolation):
        hybrid.quantum_xor("11", "1", be)
    with pytest.raises(ContractViolation):
        hybrid.quantum_xor("12", "10", be)


@pytest.mark.parametrize("kwargs", [
    {"kind": "bogus"},
    {"kind": hybrid.QUANTUM_NOISY},
    {"kind": hybrid.QUANTUM_IDEAL, "noise": qsim.NoiseModel(0.1)},
    {"window_bits": 0},
    {"window_bits": 17},
    {"shots": 0},
    {"method": "tableau"},
    {"kind": hybrid.QUANTUM_IDEAL, "window_bits": 9, "method": "dense"},
])
def test_backend_validation(kwargs):
    with pytest.raises(ContractViolation):
        XorBackend(**kwargs)


def test_bad_feed_forward_and_route():
    with pytest.raises(ContractViolation):
        hybrid.hybrid_sha256(b"", feed_forward="or")
    with pytest.raises(ContractViolation):
        hybrid.hybrid_sha256(b"", route="gpu")


def test_trace_jsonl_round_trip():
    _, trace = hybrid.hybrid_sha256(b"DMU", XorBackend.noisy(0.2, shots=15, seed=1))
    lines = list(trace.iter_jsonl())
    back = hybrid.XorTrace.from_jsonl(io.StringIO("\n".join(lines)))
    assert back.backend == trace.backend
    assert back.summary()["agreed"] == trace.summary()["agreed"]
    for name, arr in trace.arrays().items():
        assert (arr == back.arrays()[name]).all()


@pytest.mark.parametrize("text", ['{"type": "xor"}', "not json", '{"type": "trace"}\n{"type": "xor", "a": "1"}'])
def test_trace_jsonl_malformed(text):
    with pytest.raises(FormatError):
        hybrid.XorTrace.from_jsonl(io.StringIO(text))


def hashlib_pow(header, bits, limit):
    for nonce in range(limit + 1):
        d = hashlib.sha256(header + nonce.to_bytes(8, "big")).digest()
        if 256 - int.from_bytes(d, "big").bit_length() >= bits:
            return nonce
    return None


def test_pow_search_reference():
    res = hybrid.pow_search(b"DMU", 8)
    assert res.nonce == hashlib_pow(b"DMU", 8, 1 << 20) == 532
    assert res.attempts == 533
    assert res.digest.leading_zero_bits() >= 8


def test_pow_search_with_backend_matches_reference():
    res = hybrid.pow_search(b"DMU", 4, XorBackend.ideal())
    assert res.nonce == hashlib_pow(b"DMU", 4, 100)
    assert res.xor_windows == res.attempts * hybrid.XORS_PER_BLOCK * 4
    assert res.agreement_rate == 1.0


def test_pow_search_exhaustion_and_bounds():
    assert hybrid.pow_search(b"DMU", 20, max_nonce=5) is None
    assert hybrid.pow_search(b"x", 0).nonce == 0
    with pytest.raises(ContractViolation):
        hybrid.pow_search(b"x", 33)
    with pytest.raises(ContractViolation):
        hybrid.pow_search(b"x", 1, max_nonce=0)
