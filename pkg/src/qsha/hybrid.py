"""Hybrid SHA-256: classical control flow, XORs evaluated as CNOT circuits.

Every 32-bit XOR inside the message schedule and the round function is cut
into ``window_bits``-wide windows (most significant first).  Each window is
one small circuit: operand A on the high register, operand B on the middle
register, a fresh output register on the low qubits, two CNOTs per output
bit.  Rotations, Ch/Maj masking and modular additions stay classical.

Window ``k`` of a trace (counting from 0 across the whole message) draws
its noise from stream ``k`` of the backend seed, so any single record can
be replayed with :func:`quantum_xor`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator, List, NamedTuple, Optional

import numpy as np

from qsha import _pykernels, _rng, qsim
from qsha._accel import kernels
from qsha.errors import ContractViolation, FormatError
from qsha.qsim import NoiseModel
from qsha.sha256_core import Digest, HashState, initial_state, pad_message, sha256

CLASSICAL = "classical"
QUANTUM_IDEAL = "quantum_ideal"
QUANTUM_NOISY = "quantum_noisy"
_MODES = {CLASSICAL: 0, QUANTUM_IDEAL: 1, QUANTUM_NOISY: 2}

MAX_WINDOW = 16
DEFAULT_SHOTS = 1022
# XORs per block: 48 schedule words x 2 (sigma0, sigma1 each two XORs) plus
# 64 rounds x 7 (Sigma1 2, Ch 1, Sigma0 2, Maj 2).
XORS_PER_BLOCK = 48 * 4 + 64 * 7


@dataclass(frozen=True)
class XorBackend:
    kind: str = CLASSICAL
    shots: int = DEFAULT_SHOTS
    noise: Optional[NoiseModel] = None
    window_bits: int = 8
    seed: int = 0
    method: str = "basis"

    def __post_init__(self):
        if self.kind not in _MODES:
            raise ContractViolation(f"unknown backend kind {self.kind!r}")
        if not isinstance(self.shots, int) or self.shots < 1:
            raise ContractViolation("shots must be a positive integer")
        if not 1 <= self.window_bits <= MAX_WINDOW:
            raise ContractViolation(f"window_bits must be in 1..{MAX_WINDOW}")
        if self.kind == QUANTUM_NOISY and self.noise is None:
            raise ContractViolation("the noisy backend needs a NoiseModel")
        if self.kind != QUANTUM_NOISY and self.noise is not None:
            raise ContractViolation(f"{self.kind} backend takes no noise model")
        if self.method not in ("basis", "dense"):
            raise ContractViolation(f"unknown simulation method {self.method!r}")
        if self.method == "dense" and 3 * self.window_bits > qsim.DENSE_CAP:
            raise ContractViolation(
                f"dense windows of {self.window_bits} bits need {3 * self.window_bits} qubits "
                f"(cap {qsim.DENSE_CAP})")

    @classmethod
    def classical(cls, window_bits: int = 8) -> "XorBackend":
        return cls(CLASSICAL, window_bits=window_bits)

    @classmethod
    def ideal(cls, window_bits: int = 8, shots: int = DEFAULT_SHOTS, **kw) -> "XorBackend":
        return cls(QUANTUM_IDEAL, shots=shots, window_bits=window_bits, **kw)

    @classmethod
    def noisy(cls, p: float, shots: int = DEFAULT_SHOTS, seed: int = 0,
              window_bits: int = 8, **kw) -> "XorBackend":
        return cls(QUANTUM_NOISY, shots=shots, noise=NoiseModel(p), window_bits=window_bits,
                   seed=seed, **kw)

    def describe(self) -> dict:
        return {
            "backend": self.kind,
            "window_bits": self.window_bits,
            "shots": self.shots if self.kind != CLASSICAL else 0,
            "cnot_flip_prob": self.noise.cnot_flip_prob if self.noise else 0.0,
            "seed": self.seed,
            "method": self.method,
        }


def _check_operands(a: str, b: str):
    if len(a) != len(b) or not a:
        raise ContractViolation(f"operand widths differ or are empty: {len(a)} vs {len(b)}")
    if set(a + b) - {"0", "1"}:
        raise ContractViolation("operands must be bitstrings")


def xor_circuit(a: str, b: str) -> qsim.Circuit:
    """Three-register XOR circuit for ``len(a)``-bit operands, output measured."""
    _check_operands(a, b)
    w = len(a)
    circ = qsim.Circuit(3 * w).encode_bits(a, 2 * w).encode_bits(b, w)
    for i in range(w):
        circ.cnot(2 * w + i, i)
        circ.cnot(w + i, i)
    return circ.measure(*range(w))


def xor_histogram(a: str, b: str, backend: XorBackend, stream: int = 0) -> qsim.ShotHistogram:
    return qsim.run(xor_circuit(a, b), backend.shots, backend.noise, backend.seed,
                    method=backend.method, stream=stream)


def decode_majority(hist) -> str:
    """Modal outcome of a histogram; ties go to the lexicographically smallest."""
    counts = hist.counts if isinstance(hist, qsim.ShotHistogram) else hist
    if not counts:
        raise ContractViolation("cannot decode an empty histogram")
    return min(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0]


def quantum_xor(a: str, b: str, backend: XorBackend, stream: int = 0) -> str:
    _check_operands(a, b)
    if len(a) > backend.window_bits:
        raise ContractViolation(f"{len(a)}-bit operands exceed the {backend.window_bits}-bit window")
    if backend.kind == CLASSICAL:
        return format(int(a, 2) ^ int(b, 2), f"0{len(a)}b")
    return decode_majority(xor_histogram(a, b, backend, stream))


class XorRecord(NamedTuple):
    index: int
    a: str
    b: str
    decoded: str
    agreed: bool
    modal_count: int
    distinct: int


@dataclass
class XorTrace:
    """Per-window record of every delegated XOR, in evaluation order."""

    backend: dict
    a: np.ndarray
    b: np.ndarray
    decoded: np.ndarray
    modal_count: np.ndarray
    distinct: np.ndarray
    width: np.ndarray
    blocks: int = 0
    meta: dict = field(default_factory=dict)

    @classmethod
    def allocate(cls, backend: XorBackend, n: int, blocks: int = 0) -> "XorTrace":
        return cls(backend.describe(),
                   np.zeros(n, np.uint32), np.zeros(n, np.uint32), np.zeros(n, np.uint32),
                   np.zeros(n, np.int32), np.zeros(n, np.int32), np.zeros(n, np.uint8), blocks)

    def arrays(self) -> dict:
        return {"a": self.a, "b": self.b, "decoded": self.decoded,
                "modal_count": self.modal_count, "distinct": self.distinct, "width": self.width}

    def __len__(self) -> int:
        return len(self.a)

    @property
    def agreed(self) -> np.ndarray:
        return self.decoded == (self.a ^ self.b)

    @property
    def agreement_rate(self) -> float:
        return float(self.agreed.mean()) if len(self) else 1.0

    def record(self, i: int) -> XorRecord:
        w = int(self.width[i])
        return XorRecord(i, format(int(self.a[i]), f"0{w}b"), format(int(self.b[i]), f"0{w}b"),
                         format(int(self.decoded[i]), f"0{w}b"),
                         bool(self.decoded[i] == (self.a[i] ^ self.b[i])),
                         int(self.modal_count[i]), int(self.distinct[i]))

    def records(self) -> Iterator[XorRecord]:
        for i in range(len(self)):
            yield self.record(i)

    def summary(self) -> dict:
        agreed = int(self.agreed.sum())
        return {"windows": len(self), "agreed": agreed, "disagreed": len(self) - agreed,
                "agreement_rate": self.agreement_rate, "blocks": self.blocks}

    def iter_jsonl(self) -> Iterator[str]:
        yield json.dumps({"type": "trace", **self.backend, **self.meta}, sort_keys=True)
        shots = self.backend.get("shots", 0)
        for r in self.records():
            rec = {"type": "xor", "shots": shots, **r._asdict()}
            yield json.dumps(rec, sort_keys=True)
        yield json.dumps({"type": "summary", **self.summary()}, sort_keys=True)

    @classmethod
    def from_jsonl(cls, lines) -> "XorTrace":
        header, rows = None, []
        for lineno, line in enumerate(lines, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"trace line {lineno}: {exc}") from exc
            kind = rec.get("type")
            if kind == "trace":
                header = rec
            elif kind == "xor":
                rows.append(rec)
        if header is None:
            raise FormatError("trace has no header record")
        n = len(rows)
        backend = {k: header[k] for k in ("backend", "window_bits", "shots", "cnot_flip_prob",
                                          "seed", "method") if k in header}
        meta = {k: v for k, v in header.items() if k not in backend and k != "type"}
        tr = cls(backend, np.zeros(n, np.uint32), np.zeros(n, np.uint32), np.zeros(n, np.uint32),
                 np.zeros(n, np.int32), np.zeros(n, np.int32), np.zeros(n, np.uint8),
                 meta=meta)
        try:
            for i, r in enumerate(rows):
                tr.a[i] = int(r["a"], 2)
                tr.b[i] = int(r["b"], 2)
                tr.decoded[i] = int(r["decoded"], 2)
                tr.modal_count[i] = r["modal_count"]
                tr.distinct[i] = r["distinct"]
                tr.width[i] = len(r["a"])
        except (KeyError, ValueError, TypeError) as exc:
            raise FormatError(f"malformed xor record: {exc}") from exc
        return tr


def windows_per_word(window_bits: int) -> int:
    return -(-32 // window_bits)


def _circuit_evaluator(backend: XorBackend):
    """Window evaluator that builds and runs a :class:`qsim.Circuit`."""

    def evaluate(a, b, width, stream):
        if backend.kind == CLASSICAL:
            return a ^ b, 0, 0
        hist = xor_histogram(format(a, f"0{width}b"), format(b, f"0{width}b"), backend, stream)
        dec = decode_majority(hist)
        return int(dec, 2), hist.counts[dec], len(hist.counts)

    return evaluate


def hybrid_sha256(message: bytes, backend: XorBackend = XorBackend(), *,
                  feed_forward: str = "add", route: str = "kernel"):
    """Hash ``message`` with XORs delegated to ``backend``.

    ``feed_forward="add"`` is FIPS SHA-256.  ``"xor"`` evaluates the generic
    Davies-Meyer form ``E(H) xor H``, routing the feed-forward through the
    backend as well; it is not SHA-256.

    ``route="circuit"`` evaluates every window through :mod:`qsim` circuit
    objects instead of the fused kernel (slow; used for cross-checks and
    forced by ``backend.method == "dense"``).

    Returns ``(Digest, XorTrace)``.
    """
    if feed_forward not in ("add", "xor"):
        raise ContractViolation(f"feed_forward must be 'add' or 'xor', not {feed_forward!r}")
    if route not in ("kernel", "circuit"):
        raise ContractViolation(f"unknown route {route!r}")
    blocks = pad_message(message)
    xor_ff = feed_forward == "xor"
    per_block = (XORS_PER_BLOCK + (8 if xor_ff else 0)) * windows_per_word(backend.window_bits)
    trace = XorTrace.allocate(backend, per_block * len(blocks), len(blocks))
    trace.meta = {"feed_forward": feed_forward, "message_bytes": len(message)}
    arrays = trace.arrays()
    mode = _MODES[backend.kind]
    threshold = backend.noise.threshold if backend.noise else 0
    seed = backend.seed & _rng.MASK64
    words = initial_state().words
    pos = 0
    if route == "circuit" or backend.method == "dense":
        evaluator = _circuit_evaluator(backend)
        for block in blocks:
            words, pos = _pykernels.hybrid_compress(
                words, block, mode, backend.window_bits, backend.shots, threshold, seed, 0,
                xor_ff, arrays, pos, evaluator)
    else:
        for block in blocks:
            words, pos = kernels.hybrid_compress(
                words, block, mode, backend.window_bits, backend.shots, threshold, seed, 0,
                xor_ff, arrays, pos)
    assert pos == len(trace)
    return Digest.from_state(HashState(tuple(words))), trace


@dataclass
class PowResult:
    nonce: int
    digest: Digest
    attempts: int
    xor_windows: int = 0
    xor_agreed: int = 0

    @property
    def agreement_rate(self) -> float:
        return self.xor_agreed / self.xor_windows if self.xor_windows else 1.0


def nonce_message(header: bytes, nonce: int) -> bytes:
    return bytes(header) + nonce.to_bytes(8, "big")


def pow_search(header: bytes, difficulty_bits: int, backend: Optional[XorBackend] = None,
               max_nonce: int = 1 << 20) -> Optional[PowResult]:
    """Find the first nonce in ``0..max_nonce`` whose digest has enough leading zeros.

    The nonce is appended to ``header`` as 8 big-endian bytes.  Without a
    backend the plain reference hash is used.  Returns ``None`` when the
    range is exhausted.
    """
    if not 0 <= difficulty_bits <= 32:
        raise ContractViolation("difficulty_bits must be in 0..32")
    if max_nonce < 1:
        raise ContractViolation("max_nonce must be at least 1")
    windows = agreed = 0
    for nonce in range(max_nonce + 1):
        msg = nonce_message(header, nonce)
        if backend is None:
            digest = sha256(msg)
        else:
            digest, trace = hybrid_sha256(msg, backend)
            windows += len(trace)
            agreed += int(trace.agreed.sum())
        if digest.leading_zero_bits() >= difficulty_bits:
            return PowResult(nonce, digest, nonce + 1, windows, agreed)
    return None
