"""Gate-level simulator for X/CNOT circuits with terminal measurement.

Two simulation paths:

* the dense path keeps all ``2**n`` complex amplitudes (capped, 24 qubits by
  default) and samples shots from the squared magnitudes;
* the basis path tracks a single computational-basis index, which is exact
  for X/CNOT circuits at any width (the classical-bit-tracking trick used by
  stabilizer simulators).

Bitstrings put qubit ``n-1`` leftmost and qubit 0 rightmost, so basis index
``i`` is the binary value of the rendered string.

Noise is an independent bit flip on the control and on the target after
every CNOT.  Shot ``s`` of a run draws from its own stream derived from
``(seed, stream, s)``, so results do not depend on evaluation order.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence

import numpy as np

from qsha import _rng
from qsha._accel import kernels
from qsha._pykernels import noisy_basis_shots_big
from qsha.errors import CapacityError, ContractViolation, FormatError, UnsupportedGateError

DENSE_CAP = 24
KERNEL_WIDTH = 64

X = "x"
CNOT = "cnot"
_KIND_CODES = {X: 0, CNOT: 1}


@dataclass(frozen=True)
class GateOp:
    kind: str
    target: int
    control: Optional[int] = None

    def __post_init__(self):
        if self.kind == X and self.control is not None:
            raise ContractViolation("X takes no control qubit")
        if self.kind == CNOT and self.control is None:
            raise ContractViolation("CNOT needs a control qubit")


@dataclass(frozen=True)
class NoiseModel:
    cnot_flip_prob: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.cnot_flip_prob <= 1.0:
            raise ContractViolation(f"flip probability {self.cnot_flip_prob} outside [0, 1]")

    @property
    def threshold(self) -> int:
        return _rng.flip_threshold(self.cnot_flip_prob)


class Circuit:
    """An ordered gate list on ``num_qubits`` qubits, all starting in |0>.

    Builder methods append and return the circuit so calls chain.  Once
    measurement qubits are declared, no further gates may be added.
    """

    def __init__(self, num_qubits: int):
        if not isinstance(num_qubits, (int, np.integer)) or num_qubits < 1:
            raise ContractViolation(f"a circuit needs at least one qubit, got {num_qubits!r}")
        self.num_qubits = int(num_qubits)
        self.gates: List[GateOp] = []
        self.measured: tuple = ()
        self._program = None

    def _check_qubit(self, q) -> int:
        if not isinstance(q, (int, np.integer)) or not 0 <= q < self.num_qubits:
            raise IndexError(f"qubit {q!r} out of range for {self.num_qubits} qubits")
        return int(q)

    def _append(self, gate: GateOp) -> "Circuit":
        if self.measured:
            raise ContractViolation("gates after measurement are not supported")
        self.gates.append(gate)
        self._program = None
        return self

    def x(self, qubit: int) -> "Circuit":
        return self._append(GateOp(X, self._check_qubit(qubit)))

    def cnot(self, control: int, target: int) -> "Circuit":
        control, target = self._check_qubit(control), self._check_qubit(target)
        if control == target:
            raise ContractViolation("CNOT control and target must differ")
        return self._append(GateOp(CNOT, target, control))

    def encode_bits(self, bits: str, offset: int = 0) -> "Circuit":
        """Load ``bits`` onto qubits ``offset .. offset+len-1`` with X gates.

        The rightmost character lands on qubit ``offset``, matching the
        histogram rendering.
        """
        if set(bits) - {"0", "1"}:
            raise ContractViolation(f"not a bitstring: {bits!r}")
        if offset < 0 or offset + len(bits) > self.num_qubits:
            raise IndexError(f"{len(bits)} bits at offset {offset} exceed {self.num_qubits} qubits")
        for j, ch in enumerate(reversed(bits)):
            if ch == "1":
                self.x(offset + j)
        return self

    def measure(self, *qubits: int) -> "Circuit":
        qs = set(self.measured)
        qs.update(self._check_qubit(q) for q in qubits)
        self.measured = tuple(sorted(qs))
        return self

    def measure_all(self) -> "Circuit":
        return self.measure(*range(self.num_qubits))

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)

    def program(self):
        """Gate list as ``(kinds, controls, targets)`` arrays for the kernels."""
        if self._program is None:
            n = len(self.gates)
            kinds = np.empty(n, dtype=np.uint8)
            ctrls = np.zeros(n, dtype=np.int32)
            tgts = np.empty(n, dtype=np.int32)
            for i, g in enumerate(self.gates):
                kinds[i] = _KIND_CODES[g.kind]
                tgts[i] = g.target
                if g.control is not None:
                    ctrls[i] = g.control
            self._program = (kinds, ctrls, tgts)
        return self._program

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return (self.num_qubits, self.gates, self.measured) == (
            other.num_qubits, other.gates, other.measured)

    def __repr__(self):
        return f"Circuit({self.num_qubits} qubits, {len(self.gates)} gates, measured={list(self.measured)})"


def new_circuit(n: int) -> Circuit:
    return Circuit(n)


def encode_bits(circuit: Circuit, bits: str, offset: int = 0) -> Circuit:
    return circuit.encode_bits(bits, offset)


def apply_cnot(circuit: Circuit, control: int, target: int) -> Circuit:
    return circuit.cnot(control, target)


@dataclass
class StateVector:
    amplitudes: np.ndarray

    @property
    def num_qubits(self) -> int:
        return int(self.amplitudes.size).bit_length() - 1

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sum(self.probabilities()))


@dataclass
class ShotHistogram:
    counts: Dict[str, int]
    shots: int
    measured: tuple = field(default=())

    def most_common(self):
        return sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))

    def to_dict(self) -> dict:
        return {"shots": self.shots, "measured": list(self.measured), "counts": dict(self.counts)}


# -- dense path -------------------------------------------------------------

def _apply_x(state: np.ndarray, q: int, n: int) -> np.ndarray:
    view = state.reshape(1 << (n - q - 1), 2, 1 << q)
    return view[:, ::-1, :].reshape(-1).copy()


def _apply_cnot(state: np.ndarray, c: int, t: int, n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    return state[idx ^ (((idx >> c) & 1) << t)]


def _check_dense(circuit: Circuit, max_qubits: int):
    if circuit.num_qubits > max_qubits:
        raise CapacityError(
            f"dense simulation of {circuit.num_qubits} qubits exceeds the {max_qubits}-qubit cap")


def iter_dense_states(circuit: Circuit, max_qubits: int = DENSE_CAP,
                      flips: Optional[Iterator[bool]] = None) -> Iterator[np.ndarray]:
    """Yield the statevector after every gate (and after every noise flip).

    ``flips`` supplies the noise decisions, two per CNOT (control, target).
    """
    _check_dense(circuit, max_qubits)
    n = circuit.num_qubits
    state = np.zeros(1 << n, dtype=np.complex128)
    state[0] = 1.0
    for g in circuit.gates:
        if g.kind == X:
            state = _apply_x(state, g.target, n)
        elif g.kind == CNOT:
            state = _apply_cnot(state, g.control, g.target, n)
            if flips is not None:
                if next(flips):
                    state = _apply_x(state, g.control, n)
                if next(flips):
                    state = _apply_x(state, g.target, n)
        else:
            raise UnsupportedGateError(g.kind)
        yield state


def simulate_dense(circuit: Circuit, max_qubits: int = DENSE_CAP) -> StateVector:
    _check_dense(circuit, max_qubits)
    state = None
    for state in iter_dense_states(circuit, max_qubits):
        pass
    if state is None:
        state = np.zeros(1 << circuit.num_qubits, dtype=np.complex128)
        state[0] = 1.0
    return StateVector(state)


# -- basis path -------------------------------------------------------------

def _require_basis_gates(circuit: Circuit):
    for g in circuit.gates:
        if g.kind not in _KIND_CODES:
            raise UnsupportedGateError(f"basis path cannot simulate {g.kind!r}")


def basis_index(circuit: Circuit) -> int:
    _require_basis_gates(circuit)
    kinds, ctrls, tgts = circuit.program()
    if circuit.num_qubits <= KERNEL_WIDTH:
        return int(kernels.basis_run(kinds, ctrls, tgts))
    from qsha._pykernels import basis_run
    return basis_run(kinds, ctrls, tgts)


def simulate_basis(circuit: Circuit, noise: Optional[NoiseModel] = None) -> str:
    """Final basis state of a noise-free X/CNOT circuit, as a full-width bitstring."""
    if noise is not None:
        raise ContractViolation("the basis path is noise-free; use run() for noisy shots")
    return format(basis_index(circuit), f"0{circuit.num_qubits}b")


# -- shots --------------------------------------------------------------------

def _extract(states: np.ndarray, measured: Sequence[int]) -> np.ndarray:
    out = np.zeros(states.shape, dtype=np.uint64)
    one = np.uint64(1)
    for pos, q in enumerate(measured):
        out |= ((states >> np.uint64(q)) & one) << np.uint64(pos)
    return out


def _extract_int(state: int, measured: Sequence[int]) -> int:
    return sum(((state >> q) & 1) << pos for pos, q in enumerate(measured))


def _histogram(values, measured, shots) -> ShotHistogram:
    m = len(measured)
    uniq, counts = np.unique(np.asarray(values, dtype=object if m > 64 else np.uint64),
                             return_counts=True)
    hist = {format(int(v), f"0{m}b"): int(c) for v, c in zip(uniq, counts)}
    return ShotHistogram(dict(sorted(hist.items())), shots, tuple(sorted(measured, reverse=True)))


def run(circuit: Circuit, shots: int, noise: Optional[NoiseModel] = None, seed: int = 0,
        *, method: str = "basis", stream: int = 0, max_qubits: int = DENSE_CAP) -> ShotHistogram:
    """Execute ``shots`` repetitions and histogram the measured qubits.

    ``method`` selects the ``"basis"`` or ``"dense"`` path; both consume
    the same random draws, so they return identical histograms.
    """
    if not isinstance(shots, (int, np.integer)) or shots < 1:
        raise ContractViolation(f"shots must be a positive integer, got {shots!r}")
    if not circuit.measured:
        raise ContractViolation("circuit has no measured qubits")
    if method not in ("basis", "dense"):
        raise ContractViolation(f"unknown simulation method {method!r}")
    seed &= _rng.MASK64
    measured = circuit.measured
    if method == "dense":
        return _run_dense(circuit, shots, noise, seed, stream, max_qubits)
    _require_basis_gates(circuit)
    if noise is None:
        value = _extract_int(basis_index(circuit), measured)
        return ShotHistogram({format(value, f"0{len(measured)}b"): int(shots)}, int(shots),
                             tuple(sorted(measured, reverse=True)))
    kinds, ctrls, tgts = circuit.program()
    if circuit.num_qubits <= KERNEL_WIDTH:
        states = kernels.noisy_basis_shots(kinds, ctrls, tgts, noise.threshold, seed, stream, shots)
        return _histogram(_extract(states, measured), measured, shots)
    states = noisy_basis_shots_big(kinds, ctrls, tgts, noise.threshold, seed, stream, shots)
    return _histogram([_extract_int(s, measured) for s in states], measured, shots)


def _sample(probs: np.ndarray, u: float) -> int:
    cdf = np.cumsum(probs)
    return int(min(np.searchsorted(cdf, u * cdf[-1], side="right"), probs.size - 1))


def _run_dense(circuit, shots, noise, seed, stream, max_qubits):
    measured = circuit.measured
    values = []
    if noise is None:
        probs = simulate_dense(circuit, max_qubits).probabilities()
        draws = _rng.next_vec(_rng.shot_states(seed, stream, shots)) >> np.uint64(11)
        u = draws.astype(np.float64) * (1.0 / 9007199254740992.0)
        cdf = np.cumsum(probs)
        idx = np.minimum(np.searchsorted(cdf, u * cdf[-1], side="right"), probs.size - 1)
        return _histogram(_extract(idx.astype(np.uint64), measured), measured, shots)
    else:
        thr = noise.threshold
        for shot in range(shots):
            rng = _rng.SplitMix(_rng.shot_state(seed, stream, shot))
            flips = ((rng.next() >> 11) < thr for _ in itertools.count())
            state = None
            for state in iter_dense_states(circuit, max_qubits, flips):
                pass
            if state is None:
                state = simulate_dense(circuit, max_qubits).amplitudes
            probs = np.abs(state) ** 2
            values.append(_extract_int(_sample(probs, rng.uniform()), measured))
    return _histogram(values, measured, shots)


# -- text format --------------------------------------------------------------

def dumps(circuit: Circuit, comment: Optional[str] = None) -> str:
    lines = []
    if comment:
        lines.extend(f"# {line}" for line in comment.splitlines())
    lines.append(f"qubits {circuit.num_qubits}")
    for g in circuit.gates:
        lines.append(f"x {g.target}" if g.kind == X else f"cnot {g.control} {g.target}")
    if circuit.measured:
        lines.append("measure " + " ".join(str(q) for q in circuit.measured))
    return "\n".join(lines) + "\n"


def loads(text: str) -> Circuit:
    circuit = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        op, *args = line.split()
        try:
            nums = [int(a) for a in args]
            if op == "qubits":
                if circuit is not None or len(nums) != 1:
                    raise FormatError("'qubits N' must appear once, first")
                circuit = Circuit(nums[0])
                continue
            if circuit is None:
                raise FormatError("missing 'qubits N' header")
            if op == "x" and len(nums) == 1:
                circuit.x(nums[0])
            elif op == "cnot" and len(nums) == 2:
                circuit.cnot(nums[0], nums[1])
            elif op == "measure" and nums:
                circuit.measure(*nums)
            else:
                raise FormatError(f"unknown or malformed instruction {line!r}")
        except (ValueError, IndexError) as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc
    if circuit is None:
        raise FormatError("empty circuit description")
    return circuit
