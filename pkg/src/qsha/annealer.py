"""QUBO models of XOR constraints, exact enumeration and simulated annealing.

Energy of a binary assignment ``s``::

    offset + sum_i w_i s_i + sum_{i<j} J_ij s_i s_j

An XOR position uses variables (x, y, z, a) and the penalty
``(x + y - z - 2a)**2``, which is zero exactly when ``z = x xor y`` and
``a = x and y``.  Expanded with ``s**2 = s``::

    x + y + z + 4a + 2xy - 2xz - 4xa - 2yz - 4ya + 4za
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from qsha import _pykernels, _rng
from qsha._accel import kernels
from qsha.errors import CapacityError, ContractViolation, FormatError

EXHAUSTIVE_CAP = 24

_XOR_WEIGHTS = (1.0, 1.0, 1.0, 4.0)
_XOR_COUPLERS = {
    (0, 1): 2.0, (0, 2): -2.0, (0, 3): -4.0,
    (1, 2): -2.0, (1, 3): -4.0, (2, 3): 4.0,
}


@dataclass
class Qubo:
    num_vars: int
    weights: List[float] = None
    couplers: Dict[Tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        if self.num_vars < 0:
            raise ContractViolation("num_vars must be non-negative")
        if self.weights is None:
            self.weights = [0.0] * self.num_vars
        if len(self.weights) != self.num_vars:
            raise ContractViolation("one weight per variable")
        normalized = {}
        for (i, j), v in self.couplers.items():
            if i == j or not (0 <= i < self.num_vars and 0 <= j < self.num_vars):
                raise ContractViolation(f"invalid coupler ({i}, {j})")
            key = (min(i, j), max(i, j))
            normalized[key] = normalized.get(key, 0.0) + float(v)
        self.couplers = dict(sorted(normalized.items()))
        self.weights = [float(w) for w in self.weights]

    def csr(self):
        """Symmetric coupler matrix as ``(indptr, indices, values)``."""
        rows = [[] for _ in range(self.num_vars)]
        for (i, j), v in self.couplers.items():
            rows[i].append((j, v))
            rows[j].append((i, v))
        indptr = np.zeros(self.num_vars + 1, dtype=np.int64)
        indices, vals = [], []
        for i, row in enumerate(rows):
            row.sort()
            indices.extend(j for j, _ in row)
            vals.extend(v for _, v in row)
            indptr[i + 1] = len(indices)
        return indptr, np.asarray(indices, dtype=np.int32), np.asarray(vals, dtype=np.float64)


def build_xor_qubo(width: int):
    """QUBO whose zero-energy states are exactly the bitwise XOR (with AND carry) of width bits.

    Returns ``(qubo, roles)`` with roles like ``["x0", "y0", "z0", "a0", "x1", ...]``.
    """
    if width < 1:
        raise ContractViolation("width must be at least 1")
    weights, couplers, roles = [], {}, []
    for p in range(width):
        base = 4 * p
        weights.extend(_XOR_WEIGHTS)
        roles.extend(f"{r}{p}" for r in "xyza")
        for (i, j), v in _XOR_COUPLERS.items():
            couplers[(base + i, base + j)] = v
    return Qubo(4 * width, weights, couplers, 0.0), roles


def energy(q: Qubo, s: Sequence[int]) -> float:
    if len(s) != q.num_vars:
        raise ContractViolation(f"assignment has {len(s)} bits, QUBO has {q.num_vars} variables")
    e = q.offset
    for w, b in zip(q.weights, s):
        if b:
            e += w
    for (i, j), v in q.couplers.items():
        if s[i] and s[j]:
            e += v
    return e


def _energies(q: Qubo, bits: np.ndarray) -> np.ndarray:
    e = q.offset + bits @ np.asarray(q.weights)
    for (i, j), v in q.couplers.items():
        e = e + v * (bits[:, i] & bits[:, j])
    return e


def solve_exhaustive(q: Qubo, cap: int = EXHAUSTIVE_CAP, atol: float = 1e-9):
    """Exact ground energy and every ground assignment (sorted as tuples)."""
    n = q.num_vars
    if n > cap:
        raise CapacityError(f"{n} variables exceed the enumeration cap of {cap}")
    if n == 0:
        return q.offset, [()]
    best = math.inf
    ground: List[tuple] = []
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    chunk = 1 << min(n, 16)
    for start in range(0, 1 << n, chunk):
        idx = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        # column 0 is the most significant bit so index order = lexicographic order
        bits = ((idx[:, None] >> shifts[None, :]) & 1).astype(np.int64)
        e = _energies(q, bits)
        lo = float(e.min())
        if lo < best - atol:
            best, ground = lo, []
        if lo <= best + atol:
            best = min(best, lo)
            ground.extend(tuple(int(v) for v in row) for row in bits[e <= best + atol])
    ground = [g for g in ground if energy(q, g) <= best + atol]
    return best, sorted(ground)


@dataclass(frozen=True)
class AnnealSchedule:
    initial_temperature: float = 2.0
    final_temperature: float = 0.01
    sweeps: int = 2000
    seed: int = 0

    def __post_init__(self):
        if self.initial_temperature <= 0 or self.final_temperature <= 0:
            raise ContractViolation("temperatures must be positive")
        if self.final_temperature > self.initial_temperature:
            raise ContractViolation("the schedule must not heat up")
        if self.sweeps < 1:
            raise ContractViolation("sweeps must be positive")

    def temperature(self, sweep: int) -> float:
        if self.sweeps == 1:
            return self.initial_temperature
        ratio = self.final_temperature / self.initial_temperature
        return self.initial_temperature * ratio ** (sweep / (self.sweeps - 1))


@dataclass
class AnnealResult:
    assignment: Tuple[int, ...]
    energy: float
    final_energy: float
    accepted: int
    best_sweep: int
    proposals: int

    def summary(self) -> dict:
        return {"energy": self.energy, "final_energy": self.final_energy,
                "accepted": self.accepted, "proposals": self.proposals,
                "best_sweep": self.best_sweep}


def random_assignment(n: int, seed: int) -> np.ndarray:
    """Starting point drawn from stream 1 of ``seed`` (annealing uses stream 0)."""
    rng = _rng.SplitMix(_rng.shot_state(seed & _rng.MASK64, 1, 0))
    return np.array([rng.next() >> 63 for _ in range(n)], dtype=np.int8)


def solve_anneal(q: Qubo, schedule: AnnealSchedule = AnnealSchedule(),
                 start: Optional[Sequence[int]] = None, *, impl=None,
                 verify: bool = False) -> AnnealResult:
    """Metropolis single-bit-flip annealing; returns the best assignment visited.

    ``verify`` recomputes the full energy after every accepted move
    (Python kernel only).
    """
    if q.num_vars < 1:
        raise ContractViolation("nothing to anneal")
    seed = schedule.seed & _rng.MASK64
    if start is None:
        bits = random_assignment(q.num_vars, seed)
    else:
        if len(start) != q.num_vars:
            raise ContractViolation("start assignment has the wrong length")
        bits = np.asarray(start, dtype=np.int8).copy()
    impl = impl or (_pykernels if verify else kernels)
    indptr, indices, vals = q.csr()
    e0 = energy(q, bits.tolist())
    check = (lambda x: energy(q, x)) if verify else None
    best_bits, best, final, accepted, best_sweep = impl.anneal(
        np.asarray(q.weights, dtype=np.float64), indptr, indices, vals, e0,
        schedule.initial_temperature, schedule.final_temperature, schedule.sweeps, seed,
        bits, check)
    return AnnealResult(tuple(int(b) for b in best_bits), float(best), float(final),
                        int(accepted), int(best_sweep), schedule.sweeps * q.num_vars)


def xor_truth_set(width: int) -> List[tuple]:
    """Independent truth-table generation of the XOR/AND-consistent assignments."""
    per_position = [(x, y, x ^ y, x & y) for x in (0, 1) for y in (0, 1)]
    return sorted(tuple(itertools.chain.from_iterable(combo))
                  for combo in itertools.product(per_position, repeat=width))


# -- text format --------------------------------------------------------------

def dumps(q: Qubo) -> str:
    lines = [f"vars {q.num_vars}", f"offset {q.offset!r}"]
    lines += [f"w {i} {w!r}" for i, w in enumerate(q.weights) if w != 0.0]
    lines += [f"c {i} {j} {v!r}" for (i, j), v in q.couplers.items()]
    return "\n".join(lines) + "\n"


def loads(text: str) -> Qubo:
    n = None
    offset = 0.0
    weights: Dict[int, float] = {}
    couplers: Dict[Tuple[int, int], float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        op, *args = line.split()
        try:
            if op == "vars" and len(args) == 1:
                n = int(args[0])
            elif op == "offset" and len(args) == 1:
                offset = float(args[0])
            elif op == "w" and len(args) == 2:
                weights[int(args[0])] = weights.get(int(args[0]), 0.0) + float(args[1])
            elif op == "c" and len(args) == 3:
                key = (int(args[0]), int(args[1]))
                couplers[key] = couplers.get(key, 0.0) + float(args[2])
            else:
                raise FormatError(f"unknown or malformed line {line!r}")
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc
    if n is None:
        raise FormatError("missing 'vars N' line")
    if any(not 0 <= i < n for i in weights):
        raise FormatError("weight index out of range")
    try:
        return Qubo(n, [weights.get(i, 0.0) for i in range(n)], couplers, offset)
    except ContractViolation as exc:
        raise FormatError(str(exc)) from exc
