"""Amplitude-form quantum hashing of n-bit messages over a key set.

A message ``M`` maps to ``d`` qubit pairs; pair ``i`` has amplitudes
``cos(2 pi k_i M / N) / sqrt(d)`` and ``sin(2 pi k_i M / N) / sqrt(d)``
with ``N = 2**n``.  The overlap of two hashes depends only on the message
difference, which makes the worst-case overlap over all distinct pairs an
``O(N d)`` sweep instead of ``O(N^2 d)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from qsha.errors import CapacityError, ContractViolation, InfeasibleError

MAX_BITS = 30
SWEEP_CAP = 14


@dataclass(frozen=True)
class KeySet:
    keys: Tuple[int, ...]
    n: int

    def __post_init__(self):
        if not 1 <= self.n <= MAX_BITS:
            raise ContractViolation(f"message width n must be in 1..{MAX_BITS}")
        if not self.keys:
            raise ContractViolation("a key set needs at least one key")
        N = 1 << self.n
        if any(not 0 <= k < N for k in self.keys):
            raise ContractViolation(f"keys must lie in 0..{N - 1}")

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def d(self) -> int:
        return len(self.keys)

    def array(self) -> np.ndarray:
        return np.asarray(self.keys, dtype=np.int64)


@dataclass(frozen=True)
class QuantumHashState:
    message: int
    pairs: np.ndarray  # shape (d, 2): cos and sin components, already scaled by 1/sqrt(d)

    def norm(self) -> float:
        return float(np.sum(self.pairs ** 2))

    def vector(self) -> np.ndarray:
        """Flattened amplitudes in |i>|b> order."""
        return self.pairs.reshape(-1)


@dataclass(frozen=True)
class ResistanceReport:
    delta: float
    arg_pair: Tuple[int, int]
    difference: int
    d: int
    n: int
    seed: int = None

    def to_dict(self) -> dict:
        return {"delta": self.delta, "arg_pair": list(self.arg_pair),
                "difference": self.difference, "d": self.d, "n": self.n, "seed": self.seed}


def generate_key_set(d: int, n: int, seed: int) -> KeySet:
    """``d`` distinct keys drawn uniformly from ``0..2**n - 1``."""
    if d < 1:
        raise ContractViolation("d must be at least 1")
    if not 1 <= n <= MAX_BITS:
        raise ContractViolation(f"n must be in 1..{MAX_BITS}")
    N = 1 << n
    if d > N:
        raise InfeasibleError(f"cannot draw {d} distinct keys from {N} values")
    rng = np.random.default_rng(seed)
    keys = rng.choice(N, size=d, replace=False)
    return KeySet(tuple(int(k) for k in keys), n)


def _phases(keys: np.ndarray, m, N: int) -> np.ndarray:
    # reduce k*m mod N first; exact in int64 for n <= 30
    return 2.0 * np.pi * ((keys * m) % N) / N


def _check_message(m: int, K: KeySet):
    if not 0 <= m < K.N:
        raise ContractViolation(f"message {m} outside 0..{K.N - 1}")


def qhash(M: int, K: KeySet) -> QuantumHashState:
    _check_message(M, K)
    theta = _phases(K.array(), M, K.N)
    scale = 1.0 / math.sqrt(K.d)
    return QuantumHashState(M, np.stack([np.cos(theta), np.sin(theta)], axis=1) * scale)


def overlap(a: QuantumHashState, b: QuantumHashState) -> float:
    """|<a|b>| by direct inner product of the amplitude vectors."""
    return abs(float(np.dot(a.vector(), b.vector())))


def fidelity(M1: int, M2: int, K: KeySet) -> float:
    """Closed-form |<h(M1)|h(M2)>| = |mean_i cos(2 pi k_i (M1 - M2) / N)|."""
    _check_message(M1, K)
    _check_message(M2, K)
    return abs(float(np.mean(np.cos(_phases(K.array(), (M1 - M2) % K.N, K.N)))))


def fidelity_by_difference(K: KeySet) -> np.ndarray:
    """Fidelity for every difference D = 0..N-1 (D = 0 gives 1)."""
    keys = K.array()
    N = K.N
    out = np.empty(N)
    chunk = max(1, (1 << 22) // K.d)
    for start in range(0, N, chunk):
        D = np.arange(start, min(N, start + chunk), dtype=np.int64)
        out[start:start + len(D)] = np.abs(np.cos(_phases(keys[None, :], D[:, None], N)).mean(axis=1))
    return out


def delta_of_keyset(K: KeySet, max_bits: int = SWEEP_CAP, seed: int = None) -> ResistanceReport:
    """Exact worst-case fidelity over all distinct message pairs."""
    if K.n > max_bits:
        raise CapacityError(f"sweep over n={K.n} bits exceeds the {max_bits}-bit cap")
    fid = fidelity_by_difference(K)
    D = int(np.argmax(fid[1:])) + 1
    return ResistanceReport(float(fid[D]), (D, 0), D, K.d, K.n, seed)
