"""Counter-based splitmix64 streams.

Both kernel implementations draw from these streams so that a given
``(seed, stream, shot)`` triple produces the same random numbers in the
compiled core and in the pure-Python fallback.
"""
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def shot_state(seed: int, stream: int, shot: int) -> int:
    """Initial generator state for one shot of one stream."""
    base = mix64((seed + GOLDEN * (stream + 1)) & MASK64)
    return mix64(base ^ mix64((GOLDEN * (shot + 1)) & MASK64))


def flip_threshold(p: float) -> int:
    # draw >> 11 is uniform on [0, 2**53); p * 2**53 is exact for doubles
    return int(p * 9007199254740992.0)


class SplitMix:
    """Scalar stream; ``next()`` advances and returns a 64-bit draw."""

    __slots__ = ("state",)

    def __init__(self, state: int):
        self.state = state

    def next(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def uniform(self) -> float:
        return (self.next() >> 11) * (1.0 / 9007199254740992.0)


# Vectorised variants over a batch of shots (numpy uint64 wraps on overflow).

_G = np.uint64(GOLDEN)
_V1 = np.uint64(_M1)
_V2 = np.uint64(_M2)


def mix64_vec(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _V1
    z = (z ^ (z >> np.uint64(27))) * _V2
    return z ^ (z >> np.uint64(31))


def shot_states(seed: int, stream: int, shots: int) -> np.ndarray:
    base = np.uint64(mix64((seed + GOLDEN * (stream + 1)) & MASK64))
    idx = np.arange(1, shots + 1, dtype=np.uint64)
    return mix64_vec(base ^ mix64_vec(idx * _G))


def next_vec(states: np.ndarray) -> np.ndarray:
    """Advance ``states`` in place and return the draws."""
    states += _G
    return mix64_vec(states)
