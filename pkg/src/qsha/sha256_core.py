"""Bit-exact SHA-256 (FIPS 180-4) written around the Davies-Meyer chain.

The 64-round block cipher ``encrypt`` is exposed separately from the
feed-forward so callers can evaluate both the FIPS chain
``H_i = E(H_{i-1}) + H_{i-1}`` and the generic XOR form.

This module is deliberately plain Python: it is the reference the
accelerated hybrid pipeline is checked against.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List

from qsha.errors import ContractViolation

MASK32 = 0xFFFFFFFF
BLOCK_BYTES = 64
MAX_MESSAGE_BYTES = 1 << 61

H0 = (
    0x6A09E667, 0xBB67AE85, 0x3C6EF372, 0xA54FF53A,
    0x510E527F, 0x9B05688C, 0x1F83D9AB, 0x5BE0CD19,
)

K = (
    0x428A2F98, 0x71374491, 0xB5C0FBCF, 0xE9B5DBA5, 0x3956C25B, 0x59F111F1, 0x923F82A4, 0xAB1C5ED5,
    0xD807AA98, 0x12835B01, 0x243185BE, 0x550C7DC3, 0x72BE5D74, 0x80DEB1FE, 0x9BDC06A7, 0xC19BF174,
    0xE49B69C1, 0xEFBE4786, 0x0FC19DC6, 0x240CA1CC, 0x2DE92C6F, 0x4A7484AA, 0x5CB0A9DC, 0x76F988DA,
    0x983E5152, 0xA831C66D, 0xB00327C8, 0xBF597FC7, 0xC6E00BF3, 0xD5A79147, 0x06CA6351, 0x14292967,
    0x27B70A85, 0x2E1B2138, 0x4D2C6DFC, 0x53380D13, 0x650A7354, 0x766A0ABB, 0x81C2C92E, 0x92722C85,
    0xA2BFE8A1, 0xA81A664B, 0xC24B8B70, 0xC76C51A3, 0xD192E819, 0xD6990624, 0xF40E3585, 0x106AA070,
    0x19A4C116, 0x1E376C08, 0x2748774C, 0x34B0BCB5, 0x391C0CB3, 0x4ED8AA4A, 0x5B9CCA4F, 0x682E6FF3,
    0x748F82EE, 0x78A5636F, 0x84C87814, 0x8CC70208, 0x90BEFFFA, 0xA4506CEB, 0xBEF9A3F7, 0xC67178F2,
)


@dataclass(frozen=True)
class HashState:
    """The eight 32-bit chaining words H_i."""

    words: tuple

    def __post_init__(self):
        if len(self.words) != 8 or any(not 0 <= w <= MASK32 for w in self.words):
            raise ContractViolation("HashState needs eight 32-bit words")

    def to_bytes(self) -> bytes:
        return b"".join(w.to_bytes(4, "big") for w in self.words)

    def hex(self) -> str:
        return self.to_bytes().hex()


@dataclass(frozen=True)
class Digest:
    bytes: bytes

    def __post_init__(self):
        if len(self.bytes) != 32:
            raise ContractViolation("a digest is exactly 32 bytes")

    @property
    def hex(self) -> str:
        return self.bytes.hex()

    @classmethod
    def from_hex(cls, text: str) -> "Digest":
        return cls(bytes.fromhex(text))

    @classmethod
    def from_state(cls, state: HashState) -> "Digest":
        return cls(state.to_bytes())

    def leading_zero_bits(self) -> int:
        value = int.from_bytes(self.bytes, "big")
        return 256 - value.bit_length()

    def __str__(self) -> str:
        return self.hex


def initial_state() -> HashState:
    return HashState(H0)


def rotr(x: int, n: int) -> int:
    return ((x >> n) | (x << (32 - n))) & MASK32


def pad_message(message: bytes) -> List[bytes]:
    """Split ``message`` into 64-byte blocks after FIPS padding.

    A single 1 bit, zeros, then the 64-bit big-endian bit length.
    """
    length = len(message)
    if length >= MAX_MESSAGE_BYTES:
        raise ContractViolation(f"message of {length} bytes exceeds the 2**61 byte limit")
    zeros = (BLOCK_BYTES - (length + 9) % BLOCK_BYTES) % BLOCK_BYTES
    padded = bytes(message) + b"\x80" + b"\x00" * zeros + (length * 8).to_bytes(8, "big")
    return [padded[i:i + BLOCK_BYTES] for i in range(0, len(padded), BLOCK_BYTES)]


def message_schedule(block: bytes) -> List[int]:
    if len(block) != BLOCK_BYTES:
        raise ContractViolation(f"block must be {BLOCK_BYTES} bytes, got {len(block)}")
    w = [int.from_bytes(block[i:i + 4], "big") for i in range(0, BLOCK_BYTES, 4)]
    for t in range(16, 64):
        x, y = w[t - 15], w[t - 2]
        s0 = rotr(x, 7) ^ rotr(x, 18) ^ (x >> 3)
        s1 = rotr(y, 17) ^ rotr(y, 19) ^ (y >> 10)
        w.append((w[t - 16] + s0 + w[t - 7] + s1) & MASK32)
    return w


def encrypt(prev: HashState, block: bytes) -> HashState:
    """E_block(prev): the 64 rounds keyed by the block's message schedule."""
    w = message_schedule(block)
    a, b, c, d, e, f, g, h = prev.words
    for t in range(64):
        s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25)
        ch = (e & f) ^ (~e & g)
        t1 = (h + s1 + ch + K[t] + w[t]) & MASK32
        s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22)
        maj = (a & b) ^ (a & c) ^ (b & c)
        t2 = (s0 + maj) & MASK32
        h, g, f, e, d, c, b, a = g, f, e, (d + t1) & MASK32, c, b, a, (t1 + t2) & MASK32
    return HashState((a, b, c, d, e, f, g, h))


def compress(prev: HashState, block: bytes) -> HashState:
    """One FIPS chaining step; the feed-forward is word-wise addition mod 2**32."""
    enc = encrypt(prev, block)
    return HashState(tuple((x + y) & MASK32 for x, y in zip(enc.words, prev.words)))


def compress_xor(prev: HashState, block: bytes) -> HashState:
    """Generic Davies-Meyer step with an XOR feed-forward (not FIPS)."""
    enc = encrypt(prev, block)
    return HashState(tuple(x ^ y for x, y in zip(enc.words, prev.words)))


def chain(blocks: Iterable[bytes], state: HashState = None) -> HashState:
    state = initial_state() if state is None else state
    for block in blocks:
        state = compress(state, block)
    return state


def sha256(message: bytes) -> Digest:
    return Digest.from_state(chain(pad_message(message)))

