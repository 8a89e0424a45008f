import hashlib
import random

import pytest
from hypothesis import given, settings, strategies as st

from qsha import sha256_core as core
from qsha.errors import ContractViolation


def test_matches_hashlib_on_random_messages():
    rng = random.Random(1)
    for _ in range(1000):
        msg = rng.randbytes(rng.randrange(0, 300))
        assert core.sha256(msg).hex == hashlib.sha256(msg).hexdigest()


@pytest.mark.parametrize("n", [0, 1, 55, 56, 57, 63, 64, 65, 119, 120, 128])
def test_padding_boundaries(n):
    msg = bytes(range(256))[:n] if n <= 256 else b""
    blocks = core.pad_message(msg)
    assert all(len(b) == 64 for b in blocks)
    # one block holds up to 55 message bytes
    assert len(blocks) == (n + 9 + 63) // 64
    tail = b"".join(blocks)
    assert tail[:n] == msg and tail[n] == 0x80
    assert int.from_bytes(tail[-8:], "big") == 8 * n
    assert core.sha256(msg).hex == hashlib.sha256(msg).hexdigest()


def test_empty_message():
    assert core.sha256(b"").hex == (
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855")


def test_known_vectors():
    assert core.sha256(b"abc").hex == hashlib.sha256(b"abc").hexdigest()
    assert core.sha256(b"A").hex == (
        "559aead08264d5795d3909718cdd05abd49572e84fe55590eef31a88a08fdffd")


def test_oversize_message_rejected():
    class Huge(bytes):
        def __len__(self):
            return core.MAX_MESSAGE_BYTES

    with pytest.raises(ContractViolation):
        core.pad_message(Huge())


def test_avalanche():
    rng = random.Random(5)
    for _ in range(20):
        msg = bytearray(rng.randbytes(40))
        base = int.from_bytes(core.sha256(bytes(msg)).bytes, "big")
        bit = rng.randrange(len(msg) * 8)
        msg[bit // 8] ^= 1 << (bit % 8)
        flipped = int.from_bytes(core.sha256(bytes(msg)).bytes, "big")
        assert bin(base ^ flipped).count("1") >= 100


def test_xor_feed_forward_differs_from_fips():
    block = core.pad_message(b"DMU")[0]
    h0 = core.initial_state()
    add = core.compress(h0, block)
    xor = core.compress_xor(h0, block)
    enc = core.encrypt(h0, block)
    assert add != xor
    assert xor.words == tuple(e ^ h for e, h in zip(enc.words, h0.words))


def test_digest_hex_round_trip_and_leading_zeros():
    d = core.sha256(b"DMU")
    assert core.Digest.from_hex(d.hex) == d
    assert core.Digest(bytes(32)).leading_zero_bits() == 256
    assert core.Digest(b"\x01" + bytes(31)).leading_zero_bits() == 7
    with pytest.raises(ContractViolation):
        core.Digest(b"short")


def test_state_validation():
    with pytest.raises(ContractViolation):
        core.HashState((0,) * 7)
    with pytest.raises(ContractViolation):
        core.HashState((1 << 32,) + (0,) * 7)


def test_schedule_rejects_short_block():
    with pytest.raises(ContractViolation):
        core.message_schedule(b"\x00" * 63)


@settings(max_examples=200, deadline=None)
@given(st.binary(max_size=200))
def test_property_hashlib(msg):
    assert core.sha256(msg).bytes == hashlib.sha256(msg).digest()
