"""Pure-Python implementations of the hot loops.

Behaviour is defined here; ``_kernels.pyx`` must reproduce it bit for bit
(same gate order, same random draws, same float operation order).

Gate programs are three parallel arrays: ``kinds`` (0 = X, 1 = CNOT),
``ctrls`` and ``tgts``.  Registers hold qubit ``q`` in bit ``q``.
"""
from __future__ import annotations

import math

import numpy as np

from qsha import _rng
from qsha.sha256_core import K, MASK32

X, CNOT = 0, 1

MODE_CLASSICAL, MODE_IDEAL, MODE_NOISY = 0, 1, 2

IMPLEMENTATION = "python"


def basis_run(kinds, ctrls, tgts) -> int:
    state = 0
    for kind, c, t in zip(kinds.tolist(), ctrls.tolist(), tgts.tolist()):
        if kind == X:
            state ^= 1 << t
        elif (state >> c) & 1:
            state ^= 1 << t
    return state


def noisy_basis_shots(kinds, ctrls, tgts, threshold, seed, stream, shots):
    """Final register of every shot under post-CNOT bit-flip noise.

    Each CNOT is followed by one draw for the control flip, then one for
    the target flip.  Registers must fit in 64 bits.
    """
    states = np.zeros(shots, dtype=np.uint64)
    rng = _rng.shot_states(seed, stream, shots)
    thr = np.uint64(threshold)
    one = np.uint64(1)
    s11 = np.uint64(11)
    for kind, c, t in zip(kinds.tolist(), ctrls.tolist(), tgts.tolist()):
        tq = np.uint64(t)
        if kind == X:
            states ^= one << tq
            continue
        cq = np.uint64(c)
        states ^= ((states >> cq) & one) << tq
        flip = (_rng.next_vec(rng) >> s11) < thr
        states ^= flip.astype(np.uint64) << cq
        flip = (_rng.next_vec(rng) >> s11) < thr
        states ^= flip.astype(np.uint64) << tq
    return states


def noisy_basis_shots_big(kinds, ctrls, tgts, threshold, seed, stream, shots):
    """Same as :func:`noisy_basis_shots` for registers wider than 64 qubits."""
    program = list(zip(kinds.tolist(), ctrls.tolist(), tgts.tolist()))
    out = []
    for shot in range(shots):
        rng = _rng.SplitMix(_rng.shot_state(seed, stream, shot))
        state = 0
        for kind, c, t in program:
            if kind == X:
                state ^= 1 << t
                continue
            if (state >> c) & 1:
                state ^= 1 << t
            if (rng.next() >> 11) < threshold:
                state ^= 1 << c
            if (rng.next() >> 11) < threshold:
                state ^= 1 << t
        out.append(state)
    return out


# -- windowed XOR circuits ------------------------------------------------
#
# Window of width w: register A on qubits 2w..3w-1, B on w..2w-1, output on
# 0..w-1.  X gates load a then b, then for i = 0..w-1: CNOT(A_i -> out_i),
# CNOT(B_i -> out_i).  The output register is measured.

def _window_ideal(a, b, w):
    state = (a << (2 * w)) | (b << w)
    for i in range(w):
        if (state >> (2 * w + i)) & 1:
            state ^= 1 << i
        if (state >> (w + i)) & 1:
            state ^= 1 << i
    return state & ((1 << w) - 1)


def _window_noisy(a, b, w, shots, threshold, seed, stream):
    init = (a << (2 * w)) | (b << w)
    states = np.full(shots, init, dtype=np.uint64)
    rng = _rng.shot_states(seed, stream, shots)
    thr = np.uint64(threshold)
    one = np.uint64(1)
    s11 = np.uint64(11)
    for i in range(w):
        tq = np.uint64(i)
        for c in (2 * w + i, w + i):
            cq = np.uint64(c)
            states ^= ((states >> cq) & one) << tq
            flip = (_rng.next_vec(rng) >> s11) < thr
            states ^= flip.astype(np.uint64) << cq
            flip = (_rng.next_vec(rng) >> s11) < thr
            states ^= flip.astype(np.uint64) << tq
    out = (states & np.uint64((1 << w) - 1)).astype(np.int64)
    counts = np.bincount(out, minlength=1 << w)
    # argmax returns the first maximum, i.e. the smallest (lexicographic) bitstring
    modal = int(np.argmax(counts))
    return modal, int(counts[modal]), int(np.count_nonzero(counts))


class _XorUnit:
    """Evaluates 32-bit XORs window by window and records every window."""

    def __init__(self, mode, w, shots, threshold, seed, stream_base, trace, pos,
                 evaluator=None):
        self.evaluator = evaluator
        self.mode = mode
        self.w = w
        self.shots = shots
        self.threshold = threshold
        self.seed = seed
        self.stream_base = stream_base
        self.trace = trace
        self.pos = pos

    def __call__(self, x, y):
        w = self.w
        result = 0
        hi = 32
        tr = self.trace
        while hi > 0:
            lo = max(0, hi - w)
            width = hi - lo
            mask = (1 << width) - 1
            a = (x >> lo) & mask
            b = (y >> lo) & mask
            if self.evaluator is not None:
                dec, modal, distinct = self.evaluator(a, b, width, self.stream_base + self.pos)
            elif self.mode == MODE_CLASSICAL:
                dec, modal, distinct = a ^ b, 0, 0
            elif self.mode == MODE_IDEAL:
                dec, modal, distinct = _window_ideal(a, b, width), self.shots, 1
            else:
                dec, modal, distinct = _window_noisy(
                    a, b, width, self.shots, self.threshold, self.seed,
                    self.stream_base + self.pos)
            p = self.pos
            tr["a"][p] = a
            tr["b"][p] = b
            tr["decoded"][p] = dec
            tr["modal_count"][p] = modal
            tr["distinct"][p] = distinct
            tr["width"][p] = width
            self.pos = p + 1
            result |= dec << lo
            hi = lo
        return result


def _rotr(x, n):
    return ((x >> n) | (x << (32 - n))) & MASK32


def hybrid_compress(words, block, mode, w, shots, threshold, seed, stream_base,
                    xor_feed_forward, trace, pos, evaluator=None):
    """One SHA-256 chaining step with every XOR delegated to window circuits.

    Returns ``(new_words, new_pos)``; trace arrays are filled from ``pos``.
    ``evaluator(a, b, width, stream) -> (decoded, modal_count, distinct)``
    replaces the built-in window simulation when given.
    """
    xor = _XorUnit(mode, w, shots, threshold, seed, stream_base, trace, pos, evaluator)
    sched = [int.from_bytes(block[i:i + 4], "big") for i in range(0, 64, 4)]
    for t in range(16, 64):
        u, v = sched[t - 15], sched[t - 2]
        s0 = xor(xor(_rotr(u, 7), _rotr(u, 18)), u >> 3)
        s1 = xor(xor(_rotr(v, 17), _rotr(v, 19)), v >> 10)
        sched.append((sched[t - 16] + s0 + sched[t - 7] + s1) & MASK32)
    a, b, c, d, e, f, g, h = words
    for t in range(64):
        s1 = xor(xor(_rotr(e, 6), _rotr(e, 11)), _rotr(e, 25))
        ch = xor(e & f, ~e & g & MASK32)
        t1 = (h + s1 + ch + K[t] + sched[t]) & MASK32
        s0 = xor(xor(_rotr(a, 2), _rotr(a, 13)), _rotr(a, 22))
        maj = xor(xor(a & b, a & c), b & c)
        t2 = (s0 + maj) & MASK32
        h, g, f, e, d, c, b, a = g, f, e, (d + t1) & MASK32, c, b, a, (t1 + t2) & MASK32
    enc = (a, b, c, d, e, f, g, h)
    if xor_feed_forward:
        out = tuple(xor(p, q) for p, q in zip(enc, words))
    else:
        out = tuple((p + q) & MASK32 for p, q in zip(enc, words))
    return out, xor.pos


def anneal(weights, indptr, indices, vals, energy0, t0, t1, sweeps, seed, bits,
           verify=None):
    """Metropolis single-bit-flip annealing with geometric cooling.

    ``bits`` (int8) is the starting assignment, updated in place to the
    final one; ``energy0`` is its energy.  Couplers come as a symmetric CSR
    matrix.  ``verify(bits) -> energy`` is called after every accepted move
    when given.  Returns ``(best_bits, best_energy, final_energy, accepted, best_sweep)``.
    """
    n = len(weights)
    rng = _rng.SplitMix(_rng.shot_state(seed, 0, 0))
    w = weights.tolist()
    ip = indptr.tolist()
    ix = indices.tolist()
    jv = vals.tolist()
    x = bits.tolist()
    energy = energy0
    best = energy
    best_bits = list(x)
    best_sweep = -1
    accepted = 0
    ratio = t1 / t0
    for s in range(sweeps):
        temp = t0 * ratio ** (s / (sweeps - 1)) if sweeps > 1 else t0
        for i in range(n):
            field = w[i]
            for k in range(ip[i], ip[i + 1]):
                field += jv[k] * x[ix[k]]
            de = -field if x[i] else field
            u = rng.uniform()
            if de <= 0.0 or u < math.exp(-de / temp):
                x[i] ^= 1
                energy += de
                accepted += 1
                if verify is not None:
                    full = verify(x)
                    if abs(full - energy) > 1e-9:
                        raise AssertionError(f"incremental energy {energy} != {full}")
                if energy < best:
                    best = energy
                    best_bits = list(x)
                    best_sweep = s
    bits[:] = x
    return np.array(best_bits, dtype=np.int8), best, energy, accepted, best_sweep
