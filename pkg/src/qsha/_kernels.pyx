# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops.  Semantics are defined by ``_pykernels``."""
import numpy as np

from libc.stdint cimport uint8_t, int8_t, int32_t, int64_t, uint32_t, uint64_t
from libc.string cimport memset
from libc.stdlib cimport calloc, free
from libc.math cimport exp, pow

cdef extern from *:
    """
    #define QSHA_GOLDEN 0x9E3779B97F4A7C15ULL
    static inline uint64_t qsha_mix64(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    static inline uint64_t qsha_shot_state(uint64_t seed, uint64_t stream, uint64_t shot) {
        uint64_t base = qsha_mix64(seed + QSHA_GOLDEN * (stream + 1));
        return qsha_mix64(base ^ qsha_mix64(QSHA_GOLDEN * (shot + 1)));
    }
    static inline uint64_t qsha_next(uint64_t *s) {
        *s += QSHA_GOLDEN;
        return qsha_mix64(*s);
    }
    static inline uint32_t qsha_rotr(uint32_t x, int n) {
        return (x >> n) | (x << (32 - n));
    }
    static const uint32_t QSHA_K[64] = {
        0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
        0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
        0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
        0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
        0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
        0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
        0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
        0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2
    };
    """
    uint64_t qsha_mix64(uint64_t z) nogil
    uint64_t qsha_shot_state(uint64_t seed, uint64_t stream, uint64_t shot) nogil
    uint64_t qsha_next(uint64_t *s) nogil
    uint32_t qsha_rotr(uint32_t x, int n) nogil
    const uint32_t QSHA_K[64]

IMPLEMENTATION = "compiled"

cdef int MODE_CLASSICAL = 0
cdef int MODE_IDEAL = 1
cdef int MODE_NOISY = 2
cdef uint64_t ONE = 1


def basis_run(const uint8_t[::1] kinds, const int32_t[::1] ctrls, const int32_t[::1] tgts):
    cdef Py_ssize_t g, n = kinds.shape[0]
    cdef uint64_t state = 0
    with nogil:
        for g in range(n):
            if kinds[g] == 0:
                state ^= ONE << tgts[g]
            elif (state >> ctrls[g]) & 1:
                state ^= ONE << tgts[g]
    return state


def noisy_basis_shots(const uint8_t[::1] kinds, const int32_t[::1] ctrls,
                      const int32_t[::1] tgts, uint64_t threshold, uint64_t seed,
                      uint64_t stream, Py_ssize_t shots):
    out = np.empty(shots, dtype=np.uint64)
    cdef uint64_t[::1] res = out
    cdef Py_ssize_t shot, g, n = kinds.shape[0]
    cdef uint64_t state, rng
    cdef int c, t
    with nogil:
        for shot in range(shots):
            rng = qsha_shot_state(seed, stream, shot)
            state = 0
            for g in range(n):
                t = tgts[g]
                if kinds[g] == 0:
                    state ^= ONE << t
                    continue
                c = ctrls[g]
                if (state >> c) & 1:
                    state ^= ONE << t
                if (qsha_next(&rng) >> 11) < threshold:
                    state ^= ONE << c
                if (qsha_next(&rng) >> 11) < threshold:
                    state ^= ONE << t
            res[shot] = state
    return out


cdef struct XorCtx:
    int mode
    int w
    int shots
    uint64_t threshold
    uint64_t seed
    uint64_t stream_base
    int64_t pos
    uint32_t *ta
    uint32_t *tb
    uint32_t *td
    int32_t *tm
    int32_t *tn
    uint8_t *tw
    int32_t *counts


cdef inline uint32_t window_ideal(uint32_t a, uint32_t b, int w) nogil:
    cdef uint64_t state = ((<uint64_t>a) << (2 * w)) | ((<uint64_t>b) << w)
    cdef int i
    for i in range(w):
        if (state >> (2 * w + i)) & 1:
            state ^= ONE << i
        if (state >> (w + i)) & 1:
            state ^= ONE << i
    return <uint32_t>(state & ((ONE << w) - 1))


cdef inline uint32_t window_noisy(XorCtx *ctx, uint32_t a, uint32_t b, int w,
                                  int32_t *modal_out, int32_t *distinct_out) nogil:
    cdef uint64_t init = ((<uint64_t>a) << (2 * w)) | ((<uint64_t>b) << w)
    cdef uint64_t state, rng, mask = (ONE << w) - 1
    cdef uint64_t stream = ctx.stream_base + <uint64_t>ctx.pos
    cdef int shot, i, k, c
    cdef int32_t best = -1, distinct = 0
    cdef uint32_t modal = 0
    cdef int nout = 1 << w
    memset(ctx.counts, 0, nout * sizeof(int32_t))
    for shot in range(ctx.shots):
        rng = qsha_shot_state(ctx.seed, stream, shot)
        state = init
        for i in range(w):
            for k in range(2):
                c = 2 * w + i if k == 0 else w + i
                if (state >> c) & 1:
                    state ^= ONE << i
                if (qsha_next(&rng) >> 11) < ctx.threshold:
                    state ^= ONE << c
                if (qsha_next(&rng) >> 11) < ctx.threshold:
                    state ^= ONE << i
        ctx.counts[state & mask] += 1
    for i in range(nout):
        if ctx.counts[i] > 0:
            distinct += 1
            if ctx.counts[i] > best:
                best = ctx.counts[i]
                modal = i
    modal_out[0] = best
    distinct_out[0] = distinct
    return modal


cdef uint32_t qxor(XorCtx *ctx, uint32_t x, uint32_t y) nogil:
    cdef int hi = 32, lo, width
    cdef uint32_t mask, a, b, dec, result = 0
    cdef int32_t modal = 0, distinct = 0
    cdef int64_t p
    while hi > 0:
        lo = hi - ctx.w
        if lo < 0:
            lo = 0
        width = hi - lo
        mask = <uint32_t>((ONE << width) - 1)
        a = (x >> lo) & mask
        b = (y >> lo) & mask
        if ctx.mode == MODE_CLASSICAL:
            dec = a ^ b
            modal = 0
            distinct = 0
        elif ctx.mode == MODE_IDEAL:
            dec = window_ideal(a, b, width)
            modal = ctx.shots
            distinct = 1
        else:
            dec = window_noisy(ctx, a, b, width, &modal, &distinct)
        p = ctx.pos
        ctx.ta[p] = a
        ctx.tb[p] = b
        ctx.td[p] = dec
        ctx.tm[p] = modal
        ctx.tn[p] = distinct
        ctx.tw[p] = <uint8_t>width
        ctx.pos = p + 1
        result |= dec << lo
        hi = lo
    return result


def hybrid_compress(words, const uint8_t[::1] block, int mode, int w, int shots,
                    uint64_t threshold, uint64_t seed, uint64_t stream_base,
                    bint xor_feed_forward, trace, int64_t pos):
    cdef uint32_t[::1] ta = trace["a"]
    cdef uint32_t[::1] tb = trace["b"]
    cdef uint32_t[::1] td = trace["decoded"]
    cdef int32_t[::1] tm = trace["modal_count"]
    cdef int32_t[::1] tn = trace["distinct"]
    cdef uint8_t[::1] tw = trace["width"]
    cdef XorCtx ctx
    cdef uint32_t sched[64]
    cdef uint32_t prev[8]
    cdef uint32_t out[8]
    cdef uint32_t u, v, s0, s1, ch, maj, t1, t2
    cdef uint32_t a, b, c, d, e, f, g, h
    cdef int t, i
    if block.shape[0] != 64:
        raise ValueError("block must be 64 bytes")
    for i in range(8):
        prev[i] = <uint32_t>words[i]
    ctx.mode = mode
    ctx.w = w
    ctx.shots = shots
    ctx.threshold = threshold
    ctx.seed = seed
    ctx.stream_base = stream_base
    ctx.pos = pos
    ctx.ta = &ta[0]
    ctx.tb = &tb[0]
    ctx.td = &td[0]
    ctx.tm = &tm[0]
    ctx.tn = &tn[0]
    ctx.tw = &tw[0]
    ctx.counts = NULL
    if mode == MODE_NOISY:
        ctx.counts = <int32_t *>calloc(1 << w, sizeof(int32_t))
        if ctx.counts == NULL:
            raise MemoryError()
    try:
        with nogil:
            for t in range(16):
                sched[t] = ((<uint32_t>block[4 * t] << 24) | (<uint32_t>block[4 * t + 1] << 16)
                            | (<uint32_t>block[4 * t + 2] << 8) | <uint32_t>block[4 * t + 3])
            for t in range(16, 64):
                u = sched[t - 15]
                v = sched[t - 2]
                s0 = qxor(&ctx, qxor(&ctx, qsha_rotr(u, 7), qsha_rotr(u, 18)), u >> 3)
                s1 = qxor(&ctx, qxor(&ctx, qsha_rotr(v, 17), qsha_rotr(v, 19)), v >> 10)
                sched[t] = sched[t - 16] + s0 + sched[t - 7] + s1
            a = prev[0]; b = prev[1]; c = prev[2]; d = prev[3]
            e = prev[4]; f = prev[5]; g = prev[6]; h = prev[7]
            for t in range(64):
                s1 = qxor(&ctx, qxor(&ctx, qsha_rotr(e, 6), qsha_rotr(e, 11)), qsha_rotr(e, 25))
                ch = qxor(&ctx, e & f, (~e) & g)
                t1 = h + s1 + ch + QSHA_K[t] + sched[t]
                s0 = qxor(&ctx, qxor(&ctx, qsha_rotr(a, 2), qsha_rotr(a, 13)), qsha_rotr(a, 22))
                maj = qxor(&ctx, qxor(&ctx, a & b, a & c), b & c)
                t2 = s0 + maj
                h = g; g = f; f = e; e = d + t1
                d = c; c = b; b = a; a = t1 + t2
            out[0] = a; out[1] = b; out[2] = c; out[3] = d
            out[4] = e; out[5] = f; out[6] = g; out[7] = h
            for i in range(8):
                if xor_feed_forward:
                    out[i] = qxor(&ctx, out[i], prev[i])
                else:
                    out[i] = out[i] + prev[i]
    finally:
        free(ctx.counts)
    return tuple([out[i] for i in range(8)]), ctx.pos


def anneal(const double[::1] weights, const int64_t[::1] indptr,
           const int32_t[::1] indices, const double[::1] vals, double energy0,
           double t0, double t1, Py_ssize_t sweeps, uint64_t seed, int8_t[::1] bits,
           verify=None):
    if verify is not None:
        raise ValueError("verification is only available in the Python kernel")
    cdef Py_ssize_t n = weights.shape[0]
    best_arr = np.array(bits, dtype=np.int8, copy=True)
    cdef int8_t[::1] best_bits = best_arr
    cdef uint64_t rng = qsha_shot_state(seed, 0, 0)
    cdef double energy = energy0, best = energy0, ratio = t1 / t0
    cdef double temp, field, de, u
    cdef Py_ssize_t s, i, k
    cdef long long accepted = 0
    cdef Py_ssize_t best_sweep = -1
    with nogil:
        for s in range(sweeps):
            if sweeps > 1:
                temp = t0 * pow(ratio, <double>s / <double>(sweeps - 1))
            else:
                temp = t0
            for i in range(n):
                field = weights[i]
                for k in range(indptr[i], indptr[i + 1]):
                    field = field + vals[k] * bits[indices[k]]
                de = -field if bits[i] else field
                u = (qsha_next(&rng) >> 11) * (1.0 / 9007199254740992.0)
                if de <= 0.0 or u < exp(-de / temp):
                    bits[i] ^= 1
                    energy = energy + de
                    accepted += 1
                    if energy < best:
                        best = energy
                        best_sweep = s
                        for k in range(n):
                            best_bits[k] = bits[k]
    return best_arr, best, energy, accepted, best_sweep
