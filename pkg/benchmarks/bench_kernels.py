"""Time the compiled kernels against the pure-Python fallback.

Each case runs on both implementations, checks that the outputs are
identical, and prints the best wall time of ``--repeat`` runs.

    python benchmarks/bench_kernels.py [--repeat 3] [--quick]
"""
import argparse
import sys
import time

import numpy as np

from qsha import _pykernels, _rng, annealer, hybrid, qsim
from qsha._accel import compiled
from qsha.sha256_core import H0, pad_message


def best_time(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def compress_case(mode, shots, noise):
    block = pad_message(b"benchmark block")[0]
    thr = _rng.flip_threshold(noise)
    n = hybrid.XORS_PER_BLOCK * 4

    def run(mod):
        trace = hybrid.XorTrace.allocate(hybrid.XorBackend(), n)
        words, _ = mod.hybrid_compress(H0, block, mode, 8, shots, thr, 1, 0, False,
                                       trace.arrays(), 0)
        return tuple(words), trace.decoded.tobytes(), trace.modal_count.tobytes()
    return run


def shots_case(shots):
    circ = hybrid.xor_circuit("01101010", "01110100")
    prog = circ.program()
    thr = qsim.NoiseModel(0.05).threshold
    return lambda mod: np.asarray(mod.noisy_basis_shots(*prog, thr, 3, 0, shots)).tobytes()


def anneal_case(width, sweeps):
    q, _ = annealer.build_xor_qubo(width)
    sched = annealer.AnnealSchedule(sweeps=sweeps, seed=2)
    return lambda mod: annealer.solve_anneal(q, sched, impl=mod)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller workloads")
    args = ap.parse_args(argv)
    if compiled is None:
        print("compiled kernels are not built; nothing to compare", file=sys.stderr)
        return 1
    shots = 64 if args.quick else 1022
    cases = [
        ("compress ideal (1 block)", compress_case(1, shots, 0.0)),
        (f"compress noisy (1 block, {shots} shots)", compress_case(2, shots, 0.05)),
        (f"24-qubit noisy shots x{shots * 10}", shots_case(shots * 10)),
        ("anneal width 4", anneal_case(4, 200 if args.quick else 2000)),
    ]
    print(f"{'case':<36} {'compiled':>11} {'python':>11} {'speedup':>9}")
    for name, fn in cases:
        tc, oc = best_time(lambda: fn(compiled), args.repeat)
        tp, op = best_time(lambda: fn(_pykernels), 1 if not args.quick else args.repeat)
        if oc != op:
            print(f"{name}: outputs differ", file=sys.stderr)
            return 2
        print(f"{name:<36} {tc * 1e3:9.2f}ms {tp * 1e3:9.2f}ms {tp / tc:8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
