"""Command-line entry point.

Exit codes: 0 success, 2 usage error, 3 contract violation, 4 capacity
exceeded, 5 unsupported gate, 6 infeasible request, 7 assumption required,
8 malformed input file.

Every stochastic command takes ``--seed`` (default from ``QSHA_SEED``, else
0) and echoes it.  ``--format json`` emits one JSON record per line.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from qsha import annealer, energy_model, hybrid, qhash, qsim
from qsha._accel import IMPLEMENTATION
from qsha.errors import ContractViolation, QshaError
from qsha.sha256_core import sha256

BACKENDS = {"classical": hybrid.CLASSICAL, "quantum-ideal": hybrid.QUANTUM_IDEAL,
            "quantum-noisy": hybrid.QUANTUM_NOISY}


def _emit(ctx, record: dict, lines):
    if ctx.obj["format"] == "json":
        click.echo(json.dumps(record, sort_keys=True))
    else:
        for line in lines:
            click.echo(line)


def _kv(d: dict) -> str:
    return " ".join(f"{k}={v}" for k, v in d.items())


def seed_option(f):
    return click.option("--seed", type=int, default=0, envvar="QSHA_SEED", show_default=True,
                        help="Master seed (env QSHA_SEED).")(f)


def backend_options(f):
    f = click.option("--backend", type=click.Choice(list(BACKENDS)), default="classical",
                     show_default=True)(f)
    f = click.option("--window", type=int, default=8, show_default=True,
                     help="Bits per XOR circuit window.")(f)
    f = click.option("--shots", type=int, default=hybrid.DEFAULT_SHOTS, show_default=True)(f)
    f = click.option("--p", "flip_prob", type=float, default=0.05, show_default=True,
                     help="CNOT bit-flip probability (quantum-noisy only).")(f)
    f = click.option("--method", type=click.Choice(["basis", "dense"]), default="basis",
                     show_default=True)(f)
    return seed_option(f)


def _make_backend(backend, window, shots, flip_prob, method, seed) -> hybrid.XorBackend:
    kind = BACKENDS[backend]
    if kind == hybrid.QUANTUM_NOISY:
        return hybrid.XorBackend.noisy(flip_prob, shots=shots, seed=seed, window_bits=window,
                                       method=method)
    return hybrid.XorBackend(kind, shots=shots, window_bits=window, seed=seed, method=method)


def _read_message(message, file, hex_bytes) -> bytes:
    given = [x is not None for x in (message, file, hex_bytes)]
    if sum(given) != 1:
        raise click.UsageError("give exactly one of --message, --file, --hex")
    if message is not None:
        try:
            return message.encode("latin-1")
        except UnicodeEncodeError as exc:
            raise click.UsageError("--message must be 8-bit text; use --hex or --file") from exc
    if file is not None:
        return Path(file).read_bytes()
    try:
        return bytes.fromhex(hex_bytes)
    except ValueError as exc:
        raise click.UsageError(f"--hex: {exc}") from exc


@click.group()
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text",
              show_default=True, help="Output format.")
@click.pass_context
def cli(ctx, fmt):
    """Simulated hybrid quantum-classical SHA-256 toolkit."""
    ctx.ensure_object(dict)
    ctx.obj["format"] = fmt


@cli.command("hash")
@click.option("--message", help="Literal text, hashed as 8-bit character bytes.")
@click.option("--file", type=click.Path(exists=True, dir_okay=False))
@click.option("--hex", "hex_bytes", help="Message as hexadecimal bytes.")
@backend_options
@click.option("--feed-forward", type=click.Choice(["add", "xor"]), default="add",
              show_default=True, help="'xor' is the generic Davies-Meyer chain, not SHA-256.")
@click.option("--audit", is_flag=True, help="Print the XOR trace summary.")
@click.option("--trace-out", type=click.Path(dir_okay=False), help="Write the JSONL trace here.")
@click.pass_context
def cmd_hash(ctx, message, file, hex_bytes, backend, window, shots, flip_prob, method, seed,
             feed_forward, audit, trace_out):
    """Hash a message, delegating XORs to the chosen backend."""
    data = _read_message(message, file, hex_bytes)
    be = _make_backend(backend, window, shots, flip_prob, method, seed)
    digest, trace = hybrid.hybrid_sha256(data, be, feed_forward=feed_forward)
    record = {"command": "hash", "message_bytes": len(data), "feed_forward": feed_forward,
              **be.describe(), "digest": digest.hex}
    lines = [digest.hex]
    params = _kv({"backend": be.kind, "window_bits": be.window_bits,
                  "shots": record["shots"], "p": record["cnot_flip_prob"], "seed": seed,
                  "method": method, "feed_forward": feed_forward})
    lines.append(f"# {params}")
    summary = trace.summary()
    if feed_forward == "add":
        record["matches_reference"] = digest == sha256(data)
    if audit or be.kind == hybrid.QUANTUM_NOISY:
        record.update({f"trace_{k}": v for k, v in summary.items()})
        lines.append(f"agreement_rate {summary['agreement_rate']:.6f} "
                     f"({summary['agreed']}/{summary['windows']} windows)")
    if audit:
        lines.append("trace " + _kv(summary))
        if "matches_reference" in record:
            lines.append(f"matches_reference {str(record['matches_reference']).lower()}")
        bad = [r for r in trace.records() if not r.agreed][:20]
        for r in bad:
            lines.append(f"disagree #{r.index}: {r.a} ^ {r.b} -> {r.decoded}")
    if trace_out:
        Path(trace_out).write_text("\n".join(trace.iter_jsonl()) + "\n")
        record["trace_out"] = trace_out
        lines.append(f"trace written to {trace_out}")
    _emit(ctx, record, lines)


@cli.command("audit")
@click.argument("trace_file", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def cmd_audit(ctx, trace_file):
    """Summarize a JSONL XOR trace written by hash --trace-out."""
    with open(trace_file) as fh:
        trace = hybrid.XorTrace.from_jsonl(fh)
    summary = trace.summary()
    summary.pop("blocks")
    disagreements = [r._asdict() for r in trace.records() if not r.agreed]
    record = {"command": "audit", "trace": trace_file, **trace.backend, **summary,
              "disagreements": disagreements}
    lines = [_kv(trace.backend), _kv(summary)]
    lines += [f"disagree #{r['index']}: {r['a']} ^ {r['b']} -> {r['decoded']}"
              for r in disagreements]
    _emit(ctx, record, lines)


@cli.group("circuit")
def circuit_group():
    """Build, export and run XOR circuits in the plain-text gate format."""


def _histogram_lines(hist: qsim.ShotHistogram):
    return [f"{bits} {count}" for bits, count in hist.most_common()]


@circuit_group.command("xor")
@click.argument("a")
@click.argument("b")
@click.option("--out", type=click.Path(dir_okay=False), help="Circuit file to write.")
@click.option("--shots", type=int, default=hybrid.DEFAULT_SHOTS, show_default=True)
@click.option("--p", "flip_prob", type=float, default=None, help="CNOT bit-flip probability.")
@click.option("--dense", is_flag=True, help="Simulate with the dense statevector path.")
@seed_option
@click.pass_context
def cmd_circuit_xor(ctx, a, b, out, shots, flip_prob, dense, seed):
    """Export the XOR circuit for operands A and B and simulate it."""
    circ = hybrid.xor_circuit(a, b)
    text = qsim.dumps(circ, comment=f"xor of {a} and {b}; output on qubits 0..{len(a) - 1}")
    if out:
        Path(out).write_text(text)
    noise = qsim.NoiseModel(flip_prob) if flip_prob is not None else None
    hist = qsim.run(circ, shots, noise, seed, method="dense" if dense else "basis")
    decoded = hybrid.decode_majority(hist)
    record = {"command": "circuit-xor", "a": a, "b": b, "qubits": circ.num_qubits,
              "x_gates": circ.count(qsim.X), "cnot_gates": circ.count(qsim.CNOT),
              "shots": shots, "cnot_flip_prob": flip_prob or 0.0, "seed": seed,
              "method": "dense" if dense else "basis", "histogram": hist.counts,
              "decoded": decoded, "out": out}
    lines = [] if out else [text.rstrip("\n")]
    if out:
        lines.append(f"circuit written to {out}")
    lines.append(f"# qubits={circ.num_qubits} x={record['x_gates']} cnot={record['cnot_gates']} "
                 f"shots={shots} p={record['cnot_flip_prob']} seed={seed} method={record['method']}")
    lines += _histogram_lines(hist)
    lines.append(f"decoded {decoded}")
    _emit(ctx, record, lines)


@circuit_group.command("run")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--shots", type=int, default=hybrid.DEFAULT_SHOTS, show_default=True)
@click.option("--p", "flip_prob", type=float, default=None)
@click.option("--dense", is_flag=True)
@seed_option
@click.pass_context
def cmd_circuit_run(ctx, path, shots, flip_prob, dense, seed):
    """Simulate a circuit file."""
    circ = qsim.loads(Path(path).read_text())
    noise = qsim.NoiseModel(flip_prob) if flip_prob is not None else None
    method = "dense" if dense else "basis"
    hist = qsim.run(circ, shots, noise, seed, method=method)
    record = {"command": "circuit-run", "path": path, "qubits": circ.num_qubits,
              "shots": shots, "cnot_flip_prob": flip_prob or 0.0, "seed": seed,
              "method": method, "histogram": hist.counts,
              "decoded": hybrid.decode_majority(hist)}
    lines = [f"# qubits={circ.num_qubits} shots={shots} p={record['cnot_flip_prob']} "
             f"seed={seed} method={method}"]
    lines += _histogram_lines(hist)
    _emit(ctx, record, lines)


@cli.group("qhash")
def qhash_group():
    """Quantum hash states, fidelities and key-set resistance."""


def _keyset(n, keys, d, seed):
    if keys:
        try:
            values = tuple(int(k) for k in keys.split(","))
        except ValueError as exc:
            raise click.UsageError(f"--keys: {exc}") from exc
        return qhash.KeySet(values, n), "explicit"
    if d is None:
        raise click.UsageError("give --keys or --d")
    return qhash.generate_key_set(d, n, seed), "generated"


def keyset_options(f):
    f = click.option("--n", type=int, required=True, help="Message bit-width.")(f)
    f = click.option("--keys", help="Comma-separated key set.")(f)
    f = click.option("--d", type=int, help="Generate this many keys instead.")(f)
    return seed_option(f)


@qhash_group.command("delta")
@keyset_options
@click.option("--cap", type=int, default=qhash.SWEEP_CAP, show_default=True)
@click.pass_context
def cmd_qhash_delta(ctx, n, keys, d, seed, cap):
    """Worst-case fidelity over all distinct message pairs."""
    K, origin = _keyset(n, keys, d, seed)
    rep = qhash.delta_of_keyset(K, cap, seed=seed)
    record = {"command": "qhash-delta", **rep.to_dict(), "keys": list(K.keys),
              "key_origin": origin}
    lines = [f"delta {rep.delta:.12g}", f"arg_pair {rep.arg_pair[0]} {rep.arg_pair[1]}",
             f"difference {rep.difference}",
             f"# n={K.n} d={K.d} keys={','.join(map(str, K.keys))} seed={seed}"]
    _emit(ctx, record, lines)


@qhash_group.command("fidelity")
@keyset_options
@click.option("--m1", type=int, required=True)
@click.option("--m2", type=int, required=True)
@click.pass_context
def cmd_qhash_fidelity(ctx, n, keys, d, seed, m1, m2):
    K, origin = _keyset(n, keys, d, seed)
    fid = qhash.fidelity(m1, m2, K)
    record = {"command": "qhash-fidelity", "fidelity": fid, "m1": m1, "m2": m2, "n": n,
              "d": K.d, "keys": list(K.keys), "key_origin": origin, "seed": seed}
    _emit(ctx, record, [f"fidelity {fid:.12g}",
                        f"# n={n} d={K.d} keys={','.join(map(str, K.keys))} seed={seed}"])


@qhash_group.command("state")
@keyset_options
@click.option("--m", type=int, required=True)
@click.pass_context
def cmd_qhash_state(ctx, n, keys, d, seed, m):
    K, origin = _keyset(n, keys, d, seed)
    st = qhash.qhash(m, K)
    pairs = [[float(c), float(s)] for c, s in st.pairs]
    record = {"command": "qhash-state", "m": m, "n": n, "keys": list(K.keys),
              "key_origin": origin, "seed": seed, "pairs": pairs, "norm": st.norm()}
    lines = [f"{k:>6} {c: .12f} {s: .12f}" for k, (c, s) in zip(K.keys, pairs)]
    lines.append(f"# norm={st.norm():.15f} seed={seed}")
    _emit(ctx, record, lines)


@cli.group("anneal")
def anneal_group():
    """QUBO ground states by enumeration or simulated annealing."""


def anneal_options(f):
    f = click.option("--exhaustive", is_flag=True, help="Exact enumeration instead of annealing.")(f)
    f = click.option("--t0", type=float, default=2.0, show_default=True)(f)
    f = click.option("--t1", type=float, default=0.01, show_default=True)(f)
    f = click.option("--sweeps", type=int, default=2000, show_default=True)(f)
    return seed_option(f)


def _solve(ctx, q, roles, exhaustive, t0, t1, sweeps, seed, extra):
    if exhaustive:
        ground, states = annealer.solve_exhaustive(q)
        record = {**extra, "solver": "exhaustive", "ground_energy": ground,
                  "ground_states": ["".join(map(str, s)) for s in states]}
        lines = [f"ground_energy {ground:g}", f"ground_states {len(states)}"]
        if roles:
            lines.append("# " + " ".join(roles))
        lines += ["".join(map(str, s)) for s in states]
    else:
        sched = annealer.AnnealSchedule(t0, t1, sweeps, seed)
        res = annealer.solve_anneal(q, sched)
        record = {**extra, "solver": "anneal", "t0": t0, "t1": t1, "sweeps": sweeps,
                  "seed": seed, "assignment": "".join(map(str, res.assignment)),
                  **res.summary()}
        lines = [f"energy {res.energy:g}", "assignment " + "".join(map(str, res.assignment)),
                 f"# t0={t0} t1={t1} sweeps={sweeps} seed={seed} accepted={res.accepted} "
                 f"best_sweep={res.best_sweep}"]
    _emit(ctx, record, lines)


@anneal_group.command("xor")
@click.option("--width", type=int, default=1, show_default=True)
@click.option("--export", type=click.Path(dir_okay=False), help="Write the QUBO text file.")
@anneal_options
@click.pass_context
def cmd_anneal_xor(ctx, width, export, exhaustive, t0, t1, sweeps, seed):
    """Solve the built-in XOR QUBO of the given bit-width."""
    q, roles = annealer.build_xor_qubo(width)
    if export:
        Path(export).write_text(annealer.dumps(q))
    _solve(ctx, q, roles, exhaustive, t0, t1, sweeps, seed,
           {"command": "anneal-xor", "width": width, "roles": roles, "export": export})


@anneal_group.command("solve")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@anneal_options
@click.pass_context
def cmd_anneal_solve(ctx, path, exhaustive, t0, t1, sweeps, seed):
    """Solve a QUBO text file."""
    q = annealer.loads(Path(path).read_text())
    _solve(ctx, q, None, exhaustive, t0, t1, sweeps, seed,
           {"command": "anneal-solve", "path": path, "num_vars": q.num_vars})


def _profile(config, classical_source, per_hash_joules):
    if config:
        profile = energy_model.load_profile(Path(config).read_text())
    else:
        profile = energy_model.EnergyProfile.from_table(classical_source)
    if per_hash_joules is not None:
        profile = energy_model.EnergyProfile(
            profile.classical_network_twh_per_year, profile.classical_co2_tons_per_year,
            profile.quantum_kwh_per_year, profile.miner_count,
            energy_model.Tagged(energy_model.Fraction(str(per_hash_joules)),
                                energy_model.USER_ASSUMPTION))
    return profile


@cli.command("mine")
@click.option("--header", help="Header as literal 8-bit text.")
@click.option("--header-hex", help="Header as hexadecimal bytes.")
@click.option("--difficulty", type=int, default=8, show_default=True,
              help="Required leading zero bits.")
@click.option("--max-nonce", type=int, default=1 << 16, show_default=True)
@click.option("--reference", is_flag=True, help="Use the plain reference hash, no backend.")
@backend_options
@click.option("--per-hash-joules", type=float, help="Assumed energy per hash evaluation.")
@click.option("--classical-source", type=click.Choice(["80", "110", "91"]), default="80",
              show_default=True)
@click.pass_context
def cmd_mine(ctx, header, header_hex, difficulty, max_nonce, reference, backend, window, shots,
             flip_prob, method, seed, per_hash_joules, classical_source):
    """Toy proof-of-work search with optional energy attribution."""
    data = _read_message(header, None, header_hex)
    be = None if reference else _make_backend(backend, window, shots, flip_prob, method, seed)
    res = hybrid.pow_search(data, difficulty, be, max_nonce)
    attempts = res.attempts if res else max_nonce + 1
    record = {"command": "mine", "header_bytes": len(data), "difficulty_bits": difficulty,
              "max_nonce": max_nonce, "found": res is not None, "attempts": attempts,
              **(be.describe() if be else {"backend": "reference", "seed": seed})}
    lines = []
    if res:
        record.update({"nonce": res.nonce, "digest": res.digest.hex,
                       "xor_windows": res.xor_windows, "agreement_rate": res.agreement_rate})
        lines += [f"nonce {res.nonce}", f"digest {res.digest.hex}", f"attempts {attempts}"]
        if be is not None:
            lines.append(f"agreement_rate {res.agreement_rate:.6f} ({res.xor_windows} windows)")
    else:
        lines += ["not found", f"attempts {attempts}"]
    lines.append(f"# difficulty={difficulty} max_nonce={max_nonce} "
                 f"backend={record['backend']} seed={seed}")
    if per_hash_joules is not None:
        profile = _profile(None, int(classical_source), per_hash_joules)
        figs = energy_model.attribute_mining_energy(attempts, profile)
        record["energy"] = [f.to_dict() for f in figs]
        lines += [f.render() for f in figs]
    _emit(ctx, record, lines)


@cli.command("energy")
@click.option("--classical-source", type=click.Choice(["80", "110", "91"]), default="80",
              show_default=True, help="Which published network estimate (TWh/year) to use.")
@click.option("--config", type=click.Path(exists=True, dir_okay=False),
              help="JSON profile with explicit source fields.")
@click.option("--attempts", type=int, help="Hash attempts to attribute energy to.")
@click.option("--per-hash-joules", type=float, help="Assumed energy per hash evaluation.")
@click.pass_context
def cmd_energy(ctx, classical_source, config, attempts, per_hash_joules):
    """Classical versus quantum energy comparison with source tags."""
    profile = _profile(config, int(classical_source), per_hash_joules)
    report = energy_model.compare(profile)
    record = {"command": "energy", "classical_source": None if config else int(classical_source),
              "config": config, **report.to_dict()}
    lines = [report.render()]
    if attempts is not None:
        figs = energy_model.attribute_mining_energy(attempts, profile)
        record["attempts"] = attempts
        record["attribution"] = [f.to_dict() for f in figs]
        lines += [f.render() for f in figs]
    _emit(ctx, record, lines)


cli.add_command(cmd_energy, "energy-report")


@cli.command("info")
@click.pass_context
def cmd_info(ctx):
    """Report which kernel implementation is active."""
    _emit(ctx, {"command": "info", "kernels": IMPLEMENTATION}, [f"kernels {IMPLEMENTATION}"])


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="qsha", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except QshaError as exc:
        click.echo(f"error: {exc}", err=True)
        return exc.exit_code
    except (IndexError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return ContractViolation.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
