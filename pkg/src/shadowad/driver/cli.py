"""Command-line entry point.

Exit status: 0 on success, 1 when the client faults (or ``diff`` finds a
disagreement), 2 on usage, parse or compile errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..fpcodec import f64_bits, from_bits64
from ..frontend import CompileError, check, compile_source, parse
from ..frontend.generator import gen_random
from ..instrument import AdPolicy, instrument_program
from ..ir import IRParseError, format_program, parse_asm, validate
from ..machine import Machine, MachineFault
from .bench import BenchError, BenchmarkConfig, bench_burgers
from .engine import finite_diff_compiled, rel_error, run_compiled, seeds_for
from .monitor import MonitorSession, repl
from .oracle import OracleError, oracle_module


class UsageError(Exception):
    pass


def _floats(text: str | None) -> list[float]:
    if not text:
        return []
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--inputs expects comma-separated numbers, got {text!r}") from None


def _load(args):
    """``(compiled or None, program, source or None)`` for the program argument."""
    path = Path(args.program)
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    if args.asm or path.suffix == ".ir":
        prog = parse_asm(text)
        problems = validate(prog)
        if problems:
            raise UsageError("invalid IR:\n  " + "\n  ".join(problems))
        return None, prog, None
    compiled = compile_source(text, args.opt, not args.no_math_wrappers)
    return compiled, compiled.program, text


def _seeds(args, n: int) -> list[float]:
    if args.seed_input is None:
        return [0.0] * n
    if not 0 <= args.seed_input < max(n, 1):
        raise UsageError(f"--seed-input {args.seed_input} is not an input slot")
    return seeds_for(n, args.seed_input)


def _instrument(args, program, err):
    policy = AdPolicy(math_wrappers=not args.no_math_wrappers)
    out = instrument_program(program, policy)
    if args.warn_unhandled:
        for addr, idx, op in policy.warnings:
            print(f"warning: no derivative rule for {op} (sb 0x{addr:x} stmt {idx})", file=err)
    return out


def cmd_run(args, out, err) -> int:
    compiled, program, _ = _load(args)
    inputs = _floats(args.inputs)
    ad = not args.no_ad
    if ad:
        program = _instrument(args, program, err)
    if args.dump_ir:
        out.write(format_program(program) + "\n")
    m = Machine(tool=ad, inputs=inputs, seeds=_seeds(args, len(inputs)))
    try:
        m.run(program)
    except MachineFault as fault:
        print(f"fault: {fault}", file=err)
        return 1
    for i, bits in enumerate(m.outputs):
        value = repr(from_bits64(bits))
        if ad and i < len(m.dot_outputs):
            out.write(f"{value}\t{from_bits64(m.dot_outputs[i])!r}\n")
        else:
            out.write(f"{value}\n")
    return 0


def cmd_monitor(args, out, err, instream) -> int:
    compiled, program, _ = _load(args)
    inputs = _floats(args.inputs)
    program = _instrument(args, program, err)
    symbols, lines = {}, {}
    if compiled is not None:
        symbols = {n: loc.offset for n, loc in compiled.symbols.items() if loc.kind == "mem"}
        lines = compiled.lines
    m = Machine(tool=True, inputs=inputs, seeds=_seeds(args, len(inputs)))
    session = MonitorSession(program, m, symbols, lines)
    repl(session, instream, out)
    return 0


DIFF_HEADER = "program\toutput\tengine_dot\toracle_dot\tfd_dot\tmax_rel_err"


def _diff_one(name, src, compiled, inputs, seed_index, h, out, wrappers) -> bool:
    seeds = seeds_for(len(inputs), seed_index)
    engine = run_compiled(compiled, inputs, seeds, math_wrappers=wrappers)
    oracle = oracle_module(check(parse(src)), inputs, seeds, wrappers)
    fd = finite_diff_compiled(compiled, inputs, seed_index, h)
    ok = True
    for i, (d, o, f) in enumerate(zip(engine.dots, oracle.dots, fd)):
        same = f64_bits(d) == f64_bits(o)
        ok = ok and (same or oracle.limitation_hit)
        out.write(f"{name}\t{i}\t{d!r}\t{o!r}\t{f!r}\t{rel_error(d, f):.3e}\n")
    if oracle.limitation_hit:
        out.write(f"# {name}: limitation construct ({', '.join(oracle.reasons)}); dots not compared\n")
    elif len(engine.dots) != len(oracle.dots):
        ok = False
    return ok


def cmd_diff(args, out, err) -> int:
    h = args.h
    wrappers = not args.no_math_wrappers
    ok = True
    out.write(DIFF_HEADER + "\n")
    if args.generated is not None:
        for seed in range(args.generated):
            src, spec = gen_random(seed)
            compiled = compile_source(src, args.opt, wrappers)
            ok &= _diff_one(f"gen{seed}", src, compiled, spec.inputs, spec.seed_index, h, out, wrappers)
        return 0 if ok else 1
    if args.program is None:
        raise UsageError("diff needs a program or --generated N")
    if args.asm or Path(args.program).suffix == ".ir":
        raise UsageError("diff needs a minilang program")
    compiled, _, src = _load(args)
    inputs = _floats(args.inputs)
    if not inputs:
        raise UsageError("diff needs --inputs")
    seed_index = 0 if args.seed_input is None else args.seed_input
    if not 0 <= seed_index < len(inputs):
        raise UsageError(f"--seed-input {seed_index} is not an input slot")
    ok = _diff_one(Path(args.program).name, src, compiled, inputs, seed_index, h, out, wrappers)
    return 0 if ok else 1


def cmd_bench(args, out, err) -> int:
    try:
        config = BenchmarkConfig(args.nx, args.nt, args.reps)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        report = bench_burgers(config)
    except BenchError as exc:
        print(f"fault: {exc}", file=err)
        return 1
    out.write("\n".join(report.lines()) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shadowad", description="Forward-mode AD on compiled IR programs.")
    sub = p.add_subparsers(dest="command", required=True)

    def program_args(sp, optional=False):
        if optional:
            sp.add_argument("program", nargs="?", help="minilang (.ml64) or IR (.ir) file")
        else:
            sp.add_argument("program", help="minilang (.ml64) or IR (.ir) file")
        sp.add_argument("--inputs", help="comma-separated input values")
        sp.add_argument("--seed-input", type=int, help="input slot whose dot is 1")
        sp.add_argument("--no-math-wrappers", action="store_true",
                        help="compile math library internals instead of wrapped calls")
        sp.add_argument("--warn-unhandled", action="store_true",
                        help="report operations without a derivative rule")
        sp.add_argument("--asm", action="store_true", help="read the program as textual IR")
        sp.add_argument("--opt", type=int, choices=(0, 1), default=0,
                        help="0 keeps scalars in memory, 1 in guest registers")

    run = sub.add_parser("run", help="compile, instrument and execute")
    program_args(run)
    run.add_argument("--no-ad", action="store_true", help="execute without instrumentation")
    run.add_argument("--dump-ir", action="store_true", help="print the executed IR")

    mon = sub.add_parser("monitor", help="start a paused session reading commands from stdin")
    program_args(mon)

    diff = sub.add_parser("diff", help="compare engine, dual-number oracle and finite differences")
    program_args(diff, optional=True)
    diff.add_argument("--h", type=float, default=1e-6, help="finite-difference step")
    diff.add_argument("--generated", type=int, metavar="N", help="use generated programs 0..N-1")

    bench = sub.add_parser("bench", help="Burgers benchmark")
    bench.add_argument("--nx", type=int, default=20)
    bench.add_argument("--nt", type=int, default=10)
    bench.add_argument("--reps", type=int, default=1)
    return p


def main(argv=None, out=None, err=None, instream=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    instream = instream or sys.stdin
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "run":
            return cmd_run(args, out, err)
        if args.command == "monitor":
            return cmd_monitor(args, out, err, instream)
        if args.command == "diff":
            return cmd_diff(args, out, err)
        return cmd_bench(args, out, err)
    except (UsageError, CompileError, IRParseError) as exc:
        print(f"error: {exc}", file=err)
        return 2
    except (MachineFault, OracleError) as exc:
        print(f"fault: {exc}", file=err)
        return 1


if __name__ == "__main__":
    sys.exit(main())
