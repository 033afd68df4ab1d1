"""Compile-instrument-run pipeline and the finite-difference oracle."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..fpcodec import from_bits64
from ..frontend import Compiled, compile_source
from ..instrument import AdPolicy, instrument_program
from ..machine import DEFAULT_FUEL, Machine


@dataclass
class EngineResult:
    outputs: list[float]
    dots: list[float]
    machine: Machine
    warnings: list[tuple[int, int, str]] = field(default_factory=list)

    @property
    def output_bits(self) -> list[int]:
        return list(self.machine.outputs)

    @property
    def dot_bits(self) -> list[int]:
        return list(self.machine.dot_outputs)


def prepare(compiled: Compiled, ad: bool = True, math_wrappers: bool = True):
    """Program to execute plus the policy that collected instrumentation warnings."""
    policy = AdPolicy(math_wrappers=math_wrappers)
    prog = instrument_program(compiled.program, policy) if ad else compiled.program
    return prog, policy


def seeds_for(n: int, seed_index: int | None) -> list[float]:
    seeds = [0.0] * n
    if seed_index is not None:
        seeds[seed_index] = 1.0
    return seeds


def run_compiled(compiled: Compiled, inputs, seeds=(), ad: bool = True, math_wrappers: bool = True,
                 fuel: int = DEFAULT_FUEL, stdout=None, program=None) -> EngineResult:
    """Run ``compiled`` (instrumented unless ``ad`` is false) on ``inputs``.

    ``program`` short-circuits instrumentation when the caller already has it.
    """
    policy = None
    if program is None:
        program, policy = prepare(compiled, ad, math_wrappers)
    m = Machine(tool=ad, inputs=list(inputs), seeds=list(seeds), stdout=stdout)
    m.run(program, fuel=fuel)
    return EngineResult(
        [from_bits64(b) for b in m.outputs],
        [from_bits64(b) for b in m.dot_outputs],
        m,
        list(policy.warnings) if policy is not None else [],
    )


def engine_eval(src: str, inputs, seed_index: int | None = 0, ad: bool = True,
                math_wrappers: bool = True, opt_level: int = 0) -> EngineResult:
    compiled = compile_source(src, opt_level, math_wrappers)
    return run_compiled(compiled, inputs, seeds_for(len(inputs), seed_index), ad, math_wrappers)


def finite_diff_compiled(compiled: Compiled, inputs, seed_index: int, h: float = 1e-6) -> list[float]:
    if not h > 0:
        raise ValueError("step h must be positive")
    hi = list(map(float, inputs))
    lo = list(hi)
    hi[seed_index] += h
    lo[seed_index] -= h
    program = compiled.program
    up = run_compiled(compiled, hi, ad=False, program=program).outputs
    down = run_compiled(compiled, lo, ad=False, program=program).outputs
    return [(a - b) / (2 * h) for a, b in zip(up, down)]


def finite_diff(src: str, inputs, seed_index: int, h: float = 1e-6, opt_level: int = 0) -> list[float]:
    """Central differences of every output using uninstrumented runs."""
    return finite_diff_compiled(compile_source(src, opt_level), inputs, seed_index, h)


def rel_error(dot: float, fd: float) -> float:
    """``|dot - fd|`` scaled by ``max(1, |fd|)``."""
    return abs(dot - fd) / max(1.0, abs(fd))
