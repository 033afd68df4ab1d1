"""Cases pinning the dots the engine gets wrong by design.

Each ``.ml64`` or ``.ir`` file in this package starts with ``key: value``
header comments:

name, scenario, note      identification and prose
inputs, seed-input        run configuration
math-wrappers             ``off`` compiles library internals instead of wrapped calls
value                     expected primal result (optional)
engine-dot                the wrong dot the engine produces (golden value)
correct-dot               the mathematically expected dot
status                    ``stub`` for cases that only document a scenario

A case passes iff the engine dot equals ``engine-dot`` bit for bit.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from ..fpcodec import f64_bits, from_bits64
from ..frontend import compile_source
from ..instrument import AdPolicy, instrument_program
from ..ir import parse_asm
from ..machine import Machine

_HEADER = re.compile(r"^\s*(?://|#)\s*([a-z-]+):\s*(.*)$")


def _number(text: str) -> float:
    text = text.strip()
    if text.lower().startswith("0x"):
        return from_bits64(int(text, 16))
    return float(text)


@dataclass(frozen=True)
class LimitationCase:
    name: str
    filename: str
    source: str
    scenario: str
    inputs: tuple[float, ...]
    seed_input: int
    engine_dot: float
    correct_dot: float
    value: float | None = None
    math_wrappers: bool = True
    stub: bool = False
    note: str = ""

    def __post_init__(self):
        if f64_bits(self.engine_dot) == f64_bits(self.correct_dot):
            raise ValueError(f"{self.name}: the wrong dot equals the correct one")

    @property
    def is_ir(self) -> bool:
        return self.filename.endswith(".ir")


@dataclass(frozen=True)
class CaseResult:
    case: LimitationCase
    value: float
    dot: float

    @property
    def passed(self) -> bool:
        value_ok = self.case.value is None or f64_bits(self.value) == f64_bits(self.case.value)
        return value_ok and f64_bits(self.dot) == f64_bits(self.case.engine_dot)


def parse_case(filename: str, source: str) -> LimitationCase:
    meta: dict[str, str] = {}
    for line in source.splitlines():
        m = _HEADER.match(line)
        if m is None:
            continue
        key, val = m.groups()
        meta[key] = f"{meta[key]} {val}" if key in meta else val
    try:
        return LimitationCase(
            name=meta["name"],
            filename=filename,
            source=source,
            scenario=meta["scenario"],
            inputs=tuple(float(v) for v in meta["inputs"].split(",")),
            seed_input=int(meta.get("seed-input", "0")),
            engine_dot=_number(meta["engine-dot"]),
            correct_dot=_number(meta["correct-dot"]),
            value=_number(meta["value"]) if "value" in meta else None,
            math_wrappers=meta.get("math-wrappers", "on") != "off",
            stub=meta.get("status") == "stub",
            note=meta.get("note", ""),
        )
    except KeyError as exc:
        raise ValueError(f"{filename}: missing header {exc.args[0]!r}") from None


def load_cases() -> list[LimitationCase]:
    """Every case shipped in this package, sorted by file name."""
    files = sorted(p for p in resources.files(__name__).iterdir()
                   if p.name.endswith((".ml64", ".ir")))
    return [parse_case(p.name, p.read_text()) for p in files]


def run_case(case: LimitationCase) -> CaseResult:
    if case.is_ir:
        program = parse_asm(case.source)
    else:
        program = compile_source(case.source, math_wrappers=case.math_wrappers).program
    program = instrument_program(program, AdPolicy(math_wrappers=case.math_wrappers))
    seeds = [0.0] * len(case.inputs)
    seeds[case.seed_input] = 1.0
    m = Machine(inputs=case.inputs, seeds=seeds)
    m.run(program)
    return CaseResult(case, from_bits64(m.outputs[0]), from_bits64(m.dot_outputs[0]))
