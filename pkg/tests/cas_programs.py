"""Multi-threaded CAS accumulation programs shared by unit and acceptance tests."""

from __future__ import annotations

from shadowad.fpcodec import f64_bits, from_bits64
from shadowad.instrument import instrument_program
from shadowad.ir import parse_asm
from shadowad.machine import Machine

SHARED = 0x100
CONTRIB = 0x200

# Each thread adds its contribution to the shared double five times. The load
# and the CAS sit in different superblocks, so other threads can run between.
ACCUMULATE = """\
entry 0x1000
sb 0x1000 tmps: t0:F64
  t0 = LDle:F64(0x200:I64)
  PUT(8) = t0
  PUT(16) = 0x5:I64
  goto 0x2000
sb 0x1100 tmps: t0:F64
  t0 = LDle:F64(0x208:I64)
  PUT(8) = t0
  PUT(16) = 0x5:I64
  goto 0x2000
sb 0x2000 tmps: t0:F64
  t0 = LDle:F64(0x100:I64)
  PUT(24) = t0
  goto 0x2100
sb 0x2100 tmps: t0:F64 t1:F64 t2:I64 t3:I1 t4:I64
  t0 = GET:F64(24)
  t1 = AddF64(t0,GET:F64(8))
  t2 = CASle(0x100:I64 :: ReinterpF64asI64(t0) -> ReinterpF64asI64(t1))
  t3 = CmpEQ64(t2,ReinterpF64asI64(t0))
  if (Not1(t3)) goto 0x2000
  t4 = Sub64(GET:I64(16),0x1:I64)
  PUT(16) = t4
  if (CmpEQ64(t4,0x0:I64)) goto 0x3000
  goto 0x2000
sb 0x3000 tmps:
  halt
"""

# integer counter incremented through a CAS retry loop
COUNTER = """\
entry 0x1000
sb 0x1000 tmps:
  PUT(16) = 0x7:I64
  goto 0x2000
sb 0x2000 tmps: t0:I64
  t0 = LDle:I64(0x100:I64)
  PUT(24) = t0
  goto 0x2100
sb 0x2100 tmps: t0:I64 t1:I64 t2:I1 t3:I64
  t0 = CASle(0x100:I64 :: GET:I64(24) -> Add64(GET:I64(24),0x1:I64))
  t2 = CmpEQ64(t0,GET:I64(24))
  if (Not1(t2)) goto 0x2000
  t3 = Sub64(GET:I64(16),0x1:I64)
  PUT(16) = t3
  if (CmpEQ64(t3,0x0:I64)) goto 0x3000
  goto 0x2000
sb 0x3000 tmps:
  halt
"""


def accumulate_machine(contribs=((1.5, 1.0), (0.25, 2.0))) -> Machine:
    m = Machine()
    for i, (v, d) in enumerate(contribs):
        m.memory.write_int(CONTRIB + 8 * i, f64_bits(v), 8)
        m.shadow.write_int(CONTRIB + 8 * i, f64_bits(d), 8)
    return m


def shared_state(m: Machine) -> tuple[float, float]:
    return from_bits64(m.memory.read_int(SHARED, 8)), from_bits64(m.shadow.read_int(SHARED, 8))


def run_parallel(seed: int, contribs=((1.5, 1.0), (0.25, 2.0))) -> tuple[tuple[float, float], list[int]]:
    prog = instrument_program(parse_asm(ACCUMULATE))
    m = accumulate_machine(contribs)
    run = m.run_threads(prog, [0x1000, 0x1100], seed=seed)
    return shared_state(m), run.schedule


def run_sequential(contribs=((1.5, 1.0), (0.25, 2.0))) -> tuple[float, float]:
    """Oracle: the threads run one after the other."""
    prog = instrument_program(parse_asm(ACCUMULATE))
    m = accumulate_machine(contribs)
    for entry in (0x1000, 0x1100):
        m.guest = bytearray(3 * m.m_gs)
        m.run(prog, entry=entry)
    return shared_state(m)


def interleaving_count(schedule: list[int]) -> int:
    return sum(1 for a, b in zip(schedule, schedule[1:]) if a != b)
