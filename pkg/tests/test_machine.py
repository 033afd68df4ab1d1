import io

import pytest

from shadowad.fpcodec import f64_bits, from_bits64
from shadowad.ir import parse_asm
from shadowad.machine import Machine, MachineFault
from shadowad.machine.ops import SEMANTICS

ADD = """\
entry 0x24f270
sb 0x24f270 tmps: t1:I32 t2:I32 t3:I32
  ------ IMark(0x24f275, 7) ------
  t3 = GET:I32(0)
  t2 = GET:I32(12)
  t1 = Add32(t3,t2)
  PUT(0) = t1
  halt
"""


def test_add_block():
    m = Machine()
    m.put_guest(0, 7, 4)
    m.put_guest(12, 5, 4)
    m.run(parse_asm(ADD))
    assert m.get_guest(0, 4) == 12


def test_halt_only_leaves_state():
    m = Machine()
    m.put_guest(8, 0xDEAD, 2)
    before = bytes(m.guest)
    m.run(parse_asm("sb 0x0 tmps:\n  halt\n"))
    assert bytes(m.guest) == before and m.halted


def test_false_exit_falls_through():
    prog = parse_asm("""\
sb 0x0 tmps:
  if (0x0:I1) goto 0x10
  PUT(0) = 0x1:I64
  goto 0x10
sb 0x10 tmps:
  halt
""")
    m = Machine()
    m.run(prog)
    assert m.get_guest(0, 8) == 1


def test_unhandled_opcode_faults():
    prog = parse_asm("sb 0x0 tmps: t0:F64\n  t0 = FooF64:F64(0x0:F64)\n  halt\n")
    with pytest.raises(MachineFault, match="unhandled opcode FooF64"):
        Machine().run(prog)


def test_fuel_exhaustion_faults():
    prog = parse_asm("sb 0x0 tmps:\n  goto 0x0\n")
    with pytest.raises(MachineFault) as info:
        Machine().run(prog, fuel=50)
    assert info.value.kind == "fuel"


def test_unknown_dirty_faults():
    prog = parse_asm("sb 0x0 tmps:\n  DIRTY nothing_here()\n  halt\n")
    with pytest.raises(MachineFault, match="unknown dirty call"):
        Machine().run(prog)


def test_fall_off_end_faults():
    prog = parse_asm("sb 0x0 tmps:\n  if (0x0:I1) goto 0x0\n")
    with pytest.raises(MachineFault, match="fell off"):
        Machine().run(prog)


def test_store_f64_load_i64_is_reinterpretation():
    prog = parse_asm("""\
sb 0x0 tmps: t0:I64
  STle(0x5000:I64) = 0x4000000000000000:F64
  t0 = LDle:I64(0x5000:I64)
  PUT(0) = t0
  PUT(8) = LDle:I8(0x5007:I64)
  halt
""")
    m = Machine()
    m.run(prog)
    assert m.get_guest(0, 8) == SEMANTICS["ReinterpF64asI64"](f64_bits(2.0))
    assert m.get_guest(8, 1) == 0x40  # most significant byte at the highest address


def test_cas_step_shadow_success_and_failure():
    one, half, two = f64_bits(1.0), f64_bits(0.5), f64_bits(2.0)
    m = Machine()
    m.memory.write_int(0x100, one, 8)
    m.shadow.write_int(0x100, half, 8)
    old, ok = m.cas_step(0x100, one, two, 8, half, one, compare_shadow=True)
    assert ok and old == one
    assert m.memory.read_int(0x100, 8) == two and m.shadow.read_int(0x100, 8) == one

    m = Machine()
    m.memory.write_int(0x100, one, 8)
    m.shadow.write_int(0x100, half, 8)
    old, ok = m.cas_step(0x100, one, two, 8, 0, one, compare_shadow=True)
    assert not ok and old == one
    assert m.memory.read_int(0x100, 8) == one and m.shadow.read_int(0x100, 8) == half


def test_cas_step_plain_mismatch():
    m = Machine()
    m.memory.write_int(0x100, 5, 8)
    old, ok = m.cas_step(0x100, 6, 7, 8)
    assert (old, ok) == (5, False) and m.memory.read_int(0x100, 8) == 5


def test_dirty_client_requests_and_x87():
    prog = parse_asm("""\
sb 0x0 tmps: t0:I64
  STle(0x2000:I64) = 0x3ff0000000000000:I64
  DIRTY dg_set_dot(0x1000:I64,0x2000:I64,0x8:I64)
  DIRTY dg_get_dot(0x3000:I64,0x3008:I64,0x8:I64)
  DIRTY x87_store80(0x4000:I64,0x3ff0000000000000:I64)
  t0 = DIRTY x87_load80(0x4000:I64)
  PUT(0) = t0
  halt
""")
    m = Machine()
    m.memory.write_int(0x3008, 0xFFFF, 8)
    m.run(prog)
    assert m.shadow.read(0x1000, 8) == (f64_bits(1.0)).to_bytes(8, "little")
    assert m.memory.read_int(0x3008, 8) == 0  # unseeded shadow reads +0.0
    assert m.get_guest(0, 8) == f64_bits(1.0)
    assert m.memory.read(0x4000, 10) == bytes(7) + b"\x80\xff\x3f"


def test_client_requests_are_noops_outside_tool():
    prog = parse_asm("""\
sb 0x0 tmps:
  DIRTY dg_set_dot(0x1000:I64,0x2000:I64,0x8:I64)
  halt
""")
    m = Machine(tool=False)
    m.memory.write_int(0x2000, 0x1234, 8)
    m.run(prog)
    assert m.shadow.pages_allocated == 0


def test_duplicate_dirty_registration():
    m = Machine()
    with pytest.raises(ValueError):
        m.register_dirty("print_f64", lambda m, b: None)
    m.register_dirty("mine", lambda m, b: b + 1)
    prog = parse_asm("sb 0x0 tmps: t0:I64\n  t0 = DIRTY mine(0x4:I64)\n  PUT(0) = t0\n  halt\n")
    m.run(prog)
    assert m.get_guest(0, 8) == 5


def test_print_and_inputs():
    prog = parse_asm("""\
sb 0x0 tmps: t0:F64
  t0 = DIRTY read_input(0x0:I64)
  DIRTY print_f64(MulF64(t0,t0))
  halt
""")
    out = io.StringIO()
    m = Machine(inputs=[1.5], stdout=out)
    m.run(prog)
    assert out.getvalue() == "2.25\n"
    with pytest.raises(MachineFault):
        Machine().run(prog)


def test_guarded_dirty_skipped():
    prog = parse_asm("sb 0x0 tmps:\n  if (0x0:I1) DIRTY print_f64(0x0:I64)\n  halt\n")
    m = Machine()
    m.run(prog)
    assert m.outputs == []


@pytest.mark.parametrize("op,args,want", [
    ("AddF64", (1.5, 2.25), 3.75),
    ("DivF64", (1.0, 0.0), float("inf")),
    ("DivF64", (-1.0, 0.0), float("-inf")),
    ("SqrtF64", (4.0,), 2.0),
])
def test_scalar_fp_semantics(op, args, want):
    assert from_bits64(SEMANTICS[op](*map(f64_bits, args))) == want


def test_lane_semantics():
    lo, hi = f64_bits(3.0), f64_bits(5.0)
    v = (hi << 64) | lo
    w = (f64_bits(7.0) << 64) | f64_bits(2.0)
    r = SEMANTICS["Mul64F0x2"](v, w)
    assert r & ((1 << 64) - 1) == f64_bits(6.0) and r >> 64 == hi
    r = SEMANTICS["Mul64Fx2"](v, w)
    assert r >> 64 == f64_bits(35.0)
    assert SEMANTICS["CmpLT64F0x2"](v, w) == (hi << 64) | 0
    assert SEMANTICS["CmpLT64Fx2"](v, w) == ((1 << 64) - 1) << 64


def test_conversions():
    assert SEMANTICS["F64toI64S"](f64_bits(2.5)) == 2
    assert SEMANTICS["F64toI64S"](f64_bits(-3.5)) == (-4) & ((1 << 64) - 1)
    assert SEMANTICS["F64toI64S"](f64_bits(float("nan"))) == 1 << 63
    assert SEMANTICS["I64StoF64"]((-2) & ((1 << 64) - 1)) == f64_bits(-2.0)
    assert SEMANTICS["CmpF64"](f64_bits(1.0), f64_bits(2.0)) == 0x01
    assert SEMANTICS["CmpF64"](f64_bits(float("nan")), f64_bits(2.0)) == 0x45


def test_integer_semantics():
    assert SEMANTICS["Sar64"](1 << 63, 63) == (1 << 64) - 1
    assert SEMANTICS["Shl32"](1, 40) == 0
    assert SEMANTICS["8Sto64"](0x80) == (1 << 64) - 128
    assert SEMANTICS["CmpLT64S"]((1 << 64) - 1, 0) == 1
