import struct

import pytest
from hypothesis import given, settings, strategies as st

from bittrick_cases import (
    FABS_IDIOM,
    FABS_IDIOM_CONST,
    MASK_SELECT_IDIOM,
    directed_cases,
    run_case,
    run_idiom,
)
from shadowad.fpcodec import f64_bits, from_bits64
from shadowad.instrument import (
    AND,
    OR,
    XOR,
    AdPolicy,
    Layout,
    ad_bitlogic,
    differentiate_expression,
    differentiate_op,
    instrument_program,
    instrument_superblock,
)
from shadowad.ir import (
    F64,
    I1,
    I64,
    V128,
    Cas,
    Const,
    Dirty,
    Get,
    ITE,
    Op,
    Put,
    RdTmp,
    Superblock,
    WrTmp,
    format_program,
    parse_asm,
    validate,
)
from shadowad.machine import Machine


def test_mul_rule_shape():
    sb = Superblock(0, (WrTmp(1, Op("MulF64", (RdTmp(2), RdTmp(3)))),), {1: F64, 2: F64, 3: F64})
    lay = Layout.for_superblock(sb)
    out = instrument_superblock(sb, lay)
    m = lay.m_tmp
    assert out.stmts[0] == WrTmp(1 + m, Op("AddF64", (Op("MulF64", (RdTmp(2 + m), RdTmp(3))),
                                                     Op("MulF64", (RdTmp(2), RdTmp(3 + m))))))
    assert out.stmts[1] == sb.stmts[0]


def test_put_constant_gets_zero_shadow():
    sb = Superblock(0, (Put(0, Const(F64, f64_bits(2.0))),), {})
    out = instrument_superblock(sb)
    assert out.stmts[0] == Put(1024, Const(F64, 0))


def test_integer_block_only_adds_zero_writes():
    src = """\
sb 0x0 tmps: t0:I64 t1:I64 t2:I1
  t0 = GET:I64(0)
  t1 = Add64(t0,0x5:I64)
  t2 = CmpLT64S(t0,t1)
  PUT(8) = t1
  halt
"""
    sb = parse_asm(src)[0]
    out = instrument_superblock(sb)
    originals = [s for s in out.stmts if s in sb.stmts]
    assert originals == list(sb.stmts)
    added = [s for s in out.stmts if s not in sb.stmts]
    assert added[0] == WrTmp(3, Get(1024, I64))
    for s in added[1:]:
        e = s.expr
        assert (isinstance(e, Const) and e.value == 0) or (isinstance(e, RdTmp) and e.tmp >= 3)


def test_expression_rules():
    lay = Layout(m_tmp=10)
    assert differentiate_expression(Get(0, F64), lay) == Get(1024, F64)
    c = RdTmp(0)
    assert differentiate_expression(ITE(c, RdTmp(1), RdTmp(2)), lay) == ITE(c, RdTmp(11), RdTmp(12))
    assert differentiate_expression(Const(I64, 0x4000000000000000), lay) == Const(I64, 0)


def test_load_needs_prelude():
    from shadowad.ir import Load

    with pytest.raises(ValueError):
        differentiate_expression(Load(Const(I64, 8), F64), Layout(m_tmp=4))
    pre = []
    d = differentiate_expression(Load(Const(I64, 8), F64), Layout(m_tmp=4), pre)
    assert d == RdTmp(8) and isinstance(pre[0], Dirty) and pre[0].dst == 8


def test_integer_op_rule_is_zero():
    assert differentiate_op("Add64", (RdTmp(0), RdTmp(1)), lambda i: RdTmp(10 + i)) == Const(I64, 0)


def test_unhandled_op_warns():
    pol = AdPolicy()
    pol.at(0x40, 3)
    d = differentiate_op("SinF64", (RdTmp(0),), lambda i: RdTmp(10), pol)
    assert d == Const(F64, 0)
    assert pol.warnings == [(0x40, 3, "SinF64")]
    pol.at(0x40, 4)
    assert differentiate_op("Weird", (RdTmp(0),), lambda i: RdTmp(10), pol, ty=V128) == Const(V128, 0)
    assert pol.warnings[-1] == (0x40, 4, "Weird")


def _run_op(src, inputs):
    prog = instrument_program(parse_asm(src))
    assert validate(prog, shadow_bands=True) == []
    m = Machine()
    for off, (v, d) in inputs.items():
        m.put_guest(off, v, 16 if v >> 64 else 8)
        m.put_guest(off + 1024, d, 16 if d >> 64 else 8)
    m.run(prog)
    return m


def test_lowest_lane_mul_rule():
    src = """\
sb 0x0 tmps: t0:V128 t1:V128 t2:V128
  t0 = GET:V128(0)
  t1 = GET:V128(16)
  t2 = Mul32F0x4(t0,t1)
  PUT(32) = t2
  halt
"""
    import numpy as np

    def pack(xs):
        return sum(int(np.float32(x).view(np.uint32)) << (32 * i) for i, x in enumerate(xs))

    q, s = [1.5, 2.0, 3.0, 4.0], [2.0, 5.0, 6.0, 7.0]
    qd, sd = [1.0, 10.0, 20.0, 30.0], [0.5, 1.0, 1.0, 1.0]
    m = _run_op(src, {0: (pack(q), pack(qd)), 16: (pack(s), pack(sd))})
    got = m.get_guest(32 + 1024, 16)
    want = pack([1.0 * 2.0 + 1.5 * 0.5, 10.0, 20.0, 30.0])
    assert got == want


@pytest.mark.parametrize("op,x,y,xd,yd,want", [
    ("DivF64", 3.0, 2.0, 1.0, 0.0, 0.5),
    ("DivF64", 3.0, 2.0, 0.0, 1.0, -0.75),
    ("SubF64", 3.0, 2.0, 1.0, 4.0, -3.0),
])
def test_scalar_binary_rules(op, x, y, xd, yd, want):
    src = f"sb 0x0 tmps: t0:F64\n  t0 = {op}(GET:F64(0),GET:F64(8))\n  PUT(16) = t0\n  halt\n"
    m = _run_op(src, {0: (f64_bits(x), f64_bits(xd)), 8: (f64_bits(y), f64_bits(yd))})
    assert from_bits64(m.get_guest(16 + 1024, 8)) == want


@pytest.mark.parametrize("op,x,want", [("SqrtF64", 4.0, 0.25), ("NegF64", 4.0, -1.0),
                                       ("AbsF64", -4.0, -1.0), ("AbsF64", 4.0, 1.0)])
def test_scalar_unary_rules(op, x, want):
    src = f"sb 0x0 tmps: t0:F64\n  t0 = {op}(GET:F64(0))\n  PUT(16) = t0\n  halt\n"
    m = _run_op(src, {0: (f64_bits(x), f64_bits(1.0))})
    assert from_bits64(m.get_guest(16 + 1024, 8)) == want


def test_conversion_and_reinterpret_follow_dot():
    src = """\
sb 0x0 tmps: t0:F32 t1:F64 t2:I64
  t0 = F64toF32(GET:F64(0))
  t1 = F32toF64(t0)
  t2 = ReinterpF64asI64(t1)
  PUT(16) = ReinterpI64asF64(t2)
  PUT(24) = I64StoF64(F64toI64S(GET:F64(0)))
  halt
"""
    m = _run_op(src, {0: (f64_bits(1.5), f64_bits(0.1))})
    assert from_bits64(m.get_guest(16 + 1024, 8)) == float(struct.unpack("<f", struct.pack("<f", 0.1))[0])
    assert m.get_guest(24 + 1024, 8) == 0


# ------------------------------------------------------------------ bit logic


def test_bitlogic_examples():
    assert ad_bitlogic(AND, 0x7FFFFFFFFFFFFFFF, f64_bits(-3.0), 0, f64_bits(1.0), 64) == f64_bits(-1.0)
    assert ad_bitlogic(XOR, 0x8000000000000000, f64_bits(2.0), 0, f64_bits(1.0), 64) == f64_bits(-1.0)
    assert ad_bitlogic(AND, (1 << 64) - 1, 0x1234, 0, 0xABCD, 64) == 0xABCD
    assert ad_bitlogic(AND, 0x7FFFFFFFFFFFFFFF, 0x7FFFFFFFFFFFFFFF, 5, 7, 64) == 0


def test_bitlogic_xor_mask_with_dot_is_not_negation():
    s = 0x8000000000000000
    assert ad_bitlogic(XOR, s, s, f64_bits(1.0), 0, 64) == f64_bits(-1.0)  # y is the mask
    assert ad_bitlogic(XOR, s, f64_bits(2.0), f64_bits(1.0), f64_bits(3.0), 64) == 0


def test_bitlogic_sub_lanes_of_unmatched_64bit_lane():
    x = 0x7FFFFFFF  # lane 0 abs mask, lane 1 zero
    y = 0xBF800000  # -1.0f in lane 0
    yd = 0x3F800000 | (0x40000000 << 32)
    assert ad_bitlogic(AND, x, y, 0, yd, 64) == 0xBF800000


def test_bitlogic_or_unmatched_falls_back_to_zero():
    assert ad_bitlogic(OR, f64_bits(1.0), f64_bits(2.0), 1, 1, 64) == 0


@pytest.mark.parametrize("case", directed_cases(), ids=lambda c: c.name)
def test_directed_bit_tricks(case):
    got, want = run_case(case)
    assert got == want


def test_fabs_idiom():
    value, dot = run_idiom(FABS_IDIOM, -3.0, 1.0, FABS_IDIOM_CONST)
    assert (value, dot) == (3.0, -1.0)


@pytest.mark.parametrize("x,value,dot", [(-1.0, 1.0, 1.0), (3.0, 6.0, 2.0)])
def test_mask_select_idiom(x, value, dot):
    assert run_idiom(MASK_SELECT_IDIOM, x) == (value, dot)


@settings(max_examples=300)
@given(st.sampled_from([AND, OR, XOR]), st.integers(0, 2**64 - 1), st.integers(0, 2**64 - 1),
       st.integers(0, 2**64 - 1), st.integers(0, 2**64 - 1), st.sampled_from([32, 64, 128]))
def test_bitlogic_output_is_a_dot_lane_or_zero(op, x, y, xd, yd, width):
    m = (1 << width) - 1
    r = ad_bitlogic(op, x & m, y & m, xd & m, yd & m, width)
    assert 0 <= r <= m


# ------------------------------------------------------------------------ CAS

CAS_SRC = """\
sb 0x0 tmps: t0:I64 t1:I64
  t0 = CASle(0x100:I64 :: GET:I64(0) -> GET:I64(8))
  PUT(16) = t0
  halt
"""


def _cas_machine(expd_shadow):
    m = Machine()
    one, half = f64_bits(1.0), f64_bits(0.5)
    m.memory.write_int(0x100, one, 8)
    m.shadow.write_int(0x100, half, 8)
    m.put_guest(0, one, 8)
    m.put_guest(8, f64_bits(2.0), 8)
    m.put_guest(1024, expd_shadow, 8)
    m.put_guest(1024 + 8, f64_bits(1.0), 8)
    return m


def test_cas_rewrite_layout():
    sb = parse_asm(CAS_SRC)[0]
    lay = Layout.for_superblock(sb)
    out = instrument_superblock(sb, lay)
    fresh = [s.tmp for s in out.stmts if isinstance(s, WrTmp) and s.tmp >= 2 * lay.m_tmp]
    assert fresh and not any(isinstance(s, Cas) for s in out.stmts)
    assert validate(instrument_program(parse_asm(CAS_SRC)), shadow_bands=True) == []


def test_cas_success_writes_value_and_shadow():
    m = _cas_machine(f64_bits(0.5))
    m.run(instrument_program(parse_asm(CAS_SRC)))
    assert m.memory.read_int(0x100, 8) == f64_bits(2.0)
    assert m.shadow.read_int(0x100, 8) == f64_bits(1.0)
    assert m.get_guest(16, 8) == f64_bits(1.0)
    assert m.get_guest(16 + 1024, 8) == f64_bits(0.5)


def test_cas_dot_mismatch_writes_nothing():
    m = _cas_machine(0)
    m.run(instrument_program(parse_asm(CAS_SRC)))
    assert m.memory.read_int(0x100, 8) == f64_bits(1.0)
    assert m.shadow.read_int(0x100, 8) == f64_bits(0.5)
    assert m.get_guest(16, 8) == f64_bits(1.0)


def test_uninstrumented_cas_ignores_shadow():
    m = _cas_machine(0)
    m.run(parse_asm(CAS_SRC))
    assert m.memory.read_int(0x100, 8) == f64_bits(2.0)
    assert m.shadow.read_int(0x100, 8) == f64_bits(0.5)


# -------------------------------------------------------------- dirty routing


def test_x87_and_math_dirty_routing():
    src = """\
sb 0x0 tmps: t0:F64 t1:F64 t2:F64
  t0 = GET:F64(0)
  DIRTY x87_store80(0x500:I64,t0)
  t1 = DIRTY x87_load80(0x500:I64)
  t2 = DIRTY math_sin(t1)
  PUT(8) = t2
  halt
"""
    import math

    prog = instrument_program(parse_asm(src))
    text = format_program(prog)
    assert "x87_shadow_store80" in text and "x87_shadow_load80" in text and "mathdot_sin" in text
    m = Machine()
    m.put_guest(0, f64_bits(1.0), 8)
    m.put_guest(1024, f64_bits(1.0), 8)
    m.run(prog)
    assert from_bits64(m.get_guest(8, 8)) == math.sin(1.0)
    assert from_bits64(m.get_guest(8 + 1024, 8)) == math.cos(1.0) * 1.0

    pol = AdPolicy(math_wrappers=False)
    prog = instrument_program(parse_asm(src), pol)
    m = Machine()
    m.put_guest(0, f64_bits(1.0), 8)
    m.put_guest(1024, f64_bits(1.0), 8)
    m.run(prog)
    assert m.get_guest(8 + 1024, 8) == 0
    assert pol.warnings and pol.warnings[0][2] == "math_sin"


def test_other_dirty_destination_gets_zero_shadow():
    src = "sb 0x0 tmps: t0:F64\n  t0 = DIRTY read_input(0x0:I64)\n  PUT(0) = t0\n  halt\n"
    sb = parse_asm(src)[0]
    out = instrument_superblock(sb)
    assert out.stmts[0] == WrTmp(1, Const(F64, 0))


# ------------------------------------------------------------- invariants

_ARITH = ["AddF64", "SubF64", "MulF64", "DivF64"]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(_ARITH), st.integers(0, 40), st.integers(0, 40)), min_size=1,
                max_size=10),
       st.floats(0.5, 4.0), st.floats(0.5, 4.0), st.integers(-4, 4))
def test_non_interference_and_dot_homogeneity(ops, x, y, k):
    lines = ["  t0 = GET:F64(0)", "  t1 = GET:F64(8)"]
    for i, (op, a, b) in enumerate(ops, start=2):
        lines.append(f"  t{i} = {op}(t{a % i},t{b % i})")
    n = len(ops) + 1
    types = " ".join(f"t{i}:F64" for i in range(n + 1))
    src = f"sb 0x0 tmps: {types}\n" + "\n".join(lines) + f"\n  PUT(16) = t{n}\n  halt\n"
    plain, inst = parse_asm(src), instrument_program(parse_asm(src))

    def run(prog, seed):
        m = Machine()
        m.put_guest(0, f64_bits(x), 8)
        m.put_guest(8, f64_bits(y), 8)
        m.put_guest(1024, f64_bits(seed), 8)
        m.run(prog)
        return m.get_guest(16, 8), from_bits64(m.get_guest(16 + 1024, 8))

    v0, _ = run(plain, 0.0)
    v1, d1 = run(inst, 1.0)
    assert v0 == v1
    # scaling the seed by a power of two scales every dot exactly
    _, dk = run(inst, 2.0 ** k)
    if d1 == d1 and abs(d1) < 1e300 and abs(d1) > 1e-300:
        assert dk == d1 * 2.0 ** k
