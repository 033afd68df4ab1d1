"""Directed bit-trick cases run end to end through the instrumented machine.

Each case stores operand values and dots in memory, applies one bitwise
operation of the given width, and compares the result's shadow with a dual
number evaluation of the real function the idiom implements.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from shadowad.instrument import instrument_program
from shadowad.ir import parse_asm
from shadowad.machine import Machine

SIGN = {32: 0x80000000, 64: 0x8000000000000000}
ABS = {32: 0x7FFFFFFF, 64: 0x7FFFFFFFFFFFFFFF}
ONES = {32: 0xFFFFFFFF, 64: 0xFFFFFFFFFFFFFFFF}


def bits(x: float, lw: int) -> int:
    if lw == 64:
        return struct.unpack("<Q", struct.pack("<d", x))[0]
    return int(np.float32(x).view(np.uint32))


def dual(kind: str, y: float, yd: float, other=None):
    """Expected dot of the real operation (dual-number rule)."""
    if kind == "fabs":
        return -yd if y < 0 else yd
    if kind == "neg":
        return -yd
    if kind == "negabs":
        return yd if y < 0 else -yd
    if kind == "select":
        return yd
    if kind == "deselect":
        return 0.0
    raise ValueError(kind)


@dataclass
class Case:
    name: str
    op: str  # And/Or/Xor
    ty: str  # I32, I64, V128
    lw: int  # lane width in bits
    mask_lanes: list[int]
    val_lanes: list[int]
    dot_lanes: list[int]
    want_lanes: list[int]
    mask_left: bool = True


def _case(name, op, ty, lw, kind, values, dots, mask_left=True):
    n = {"I32": 1, "I64": 1, "V128": 128 // lw}[ty]
    values = (values * n)[:n]
    dots = (dots * n)[:n]
    mask = {"fabs": ABS[lw], "neg": SIGN[lw], "negabs": SIGN[lw], "select": ONES[lw], "deselect": 0}[kind]
    return Case(
        name, op, ty, lw, [mask] * n, [bits(v, lw) for v in values], [bits(d, lw) for d in dots],
        [bits(dual(kind, v, d), lw) for v, d in zip(values, dots)], mask_left)


KIND_OP = {"fabs": "And", "neg": "Xor", "negabs": "Or", "select": "And", "deselect": "And"}
SHAPES = [("I32", 32), ("I64", 64), ("V128", 64), ("V128", 32)]


def directed_cases() -> list[Case]:
    out = []
    for ty, lw in SHAPES:
        for kind in ("fabs", "neg", "negabs", "select"):
            for sign, mask_left in ((-1.0, True), (1.0, False)):
                values = [sign * 3.0, -sign * 1.25, sign * 0.75, 6.5]
                dots = [1.0, 2.0, -0.5, 4.0]
                out.append(_case(f"{kind}-{ty}x{lw}-{'neg' if sign < 0 else 'pos'}", KIND_OP[kind], ty, lw,
                                 kind, values, dots, mask_left))
        out.append(_case(f"deselect-{ty}x{lw}", "And", ty, lw, "deselect", [2.5], [1.0]))
    return out


def _pack(lanes, lw):
    v = 0
    for i, x in enumerate(lanes):
        v |= x << (lw * i)
    return v


def run_case(case: Case) -> tuple[int, int]:
    """Returns (engine dot bits, expected dot bits)."""
    width = {"I32": 4, "I64": 8, "V128": 16}[case.ty]
    suffix = {"I32": "32", "I64": "64", "V128": "V128"}[case.ty]
    mask, val = _pack(case.mask_lanes, case.lw), _pack(case.val_lanes, case.lw)
    dot, want = _pack(case.dot_lanes, case.lw), _pack(case.want_lanes, case.lw)
    args = "t0,t1" if case.mask_left else "t1,t0"
    src = f"""\
sb 0x0 tmps: t0:{case.ty} t1:{case.ty} t2:{case.ty}
  t0 = LDle:{case.ty}(0x1000:I64)
  t1 = LDle:{case.ty}(0x2000:I64)
  t2 = {case.op}{suffix}({args})
  STle(0x3000:I64) = t2
  halt
"""
    m = Machine()
    m.memory.write_int(0x1000, mask, width)
    m.memory.write_int(0x2000, val, width)
    m.shadow.write_int(0x2000, dot, width)
    m.run(instrument_program(parse_asm(src)))
    return m.shadow.read_int(0x3000, width), want


FABS_IDIOM = """\
sb 0x0 tmps: t0:V128 t1:V128 t2:V128
  t0 = LDle:V128(0x1000:I64)
  t1 = 64UtoV128(LDle:I64(0x2000:I64))
  t2 = AndV128(t1,t0)
  STle(0x3000:I64) = V128to64lo(t2)
  halt
"""

# f(a) = a < 0 ? 2 + a : 2 * a, selected with a compare mask
MASK_SELECT_IDIOM = """\
sb 0x0 tmps: t0:F64 t1:V128 t2:V128 t3:V128 t4:V128 t5:V128 t6:V128
  t0 = LDle:F64(0x2000:I64)
  t1 = 64UtoV128(ReinterpF64asI64(t0))
  t2 = CmpLT64F0x2(t1,0x0:V128)
  t3 = 64UtoV128(ReinterpF64asI64(AddF64(0x4000000000000000:F64,t0)))
  t4 = 64UtoV128(ReinterpF64asI64(MulF64(0x4000000000000000:F64,t0)))
  t5 = AndV128(t2,t3)
  t6 = OrV128(t5,AndV128(NotV128(t2),t4))
  STle(0x3000:I64) = V128to64lo(t6)
  halt
"""


def run_idiom(src: str, x: float, xd: float = 1.0, const=None) -> tuple[float, float]:
    m = Machine()
    if const is not None:
        m.memory.write_int(0x1000, const, 16)
    m.memory.write_int(0x2000, bits(x, 64), 8)
    m.shadow.write_int(0x2000, bits(xd, 64), 8)
    m.run(instrument_program(parse_asm(src)))
    value = struct.unpack("<d", m.memory.read(0x3000, 8))[0]
    dot = struct.unpack("<d", m.shadow.read(0x3000, 8))[0]
    return value, dot


# .long -1, 2147483647, 0, 0
FABS_IDIOM_CONST = 0xFFFFFFFF | (0x7FFFFFFF << 32)
