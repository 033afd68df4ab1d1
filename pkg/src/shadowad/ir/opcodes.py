"""Opcode signatures and their AD-relevant classes.

Every opcode has a fixed operand signature and result type. The ``kind``
drives both type checking and the differentiation rule picked by the
instrumenter:

``scalar-fp``      scalar binary32/binary64 arithmetic
``simd-fp``        the same, lane-wise over a V128
``lowest-lane``    V128 ops touching only lane 0, upper lanes from operand 1
``fp-convert``     binary32 <-> binary64 conversions
``int-convert``    integer <-> floating value conversions (rounding)
``reinterpret``    bit-preserving type changes
``pack``           SIMD packing / unpacking and lane extraction
``bitwise``        And/Or/Xor/Not on 32-, 64- and 128-bit operands
``integer``        integer arithmetic, narrow logic, widening
``compare``        comparisons (I1, CmpF result codes, lane masks)
``fp-unhandled``   evaluable floating-point ops without a derivative rule
"""

from __future__ import annotations

from dataclasses import dataclass

from .types import F32, F64, I1, I8, I16, I32, I64, V128, IrType


@dataclass(frozen=True)
class OpSpec:
    name: str
    args: tuple[IrType, ...]
    result: IrType
    kind: str

    @property
    def arity(self) -> int:
        return len(self.args)


OPCODES: dict[str, OpSpec] = {}

KINDS = (
    "scalar-fp",
    "simd-fp",
    "lowest-lane",
    "fp-convert",
    "int-convert",
    "reinterpret",
    "pack",
    "bitwise",
    "integer",
    "compare",
    "fp-unhandled",
)


def _op(name: str, args: tuple[IrType, ...], result: IrType, kind: str) -> None:
    assert kind in KINDS, kind
    assert name not in OPCODES, name
    OPCODES[name] = OpSpec(name, args, result, kind)


for _t in (F32, F64):
    _w = _t.bits
    for _base in ("Add", "Sub", "Mul", "Div"):
        _op(f"{_base}F{_w}", (_t, _t), _t, "scalar-fp")
    for _base in ("Sqrt", "Neg", "Abs"):
        _op(f"{_base}F{_w}", (_t,), _t, "scalar-fp")
    _op(f"CmpF{_w}", (_t, _t), I32, "compare")

for _lw, _n in ((64, 2), (32, 4)):
    for _base in ("Add", "Sub", "Mul", "Div"):
        _op(f"{_base}{_lw}Fx{_n}", (V128, V128), V128, "simd-fp")
        _op(f"{_base}{_lw}F0x{_n}", (V128, V128), V128, "lowest-lane")
    _op(f"Sqrt{_lw}Fx{_n}", (V128,), V128, "simd-fp")
    _op(f"Sqrt{_lw}F0x{_n}", (V128,), V128, "lowest-lane")
    for _cmp in ("LT", "LE", "EQ"):
        _op(f"Cmp{_cmp}{_lw}Fx{_n}", (V128, V128), V128, "compare")
        _op(f"Cmp{_cmp}{_lw}F0x{_n}", (V128, V128), V128, "compare")

_op("F64toF32", (F64,), F32, "fp-convert")
_op("F32toF64", (F32,), F64, "fp-convert")
_op("I64StoF64", (I64,), F64, "int-convert")
_op("I32StoF64", (I32,), F64, "int-convert")
_op("F64toI64S", (F64,), I64, "int-convert")
_op("F64toI32S", (F64,), I32, "int-convert")

_op("ReinterpI64asF64", (I64,), F64, "reinterpret")
_op("ReinterpF64asI64", (F64,), I64, "reinterpret")
_op("ReinterpI32asF32", (I32,), F32, "reinterpret")
_op("ReinterpF32asI32", (F32,), I32, "reinterpret")

_op("64x2toV128", (I64, I64), V128, "pack")
_op("32x4toV128", (I32, I32, I32, I32), V128, "pack")
_op("V128to64lo", (V128,), I64, "pack")
_op("V128to64hi", (V128,), I64, "pack")
_op("64UtoV128", (I64,), V128, "pack")
_op("32UtoV128", (I32,), V128, "pack")
_op("V128to32", (V128,), I32, "pack")
_op("SetV128lo64", (V128, I64), V128, "pack")
_op("32HLto64", (I32, I32), I64, "pack")
_op("64to32", (I64,), I32, "pack")
_op("64HIto32", (I64,), I32, "pack")

for _t in (I32, I64, V128):
    _sfx = "V128" if _t is V128 else str(_t.bits)
    for _base in ("And", "Or", "Xor"):
        _op(f"{_base}{_sfx}", (_t, _t), _t, "bitwise")
    _op(f"Not{_sfx}", (_t,), _t, "bitwise")

# sub-word logic cannot hold a binary32/binary64 lane
for _t in (I8, I16):
    for _base in ("And", "Or", "Xor"):
        _op(f"{_base}{_t.bits}", (_t, _t), _t, "integer")
    _op(f"Not{_t.bits}", (_t,), _t, "integer")
_op("And1", (I1, I1), I1, "integer")
_op("Or1", (I1, I1), I1, "integer")
_op("Not1", (I1,), I1, "integer")

for _t in (I8, I16, I32, I64):
    _w = _t.bits
    for _base in ("Add", "Sub", "Mul"):
        _op(f"{_base}{_w}", (_t, _t), _t, "integer")
    for _base in ("Shl", "Shr", "Sar"):
        _op(f"{_base}{_w}", (_t, I8), _t, "integer")
    _op(f"CmpEQ{_w}", (_t, _t), I1, "compare")
    _op(f"CmpNE{_w}", (_t, _t), I1, "compare")
    for _cmp in ("LT", "LE"):
        _op(f"Cmp{_cmp}{_w}S", (_t, _t), I1, "compare")
        _op(f"Cmp{_cmp}{_w}U", (_t, _t), I1, "compare")

for _src, _dst in ((I1, I8), (I1, I32), (I1, I64), (I8, I32), (I8, I64), (I32, I64)):
    _op(f"{_src.bits}Uto{_dst.bits}", (_src,), _dst, "integer")
for _src, _dst in ((I8, I32), (I8, I64), (I32, I64)):
    _op(f"{_src.bits}Sto{_dst.bits}", (_src,), _dst, "integer")
for _src, _dst in ((I32, I1), (I64, I1), (I64, I8), (I32, I8)):
    _op(f"{_src.bits}to{_dst.bits}", (_src,), _dst, "integer")

for _name in ("SinF64", "CosF64", "TanF64", "2xm1F64"):
    _op(_name, (F64,), F64, "fp-unhandled")


def lookup(name: str) -> OpSpec | None:
    return OPCODES.get(name)
