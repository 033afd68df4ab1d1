"""Evaluation semantics for every opcode in the table.

Values are raw bit patterns (non-negative ints of the result width).
Floating-point arithmetic runs on host doubles, which are IEEE binary64 with
round-to-nearest-even; binary32 results are computed in double and rounded
once, which is exact for +, -, *, / and sqrt because 53 >= 2*24 + 2.
"""

from __future__ import annotations

import math
from typing import Callable

from ..fpcodec import f32_bits, f64_bits, from_bits32, from_bits64
from ..ieee import fdiv, fsqrt
from ..ir.opcodes import OPCODES

M32 = 0xFFFFFFFF
M64 = 0xFFFFFFFFFFFFFFFF
S32 = 1 << 31
S64 = 1 << 63
INDEFINITE64 = 0x8000000000000000
INDEFINITE32 = 0x80000000

SEMANTICS: dict[str, Callable[..., int]] = {}


_F64_BIN = {
    "Add": lambda x, y: x + y,
    "Sub": lambda x, y: x - y,
    "Mul": lambda x, y: x * y,
    "Div": fdiv,
}


def _f64_binop(fn):
    return lambda a, b: f64_bits(fn(from_bits64(a), from_bits64(b)))


def _f32_binop(fn):
    return lambda a, b: f32_bits(fn(from_bits32(a), from_bits32(b)))


for _name, _fn in _F64_BIN.items():
    SEMANTICS[f"{_name}F64"] = _f64_binop(_fn)
    SEMANTICS[f"{_name}F32"] = _f32_binop(_fn)

SEMANTICS["SqrtF64"] = lambda a: f64_bits(fsqrt(from_bits64(a)))
SEMANTICS["SqrtF32"] = lambda a: f32_bits(fsqrt(from_bits32(a)))
SEMANTICS["NegF64"] = lambda a: a ^ S64
SEMANTICS["NegF32"] = lambda a: a ^ S32
SEMANTICS["AbsF64"] = lambda a: a & (M64 ^ S64)
SEMANTICS["AbsF32"] = lambda a: a & (M32 ^ S32)


def _cmpf(x: float, y: float) -> int:
    if x != x or y != y:
        return 0x45
    if x < y:
        return 0x01
    if x == y:
        return 0x40
    return 0x00


SEMANTICS["CmpF64"] = lambda a, b: _cmpf(from_bits64(a), from_bits64(b))
SEMANTICS["CmpF32"] = lambda a, b: _cmpf(from_bits32(a), from_bits32(b))


# ------------------------------------------------------------------ SIMD lanes


def _split(v: int, lw: int):
    m = (1 << lw) - 1
    return [(v >> (lw * i)) & m for i in range(128 // lw)]


def _join(parts, lw: int) -> int:
    out = 0
    for i, p in enumerate(parts):
        out |= p << (lw * i)
    return out


def _lanewise(scalar, lw):
    def run(a, b):
        return _join([scalar(x, y) for x, y in zip(_split(a, lw), _split(b, lw))], lw)

    return run


def _lowest(scalar, lw):
    m = (1 << lw) - 1

    def run(a, b):
        return (a & ~m & ((1 << 128) - 1)) | scalar(a & m, b & m)

    return run


def _lanewise1(scalar, lw):
    return lambda a: _join([scalar(x) for x in _split(a, lw)], lw)


def _lowest1(scalar, lw):
    m = (1 << lw) - 1
    return lambda a: (a & ~m & ((1 << 128) - 1)) | scalar(a & m)


_CMP_PRED = {
    "LT": lambda x, y: x < y,
    "LE": lambda x, y: x <= y,
    "EQ": lambda x, y: x == y,
}

for _lw, _n, _fw, _unpack in ((64, 2, "F64", from_bits64), (32, 4, "F32", from_bits32)):
    for _base in ("Add", "Sub", "Mul", "Div"):
        _scalar = SEMANTICS[f"{_base}{_fw}"]
        SEMANTICS[f"{_base}{_lw}Fx{_n}"] = _lanewise(_scalar, _lw)
        SEMANTICS[f"{_base}{_lw}F0x{_n}"] = _lowest(_scalar, _lw)
    SEMANTICS[f"Sqrt{_lw}Fx{_n}"] = _lanewise1(SEMANTICS[f"Sqrt{_fw}"], _lw)
    SEMANTICS[f"Sqrt{_lw}F0x{_n}"] = _lowest1(SEMANTICS[f"Sqrt{_fw}"], _lw)
    _ones = (1 << _lw) - 1
    for _c, _pred in _CMP_PRED.items():

        def _mask(a, b, _pred=_pred, _unpack=_unpack, _ones=_ones):
            return _ones if _pred(_unpack(a), _unpack(b)) else 0

        SEMANTICS[f"Cmp{_c}{_lw}Fx{_n}"] = _lanewise(_mask, _lw)
        SEMANTICS[f"Cmp{_c}{_lw}F0x{_n}"] = _lowest(_mask, _lw)


# ----------------------------------------------------------------- conversions


def _to_int_rne(x: float, bits: int) -> int:
    """Round to nearest even; NaN or out of range gives the indefinite value."""
    indefinite = 1 << (bits - 1)
    if x != x or x in (math.inf, -math.inf):
        return indefinite
    r = round(x)
    if not -(1 << (bits - 1)) <= r < (1 << (bits - 1)):
        return indefinite
    return r & ((1 << bits) - 1)


def _signed(v: int, bits: int) -> int:
    return v - (1 << bits) if v >> (bits - 1) else v


SEMANTICS["F64toF32"] = lambda a: f32_bits(from_bits64(a))
SEMANTICS["F32toF64"] = lambda a: f64_bits(from_bits32(a))
SEMANTICS["I64StoF64"] = lambda a: f64_bits(float(_signed(a, 64)))
SEMANTICS["I32StoF64"] = lambda a: f64_bits(float(_signed(a, 32)))
SEMANTICS["F64toI64S"] = lambda a: _to_int_rne(from_bits64(a), 64)
SEMANTICS["F64toI32S"] = lambda a: _to_int_rne(from_bits64(a), 32)

for _name in ("ReinterpI64asF64", "ReinterpF64asI64", "ReinterpI32asF32", "ReinterpF32asI32"):
    SEMANTICS[_name] = lambda a: a

SEMANTICS["64x2toV128"] = lambda hi, lo: (hi << 64) | lo
SEMANTICS["32x4toV128"] = lambda a3, a2, a1, a0: (a3 << 96) | (a2 << 64) | (a1 << 32) | a0
SEMANTICS["V128to64lo"] = lambda v: v & M64
SEMANTICS["V128to64hi"] = lambda v: v >> 64
SEMANTICS["64UtoV128"] = lambda a: a
SEMANTICS["32UtoV128"] = lambda a: a
SEMANTICS["V128to32"] = lambda v: v & M32
SEMANTICS["SetV128lo64"] = lambda v, x: (v & ~M64 & ((1 << 128) - 1)) | x
SEMANTICS["32HLto64"] = lambda hi, lo: (hi << 32) | lo
SEMANTICS["64to32"] = lambda a: a & M32
SEMANTICS["64HIto32"] = lambda a: a >> 32


# -------------------------------------------------------------- integer/bitwise


def _int_ops(suffix: str, bits: int):
    m = (1 << bits) - 1
    SEMANTICS[f"And{suffix}"] = lambda a, b: a & b
    SEMANTICS[f"Or{suffix}"] = lambda a, b: a | b
    SEMANTICS[f"Xor{suffix}"] = lambda a, b: a ^ b
    SEMANTICS[f"Not{suffix}"] = lambda a: a ^ m


for _suffix, _bits in (("32", 32), ("64", 64), ("V128", 128), ("8", 8), ("16", 16), ("1", 1)):
    _int_ops(_suffix, _bits)

for _bits in (8, 16, 32, 64):
    _m = (1 << _bits) - 1
    SEMANTICS[f"Add{_bits}"] = lambda a, b, _m=_m: (a + b) & _m
    SEMANTICS[f"Sub{_bits}"] = lambda a, b, _m=_m: (a - b) & _m
    SEMANTICS[f"Mul{_bits}"] = lambda a, b, _m=_m: (a * b) & _m
    SEMANTICS[f"Shl{_bits}"] = lambda a, s, _m=_m, _b=_bits: (a << s) & _m if s < _b else 0
    SEMANTICS[f"Shr{_bits}"] = lambda a, s, _b=_bits: a >> s if s < _b else 0
    SEMANTICS[f"Sar{_bits}"] = lambda a, s, _m=_m, _b=_bits: (_signed(a, _b) >> min(s, _b - 1)) & _m
    SEMANTICS[f"CmpEQ{_bits}"] = lambda a, b: int(a == b)
    SEMANTICS[f"CmpNE{_bits}"] = lambda a, b: int(a != b)
    SEMANTICS[f"CmpLT{_bits}U"] = lambda a, b: int(a < b)
    SEMANTICS[f"CmpLE{_bits}U"] = lambda a, b: int(a <= b)
    SEMANTICS[f"CmpLT{_bits}S"] = lambda a, b, _b=_bits: int(_signed(a, _b) < _signed(b, _b))
    SEMANTICS[f"CmpLE{_bits}S"] = lambda a, b, _b=_bits: int(_signed(a, _b) <= _signed(b, _b))

for _src, _dst in ((1, 8), (1, 32), (1, 64), (8, 32), (8, 64), (32, 64)):
    SEMANTICS[f"{_src}Uto{_dst}"] = lambda a: a
for _src, _dst in ((8, 32), (8, 64), (32, 64)):
    SEMANTICS[f"{_src}Sto{_dst}"] = lambda a, _s=_src, _d=_dst: _signed(a, _s) & ((1 << _d) - 1)
for _src, _dst in ((32, 1), (64, 1), (64, 8), (32, 8)):
    SEMANTICS[f"{_src}to{_dst}"] = lambda a, _d=_dst: a & ((1 << _d) - 1)


# ------------------------------------------------------- evaluable, no AD rule


def _host_unary(fn):
    def run(a):
        x = from_bits64(a)
        try:
            return f64_bits(fn(x))
        except (ValueError, OverflowError):
            return f64_bits(math.nan)

    return run


SEMANTICS["SinF64"] = _host_unary(math.sin)
SEMANTICS["CosF64"] = _host_unary(math.cos)
SEMANTICS["TanF64"] = _host_unary(math.tan)
SEMANTICS["2xm1F64"] = _host_unary(lambda x: math.expm1(x * math.log(2.0)))

_missing = set(OPCODES) - set(SEMANTICS)
assert not _missing, _missing


def evaluate(op: str, *args: int) -> int:
    try:
        fn = SEMANTICS[op]
    except KeyError:
        raise KeyError(op) from None
    return fn(*args)
