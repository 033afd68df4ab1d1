"""Dot propagation through bitwise And/Or/Xor.

Compilers implement fabs, negation and branch-free selection with integer
logic on float bit patterns. The rule here recognizes those patterns per
lane, looking at 64-bit lanes first and at 32-bit sub-lanes of any 64-bit
lane that matched nothing:

select      AND with all-ones keeps the other operand's dot, AND with zero
            gives zero, OR with a zero operand carrying a zero dot keeps the
            other operand's dot.
arithmetic  AND with 0b01..1 is fabs, OR with 0b10..0 is -fabs, XOR with
            0b10..0 is negation. OR/XOR only count when the 0b10..0 operand's
            dot is zero, which disambiguates -(-0.0).
otherwise   zero.

Negating a dot flips its sign bit, so results stay bit-exact.
"""

from __future__ import annotations

AND, OR, XOR = 0, 1, 2
OP_IDS = {"And": AND, "Or": OR, "Xor": XOR}


def _lane(op: int, x: int, y: int, xd: int, yd: int, lw: int):
    """Dot of one lane, or None when no pattern applies."""
    ones = (1 << lw) - 1
    sign = 1 << (lw - 1)
    absmask = ones >> 1
    if op == AND:
        if x == ones:
            return yd
        if y == ones:
            return xd
        if x == 0 or y == 0:
            return 0
        if x == absmask and y == absmask:
            return 0  # both operands are NaN patterns
        if x == absmask:
            return yd ^ sign if y & sign else yd
        if y == absmask:
            return xd ^ sign if x & sign else xd
        return None
    if op == OR:
        if x == 0 and xd == 0:
            return yd
        if y == 0 and yd == 0:
            return xd
        if x == sign and xd == 0:
            return yd if y & sign else yd ^ sign
        if y == sign and yd == 0:
            return xd if x & sign else xd ^ sign
        return None
    if op == XOR:
        if x == sign and xd == 0:
            return yd ^ sign
        if y == sign and yd == 0:
            return xd ^ sign
        return None
    raise ValueError(f"unknown bitwise op id {op}")


def classify_lane(op: int, x: int, y: int, xd: int, yd: int, lw: int) -> str:
    """Name of the pattern a lane falls under, for diagnostics and tests."""
    ones = (1 << lw) - 1
    sign = 1 << (lw - 1)
    absmask = ones >> 1
    if _lane(op, x, y, xd, yd, lw) is None:
        return "none"
    if op == AND:
        if ones in (x, y):
            return "select"
        if 0 in (x, y):
            return "zero"
        if x == y == absmask:
            return "nan"
        return "fabs"
    if op == OR:
        if (x == 0 and xd == 0) or (y == 0 and yd == 0):
            return "select"
        return "negabs"
    return "neg"


def ad_bitlogic(op: int, x: int, y: int, xd: int, yd: int, width: int) -> int:
    """Dot bits of ``x <op> y`` for operands of ``width`` bits (32, 64 or 128)."""
    if width not in (32, 64, 128):
        raise ValueError(f"unsupported width {width}")
    if width == 32:
        r = _lane(op, x, y, xd, yd, 32)
        return 0 if r is None else r
    out = 0
    m64 = (1 << 64) - 1
    m32 = (1 << 32) - 1
    for i in range(width // 64):
        sh = 64 * i
        lx, ly, lxd, lyd = (x >> sh) & m64, (y >> sh) & m64, (xd >> sh) & m64, (yd >> sh) & m64
        r = _lane(op, lx, ly, lxd, lyd, 64)
        if r is None:
            r = 0
            for j in (0, 32):
                s = _lane(op, (lx >> j) & m32, (ly >> j) & m32, (lxd >> j) & m32, (lyd >> j) & m32, 32)
                if s is not None:
                    r |= s << j
        out |= r << sh
    return out


def ccall_ad_bitlogic(ty, op, x, y, xd, yd) -> int:
    """CCall entry point; the result type fixes the width."""
    return ad_bitlogic(op, x, y, xd, yd, ty.bits)
