"""Differentiated expressions."""

from __future__ import annotations

from ..fpcodec import f32_bits, f64_bits
from ..ir.nodes import CCall, Const, Dirty, Get, ITE, Load, Op, RdTmp, const64
from ..ir.opcodes import OPCODES
from ..ir.types import F32, F64, I8, I32, V128
from .bitlogic import OP_IDS
from .layout import AdPolicy, Layout

_TWO64 = f64_bits(2.0)
_TWO32 = f32_bits(2.0)

# (lane width, operation suffix, constant 2.0 spread over the lanes it touches)
_FP_SHAPES = {
    "F64": (F64, "F64", Const(F64, _TWO64)),
    "F32": (F32, "F32", Const(F32, _TWO32)),
    "64Fx2": (V128, "64Fx2", Const(V128, (_TWO64 << 64) | _TWO64)),
    "32Fx4": (V128, "32Fx4", Const(V128, sum(_TWO32 << (32 * i) for i in range(4)))),
    "64F0x2": (V128, "64F0x2", Const(V128, _TWO64)),
    "32F0x4": (V128, "32F0x4", Const(V128, _TWO32)),
}


def _split_fp(name: str):
    for base in ("Add", "Sub", "Mul", "Div", "Sqrt", "Neg", "Abs"):
        if name.startswith(base):
            return base, name[len(base):]
    raise ValueError(name)


def differentiate_op(op: str, args, dots, policy: AdPolicy | None = None, ty=None):
    """Dot expression of ``op(*args)``; ``dots(i)`` builds the dot of operand ``i``.

    ``dots`` is called lazily so operations whose dot is a constant never
    touch their operands' shadows.
    """
    spec = OPCODES.get(op)
    if spec is None:
        if policy is not None:
            policy.warn(op)
        return Const(ty, 0)
    kind = spec.kind
    if kind in ("scalar-fp", "simd-fp", "lowest-lane"):
        base, shape = _split_fp(op)
        _, sfx, two = _FP_SHAPES[shape]
        q = args[0]
        qd = dots(0)
        if base in ("Add", "Sub"):
            return Op(op, (qd, dots(1)))
        if base == "Mul":
            return Op(f"Add{sfx}", (Op(op, (qd, args[1])), Op(op, (q, dots(1)))))
        if base == "Div":
            s, sd = args[1], dots(1)
            num = Op(f"Sub{sfx}", (Op(f"Mul{sfx}", (qd, s)), Op(f"Mul{sfx}", (q, sd))))
            return Op(op, (num, Op(f"Mul{sfx}", (s, s))))
        if base == "Sqrt":
            return Op(f"Div{sfx}", (qd, Op(f"Mul{sfx}", (two, Op(op, (q,))))))
        if base == "Neg":
            return Op(op, (qd,))
        if base == "Abs":
            w = spec.result.bits
            is_neg = Op("CmpEQ32", (Op(f"CmpF{w}", (q, Const(spec.result, 0))), Const(I32, 0x01)))
            return ITE(is_neg, Op(f"NegF{w}", (qd,)), qd)
    if kind in ("fp-convert", "reinterpret", "pack"):
        return Op(op, tuple(dots(i) for i in range(len(args))))
    if kind == "bitwise":
        base = op[:3] if op.startswith(("And", "Xor", "Not")) else op[:2]
        if base == "Not":
            return Const(spec.result, 0)
        opid = Const(I8, OP_IDS[base])
        return CCall("ad_bitlogic", (opid, args[0], args[1], dots(0), dots(1)), spec.result)
    if kind in ("integer", "compare", "int-convert"):
        return Const(spec.result, 0)
    if policy is not None:
        policy.warn(op)
    return Const(spec.result, 0)


def differentiate_expression(expr, layout: Layout, prelude: list | None = None,
                             policy: AdPolicy | None = None):
    """Dot expression of ``expr``.

    Loads read shadow memory through a dirty call, which is a statement; the
    call is appended to ``prelude`` and the result read from a fresh temporary.
    """

    def d(e):
        if isinstance(e, RdTmp):
            return RdTmp(layout.shadow(e.tmp))
        if isinstance(e, Get):
            return Get(e.offset + layout.m_gs, e.ty)
        if isinstance(e, Const):
            return Const(e.ty, 0)
        if isinstance(e, ITE):
            return ITE(e.cond, d(e.iftrue), d(e.iffalse))
        if isinstance(e, CCall):
            return Const(e.ty, 0)
        if isinstance(e, Load):
            if prelude is None:
                raise ValueError("differentiating a load needs a statement prelude")
            t = layout.fresh(e.ty)
            prelude.append(Dirty("shadow_load", (e.addr, const64(e.ty.width)), dst=t))
            return RdTmp(t)
        if isinstance(e, Op):
            return differentiate_op(e.op, e.args, lambda i: d(e.args[i]), policy, e.ty)
        raise TypeError(f"not an expression: {e!r}")

    return d(expr)
