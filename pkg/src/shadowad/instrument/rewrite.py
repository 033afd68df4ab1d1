"""Statement-level instrumentation of superblocks and programs."""

from __future__ import annotations

from ..ir.nodes import (
    Cas,
    Const,
    Dirty,
    Exit,
    Halt,
    IMark,
    Load,
    Op,
    Program,
    Put,
    RdTmp,
    Store,
    StoreG,
    Superblock,
    WrTmp,
    const64,
)
from ..ir.types import I1, I64
from ..ir.validate import M_GS, type_of
from ..mathwrap import WRAPPED
from .differentiate import differentiate_expression
from .layout import AdPolicy, Layout

# dirty calls whose results carry no derivative; their shadows are zeroed
PASS_THROUGH = frozenset({
    "dg_set_dot", "dg_get_dot", "print_f64", "record_dot", "read_input", "read_seed",
    "shadow_load", "shadow_store",
})


def rewrite_cas(stmt: Cas, layout: Layout, policy: AdPolicy | None = None) -> list:
    """Replace a CAS by a sequence comparing both the value and its shadow.

    The write to memory and to shadow memory happens only if both match. All
    statements land in one superblock, so no other thread can run between the
    comparison and the writes.
    """
    ty = layout.types[stmt.old]
    w = ty.width
    out: list = []

    def d(e):
        return differentiate_expression(e, layout, out, policy)

    ta = layout.fresh(I64)
    out.append(WrTmp(ta, stmt.addr))
    te = layout.fresh(ty)
    out.append(WrTmp(te, stmt.expected))
    tn = layout.fresh(ty)
    out.append(WrTmp(tn, stmt.new))
    ted = layout.fresh(ty)
    out.append(WrTmp(ted, d(stmt.expected)))
    tnd = layout.fresh(ty)
    out.append(WrTmp(tnd, d(stmt.new)))
    addr = RdTmp(ta)
    out.append(WrTmp(stmt.old, Load(addr, ty)))
    out.append(Dirty("shadow_load", (addr, const64(w)), dst=layout.shadow(stmt.old)))
    cmp = f"CmpEQ{ty.bits}"
    tv = layout.fresh(I1)
    out.append(WrTmp(tv, Op(cmp, (RdTmp(stmt.old), RdTmp(te)))))
    ts = layout.fresh(I1)
    out.append(WrTmp(ts, Op(cmp, (RdTmp(layout.shadow(stmt.old)), RdTmp(ted)))))
    tg = layout.fresh(I1)
    out.append(WrTmp(tg, Op("And1", (RdTmp(tv), RdTmp(ts)))))
    out.append(StoreG(RdTmp(tg), addr, RdTmp(tn)))
    out.append(Dirty("shadow_store", (addr, RdTmp(tnd), const64(w)), guard=RdTmp(tg)))
    return out


def _dirty(stmt: Dirty, layout: Layout, policy: AdPolicy) -> list:
    out: list = []

    def d(e):
        return differentiate_expression(e, layout, out, policy)

    name = stmt.name
    if name == "x87_store80":
        addr, value = stmt.args
        out.append(Dirty("x87_shadow_store80", (addr, d(value)), guard=stmt.guard))
        return out
    if name == "x87_load80" and stmt.dst is not None:
        out.append(Dirty("x87_shadow_load80", stmt.args, dst=layout.shadow(stmt.dst), guard=stmt.guard))
        return out
    if name.startswith("math_") and stmt.dst is not None:
        fname = name[5:]
        call = WRAPPED.get(fname)
        if policy.math_wrappers and call is not None:
            dots = tuple(d(a) for a, diff in zip(stmt.args, call.differentiable) if diff)
            out.append(Dirty(f"mathdot_{fname}", stmt.args + dots, dst=layout.shadow(stmt.dst),
                             guard=stmt.guard))
            return out
        policy.warn(name)
    if stmt.dst is not None:
        out.append(WrTmp(layout.shadow(stmt.dst), Const(layout.types[stmt.dst], 0)))
    return out


def instrument_superblock(sb: Superblock, layout: Layout | None = None,
                          policy: AdPolicy | None = None) -> Superblock:
    """Insert a differentiated statement before each statement that moves data."""
    layout = layout or Layout.for_superblock(sb)
    policy = policy if policy is not None else AdPolicy()
    types = layout.types
    out: list = []
    for idx, stmt in enumerate(sb.stmts):
        policy.at(sb.addr, idx)
        pre: list = []

        def d(e):
            return differentiate_expression(e, layout, pre, policy)

        if isinstance(stmt, WrTmp):
            dot = d(stmt.expr)
            out += pre
            out.append(WrTmp(layout.shadow(stmt.tmp), dot))
            out.append(stmt)
        elif isinstance(stmt, Put):
            dot = d(stmt.expr)
            out += pre
            out.append(Put(stmt.offset + layout.m_gs, dot))
            out.append(stmt)
        elif isinstance(stmt, (Store, StoreG)):
            dot = d(stmt.expr)
            width = type_of(stmt.expr, types).width
            guard = stmt.guard if isinstance(stmt, StoreG) else None
            out += pre
            out.append(Dirty("shadow_store", (stmt.addr, dot, const64(width)), guard=guard))
            out.append(stmt)
        elif isinstance(stmt, Cas):
            out += rewrite_cas(stmt, layout, policy)
        elif isinstance(stmt, Dirty):
            out += _dirty(stmt, layout, policy)
            out.append(stmt)
        elif isinstance(stmt, (IMark, Exit, Halt)):
            out.append(stmt)
        else:
            raise TypeError(f"not a statement: {stmt!r}")
    return Superblock(sb.addr, tuple(out), dict(types))


def instrument_program(program: Program, policy: AdPolicy | None = None, m_gs: int = M_GS) -> Program:
    policy = policy if policy is not None else AdPolicy()
    blocks = {
        addr: instrument_superblock(sb, Layout.for_superblock(sb, m_gs), policy)
        for addr, sb in program.superblocks.items()
    }
    return Program(blocks, program.entry, dict(program.data))
