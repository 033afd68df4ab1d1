"""Structural validation and expression typing."""

from __future__ import annotations

from .nodes import (
    CCall,
    Cas,
    Const,
    Dirty,
    Exit,
    Get,
    Halt,
    IMark,
    ITE,
    Load,
    Op,
    Program,
    Put,
    RdTmp,
    Store,
    StoreG,
    Superblock,
    WrTmp,
    assigned_tmp,
    sub_exprs,
    walk,
)
from .opcodes import OPCODES
from .types import I1, I64, IrType

M_GS = 1024


class IRTypeError(Exception):
    pass


def type_of(expr, tmp_types: dict[int, IrType]) -> IrType:
    if isinstance(expr, RdTmp):
        try:
            return tmp_types[expr.tmp]
        except KeyError:
            raise IRTypeError(f"t{expr.tmp} has no declared type") from None
    if isinstance(expr, (Get, Load, Const, CCall)):
        return expr.ty
    if isinstance(expr, Op):
        spec = OPCODES.get(expr.op)
        return spec.result if spec is not None else expr.ty
    if isinstance(expr, ITE):
        return type_of(expr.iftrue, tmp_types)
    raise TypeError(f"not an expression: {expr!r}")


def check_expr(expr, tmp_types: dict[int, IrType]) -> list[str]:
    """Type errors inside ``expr`` (operand/opcode mismatches, ITE arms)."""
    errors = []
    for e in (expr, *walk(expr)):
        try:
            if isinstance(e, Op):
                spec = OPCODES.get(e.op)
                if spec is None:
                    continue
                if len(e.args) != spec.arity:
                    errors.append(f"{e.op} takes {spec.arity} operands, got {len(e.args)}")
                    continue
                for i, (arg, want) in enumerate(zip(e.args, spec.args)):
                    got = type_of(arg, tmp_types)
                    if got is not want:
                        errors.append(f"{e.op} operand {i}: expected {want}, got {got}")
            elif isinstance(e, ITE):
                if type_of(e.cond, tmp_types) is not I1:
                    errors.append("ITE condition must be I1")
                a, b = type_of(e.iftrue, tmp_types), type_of(e.iffalse, tmp_types)
                if a is not b:
                    errors.append(f"ITE arms differ: {a} vs {b}")
            elif isinstance(e, Load):
                if type_of(e.addr, tmp_types) is not I64:
                    errors.append("load address must be I64")
        except IRTypeError:
            # untyped temporaries are reported by the def-use check
            continue
    return errors


def validate_superblock(sb: Superblock, m_gs: int = M_GS, shadow_bands: bool = False) -> list[str]:
    diags: list[str] = []
    where = f"sb 0x{sb.addr:x}"
    assigned: set[int] = set()
    limit = 2 * m_gs if shadow_bands else m_gs

    if not sb.stmts or not isinstance(sb.stmts[-1], (Exit, Halt)):
        diags.append(f"{where}: last statement must be an Exit or Halt")

    for idx, stmt in enumerate(sb.stmts):
        at = f"{where} stmt {idx}"
        for e in walk(stmt):
            if isinstance(e, RdTmp) and e.tmp not in assigned:
                diags.append(f"{at}: undefined temporary t{e.tmp}")
            elif isinstance(e, Get) and not (0 <= e.offset and e.offset + e.ty.width <= limit):
                diags.append(f"{at}: guest offset {e.offset} out of range")
        exprs = sub_exprs(stmt)
        for e in exprs:
            for msg in check_expr(e, sb.tmp_types):
                diags.append(f"{at}: {msg}")

        if isinstance(stmt, Put):
            try:
                width = type_of(stmt.expr, sb.tmp_types).width
            except IRTypeError:
                width = 1
            if not (0 <= stmt.offset and stmt.offset + width <= limit):
                diags.append(f"{at}: guest offset {stmt.offset} out of range")
        elif isinstance(stmt, (Store, StoreG, Cas)):
            if _safe_type(stmt.addr, sb) not in (I64, None):
                diags.append(f"{at}: address must be I64")
        if isinstance(stmt, (StoreG, Exit)) and _safe_type(stmt.guard, sb) not in (I1, None):
            diags.append(f"{at}: guard must be I1")
        if isinstance(stmt, Dirty) and stmt.guard is not None and _safe_type(stmt.guard, sb) not in (I1, None):
            diags.append(f"{at}: guard must be I1")
        if isinstance(stmt, Cas):
            te, tn = _safe_type(stmt.expected, sb), _safe_type(stmt.new, sb)
            told = sb.tmp_types.get(stmt.old)
            if not (te is tn is told) or (told is not None and not told.is_int):
                diags.append(f"{at}: CAS operands must share one integer type")

        dst = assigned_tmp(stmt)
        if dst is not None:
            if dst in assigned:
                diags.append(f"{at}: temporary t{dst} assigned twice")
            if dst not in sb.tmp_types:
                diags.append(f"{at}: temporary t{dst} has no declared type")
            elif isinstance(stmt, WrTmp):
                got = _safe_type(stmt.expr, sb)
                if got is not None and got is not sb.tmp_types[dst]:
                    diags.append(f"{at}: t{dst} declared {sb.tmp_types[dst]} but assigned {got}")
            assigned.add(dst)
    return diags


def _safe_type(expr, sb):
    try:
        return type_of(expr, sb.tmp_types)
    except IRTypeError:
        return None


def validate(program: Program, m_gs: int = M_GS, shadow_bands: bool = False) -> list[str]:
    """Diagnostics for ``program``; empty iff every structural invariant holds."""
    diags: list[str] = []
    if program.entry not in program.superblocks:
        diags.append(f"entry 0x{program.entry:x} has no superblock")
    for addr, sb in program.superblocks.items():
        if addr != sb.addr:
            diags.append(f"sb 0x{sb.addr:x} registered under 0x{addr:x}")
        diags.extend(validate_superblock(sb, m_gs, shadow_bands))
        for idx, stmt in enumerate(sb.stmts):
            if isinstance(stmt, Exit) and stmt.target not in program.superblocks:
                diags.append(f"sb 0x{sb.addr:x} stmt {idx}: dangling target 0x{stmt.target:x}")
    return diags
