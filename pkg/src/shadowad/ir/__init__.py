"""VEX-like intermediate representation: types, nodes, text format, validation."""

from .asm import IRParseError, format_expr, format_program, format_stmt, format_superblock, parse_asm, to_json
from .nodes import (
    FALSE,
    TRUE,
    CCall,
    Cas,
    Const,
    Dirty,
    Exit,
    Expr,
    Get,
    Halt,
    IMark,
    ITE,
    Load,
    Op,
    Program,
    Put,
    RdTmp,
    Stmt,
    Store,
    StoreG,
    Superblock,
    WrTmp,
    assigned_tmp,
    const64,
    goto,
    walk,
    zero,
)
from .opcodes import OPCODES, OpSpec
from .types import F32, F64, I1, I8, I16, I32, I64, V128, IrType
from .validate import M_GS, IRTypeError, type_of, validate, validate_superblock

print_program = format_program

__all__ = [name for name in dir() if not name.startswith("_")]
