"""IR node classes.

Expressions are side-effect free; statements are the only things that touch
guest state, memory or the dirty-call registry. All nodes are frozen so a
parsed or instrumented program can be shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .opcodes import OPCODES
from .types import I1, I64, IrType


# ---------------------------------------------------------------- expressions


@dataclass(frozen=True)
class RdTmp:
    tmp: int


@dataclass(frozen=True)
class Get:
    offset: int
    ty: IrType


@dataclass(frozen=True)
class Load:
    addr: Expr
    ty: IrType


@dataclass(frozen=True)
class Op:
    """Operation on 1-4 operands.

    ``ty`` is only carried for opcodes outside the known table, where the
    result type cannot be derived from the opcode name.
    """

    op: str
    args: tuple[Expr, ...]
    ty: IrType | None = None

    def __post_init__(self):
        if not 1 <= len(self.args) <= 4:
            raise ValueError(f"{self.op}: 1 to 4 operands expected, got {len(self.args)}")
        if self.op not in OPCODES and self.ty is None:
            raise ValueError(f"unknown opcode {self.op} needs an explicit result type")


@dataclass(frozen=True)
class Const:
    ty: IrType
    value: int  # raw bit pattern

    def __post_init__(self):
        if not 0 <= self.value <= self.ty.mask:
            raise ValueError(f"constant 0x{self.value:x} does not fit {self.ty}")


@dataclass(frozen=True)
class ITE:
    cond: Expr
    iftrue: Expr
    iffalse: Expr


@dataclass(frozen=True)
class CCall:
    name: str
    args: tuple[Expr, ...]
    ty: IrType


Expr = Union[RdTmp, Get, Load, Op, Const, ITE, CCall]


# ----------------------------------------------------------------- statements


@dataclass(frozen=True)
class WrTmp:
    tmp: int
    expr: Expr


@dataclass(frozen=True)
class Put:
    offset: int
    expr: Expr


@dataclass(frozen=True)
class Store:
    addr: Expr
    expr: Expr


@dataclass(frozen=True)
class StoreG:
    guard: Expr
    addr: Expr
    expr: Expr


@dataclass(frozen=True)
class Cas:
    old: int
    addr: Expr
    expected: Expr
    new: Expr


@dataclass(frozen=True)
class Dirty:
    name: str
    args: tuple[Expr, ...]
    dst: int | None = None
    guard: Expr | None = None


@dataclass(frozen=True)
class IMark:
    addr: int
    length: int


@dataclass(frozen=True)
class Exit:
    guard: Expr
    target: int

    @property
    def unconditional(self) -> bool:
        return isinstance(self.guard, Const) and self.guard.value != 0


@dataclass(frozen=True)
class Halt:
    pass


Stmt = Union[WrTmp, Put, Store, StoreG, Cas, Dirty, IMark, Exit, Halt]


# ------------------------------------------------------------------ containers


@dataclass(frozen=True)
class Superblock:
    addr: int
    stmts: tuple[Stmt, ...]
    tmp_types: dict[int, IrType] = field(default_factory=dict, compare=True, hash=False)

    @property
    def tmp_count(self) -> int:
        return len(self.tmp_types)

    @property
    def max_tmp(self) -> int:
        return max(self.tmp_types, default=-1)


@dataclass
class Program:
    """Superblocks keyed by entry address, plus an initial memory image."""

    superblocks: dict[int, Superblock]
    entry: int
    data: dict[int, bytes] = field(default_factory=dict)

    def __getitem__(self, addr: int) -> Superblock:
        return self.superblocks[addr]


TRUE = Const(I1, 1)
FALSE = Const(I1, 0)


def goto(target: int) -> Exit:
    return Exit(TRUE, target)


def const64(value: int) -> Const:
    return Const(I64, value & I64.mask)


def zero(ty: IrType) -> Const:
    return Const(ty, 0)


def sub_exprs(node) -> tuple:
    """Direct child expressions of an expression or statement."""
    if isinstance(node, (RdTmp, Get, Const, IMark, Halt)):
        return ()
    if isinstance(node, Load):
        return (node.addr,)
    if isinstance(node, (Op, CCall)):
        return node.args
    if isinstance(node, ITE):
        return (node.cond, node.iftrue, node.iffalse)
    if isinstance(node, (WrTmp, Put)):
        return (node.expr,)
    if isinstance(node, Store):
        return (node.addr, node.expr)
    if isinstance(node, StoreG):
        return (node.guard, node.addr, node.expr)
    if isinstance(node, Cas):
        return (node.addr, node.expected, node.new)
    if isinstance(node, Dirty):
        return node.args + ((node.guard,) if node.guard is not None else ())
    if isinstance(node, Exit):
        return (node.guard,)
    raise TypeError(f"not an IR node: {node!r}")


def walk(node):
    """Pre-order traversal over every expression reachable from ``node``."""
    stack = list(reversed(sub_exprs(node)))
    while stack:
        e = stack.pop()
        yield e
        stack.extend(reversed(sub_exprs(e)))


def assigned_tmp(stmt) -> int | None:
    if isinstance(stmt, WrTmp):
        return stmt.tmp
    if isinstance(stmt, Cas):
        return stmt.old
    if isinstance(stmt, Dirty):
        return stmt.dst
    return None
