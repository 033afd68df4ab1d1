"""Syntax tree of minilang.

Nodes carry their source position; the type checker fills in ``ty`` on every
expression and ``sym`` on variable references.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

F64, F32, I64, BOOL = "f64", "f32", "i64", "bool"
SCALAR_TYPES = (F64, F32, I64)
FLOAT_TYPES = (F64, F32)


@dataclass
class Pos:
    line: int
    col: int


@dataclass
class Symbol:
    name: str
    ty: str
    size: Optional[int] = None  # element count for arrays

    @property
    def is_array(self) -> bool:
        return self.size is not None


# ---------------------------------------------------------------- expressions


@dataclass(eq=False)
class Num:
    value: Union[int, float]
    lit_ty: str
    pos: Pos
    ty: Optional[str] = None


@dataclass(eq=False)
class Var:
    name: str
    pos: Pos
    ty: Optional[str] = None
    sym: Optional[Symbol] = None


@dataclass(eq=False)
class Index:
    name: str
    index: Expr
    pos: Pos
    ty: Optional[str] = None
    sym: Optional[Symbol] = None


@dataclass(eq=False)
class Unary:
    op: str  # "-" or "!"
    operand: Expr
    pos: Pos
    ty: Optional[str] = None


@dataclass(eq=False)
class Binary:
    op: str
    left: Expr
    right: Expr
    pos: Pos
    ty: Optional[str] = None


@dataclass(eq=False)
class Call:
    name: str
    args: list
    pos: Pos
    ty: Optional[str] = None


Expr = Union[Num, Var, Index, Unary, Binary, Call]


# ----------------------------------------------------------------- statements


@dataclass(eq=False)
class Decl:
    ty: str
    name: str
    size: Optional[int]
    init: Optional[Expr]
    pos: Pos
    sym: Optional[Symbol] = None


@dataclass(eq=False)
class Assign:
    target: Union[Var, Index]
    expr: Expr
    pos: Pos


@dataclass(eq=False)
class If:
    cond: Expr
    then: list
    els: Optional[list]
    pos: Pos


@dataclass(eq=False)
class While:
    cond: Expr
    body: list
    pos: Pos


@dataclass(eq=False)
class For:
    var: Var
    lo: Expr
    hi: Expr
    body: list
    pos: Pos


@dataclass(eq=False)
class Output:
    expr: Expr
    pos: Pos


Stmt = Union[Decl, Assign, If, While, For, Output]


@dataclass(eq=False)
class Module:
    stmts: list
    symbols: dict = field(default_factory=dict)
