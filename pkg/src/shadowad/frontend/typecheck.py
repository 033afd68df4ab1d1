"""Static typing and name resolution for minilang."""

from __future__ import annotations

from ..mathwrap import WRAPPED
from .ast import (
    BOOL,
    F32,
    F64,
    FLOAT_TYPES,
    I64,
    Assign,
    Binary,
    Call,
    Decl,
    For,
    If,
    Index,
    Module,
    Num,
    Output,
    Symbol,
    Unary,
    Var,
    While,
)
from .parser import CompileError

CMP_OPS = ("<", "<=", ">", ">=", "==", "!=")
BIT_INTRINSICS = {
    "bits_and64": ("And", F64), "bits_or64": ("Or", F64), "bits_xor64": ("Xor", F64),
    "bits_and32": ("And", F32), "bits_or32": ("Or", F32), "bits_xor32": ("Xor", F32),
}
# math functions lowered to dirty calls; sqrt is an IR operation instead
MATH_CALLS = tuple(n for n in WRAPPED if n != "sqrt")
BUILTINS = frozenset(MATH_CALLS) | {
    "sqrt", "abs", "select", "input", "dg_set_dot", "dg_get_dot", "f64", "f32", "i64",
    "x87", "reinterp_i64", "reinterp_f64",
} | set(BIT_INTRINSICS)
MASK_LIMIT = {F64: 1 << 64, F32: 1 << 32}


class Checker:
    def __init__(self):
        self.symbols: dict[str, Symbol] = {}

    def module(self, mod: Module) -> Module:
        self.block(mod.stmts)
        mod.symbols = self.symbols
        return mod

    def block(self, stmts):
        for s in stmts:
            self.stmt(s)

    def declare(self, name, ty, size, pos) -> Symbol:
        if name in self.symbols:
            raise CompileError.at(pos, f"{name!r} is already declared")
        if name in BUILTINS:
            raise CompileError.at(pos, f"{name!r} is a builtin")
        sym = Symbol(name, ty, size)
        self.symbols[name] = sym
        return sym

    def stmt(self, s):
        if isinstance(s, Decl):
            if s.init is not None:
                self.expect(s.init, s.ty)
            s.sym = self.declare(s.name, s.ty, s.size, s.pos)
        elif isinstance(s, Assign):
            ty = self.lvalue(s.target)
            self.expect(s.expr, ty)
        elif isinstance(s, If):
            self.expect(s.cond, BOOL)
            self.block(s.then)
            if s.els is not None:
                self.block(s.els)
        elif isinstance(s, While):
            self.expect(s.cond, BOOL)
            self.block(s.body)
        elif isinstance(s, For):
            v = s.var
            if v.name not in self.symbols:
                self.declare(v.name, I64, None, v.pos)
            self.lvalue(v)
            if v.ty != I64:
                raise CompileError.at(v.pos, "loop variable must be i64")
            self.expect(s.lo, I64)
            self.expect(s.hi, I64)
            self.block(s.body)
        elif isinstance(s, Output):
            if self.expr(s.expr) not in FLOAT_TYPES:
                raise CompileError.at(s.expr.pos, "output takes a floating-point value")
        else:
            raise TypeError(s)

    def lvalue(self, target) -> str:
        sym = self.symbols.get(target.name)
        if sym is None:
            raise CompileError.at(target.pos, f"undeclared variable {target.name!r}")
        target.sym = sym
        if isinstance(target, Index):
            if not sym.is_array:
                raise CompileError.at(target.pos, f"{target.name!r} is not an array")
            self.check_index(target, sym)
        elif sym.is_array:
            raise CompileError.at(target.pos, f"array {target.name!r} needs an index")
        target.ty = sym.ty
        return sym.ty

    def check_index(self, e: Index, sym: Symbol):
        self.expect(e.index, I64)
        if isinstance(e.index, Num) and not 0 <= e.index.value < sym.size:
            raise CompileError.at(e.index.pos, f"index {e.index.value} out of bounds for "
                                               f"{e.name}[{sym.size}]")

    def expect(self, e, ty):
        got = self.expr(e)
        if got != ty:
            raise CompileError.at(e.pos, f"expected {ty}, found {got}")

    def expr(self, e) -> str:
        e.ty = self._expr(e)
        return e.ty

    def _expr(self, e) -> str:
        if isinstance(e, Num):
            if e.lit_ty == I64 and not -(1 << 63) <= e.value < (1 << 64):
                raise CompileError.at(e.pos, "integer literal out of range")
            return e.lit_ty
        if isinstance(e, (Var, Index)):
            return self.lvalue(e)
        if isinstance(e, Unary):
            t = self.expr(e.operand)
            if e.op == "!":
                if t != BOOL:
                    raise CompileError.at(e.pos, "'!' needs a condition")
                return BOOL
            if t == BOOL:
                raise CompileError.at(e.pos, "cannot negate a condition")
            return t
        if isinstance(e, Binary):
            lt, rt = self.expr(e.left), self.expr(e.right)
            if e.op in ("&&", "||"):
                if lt != BOOL or rt != BOOL:
                    raise CompileError.at(e.pos, f"{e.op!r} needs conditions")
                return BOOL
            if lt != rt:
                raise CompileError.at(e.pos, f"operands of {e.op!r} have types {lt} and {rt}")
            if lt == BOOL:
                raise CompileError.at(e.pos, f"{e.op!r} does not apply to conditions")
            return BOOL if e.op in CMP_OPS else lt
        if isinstance(e, Call):
            return self.call(e)
        raise TypeError(e)

    def call(self, e: Call) -> str:
        name, args = e.name, e.args
        if name not in BUILTINS:
            raise CompileError.at(e.pos, f"unknown function {name!r}")

        def arity(n):
            if len(args) != n:
                raise CompileError.at(e.pos, f"{name} takes {n} argument(s), got {len(args)}")

        if name in MATH_CALLS:
            call = WRAPPED[name]
            arity(call.arity)
            for a, diff in zip(args, call.differentiable):
                self.expect(a, F64 if diff else I64)
            return F64
        if name in ("sqrt", "abs"):
            arity(1)
            t = self.expr(args[0])
            if t not in FLOAT_TYPES:
                raise CompileError.at(e.pos, f"{name} takes a floating-point value")
            return t
        if name == "select":
            arity(3)
            cond = args[0]
            if not (isinstance(cond, Binary) and cond.op in CMP_OPS):
                raise CompileError.at(cond.pos, "select needs a single comparison as its condition")
            self.expect(cond, BOOL)
            t = self.expr(args[1])
            if t not in FLOAT_TYPES or cond.left.ty != t:
                raise CompileError.at(e.pos, "select compares and chooses values of one float type")
            self.expect(args[2], t)
            return t
        if name == "input":
            arity(1)
            k = args[0]
            if not (isinstance(k, Num) and k.lit_ty == I64 and 0 <= k.value < 4096):
                raise CompileError.at(k.pos, "input takes an integer literal slot")
            k.ty = I64
            return F64
        if name == "dg_set_dot":
            arity(2)
            t = self.expr(args[0])
            if t not in FLOAT_TYPES:
                raise CompileError.at(e.pos, "dg_set_dot takes a floating-point value")
            self.expect(args[1], t)
            return t
        if name == "dg_get_dot":
            arity(1)
            t = self.expr(args[0])
            if t not in FLOAT_TYPES:
                raise CompileError.at(e.pos, "dg_get_dot takes a floating-point value")
            return t
        if name in ("f64", "f32", "i64"):
            arity(1)
            t = self.expr(args[0])
            if t == BOOL:
                raise CompileError.at(e.pos, "cannot convert a condition")
            return name
        if name == "x87":
            arity(1)
            self.expect(args[0], F64)
            return F64
        if name == "reinterp_i64":
            arity(1)
            self.expect(args[0], F64)
            return I64
        if name == "reinterp_f64":
            arity(1)
            self.expect(args[0], I64)
            return F64
        # bit intrinsics
        _, t = BIT_INTRINSICS[name]
        arity(2)
        self.expect(args[0], t)
        mask = args[1]
        if not (isinstance(mask, Num) and mask.lit_ty == I64 and 0 <= mask.value < MASK_LIMIT[t]):
            raise CompileError.at(mask.pos, f"{name} takes a {t} mask literal")
        mask.ty = I64
        return t


def check(mod: Module) -> Module:
    return Checker().module(mod)
