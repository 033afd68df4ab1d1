"""Dual-number interpreter of minilang, the reference for engine dots.

The interpreter walks the typed syntax tree directly. Each arithmetic
operation updates value and dot together, with the dot formula evaluated in
the same order the instrumented code evaluates it (``a'*b + a*b'`` for a
product, ``(a'*b - a*b') / (b*b)`` for a quotient, ``a' / (2*sqrt(a))`` for a
square root), so agreement is expected to the last bit. float32 arithmetic
uses numpy's single-precision scalars.

Constructs whose dot the engine cannot get right by design (bit intrinsics,
reinterpretation, ``abs`` of a zero or all-ones pattern, math calls without
wrappers) set ``limitation_hit`` instead of guessing the engine's answer.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .. import mathwrap
from ..frontend import check, parse
from ..frontend.ast import (
    F32,
    F64,
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
    Unary,
    Var,
    While,
)
from ..frontend.typecheck import BIT_INTRINSICS, MATH_CALLS


@dataclass(frozen=True)
class Dual:
    value: float
    dot: float = 0.0


@dataclass
class OracleResult:
    outputs: list[float] = field(default_factory=list)
    dots: list[float] = field(default_factory=list)
    limitation_hit: bool = False
    reasons: list[str] = field(default_factory=list)


class OracleError(Exception):
    pass


# ------------------------------------------------------------- float helpers


def _bits64(x: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", x))[0]


def _from64(b: int) -> float:
    return struct.unpack("<d", struct.pack("<Q", b & 0xFFFFFFFFFFFFFFFF))[0]


def _bits32(x: float) -> int:
    return int(np.float32(x).view(np.uint32))


def _from32(b: int) -> float:
    return float(np.uint32(b).view(np.float32))


def _f32(x: float) -> float:
    with np.errstate(all="ignore"):
        return float(np.float32(x))


def _arith(ty: str, op: str, a: float, b: float) -> float:
    cast = np.float32 if ty == F32 else np.float64
    with np.errstate(all="ignore"):
        x, y = cast(a), cast(b)
        if op == "+":
            r = x + y
        elif op == "-":
            r = x - y
        elif op == "*":
            r = x * y
        else:
            r = x / y
    return float(r)


def _sqrt(ty: str, a: float) -> float:
    cast = np.float32 if ty == F32 else np.float64
    with np.errstate(all="ignore"):
        return float(np.sqrt(cast(a)))


def _wrap64(v: int) -> int:
    return ((v + (1 << 63)) % (1 << 64)) - (1 << 63)


def _to_i64(x: float) -> int:
    if math.isnan(x) or math.isinf(x):
        return -(1 << 63)
    r = round(x)  # ties to even
    if not -(1 << 63) <= r < (1 << 63):
        return -(1 << 63)
    return r


def _cmp(op: str, a, b) -> bool:
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    if op == "==":
        return a == b
    return a != b


# -------------------------------------------------------------- interpreter


class Interpreter:
    def __init__(self, mod: Module, inputs, seeds, math_wrappers: bool = True,
                 max_steps: int = 10_000_000):
        self.mod = mod
        self.inputs = list(inputs)
        self.seeds = list(seeds)
        self.math_wrappers = math_wrappers
        self.steps = max_steps
        self.env: dict = {}
        self.result = OracleResult()
        for name, sym in mod.symbols.items():
            zero = 0 if sym.ty == I64 else Dual(0.0, 0.0)
            self.env[name] = [zero] * sym.size if sym.is_array else zero

    def limitation(self, why: str) -> None:
        self.result.limitation_hit = True
        if why not in self.result.reasons:
            self.result.reasons.append(why)

    def run(self) -> OracleResult:
        self.block(self.mod.stmts)
        return self.result

    def tick(self):
        self.steps -= 1
        if self.steps < 0:
            raise OracleError("step budget exhausted")

    def block(self, stmts):
        for s in stmts:
            self.stmt(s)

    def stmt(self, s):
        self.tick()
        if isinstance(s, Decl):
            if s.init is not None:
                self.env[s.name] = self.expr(s.init)
        elif isinstance(s, Assign):
            value = self.expr(s.expr)
            t = s.target
            if isinstance(t, Var):
                self.env[t.name] = value
            else:
                self.env[t.name][self.index(t)] = value
        elif isinstance(s, If):
            if self.expr(s.cond):
                self.block(s.then)
            elif s.els is not None:
                self.block(s.els)
        elif isinstance(s, While):
            while self.expr(s.cond):
                self.tick()
                self.block(s.body)
        elif isinstance(s, For):
            name = s.var.name
            self.env[name] = self.expr(s.lo)
            while self.env[name] < self.expr(s.hi):
                self.tick()
                self.block(s.body)
                self.env[name] = _wrap64(self.env[name] + 1)
        elif isinstance(s, Output):
            v = self.expr(s.expr)
            self.result.outputs.append(v.value)
            self.result.dots.append(v.dot)
        else:
            raise TypeError(s)

    def index(self, e: Index) -> int:
        i = self.expr(e.index)
        if not 0 <= i < e.sym.size:
            raise OracleError(f"line {e.pos.line}: index {i} out of bounds for {e.name}")
        return i

    # -- expressions
    def expr(self, e):
        if isinstance(e, Num):
            if e.ty == I64:
                return _wrap64(e.value)
            return Dual(float(e.value), 0.0)
        if isinstance(e, Var):
            return self.env[e.name]
        if isinstance(e, Index):
            return self.env[e.name][self.index(e)]
        if isinstance(e, Unary):
            x = self.expr(e.operand)
            if e.op == "!":
                return not x
            if e.ty == I64:
                return _wrap64(-x)
            return Dual(-x.value, -x.dot)
        if isinstance(e, Binary):
            return self.binary(e)
        if isinstance(e, Call):
            return self.call(e)
        raise TypeError(e)

    def binary(self, e: Binary):
        if e.op == "&&":
            a, b = self.expr(e.left), self.expr(e.right)
            return a and b
        if e.op == "||":
            a, b = self.expr(e.left), self.expr(e.right)
            return a or b
        a, b = self.expr(e.left), self.expr(e.right)
        ty = e.left.ty
        if e.op in ("<", "<=", ">", ">=", "==", "!="):
            if ty == I64:
                return _cmp(e.op, a, b)
            return _cmp(e.op, a.value, b.value)
        if ty == I64:
            return _wrap64({"+": a + b, "-": a - b, "*": a * b}[e.op])
        return self.arith(ty, e.op, a, b)

    def arith(self, ty, op, a: Dual, b: Dual) -> Dual:
        f = lambda o, x, y: _arith(ty, o, x, y)  # noqa: E731
        value = f(op, a.value, b.value)
        if op in ("+", "-"):
            dot = f(op, a.dot, b.dot)
        elif op == "*":
            dot = f("+", f("*", a.dot, b.value), f("*", a.value, b.dot))
        else:
            num = f("-", f("*", a.dot, b.value), f("*", a.value, b.dot))
            dot = f("/", num, f("*", b.value, b.value))
        return Dual(value, dot)

    def call(self, e: Call):
        name, args = e.name, e.args
        if name in MATH_CALLS:
            call = mathwrap.WRAPPED[name]
            vals = [self.expr(a) for a in args]
            xs = tuple(v.value if d else v for v, d in zip(vals, call.differentiable))
            ds = tuple(v.dot if d else 0.0 for v, d in zip(vals, call.differentiable))
            if not self.math_wrappers:
                self.limitation(f"{name} without math wrappers")
            return Dual(call.value(*xs), mathwrap.dot(name, xs, ds))
        if name == "sqrt":
            x = self.expr(args[0])
            ty = e.ty
            root = _sqrt(ty, x.value)
            two_root = _arith(ty, "*", 2.0, root)
            return Dual(root, _arith(ty, "/", x.dot, two_root))
        if name == "abs":
            x = self.expr(args[0])
            if e.ty == F64:
                bits, sign, ones = _bits64(x.value), 1 << 63, (1 << 64) - 1
                value = _from64(bits & ~sign)
            else:
                bits, sign, ones = _bits32(x.value), 1 << 31, (1 << 32) - 1
                value = _from32(bits & ~sign)
            if bits in (0, ones, ones >> 1):
                self.limitation("abs of a zero or all-ones pattern")
            return Dual(value, -x.dot if bits & sign else x.dot)
        if name == "select":
            cond = args[0]
            l, r = self.expr(cond.left), self.expr(cond.right)
            a, b = self.expr(args[1]), self.expr(args[2])
            return a if _cmp(cond.op, l.value, r.value) else b
        if name == "input":
            k = args[0].value
            if k >= len(self.inputs):
                raise OracleError(f"no input in slot {k}")
            seed = float(self.seeds[k]) if k < len(self.seeds) else 0.0
            return Dual(float(self.inputs[k]), seed)
        if name == "dg_set_dot":
            x, d = self.expr(args[0]), self.expr(args[1])
            return Dual(x.value, d.value)
        if name == "dg_get_dot":
            return Dual(self.expr(args[0]).dot, 0.0)
        if name in ("f64", "f32", "i64"):
            return self.convert(self.expr(args[0]), args[0].ty, name)
        if name == "x87":
            return self.expr(args[0])  # 80-bit extended holds every double exactly
        if name == "reinterp_i64":
            self.limitation("reinterpretation")
            return _wrap64(_bits64(self.expr(args[0]).value))
        if name == "reinterp_f64":
            self.limitation("reinterpretation")
            return Dual(_from64(self.expr(args[0])), 0.0)
        base, ty = BIT_INTRINSICS[name]
        self.limitation("bit intrinsic")
        x = self.expr(args[0])
        mask = args[1].value
        bits = _bits64(x.value) if ty == F64 else _bits32(x.value)
        r = {"And": bits & mask, "Or": bits | mask, "Xor": bits ^ mask}[base]
        return Dual(_from64(r) if ty == F64 else _from32(r), 0.0)

    def convert(self, x, src, dst):
        if src == dst:
            return x
        if dst == F64:
            if src == F32:
                return Dual(x.value, x.dot)
            return Dual(float(x), 0.0)
        if dst == F32:
            if src == I64:
                return Dual(_f32(float(x)), 0.0)
            return Dual(_f32(x.value), _f32(x.dot))
        return _to_i64(x.value)


def oracle_module(mod: Module, inputs, seeds, math_wrappers: bool = True) -> OracleResult:
    return Interpreter(mod, inputs, seeds, math_wrappers).run()


def oracle_eval(src: str, inputs, seed_index: int | None = 0, math_wrappers: bool = True) -> OracleResult:
    """Outputs and dots of ``src`` with dot 1 on input ``seed_index`` and 0 elsewhere."""
    seeds = [0.0] * len(inputs)
    if seed_index is not None:
        seeds[seed_index] = 1.0
    return oracle_module(check(parse(src)), inputs, seeds, math_wrappers)
