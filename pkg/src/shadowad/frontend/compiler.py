"""Lowering of typed minilang to IR programs.

Every source statement starts with an IMark at a fresh code address (4 bytes
apart from CODE_BASE). Control flow splits the code into superblocks joined
by Exits; each superblock begins with an IMark at its own address.

Floating-point idioms are lowered the way C compilers emit them: ``abs`` is
an AND with 0x7F..F (on a 128-bit register for f64), unary minus an XOR with
the sign bit, and ``select`` a compare mask combined with AND/ANDN/OR. f32
arithmetic uses the lowest-lane vector forms (full-vector forms when
optimizing), f64 arithmetic the scalar ones.

With ``opt_level=0`` scalars live in memory, like unoptimized stack
variables; with ``opt_level=1`` they live in guest registers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..fpcodec import f32_bits, f64_bits
from ..ir.nodes import (
    Const,
    Dirty,
    Exit,
    Get,
    Halt,
    IMark,
    Load,
    Op,
    Program,
    Put,
    RdTmp,
    Store,
    Superblock,
    WrTmp,
    const64,
    goto,
)
from ..ir.types import F32 as IR_F32
from ..ir.types import F64 as IR_F64
from ..ir.types import I32, V128
from ..ir.types import I64 as IR_I64
from ..ir.validate import M_GS, type_of
from . import softlib
from .ast import (
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
from .parser import parse
from .typecheck import BIT_INTRINSICS, MATH_CALLS, check

CODE_BASE = 0x400000
VAR_BASE = 0x10000000
ARRAY_BASE = 0x10100000
INPUT_BASE = 0x10200000
SEED_BASE = 0x10210000
SCRATCH_A = 0x10220000
SCRATCH_B = 0x10220010
X87_SLOT = 0x10220020
SIN_TABLE = 0x10300000
COS_TABLE = 0x10302000
REG_LIMIT = M_GS - 64  # guest bytes available for scalars

IR_TYPE = {F64: IR_F64, F32: IR_F32, I64: IR_I64}
SIGN64, SIGN32 = 1 << 63, 1 << 31
ABS_MASK_V128 = 0x7FFFFFFFFFFFFFFF  # low lane of .long -1, 0x7fffffff, 0, 0


@dataclass(frozen=True)
class Location:
    """Where a variable lives: guest offset (``reg``) or memory address (``mem``)."""

    kind: str
    ty: str
    offset: int
    size: int | None = None

    @property
    def width(self) -> int:
        return 4 if self.ty == F32 else 8


@dataclass
class Compiled:
    program: Program
    symbols: dict[str, Location]
    lines: dict[int, int] = field(default_factory=dict)  # IMark address -> source line
    inputs: int = 0  # number of input slots referenced

    def address_of(self, name: str) -> int:
        loc = self.symbols[name]
        if loc.kind != "mem":
            raise ValueError(f"{name!r} lives in a guest register")
        return loc.offset


class _Block:
    def __init__(self, addr: int):
        self.addr = addr
        self.stmts: list = []
        self.types: dict = {}


class Lowering:
    def __init__(self, mod: Module, opt_level: int = 0, math_wrappers: bool = True):
        if opt_level not in (0, 1):
            raise ValueError("opt_level must be 0 or 1")
        self.opt = opt_level
        self.math_wrappers = math_wrappers
        self.next_code = CODE_BASE
        self.blocks: dict[int, Superblock] = {}
        self.lines: dict[int, int] = {}
        self.data: dict[int, bytes] = {}
        self.inputs = 0
        self.symbols = self.allocate(mod)
        self.cur = self.start(self.code_addr())

    # -- layout
    def allocate(self, mod: Module) -> dict[str, Location]:
        out = {}
        reg = 0
        mem = VAR_BASE
        arr = ARRAY_BASE
        for name, sym in mod.symbols.items():
            if sym.is_array:
                width = 4 if sym.ty == F32 else 8
                out[name] = Location("mem", sym.ty, arr, sym.size)
                arr += (width * sym.size + 15) & ~15
            elif self.opt == 1 and reg + 8 <= REG_LIMIT:
                out[name] = Location("reg", sym.ty, reg)
                reg += 8
            else:
                out[name] = Location("mem", sym.ty, mem)
                mem += 8
        return out

    def code_addr(self) -> int:
        a = self.next_code
        self.next_code += 4
        return a

    # -- superblock plumbing
    def start(self, addr: int) -> _Block:
        b = _Block(addr)
        b.stmts.append(IMark(addr, 4))
        self.cur = b
        return b

    def finish(self, last) -> None:
        b = self.cur
        b.stmts.append(last)
        self.blocks[b.addr] = Superblock(b.addr, tuple(b.stmts), dict(b.types))
        self.cur = None

    def emit(self, stmt) -> None:
        self.cur.stmts.append(stmt)

    def tmp(self, ty, expr) -> RdTmp:
        b = self.cur
        t = len(b.types)
        b.types[t] = ty
        b.stmts.append(WrTmp(t, expr))
        return RdTmp(t)

    def dirty(self, name, args, ty=None) -> RdTmp | None:
        b = self.cur
        if ty is None:
            b.stmts.append(Dirty(name, tuple(args)))
            return None
        t = len(b.types)
        b.types[t] = ty
        b.stmts.append(Dirty(name, tuple(args), dst=t))
        return RdTmp(t)

    def op(self, name, *args) -> RdTmp:
        e = Op(name, tuple(args))
        return self.tmp(type_of(e, self.cur.types), e)

    def mark(self, line: int) -> None:
        a = self.code_addr()
        self.lines[a] = line
        self.emit(IMark(a, 4))

    # -- driver
    def program(self, mod: Module) -> Compiled:
        entry = self.cur.addr
        self.stmts(mod.stmts)
        self.finish(Halt())
        prog = Program(self.blocks, entry, self.data)
        return Compiled(prog, self.symbols, self.lines, self.inputs)

    def stmts(self, stmts) -> None:
        for s in stmts:
            self.stmt(s)

    def stmt(self, s) -> None:
        self.mark(s.pos.line)
        if isinstance(s, Decl):
            if s.init is not None:
                self.store_var(self.symbols[s.name], self.expr(s.init))
        elif isinstance(s, Assign):
            value = self.expr(s.expr)
            self.assign(s.target, value)
        elif isinstance(s, If):
            cond = self.expr(s.cond)
            join = self.code_addr()
            other = self.code_addr() if s.els is not None else join
            self.emit(Exit(self.op("Not1", cond), other))
            self.stmts(s.then)
            self.finish(goto(join))
            if s.els is not None:
                self.start(other)
                self.stmts(s.els)
                self.finish(goto(join))
            self.start(join)
        elif isinstance(s, While):
            head, done = self.code_addr(), self.code_addr()
            self.finish(goto(head))
            self.start(head)
            self.emit(Exit(self.op("Not1", self.expr(s.cond)), done))
            self.stmts(s.body)
            self.finish(goto(head))
            self.start(done)
        elif isinstance(s, For):
            loc = self.symbols[s.var.name]
            self.store_var(loc, self.expr(s.lo))
            head, done = self.code_addr(), self.code_addr()
            self.finish(goto(head))
            self.start(head)
            i = self.load_var(loc)
            cond = self.op("CmpLT64S", i, self.expr(s.hi))
            self.emit(Exit(self.op("Not1", cond), done))
            self.stmts(s.body)
            self.store_var(loc, self.op("Add64", self.load_var(loc), const64(1)))
            self.finish(goto(head))
            self.start(done)
        elif isinstance(s, Output):
            self.output(s.expr)
        else:
            raise TypeError(s)

    # -- variables
    def load_var(self, loc: Location):
        ty = IR_TYPE[loc.ty]
        if loc.kind == "reg":
            return self.tmp(ty, Get(loc.offset, ty))
        return self.tmp(ty, Load(const64(loc.offset), ty))

    def store_var(self, loc: Location, value) -> None:
        if loc.kind == "reg":
            self.emit(Put(loc.offset, value))
        else:
            self.emit(Store(const64(loc.offset), value))

    def element_addr(self, e: Index):
        loc = self.symbols[e.name]
        idx = self.expr(e.index)
        scaled = self.op("Mul64", idx, const64(loc.width))
        return self.op("Add64", const64(loc.offset), scaled)

    def assign(self, target, value) -> None:
        if isinstance(target, Var):
            self.store_var(self.symbols[target.name], value)
        else:
            self.emit(Store(self.element_addr(target), value))

    # -- expressions
    def expr(self, e):
        if isinstance(e, Num):
            if e.ty == F64:
                return Const(IR_F64, f64_bits(e.value))
            if e.ty == F32:
                return Const(IR_F32, f32_bits(e.value))
            return const64(e.value)
        if isinstance(e, Var):
            return self.load_var(self.symbols[e.name])
        if isinstance(e, Index):
            ty = IR_TYPE[e.ty]
            return self.tmp(ty, Load(self.element_addr(e), ty))
        if isinstance(e, Unary):
            x = self.expr(e.operand)
            if e.op == "!":
                return self.op("Not1", x)
            return self.negate(x, e.ty)
        if isinstance(e, Binary):
            return self.binary(e)
        if isinstance(e, Call):
            return self.call(e)
        raise TypeError(e)

    def binary(self, e: Binary):
        if e.op in ("&&", "||"):
            return self.op("And1" if e.op == "&&" else "Or1", self.expr(e.left), self.expr(e.right))
        a, b = self.expr(e.left), self.expr(e.right)
        ty = e.left.ty
        if e.op in ("<", "<=", ">", ">=", "==", "!="):
            return self.compare(e.op, a, b, ty)
        if ty == I64:
            if e.op == "/":
                raise NotImplementedError("integer division")
            return self.op({"+": "Add64", "-": "Sub64", "*": "Mul64"}[e.op], a, b)
        name = {"+": "Add", "-": "Sub", "*": "Mul", "/": "Div"}[e.op]
        if ty == F64:
            return self.op(f"{name}F64", a, b)
        return self.f32_vector(name, a, b)

    def f32_vector(self, name, *args):
        shape = "32Fx4" if self.opt == 1 else "32F0x4"
        vs = [self.op("32UtoV128", self.op("ReinterpF32asI32", a)) for a in args]
        r = self.op(f"{name}{shape}", *vs)
        return self.op("ReinterpI32asF32", self.op("V128to32", r))

    def compare(self, op, a, b, ty):
        if ty == I64:
            if op in (">", ">="):
                a, b, op = b, a, {">": "<", ">=": "<="}[op]
            name = {"<": "CmpLT64S", "<=": "CmpLE64S", "==": "CmpEQ64", "!=": "CmpNE64"}[op]
            return self.op(name, a, b)
        cmp = "CmpF64" if ty == F64 else "CmpF32"
        if op in (">", ">="):
            a, b, op = b, a, {">": "<", ">=": "<="}[op]
        code = self.op(cmp, a, b)
        lt = lambda: self.op("CmpEQ32", code, Const(I32, 0x01))  # noqa: E731
        eq = lambda: self.op("CmpEQ32", code, Const(I32, 0x40))  # noqa: E731
        if op == "<":
            return lt()
        if op == "<=":
            return self.op("Or1", lt(), eq())
        if op == "==":
            return eq()
        return self.op("Not1", eq())

    # -- bit-pattern idioms
    def negate(self, x, ty):
        if ty == I64:
            return self.op("Sub64", const64(0), x)
        if ty == F64:
            v = self.op("64UtoV128", self.op("ReinterpF64asI64", x))
            r = self.op("XorV128", v, Const(V128, SIGN64))
            return self.op("ReinterpI64asF64", self.op("V128to64lo", r))
        r = self.op("Xor32", self.op("ReinterpF32asI32", x), Const(I32, SIGN32))
        return self.op("ReinterpI32asF32", r)

    def fabs(self, x, ty):
        if ty == F64:
            v = self.op("64UtoV128", self.op("ReinterpF64asI64", x))
            r = self.op("AndV128", v, Const(V128, ABS_MASK_V128))
            return self.op("ReinterpI64asF64", self.op("V128to64lo", r))
        r = self.op("And32", self.op("ReinterpF32asI32", x), Const(I32, SIGN32 - 1))
        return self.op("ReinterpI32asF32", r)

    def select(self, cond: Binary, a, b, ty):
        """Mask-select: ``(mask & a) | (~mask & b)`` with a compare mask."""
        op = cond.op
        l, r = self.expr(cond.left), self.expr(cond.right)
        if op in (">", ">="):
            l, r, op = r, l, {">": "<", ">=": "<="}[op]
        pred = {"<": "LT", "<=": "LE", "==": "EQ", "!=": "EQ"}[op]
        x, y = self.expr(a), self.expr(b)
        if ty == F64:
            vec = lambda v: self.op("64UtoV128", self.op("ReinterpF64asI64", v))  # noqa: E731
            mask = self.op(f"Cmp{pred}64F0x2", vec(l), vec(r))
            if op == "!=":
                mask = self.op("NotV128", mask)
            keep = self.op("AndV128", mask, vec(x))
            drop = self.op("AndV128", self.op("NotV128", mask), vec(y))
            res = self.op("OrV128", keep, drop)
            return self.op("ReinterpI64asF64", self.op("V128to64lo", res))
        vec = lambda v: self.op("32UtoV128", self.op("ReinterpF32asI32", v))  # noqa: E731
        mask = self.op("V128to32", self.op(f"Cmp{pred}32F0x4", vec(l), vec(r)))
        if op == "!=":
            mask = self.op("Not32", mask)
        keep = self.op("And32", mask, self.op("ReinterpF32asI32", x))
        drop = self.op("And32", self.op("Not32", mask), self.op("ReinterpF32asI32", y))
        return self.op("ReinterpI32asF32", self.op("Or32", keep, drop))

    # -- calls
    def call(self, e: Call):
        name, args = e.name, e.args
        if name in MATH_CALLS:
            vals = [self.expr(a) for a in args]
            if name == "sin" and not self.math_wrappers:
                return self.soft_sin(vals[0])
            return self.dirty(f"math_{name}", vals, IR_F64)
        if name == "sqrt":
            x = self.expr(args[0])
            if e.ty == F64:
                return self.op("SqrtF64", x)
            return self.f32_vector("Sqrt", x)
        if name == "abs":
            return self.fabs(self.expr(args[0]), e.ty)
        if name == "select":
            return self.select(args[0], args[1], args[2], e.ty)
        if name == "input":
            return self.input(args[0].value)
        if name == "dg_set_dot":
            return self.set_dot(self.expr(args[0]), self.expr(args[1]), e.ty)
        if name == "dg_get_dot":
            return self.get_dot(self.expr(args[0]), e.ty)
        if name in ("f64", "f32", "i64"):
            return self.convert(self.expr(args[0]), args[0].ty, name)
        if name == "x87":
            x = self.expr(args[0])
            self.dirty("x87_store80", (const64(X87_SLOT), x))
            return self.dirty("x87_load80", (const64(X87_SLOT),), IR_F64)
        if name == "reinterp_i64":
            return self.op("ReinterpF64asI64", self.expr(args[0]))
        if name == "reinterp_f64":
            return self.op("ReinterpI64asF64", self.expr(args[0]))
        base, ty = BIT_INTRINSICS[name]
        x = self.expr(args[0])
        mask = args[1].value
        if ty == F64:
            r = self.op(f"{base}64", self.op("ReinterpF64asI64", x), const64(mask))
            return self.op("ReinterpI64asF64", r)
        r = self.op(f"{base}32", self.op("ReinterpF32asI32", x), Const(I32, mask))
        return self.op("ReinterpI32asF32", r)

    def convert(self, x, src, dst):
        if src == dst:
            return x
        if dst == F64:
            return self.op("F32toF64" if src == F32 else "I64StoF64", x)
        if dst == F32:
            if src == I64:
                x = self.op("I64StoF64", x)
            return self.op("F64toF32", x)
        if src == F32:
            x = self.op("F32toF64", x)
        return self.op("F64toI64S", x)

    def input(self, k: int):
        self.inputs = max(self.inputs, k + 1)
        slot, seed = const64(INPUT_BASE + 8 * k), const64(SEED_BASE + 8 * k)
        self.emit(Store(slot, self.dirty("read_input", (const64(k),), IR_F64)))
        self.emit(Store(seed, self.dirty("read_seed", (const64(k),), IR_F64)))
        self.dirty("dg_set_dot", (slot, seed, const64(8)))
        return self.tmp(IR_F64, Load(slot, IR_F64))

    def set_dot(self, x, d, ty):
        ity = IR_TYPE[ty]
        a, b = const64(SCRATCH_A), const64(SCRATCH_B)
        self.emit(Store(a, x))
        self.emit(Store(b, d))
        self.dirty("dg_set_dot", (a, b, const64(ity.width)))
        return self.tmp(ity, Load(a, ity))

    def get_dot(self, x, ty):
        ity = IR_TYPE[ty]
        a, b = const64(SCRATCH_A), const64(SCRATCH_B)
        self.emit(Store(a, x))
        self.emit(Store(b, Const(ity, 0)))  # clears the shadow of the destination too
        self.dirty("dg_get_dot", (a, b, const64(ity.width)))
        return self.tmp(ity, Load(b, ity))

    def output(self, e) -> None:
        x = self.expr(e)
        if e.ty == F32:
            x = self.op("F32toF64", x)
        self.dirty("print_f64", (x,))
        self.dirty("record_dot", (self.get_dot(x, F64),))

    # -- library sine used when math calls are not wrapped
    def soft_sin(self, x):
        if SIN_TABLE not in self.data:
            self.data[SIN_TABLE], self.data[COS_TABLE] = softlib.tables()
        c = lambda v: Const(IR_F64, f64_bits(v))  # noqa: E731
        scaled = self.op("MulF64", x, c(softlib.INV_STEP))
        n = self.op("SubF64", self.op("AddF64", scaled, c(softlib.ROUNDER)), c(softlib.ROUNDER))
        r = self.op("SubF64", x, self.op("MulF64", n, c(softlib.STEP)))
        k = self.op("Add64", self.op("F64toI64S", n), const64(softlib.HALF_TABLE))
        off = self.op("Mul64", k, const64(8))
        s = self.tmp(IR_F64, Load(self.op("Add64", const64(SIN_TABLE), off), IR_F64))
        co = self.tmp(IR_F64, Load(self.op("Add64", const64(COS_TABLE), off), IR_F64))
        r2 = self.op("MulF64", r, r)

        def horner(coeffs):
            acc = c(coeffs[-1])
            for k_ in reversed(coeffs[:-1]):
                acc = self.op("AddF64", c(k_), self.op("MulF64", r2, acc))
            return acc

        sin_r = self.op("MulF64", r, horner(softlib.SIN_COEFFS))
        cos_r = horner(softlib.COS_COEFFS)
        return self.op("AddF64", self.op("MulF64", s, cos_r), self.op("MulF64", co, sin_r))


def compile_module(mod: Module, opt_level: int = 0, math_wrappers: bool = True) -> Compiled:
    return Lowering(mod, opt_level, math_wrappers).program(mod)


def compile_source(src: str, opt_level: int = 0, math_wrappers: bool = True) -> Compiled:
    """Parse, type-check and lower ``src``."""
    return compile_module(check(parse(src)), opt_level, math_wrappers)


