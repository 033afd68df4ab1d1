"""Random minilang programs for differential testing.

Programs are deterministic in their seed, always terminate (every loop has a
literal trip bound), and keep divisions, logarithms, roots and inverse
trigonometric functions away from singular points by construction, e.g.
``a / (b*b + 1.0)`` or ``log(b*b + 1.0)``.

A program is *smooth* when it avoids constructs that make central
differences meaningless: floor/ceil/fmod, float-dependent branches and
selects, float-to-integer conversion, float32 arithmetic (too coarse for
h = 1e-6) and explicit dot seeding.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field

from ..ir.nodes import Dirty, Op, walk
from ..ir.opcodes import OPCODES

# features that rule a program out of the finite-difference subset
ROUGH = frozenset({"floor", "ceil", "fmod", "branch", "select", "f32", "to_int", "set_dot"})


@dataclass
class ProgramSpec:
    """Shape of a generated program: f maps n inputs to m outputs."""

    seed: int
    n_inputs: int
    n_outputs: int
    seed_index: int  # the input carrying dot 1
    inputs: list[float]
    features: set[str] = field(default_factory=set)

    def __post_init__(self):
        if self.n_inputs < 1 or self.n_outputs < 1:
            raise ValueError("a program needs at least one input and one output")

    @property
    def smooth(self) -> bool:
        return not (self.features & ROUGH)


def _lit(r: random.Random, lo: float = 0.1, hi: float = 2.0) -> str:
    return repr(round(r.uniform(lo, hi), 3))


class _Gen:
    def __init__(self, seed: int, budget: int):
        self.r = random.Random(seed)
        self.budget = budget
        self.features: set[str] = set()
        self.smooth_only = self.r.random() < 0.4
        self.names = 0
        self.vars: list[str] = []
        self.lines: list[str] = []

    def fresh(self, prefix: str) -> str:
        self.names += 1
        return f"{prefix}{self.names}"

    def pick(self, options):
        """Weighted choice among ``(weight, feature, fn)`` honoring the smooth profile."""
        allowed = [o for o in options if not (self.smooth_only and o[1] in ROUGH)]
        total = sum(w for w, _, _ in allowed)
        x = self.r.uniform(0, total)
        for w, feat, fn in allowed:
            x -= w
            if x <= 0:
                break
        if feat:
            self.features.add(feat)
        return fn()

    # -- f64 expressions
    def atom(self) -> str:
        if self.vars and self.r.random() < 0.75:
            return self.r.choice(self.vars)
        return _lit(self.r)

    def expr(self, depth: int) -> str:
        if depth <= 0:
            return self.atom()
        r = self.r
        a = lambda: self.expr(depth - 1)  # noqa: E731
        return self.pick([
            (3, None, self.atom),
            (3, None, lambda: f"({a()} + {a()})"),
            (3, None, lambda: f"({a()} - {a()})"),
            (4, None, lambda: f"({a()} * {a()})"),
            (2, "div", lambda: f"({a()} / ({self.square(depth)} + {_lit(r, 0.5, 2.0)}))"),
            (1, "neg", lambda: f"(-{a()})"),
            (1, "abs", lambda: f"abs({a()})"),
            (1, "sqrt", lambda: f"sqrt({self.square(depth)} + {_lit(r, 0.1, 1.0)})"),
            (3, "math", lambda: self.math(depth)),
            (1, "select", lambda: f"select({a()} {r.choice(['<', '<=', '>', '>=', '==', '!='])} "
                                  f"{a()}, {a()}, {a()})"),
            (1, "x87", lambda: f"x87({a()})"),
            (1, "f32", lambda: f"f64(f32({a()}) * {_lit(r)}f)"),
            (1, "to_int", lambda: f"f64(i64({a()}) * 3 - 1)"),
            (1, "set_dot", lambda: f"dg_set_dot({a()}, {_lit(r)})"),
        ])

    def square(self, depth: int) -> str:
        x = self.expr(depth - 1)
        return f"({x} * {x})"

    def bounded(self, depth: int) -> str:
        return f"tanh({self.expr(depth - 1)})"

    def math(self, depth: int) -> str:
        r = self.r
        a = lambda: self.expr(depth - 1)  # noqa: E731
        self.features.add("math")
        options = [
            (1, None, lambda: f"sin({a()})"),
            (1, None, lambda: f"cos({a()})"),
            (1, None, lambda: f"tan({self.bounded(depth)})"),
            (1, None, lambda: f"asin({self.bounded(depth)} * 0.9)"),
            (1, None, lambda: f"acos({self.bounded(depth)} * 0.9)"),
            (1, None, lambda: f"atan({a()})"),
            (1, None, lambda: f"atan2({a()}, {self.square(depth)} + {_lit(r, 0.5, 2.0)})"),
            (1, None, lambda: f"sinh({self.bounded(depth)} * 2.0)"),
            (1, None, lambda: f"cosh({self.bounded(depth)} * 2.0)"),
            (1, None, lambda: f"tanh({a()})"),
            (1, None, lambda: f"exp({self.bounded(depth)} * 2.0)"),
            (1, None, lambda: f"log({self.square(depth)} + {_lit(r, 0.5, 2.0)})"),
            (1, None, lambda: f"log10({self.square(depth)} + {_lit(r, 0.5, 2.0)})"),
            (1, None, lambda: f"pow({self.square(depth)} + {_lit(r, 0.5, 2.0)}, {_lit(r, -2.0, 2.0)})"),
            (1, None, lambda: f"fabs({a()})"),
            (1, "fmod", lambda: f"fmod({a()}, {self.square(depth)} + {_lit(r, 0.5, 2.0)})"),
            (1, "floor", lambda: f"floor({a()})"),
            (1, "ceil", lambda: f"ceil({a()})"),
            (1, None, lambda: f"ldexp({a()}, {r.randint(-3, 3) % 4})"),
        ]
        return self.pick(options)

    def cond(self) -> str:
        self.features.add("branch")
        op = self.r.choice(["<", "<=", ">", ">=", "==", "!="])
        c = f"{self.expr(1)} {op} {self.expr(1)}"
        if self.r.random() < 0.3:
            c = f"{c} {self.r.choice(['&&', '||'])} !({self.expr(1)} < {self.expr(0)})"
        return c

    # -- statements
    def assign_existing(self, depth: int, indent: str) -> None:
        v = self.r.choice(self.vars)
        # contraction keeps repeated updates bounded
        self.lines.append(f"{indent}{v} = {self.expr(depth)} * 0.5;")

    def statement(self, indent: str, nested: int) -> None:
        self.budget -= 1
        r = self.r
        choices = [(4, None, lambda: self.assign_existing(2, indent))]
        if nested < 2 and self.budget > 2:
            choices += [
                (1, "branch", lambda: self.if_stmt(indent, nested)),
                (1, "branch", lambda: self.while_stmt(indent, nested)),
                (1, None, lambda: self.for_stmt(indent, nested)),
            ]
        if not indent:
            choices += [
                (2, None, lambda: self.declare(indent)),
                (1, "f32", lambda: self.f32_block(indent)),
            ]
        del r
        self.pick(choices)

    def declare(self, indent: str) -> None:
        v = self.fresh("v")
        self.lines.append(f"{indent}f64 {v} = {self.expr(2)};")
        self.vars.append(v)

    def body(self, indent: str, nested: int) -> None:
        for _ in range(self.r.randint(1, 2)):
            self.statement(indent + "  ", nested + 1)

    def if_stmt(self, indent: str, nested: int) -> None:
        self.lines.append(f"{indent}if ({self.cond()}) {{")
        self.body(indent, nested)
        if self.r.random() < 0.5:
            self.lines.append(f"{indent}}} else {{")
            self.body(indent, nested)
        self.lines.append(f"{indent}}}")

    def while_stmt(self, indent: str, nested: int) -> None:
        c = self.fresh("c")
        self.lines.append(f"{indent}i64 {c} = 0;" if not indent else f"{indent}{c} = 0;")
        if indent:
            # declarations stay at top level; hoist the counter
            self.lines.insert(0, f"i64 {c} = 0;")
        self.lines.append(f"{indent}while (({self.cond()}) && {c} < {self.r.randint(1, 4)}) {{")
        self.body(indent, nested)
        self.lines.append(f"{indent}  {c} = {c} + 1;")
        self.lines.append(f"{indent}}}")

    def for_stmt(self, indent: str, nested: int) -> None:
        n = self.r.randint(2, 5)
        arr, i = self.fresh("a"), self.fresh("i")
        self.features.add("array")
        self.lines.insert(0, f"f64 {arr}[{n}];")
        self.lines.append(f"{indent}for {i} in 0..{n} {{")
        self.lines.append(f"{indent}  {arr}[{i}] = {self.expr(1)} * f64({i} + 1);")
        if self.r.random() < 0.5:
            self.statement(indent + "  ", nested + 1)
        self.lines.append(f"{indent}}}")
        v = self.r.choice(self.vars)
        k = self.r.randrange(n)
        self.lines.append(f"{indent}{v} = ({v} + {arr}[{k}]) * 0.5;")

    def f32_block(self, indent: str) -> None:
        z = self.fresh("z")
        self.lines.append(f"{indent}f32 {z} = f32({self.expr(1)});")
        op = self.r.choice(["+", "-", "*", "/"])
        rhs = f"({z} * {z} + {_lit(self.r, 0.5, 2.0)}f)" if op == "/" else f"{_lit(self.r)}f"
        self.lines.append(f"{indent}{z} = {z} {op} {rhs};")
        if self.r.random() < 0.3:
            self.lines.append(f"{indent}{z} = sqrt({z} * {z} + 1.0f);")
        if self.r.random() < 0.3:
            self.lines.append(f"{indent}{z} = abs(-{z});")
        if self.r.random() < 0.3:
            self.lines.append(f"{indent}{z} = select({z} < 1.0f, {z}, {z} * 0.5f);")
        v = self.r.choice(self.vars)
        self.lines.append(f"{indent}{v} = {v} + f64({z});")


def gen_random(seed: int, budget: int = 8) -> tuple[str, ProgramSpec]:
    """A random program of roughly ``budget`` statements and its spec."""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    g = _Gen(seed, budget)
    r = g.r
    n = r.randint(1, 3)
    for k in range(n):
        g.lines.append(f"f64 x{k} = input({k});")
        g.vars.append(f"x{k}")
    while g.budget > 0:
        g.statement("", 0)
    m = r.randint(1, 3)
    for _ in range(m):
        g.lines.append(f"output({g.expr(2)});")
    inputs = [round(r.uniform(-2.0, 2.0), 6) for _ in range(n)]
    spec = ProgramSpec(seed, n, m, r.randrange(n), inputs, g.features)
    return "\n".join(g.lines) + "\n", spec


def coverage_classes(program) -> set[str]:
    """Opcode kinds and dirty-call families appearing in ``program``."""
    out = set()
    for sb in program.superblocks.values():
        for stmt in sb.stmts:
            if isinstance(stmt, Dirty):
                out.add("dirty:" + stmt.name.split("_")[0])
            for e in walk(stmt):
                if isinstance(e, Op) and e.op in OPCODES:
                    out.add(OPCODES[e.op].kind)
    return out


def coverage(programs) -> Counter:
    """How many of ``programs`` contain each class."""
    c = Counter()
    for p in programs:
        c.update(coverage_classes(p))
    return c


# opcode kinds the compiler can emit (full-vector forms only when optimizing)
EMITTED_KINDS = ("scalar-fp", "compare", "simd-fp", "lowest-lane", "fp-convert", "int-convert",
                 "reinterpret", "pack", "bitwise", "integer")
