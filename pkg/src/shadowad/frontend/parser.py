"""Lexer and recursive-descent parser for minilang."""

from __future__ import annotations

import re

from ..fpcodec import round_f32
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
    Pos,
    Unary,
    Var,
    While,
)


class CompileError(Exception):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"line {line}, col {col}: {msg}" if line else msg)
        self.msg = msg
        self.line = line
        self.col = col

    @classmethod
    def at(cls, pos: Pos, msg: str) -> CompileError:
        return cls(msg, pos.line, pos.col)


KEYWORDS = {"f64", "f32", "i64", "if", "else", "while", "for", "in", "output", "print"}

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+|//[^\n]*)
  | (?P<nl>\n)
  | (?P<hex>0[xX][0-9a-fA-F]+)
  | (?P<float>(\d+\.(?!\.)\d*|\.\d+)([eE][+-]?\d+)?f?|\d+[eE][+-]?\d+f?|\d+f)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\.\.|<=|>=|==|!=|&&|\|\||[-+*/<>=!()\[\]{},;])
""", re.VERBOSE)


def tokenize(src: str):
    """Tokens as ``(kind, text, Pos)``, ending with an ``eof`` token."""
    out = []
    line, line_start = 1, 0
    i = 0
    while i < len(src):
        m = _TOKEN.match(src, i)
        if m is None:
            raise CompileError(f"unexpected character {src[i]!r}", line, i - line_start + 1)
        kind = m.lastgroup
        pos = Pos(line, i - line_start + 1)
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind != "ws":
            text = m.group()
            if kind == "name" and text in KEYWORDS:
                kind = "kw"
            out.append((kind, text, pos))
        i = m.end()
    out.append(("eof", "", Pos(line, i - line_start + 1)))
    return out


_CMP = ("<", "<=", ">", ">=", "==", "!=")


class Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0

    # -- token helpers
    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def at(self, text: str) -> bool:
        kind, t, _ = self.peek()
        return t == text and kind in ("op", "kw")

    def expect(self, text: str):
        kind, t, pos = self.peek()
        if t != text or kind not in ("op", "kw"):
            raise CompileError.at(pos, f"expected {text!r}, found {t or 'end of input'!r}")
        return self.next()

    def expect_name(self):
        kind, t, pos = self.peek()
        if kind != "name":
            raise CompileError.at(pos, f"expected a name, found {t or 'end of input'!r}")
        self.next()
        return t, pos

    # -- statements
    def module(self) -> Module:
        stmts = []
        while self.peek()[0] != "eof":
            stmts.append(self.statement())
        return Module(stmts)

    def block(self) -> list:
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.peek()[0] == "eof":
                raise CompileError.at(self.peek()[2], "unterminated block")
            stmts.append(self.statement())
        self.expect("}")
        return stmts

    def statement(self):
        kind, t, pos = self.peek()
        if kind == "kw" and t in (F64, F32, I64):
            self.next()
            name, _ = self.expect_name()
            size = None
            if self.at("["):
                self.next()
                k, n, npos = self.next()
                if k != "int" or int(n) < 1:
                    raise CompileError.at(npos, "array size must be a positive integer literal")
                size = int(n)
                self.expect("]")
            init = None
            if self.at("="):
                if size is not None:
                    raise CompileError.at(self.peek()[2], "arrays cannot have an initializer")
                self.next()
                init = self.expr()
            self.expect(";")
            return Decl(t, name, size, init, pos)
        if kind == "kw" and t == "if":
            self.next()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.block()
            els = None
            if self.at("else"):
                self.next()
                els = [self.statement()] if self.at("if") else self.block()
            return If(cond, then, els, pos)
        if kind == "kw" and t == "while":
            self.next()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            return While(cond, self.block(), pos)
        if kind == "kw" and t == "for":
            self.next()
            name, npos = self.expect_name()
            self.expect("in")
            lo = self.expr()
            self.expect("..")
            hi = self.expr()
            return For(Var(name, npos), lo, hi, self.block(), pos)
        if kind == "kw" and t in ("output", "print"):
            self.next()
            self.expect("(")
            e = self.expr()
            self.expect(")")
            self.expect(";")
            return Output(e, pos)
        if kind == "name":
            target = self.postfix_name()
            if not isinstance(target, (Var, Index)):
                raise CompileError.at(pos, "expected an assignment")
            self.expect("=")
            e = self.expr()
            self.expect(";")
            return Assign(target, e, pos)
        raise CompileError.at(pos, f"unexpected {t or 'end of input'!r}")

    # -- expressions, lowest precedence first
    def expr(self):
        return self.or_expr()

    def or_expr(self):
        e = self.and_expr()
        while self.at("||"):
            pos = self.next()[2]
            e = Binary("||", e, self.and_expr(), pos)
        return e

    def and_expr(self):
        e = self.cmp_expr()
        while self.at("&&"):
            pos = self.next()[2]
            e = Binary("&&", e, self.cmp_expr(), pos)
        return e

    def cmp_expr(self):
        e = self.add_expr()
        if any(self.at(c) for c in _CMP):
            _, op, pos = self.next()
            e = Binary(op, e, self.add_expr(), pos)
            if any(self.at(c) for c in _CMP):
                raise CompileError.at(self.peek()[2], "comparisons do not chain")
        return e

    def add_expr(self):
        e = self.mul_expr()
        while self.at("+") or self.at("-"):
            _, op, pos = self.next()
            e = Binary(op, e, self.mul_expr(), pos)
        return e

    def mul_expr(self):
        e = self.unary()
        while self.at("*") or self.at("/"):
            _, op, pos = self.next()
            e = Binary(op, e, self.unary(), pos)
        return e

    def unary(self):
        if self.at("-") or self.at("!"):
            _, op, pos = self.next()
            return Unary(op, self.unary(), pos)
        return self.primary()

    def primary(self):
        kind, t, pos = self.peek()
        if kind == "int":
            self.next()
            return Num(int(t), I64, pos)
        if kind == "hex":
            self.next()
            return Num(int(t, 16), I64, pos)
        if kind == "float":
            self.next()
            if t.endswith("f"):
                return Num(round_f32(float(t[:-1])), F32, pos)
            return Num(float(t), F64, pos)
        if kind == "name" or (kind == "kw" and t in (F64, F32, I64) and self.peek(1)[1] == "("):
            return self.postfix_name()
        if self.at("("):
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        raise CompileError.at(pos, f"expected an expression, found {t or 'end of input'!r}")

    def postfix_name(self):
        _, name, pos = self.next()
        if self.at("("):
            self.next()
            args = []
            if not self.at(")"):
                args.append(self.expr())
                while self.at(","):
                    self.next()
                    args.append(self.expr())
            self.expect(")")
            return Call(name, args, pos)
        if self.at("["):
            self.next()
            idx = self.expr()
            self.expect("]")
            return Index(name, idx, pos)
        return Var(name, pos)


def parse(src: str) -> Module:
    return Parser(src).module()
