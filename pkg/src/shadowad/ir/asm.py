"""Textual IR format: printer and parser.

One statement per line, ``#`` starts a comment. A program looks like::

    entry 0x24f270
    sb 0x24f270 tmps: t1:I32 t2:I32 t3:I32
      ------ IMark(0x24f275, 7) ------
      t3 = GET:I32(0)      # get %eax
      t2 = GET:I32(12)     # get %ebx
      t1 = Add32(t3,t2)
      PUT(0) = t1
      halt

Constants are hex bit patterns tagged with their type (``0x4000000000000000:F64``).
``goto X`` is shorthand for an Exit whose guard is the constant ``0x1:I1``.
"""

from __future__ import annotations

import json
import re

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
    walk,
)
from .opcodes import OPCODES
from .types import I1, IrType
from .validate import check_expr, type_of, IRTypeError


class IRParseError(Exception):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"line {line}, col {col}: {msg}" if line else msg)
        self.msg = msg
        self.line = line
        self.col = col


# -------------------------------------------------------------------- printer


def format_expr(e) -> str:
    if isinstance(e, RdTmp):
        return f"t{e.tmp}"
    if isinstance(e, Get):
        return f"GET:{e.ty}({e.offset})"
    if isinstance(e, Load):
        return f"LDle:{e.ty}({format_expr(e.addr)})"
    if isinstance(e, Const):
        return f"0x{e.value:x}:{e.ty}"
    if isinstance(e, Op):
        args = ",".join(format_expr(a) for a in e.args)
        if e.op in OPCODES:
            return f"{e.op}({args})"
        return f"{e.op}:{e.ty}({args})"
    if isinstance(e, ITE):
        return f"ITE({format_expr(e.cond)},{format_expr(e.iftrue)},{format_expr(e.iffalse)})"
    if isinstance(e, CCall):
        args = ",".join(format_expr(a) for a in e.args)
        return f"CCALL {e.name}:{e.ty}({args})"
    raise TypeError(f"not an expression: {e!r}")


def format_stmt(s) -> str:
    if isinstance(s, WrTmp):
        return f"t{s.tmp} = {format_expr(s.expr)}"
    if isinstance(s, Put):
        return f"PUT({s.offset}) = {format_expr(s.expr)}"
    if isinstance(s, Store):
        return f"STle({format_expr(s.addr)}) = {format_expr(s.expr)}"
    if isinstance(s, StoreG):
        return f"if ({format_expr(s.guard)}) STle({format_expr(s.addr)}) = {format_expr(s.expr)}"
    if isinstance(s, Cas):
        return (
            f"t{s.old} = CASle({format_expr(s.addr)} :: "
            f"{format_expr(s.expected)} -> {format_expr(s.new)})"
        )
    if isinstance(s, Dirty):
        call = f"DIRTY {s.name}({','.join(format_expr(a) for a in s.args)})"
        if s.dst is not None:
            call = f"t{s.dst} = {call}"
        if s.guard is not None:
            call = f"if ({format_expr(s.guard)}) {call}"
        return call
    if isinstance(s, IMark):
        return f"------ IMark(0x{s.addr:x}, {s.length}) ------"
    if isinstance(s, Exit):
        if s.unconditional:
            return f"goto 0x{s.target:x}"
        return f"if ({format_expr(s.guard)}) goto 0x{s.target:x}"
    if isinstance(s, Halt):
        return "halt"
    raise TypeError(f"not a statement: {s!r}")


def format_superblock(sb: Superblock) -> str:
    tmps = " ".join(f"t{i}:{ty}" for i, ty in sorted(sb.tmp_types.items()))
    lines = [f"sb 0x{sb.addr:x} tmps: {tmps}".rstrip()]
    lines.extend("  " + format_stmt(s) for s in sb.stmts)
    return "\n".join(lines)


def format_program(program: Program) -> str:
    parts = [f"entry 0x{program.entry:x}"]
    for addr in sorted(program.data):
        parts.append(f"data 0x{addr:x} {program.data[addr].hex()}")
    for addr in sorted(program.superblocks):
        parts.append(format_superblock(program.superblocks[addr]))
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------- lexer

_TOKEN = re.compile(
    r"\s*(?:(?P<dash>-{3,})|(?P<arrow>->)|(?P<dcolon>::)|(?P<punct>[(),:=])|(?P<word>[A-Za-z0-9_]+))"
)


class _Tok:
    __slots__ = ("kind", "text", "col")

    def __init__(self, kind, text, col):
        self.kind, self.text, self.col = kind, text, col

    def __repr__(self):
        return f"{self.kind}:{self.text}"


def _lex(line: str, lineno: int) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(line):
        if line[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(line, pos)
        if not m or m.end() == pos:
            raise IRParseError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
        kind = m.lastgroup
        text = m.group(kind)
        col = m.start(kind) + 1
        if kind == "punct":
            kind = text
        elif kind == "arrow":
            kind = "->"
        elif kind == "dcolon":
            kind = "::"
        toks.append(_Tok(kind, text, col))
        pos = m.end()
    return toks


def _is_hex(text: str) -> bool:
    return text.lower().startswith("0x") and len(text) > 2 and all(
        c in "0123456789abcdefABCDEF" for c in text[2:]
    )


class _LineParser:
    def __init__(self, toks: list[_Tok], lineno: int, eol_col: int):
        self.toks = toks
        self.i = 0
        self.lineno = lineno
        self.eol_col = eol_col

    # helpers
    def peek(self, k: int = 0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def error(self, msg: str, tok=None):
        tok = tok if tok is not None else self.peek()
        col = tok.col if tok is not None else self.eol_col
        raise IRParseError(msg, self.lineno, col)

    def next(self):
        tok = self.peek()
        if tok is None:
            self.error("unexpected end of line")
        self.i += 1
        return tok

    def expect(self, kind: str, text: str | None = None):
        tok = self.next()
        if tok.kind != kind or (text is not None and tok.text != text):
            self.error(f"expected {text or kind!r}, found {tok.text!r}", tok)
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == kind and (text is None or tok.text == text)

    def done(self):
        if self.peek() is not None:
            self.error(f"unexpected {self.peek().text!r}")

    def number(self) -> int:
        tok = self.expect("word")
        if _is_hex(tok.text):
            return int(tok.text, 16)
        if tok.text.isdigit():
            return int(tok.text)
        self.error(f"expected a number, found {tok.text!r}", tok)

    def tmp(self) -> int:
        tok = self.expect("word")
        if tok.text[0] == "t" and tok.text[1:].isdigit():
            return int(tok.text[1:])
        self.error(f"expected a temporary, found {tok.text!r}", tok)

    def type_(self) -> IrType:
        tok = self.expect("word")
        try:
            return IrType.parse(tok.text)
        except ValueError as exc:
            self.error(str(exc), tok)

    # expressions
    def expr(self):
        tok = self.next()
        text = tok.text
        if tok.kind != "word":
            self.error(f"expected an expression, found {text!r}", tok)
        if _is_hex(text) or text.isdigit():
            value = int(text, 16) if _is_hex(text) else int(text)
            self.expect(":")
            ty = self.type_()
            try:
                return Const(ty, value)
            except ValueError as exc:
                self.error(str(exc), tok)
        if text[0] == "t" and text[1:].isdigit() and not self.at("("):
            return RdTmp(int(text[1:]))
        if text == "GET":
            self.expect(":")
            ty = self.type_()
            self.expect("(")
            off = self.number()
            self.expect(")")
            return Get(off, ty)
        if text == "LDle":
            self.expect(":")
            ty = self.type_()
            self.expect("(")
            addr = self.expr()
            self.expect(")")
            return Load(addr, ty)
        if text == "ITE":
            self.expect("(")
            c = self.expr()
            self.expect(",")
            a = self.expr()
            self.expect(",")
            b = self.expr()
            self.expect(")")
            return ITE(c, a, b)
        if text == "CCALL":
            name = self.expect("word").text
            self.expect(":")
            ty = self.type_()
            return CCall(name, self.arglist(), ty)
        ty = None
        if self.at(":"):
            self.next()
            ty = self.type_()
        elif text not in OPCODES:
            self.error(f"unknown opcode {text!r} (annotate the result type as {text}:TYPE)", tok)
        args = self.arglist()
        try:
            return Op(text, args, ty if text not in OPCODES else None)
        except ValueError as exc:
            self.error(str(exc), tok)

    def arglist(self) -> tuple:
        self.expect("(")
        args = []
        if self.at(")"):
            self.next()
            return ()
        while True:
            args.append(self.expr())
            if self.at(")"):
                self.next()
                return tuple(args)
            self.expect(",")

    # statements
    def stmt(self):
        tok = self.peek()
        if tok.kind == "dash" or (tok.kind == "word" and tok.text == "IMark"):
            if tok.kind == "dash":
                self.next()
            self.expect("word", "IMark")
            self.expect("(")
            addr = self.number()
            self.expect(",")
            length = self.number()
            if self.at(","):
                self.next()
                self.number()  # delta field of the Valgrind printout, ignored
            self.expect(")")
            if self.at("dash"):
                self.next()
            self.done()
            return IMark(addr, length)
        if tok.kind != "word":
            self.error(f"unexpected {tok.text!r}")
        if tok.text == "halt":
            self.next()
            self.done()
            return Halt()
        if tok.text == "goto":
            self.next()
            target = self.number()
            self.done()
            return Exit(Const(I1, 1), target)
        if tok.text == "PUT":
            self.next()
            self.expect("(")
            off = self.number()
            self.expect(")")
            self.expect("=")
            e = self.expr()
            self.done()
            return Put(off, e)
        if tok.text == "STle":
            addr, e = self._store()
            return Store(addr, e)
        if tok.text == "DIRTY":
            return self._dirty(None, None)
        if tok.text == "if":
            self.next()
            self.expect("(")
            guard = self.expr()
            self.expect(")")
            nxt = self.peek()
            if nxt is None:
                self.error("unexpected end of line")
            if nxt.text == "goto":
                self.next()
                target = self.number()
                self.done()
                return Exit(guard, target)
            if nxt.text == "STle":
                addr, e = self._store()
                return StoreG(guard, addr, e)
            if nxt.text == "DIRTY":
                return self._dirty(None, guard)
            dst = self.tmp()
            self.expect("=")
            return self._dirty(dst, guard)
        dst = self.tmp()
        self.expect("=")
        if self.at("word", "CASle"):
            self.next()
            self.expect("(")
            addr = self.expr()
            self.expect("::")
            expd = self.expr()
            self.expect("->")
            new = self.expr()
            self.expect(")")
            self.done()
            return Cas(dst, addr, expd, new)
        if self.at("word", "DIRTY"):
            return self._dirty(dst, None)
        e = self.expr()
        self.done()
        return WrTmp(dst, e)

    def _store(self):
        self.expect("word", "STle")
        self.expect("(")
        addr = self.expr()
        self.expect(")")
        self.expect("=")
        e = self.expr()
        self.done()
        return addr, e

    def _dirty(self, dst, guard):
        self.expect("word", "DIRTY")
        name = self.expect("word").text
        args = self.arglist()
        self.done()
        return Dirty(name, args, dst, guard)


# --------------------------------------------------------------------- parser


def _parse_tmps(p: _LineParser) -> dict[int, IrType]:
    types: dict[int, IrType] = {}
    positional = 0
    while p.peek() is not None:
        tok = p.peek()
        if tok.kind == "word" and tok.text[0] == "t" and tok.text[1:].isdigit() and p.peek(1) is not None and p.peek(1).kind == ":":
            idx = p.tmp()
            p.expect(":")
            types[idx] = p.type_()
        else:
            types[positional] = p.type_()
            positional += 1
    return types


def _check_stmt(stmt, types, assigned, lineno):
    for e in walk(stmt):
        if isinstance(e, RdTmp) and e.tmp not in assigned:
            raise IRParseError(f"undefined temporary t{e.tmp}", lineno, 1)
    for e in _exprs_of(stmt):
        errs = check_expr(e, types)
        if errs:
            raise IRParseError(f"type mismatch: {errs[0]}", lineno, 1)
    dst = assigned_tmp(stmt)
    if dst is not None:
        if dst in assigned:
            raise IRParseError(f"temporary t{dst} assigned twice", lineno, 1)
        if dst not in types:
            raise IRParseError(f"temporary t{dst} not declared in the block header", lineno, 1)
        if isinstance(stmt, WrTmp):
            try:
                got = type_of(stmt.expr, types)
            except IRTypeError as exc:
                raise IRParseError(str(exc), lineno, 1) from None
            if got is not types[dst]:
                raise IRParseError(
                    f"type mismatch: t{dst} declared {types[dst]} but assigned {got}", lineno, 1
                )
        assigned.add(dst)


def _exprs_of(stmt):
    from .nodes import sub_exprs

    return sub_exprs(stmt)


def parse_asm(text: str) -> Program:
    """Parse the textual IR format into a Program.

    Raises IRParseError (with line/column) on syntax errors, temporaries
    assigned twice, operand type mismatches and reads of unassigned
    temporaries.
    """
    entry = None
    data: dict[int, bytes] = {}
    blocks: dict[int, Superblock] = {}
    cur_addr = None
    cur_types: dict[int, IrType] = {}
    cur_stmts: list = []
    assigned: set[int] = set()

    def close():
        if cur_addr is not None:
            blocks[cur_addr] = Superblock(cur_addr, tuple(cur_stmts), dict(cur_types))

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        toks = _lex(line, lineno)
        p = _LineParser(toks, lineno, len(line) + 1)
        head = toks[0]
        if head.kind == "word" and head.text == "entry":
            p.next()
            entry = p.number()
            p.done()
        elif head.kind == "word" and head.text == "data":
            p.next()
            addr = p.number()
            tok = p.expect("word")
            try:
                data[addr] = bytes.fromhex(tok.text)
            except ValueError:
                p.error("data payload must be hex bytes", tok)
            p.done()
        elif head.kind == "word" and head.text == "sb":
            close()
            p.next()
            cur_addr = p.number()
            if cur_addr in blocks:
                raise IRParseError(f"duplicate superblock 0x{cur_addr:x}", lineno, head.col)
            cur_types, cur_stmts, assigned = {}, [], set()
            if p.peek() is not None:
                p.expect("word", "tmps")
                p.expect(":")
                cur_types = _parse_tmps(p)
        else:
            if cur_addr is None:
                raise IRParseError("statement outside a superblock", lineno, head.col)
            stmt = p.stmt()
            _check_stmt(stmt, cur_types, assigned, lineno)
            cur_stmts.append(stmt)
    close()
    if not blocks:
        raise IRParseError("no superblocks")
    if entry is None:
        entry = min(blocks)
    return Program(blocks, entry, data)


# ------------------------------------------------------------------ JSON dump


def _to_jsonable(node):
    if isinstance(node, IrType):
        return node.value
    if isinstance(node, (list, tuple)):
        return [_to_jsonable(x) for x in node]
    if isinstance(node, Program):
        return {
            "Program": {
                "entry": node.entry,
                "data": {str(a): b.hex() for a, b in sorted(node.data.items())},
                "superblocks": [_to_jsonable(node.superblocks[a]) for a in sorted(node.superblocks)],
            }
        }
    if isinstance(node, Superblock):
        return {
            "Superblock": {
                "addr": node.addr,
                "tmp_types": {str(i): t.value for i, t in sorted(node.tmp_types.items())},
                "stmts": [_to_jsonable(s) for s in node.stmts],
            }
        }
    if hasattr(node, "__dataclass_fields__"):
        body = {name: _to_jsonable(getattr(node, name)) for name in node.__dataclass_fields__}
        return {type(node).__name__: body}
    return node


def to_json(program: Program, indent: int | None = 1) -> str:
    """Structural JSON dump; every node is keyed by its class name."""
    return json.dumps(_to_jsonable(program), indent=indent)
