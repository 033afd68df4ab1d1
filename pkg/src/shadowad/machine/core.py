"""The synthetic CPU.

Superblocks are compiled once per machine into lists of Python closures over
a temporary list, then executed until a Halt, an unknown target or fuel
exhaustion. Guest state is one byte block of ``3 * m_gs`` bytes: registers,
their shadows at ``+m_gs`` and a reserved band.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..ir.nodes import (
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
)
from ..ir.types import I1
from ..ir.validate import M_GS, type_of
from ..shadowmem import ShadowMap
from .dirty import default_ccalls, default_dirty
from .faults import MachineFault
from .memory import Memory
from .ops import SEMANTICS

HALT = -1
DEFAULT_FUEL = 10_000_000


@dataclass
class RunResult:
    status: str  # "halted", "break", "step"
    superblocks: int
    pc: int | None


@dataclass
class Thread:
    entry: int
    guest: bytearray
    pc: int
    halted: bool = False
    superblocks: int = 0


@dataclass
class ThreadRun:
    threads: list[Thread]
    schedule: list[int] = field(default_factory=list)


class Machine:
    def __init__(self, m_gs: int = M_GS, *, tool: bool = True, inputs=(), seeds=(), stdout=None,
                 dirty=None, ccalls=None):
        self.m_gs = m_gs
        self.tool = tool
        self.guest = bytearray(3 * m_gs)
        self.memory = Memory()
        self.shadow = ShadowMap()
        self.dirty = dirty if dirty is not None else default_dirty()
        self.ccalls = ccalls if ccalls is not None else default_ccalls()
        self.inputs = list(inputs)
        self.seeds = list(seeds)
        self.stdout = stdout
        self.outputs: list[int] = []
        self.dot_outputs: list[int] = []
        self.imark: int | None = None
        self.pc: int | None = None
        self.halted = False
        self.superblocks_run = 0
        self._compiled: dict[int, tuple] = {}
        self._loaded: set[int] = set()
        self._cursor = None

    # ----------------------------------------------------------- guest access

    def get_guest(self, offset: int, width: int) -> int:
        return int.from_bytes(self.guest[offset : offset + width], "little")

    def put_guest(self, offset: int, value: int, width: int) -> None:
        self.guest[offset : offset + width] = value.to_bytes(width, "little")

    def register_dirty(self, name: str, fn) -> None:
        self.dirty.register(name, fn)

    # --------------------------------------------------------------- compile

    def _expr(self, e, types):
        m = self
        if isinstance(e, RdTmp):
            i = e.tmp
            return lambda t: t[i]
        if isinstance(e, Const):
            v = e.value
            return lambda t: v
        if isinstance(e, Get):
            off, w = e.offset, e.ty.width
            end = off + w
            if e.ty is I1:
                return lambda t: 1 if m.guest[off] else 0
            return lambda t: int.from_bytes(m.guest[off:end], "little")
        if isinstance(e, Load):
            fa, w = self._expr(e.addr, types), e.ty.width
            mem = self.memory
            if e.ty is I1:
                return lambda t: 1 if mem.read_int(fa(t), 1) else 0
            return lambda t: mem.read_int(fa(t), w)
        if isinstance(e, Op):
            fn = SEMANTICS.get(e.op)
            if fn is None:
                name = e.op

                def unhandled(t):
                    raise MachineFault("opcode", f"unhandled opcode {name}")

                return unhandled
            args = [self._expr(a, types) for a in e.args]
            if len(args) == 1:
                (a,) = args
                return lambda t: fn(a(t))
            if len(args) == 2:
                a, b = args
                return lambda t: fn(a(t), b(t))
            return lambda t: fn(*[a(t) for a in args])
        if isinstance(e, ITE):
            c, a, b = (self._expr(x, types) for x in (e.cond, e.iftrue, e.iffalse))
            return lambda t: a(t) if c(t) else b(t)
        if isinstance(e, CCall):
            fn = self.ccalls.get(e.name)
            name, ty = e.name, e.ty
            if fn is None:

                def unknown(t):
                    raise MachineFault("ccall", f"unknown helper {name}")

                return unknown
            args = [self._expr(a, types) for a in e.args]
            mask = ty.mask
            return lambda t: fn(ty, *[a(t) for a in args]) & mask
        raise TypeError(f"not an expression: {e!r}")

    def _stmt(self, s, types):
        m = self
        if isinstance(s, WrTmp):
            i, f = s.tmp, self._expr(s.expr, types)

            def wrtmp(t):
                t[i] = f(t)

            return wrtmp
        if isinstance(s, Put):
            off, f = s.offset, self._expr(s.expr, types)
            w = type_of(s.expr, types).width
            end = off + w

            def put(t):
                m.guest[off:end] = f(t).to_bytes(w, "little")

            return put
        if isinstance(s, (Store, StoreG)):
            fa, f = self._expr(s.addr, types), self._expr(s.expr, types)
            w = type_of(s.expr, types).width
            mem = self.memory
            if isinstance(s, Store):

                def store(t):
                    mem.write_int(fa(t), f(t), w)

                return store
            g = self._expr(s.guard, types)

            def storeg(t):
                if g(t):
                    mem.write_int(fa(t), f(t), w)

            return storeg
        if isinstance(s, Cas):
            i = s.old
            fa, fe, fn = (self._expr(x, types) for x in (s.addr, s.expected, s.new))
            w = types[s.old].width

            def cas(t):
                t[i], _ = m.cas_step(fa(t), fe(t), fn(t), w)

            return cas
        if isinstance(s, Dirty):
            name = s.name
            args = [self._expr(a, types) for a in s.args]
            g = self._expr(s.guard, types) if s.guard is not None else None
            dst = s.dst
            mask = types[dst].mask if dst is not None else 0
            dirty = self.dirty

            def call(t):
                if g is not None and not g(t):
                    return None
                fn = dirty.get(name)
                if fn is None:
                    raise MachineFault("dirty", f"unknown dirty call {name}")
                r = fn(m, *[a(t) for a in args])
                if dst is not None:
                    t[dst] = (r or 0) & mask

            return call
        if isinstance(s, IMark):
            addr = s.addr

            def imark(t):
                m.imark = addr

            return imark
        if isinstance(s, Exit):
            g, target = self._expr(s.guard, types), s.target
            if s.unconditional:
                return lambda t: target
            return lambda t: target if g(t) else None
        if isinstance(s, Halt):
            return lambda t: HALT
        raise TypeError(f"not a statement: {s!r}")

    def compiled(self, sb: Superblock):
        entry = self._compiled.get(id(sb))
        if entry is None or entry[0] is not sb:
            fns = [self._stmt(s, sb.tmp_types) for s in sb.stmts]
            entry = (sb, fns, sb.max_tmp + 1)
            self._compiled[id(sb)] = entry
        return entry

    # ---------------------------------------------------------------- execute

    def load(self, program: Program) -> None:
        """Copy the program's data image into memory (once per program)."""
        if id(program) in self._loaded:
            return
        self._loaded.add(id(program))
        for addr, data in program.data.items():
            self.memory.write(addr, data)

    def _exec_one(self, program: Program, pc: int) -> int:
        sb = program.superblocks.get(pc)
        if sb is None:
            raise MachineFault("target", f"no superblock at 0x{pc:x}", pc=pc)
        _, fns, ntmp = self.compiled(sb)
        t = [0] * ntmp
        try:
            for f in fns:
                r = f(t)
                if r is not None:
                    self.superblocks_run += 1
                    return r
        except MachineFault as fault:
            fault.pc = pc if fault.pc is None else fault.pc
            fault.imark = self.imark
            raise
        raise MachineFault("fallthrough", f"fell off the end of superblock 0x{pc:x}", pc=pc)

    def run(self, program: Program, fuel: int = DEFAULT_FUEL, entry: int | None = None) -> RunResult:
        """Execute from ``entry`` (default: program entry) until Halt."""
        self.load(program)
        pc = program.entry if entry is None else entry
        self.halted = False
        self._cursor = None
        done = 0
        while True:
            if done >= fuel:
                self.pc = pc
                raise MachineFault("fuel", f"fuel exhausted after {done} superblocks", pc=pc)
            pc = self._exec_one(program, pc)
            done += 1
            if pc == HALT:
                self.halted = True
                self.pc = None
                return RunResult("halted", done, None)

    # --------------------------------------------------- paused execution

    def start(self, program: Program, entry: int | None = None) -> None:
        """Prepare a statement-level cursor for ``resume``."""
        self.load(program)
        self.pc = program.entry if entry is None else entry
        self.halted = False
        self._cursor = (self.pc, 0, None)

    @property
    def cursor(self):
        return self._cursor

    def resume(self, program: Program, *, breakpoints=frozenset(), step: bool = False,
               fuel: int = DEFAULT_FUEL) -> RunResult:
        """Run from the cursor until Halt, a breakpoint IMark or (``step``) the next superblock.

        A breakpoint pauses before its IMark executes. Resuming from a paused
        IMark executes it rather than stopping again.
        """
        if self._cursor is None:
            if self.halted:
                return RunResult("halted", 0, None)
            raise MachineFault("state", "no program started")
        pc, idx, t = self._cursor
        done = 0
        first = True
        while True:
            sb = program.superblocks.get(pc)
            if sb is None:
                raise MachineFault("target", f"no superblock at 0x{pc:x}", pc=pc)
            _, fns, ntmp = self.compiled(sb)
            if t is None:
                t = [0] * ntmp
            r = None
            while idx < len(fns):
                stmt = sb.stmts[idx]
                if not first and isinstance(stmt, IMark) and stmt.addr in breakpoints:
                    self._cursor = (pc, idx, t)
                    self.pc = pc
                    return RunResult("break", done, pc)
                first = False
                try:
                    r = fns[idx](t)
                except MachineFault as fault:
                    fault.pc, fault.imark = pc, self.imark
                    self._cursor = (pc, idx, t)
                    raise
                idx += 1
                if r is not None:
                    break
            else:
                raise MachineFault("fallthrough", f"fell off the end of superblock 0x{pc:x}", pc=pc)
            done += 1
            self.superblocks_run += 1
            if r == HALT:
                self.halted = True
                self._cursor = None
                self.pc = None
                return RunResult("halted", done, None)
            pc, idx, t = r, 0, None
            self.pc = pc
            if step:
                self._cursor = (pc, 0, None)
                return RunResult("step", done, pc)
            if done >= fuel:
                self._cursor = (pc, 0, None)
                raise MachineFault("fuel", f"fuel exhausted after {done} superblocks", pc=pc)

    # --------------------------------------------------------------------- CAS

    def cas_step(self, addr: int, expected: int, new: int, width: int, expected_shadow: int = 0,
                 new_shadow: int = 0, compare_shadow: bool = False) -> tuple[int, bool]:
        """Compare-and-swap on ``width`` bytes; returns ``(old value, success)``.

        With ``compare_shadow`` the shadow must match too, and both memory and
        shadow are written on success, neither on failure.
        """
        old = self.memory.read_int(addr, width)
        ok = old == expected
        if compare_shadow:
            ok = ok and self.shadow.read_int(addr, width) == expected_shadow
        if ok:
            self.memory.write_int(addr, new, width)
            if compare_shadow:
                self.shadow.write_int(addr, new_shadow, width)
        return old, ok

    # ----------------------------------------------------------------- threads

    def run_threads(self, program: Program, entries, seed: int | None = 0, schedule=None,
                    fuel: int = DEFAULT_FUEL, quanta: int | None = None) -> ThreadRun:
        """Cooperatively interleave threads, one superblock per quantum.

        Each thread owns a guest block; memory and shadow memory are shared.
        ``schedule`` (thread ids) overrides the seeded random choice while it
        lasts; afterwards the seeded choice continues. ``quanta`` stops early
        (without a fault) after that many superblocks, leaving threads unfinished.
        """
        if not entries:
            raise ValueError("at least one thread is required")
        self.load(program)
        threads = [Thread(e, bytearray(3 * self.m_gs), e) for e in entries]
        rng = random.Random(seed)
        forced = iter(schedule or ())
        log: list[int] = []
        saved = self.guest
        done = 0
        try:
            while True:
                live = [i for i, th in enumerate(threads) if not th.halted]
                if not live or (quanta is not None and done >= quanta):
                    break
                if done >= fuel:
                    raise MachineFault("fuel", f"fuel exhausted after {done} superblocks")
                pick = next(forced, None)
                if pick is None or threads[pick].halted:
                    pick = rng.choice(live)
                th = threads[pick]
                self.guest = th.guest
                nxt = self._exec_one(program, th.pc)
                th.superblocks += 1
                done += 1
                log.append(pick)
                if nxt == HALT:
                    th.halted = True
                else:
                    th.pc = nxt
        finally:
            self.guest = saved
        return ThreadRun(threads, log)


def run_program(program: Program, **kw) -> Machine:
    """Convenience: fresh machine, run to Halt, return the machine."""
    fuel = kw.pop("fuel", DEFAULT_FUEL)
    m = Machine(**kw)
    m.run(program, fuel)
    return m

