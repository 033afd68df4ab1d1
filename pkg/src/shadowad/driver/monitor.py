"""Monitor commands on a paused, instrumented client.

Addresses are hex (``1000`` or ``0x1000``) or ``&name`` for a variable that
lives in memory. Byte dumps are in memory order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..fpcodec import from_bits64
from ..ir.nodes import IMark, Program
from ..machine import Machine, MachineFault

USAGE = """\
commands:
  dot <addr> <len>         hex-dump shadow bytes (dot values)
  setdot <addr> <hexbytes> write shadow bytes, e.g. setdot &x 000000000000f03f
  mem <addr> <len>         hex-dump memory bytes
  break <addr>             toggle a breakpoint on an instruction mark
  continue                 run to the next breakpoint or to the end
  step                     run one superblock
  where                    address of the next instruction mark
  help                     this text"""


@dataclass
class MonitorSession:
    program: Program
    machine: Machine
    symbols: dict = field(default_factory=dict)  # name -> memory address
    lines: dict = field(default_factory=dict)  # IMark address -> source line
    breakpoints: set = field(default_factory=set)
    mode: str = "paused"  # or "halted"
    printed: int = 0

    def __post_init__(self):
        self.imarks = {s.addr for sb in self.program.superblocks.values()
                       for s in sb.stmts if isinstance(s, IMark)}
        self.machine.start(self.program)


def _addr(session: MonitorSession, text: str) -> int:
    if text.startswith("&"):
        name = text[1:]
        if name not in session.symbols:
            raise ValueError(f"no variable {name!r} in memory")
        return session.symbols[name]
    return int(text, 16)


def _dump(data: bytes) -> str:
    return " ".join(f"{b:02x}" for b in data)


def _where(session: MonitorSession) -> str:
    if session.mode == "halted":
        return "halted"
    m = session.machine
    pc, idx, _ = m.cursor
    sb = session.program.superblocks[pc]
    addr = next((s.addr for s in sb.stmts[idx:] if isinstance(s, IMark)), m.imark)
    line = session.lines.get(addr)
    return f"0x{addr:x}" + (f" (line {line})" if line is not None else "")


def _new_outputs(session: MonitorSession) -> list[str]:
    m = session.machine
    out = []
    for i in range(session.printed, len(m.outputs)):
        text = f"output {i}: {from_bits64(m.outputs[i])!r}"
        if i < len(m.dot_outputs):
            text += f" dot {from_bits64(m.dot_outputs[i])!r}"
        out.append(text)
    session.printed = len(m.outputs)
    return out


def _resume(session: MonitorSession, step: bool) -> str:
    if session.mode == "halted":
        return "error: the program has halted"
    try:
        r = session.machine.resume(session.program, breakpoints=session.breakpoints, step=step)
    except MachineFault as fault:
        session.mode = "halted"
        return "\n".join(_new_outputs(session) + [f"fault: {fault}"])
    if r.status == "halted":
        session.mode = "halted"
        status = "halted"
    else:
        status = f"paused at {_where(session)}"
    return "\n".join(_new_outputs(session) + [status])


def monitor_command(session: MonitorSession, line: str) -> str:
    """Execute one command and return the response text."""
    parts = line.split()
    if not parts:
        return ""
    cmd, args = parts[0], parts[1:]
    try:
        if cmd == "help":
            return USAGE
        if cmd in ("dot", "mem") and len(args) == 2:
            addr, n = _addr(session, args[0]), int(args[1], 0)
            if n < 1:
                raise ValueError("length must be positive")
            store = session.machine.shadow if cmd == "dot" else session.machine.memory
            return _dump(store.read(addr, n))
        if cmd == "setdot" and len(args) >= 2:
            addr = _addr(session, args[0])
            data = bytes.fromhex("".join(args[1:]))
            session.machine.shadow.write(addr, data)
            return f"wrote {len(data)} shadow byte(s) at 0x{addr:x}"
        if cmd == "break" and len(args) == 1:
            addr = _addr(session, args[0])
            if addr not in session.imarks:
                return f"error: no such instruction mark 0x{addr:x}"
            if addr in session.breakpoints:
                session.breakpoints.discard(addr)
                return f"breakpoint cleared at 0x{addr:x}"
            session.breakpoints.add(addr)
            return f"breakpoint set at 0x{addr:x}"
        if cmd == "continue" and not args:
            return _resume(session, step=False)
        if cmd == "step" and not args:
            return _resume(session, step=True)
        if cmd == "where" and not args:
            return _where(session)
    except ValueError as exc:
        return f"error: {exc}\n{USAGE}"
    return USAGE


def repl(session: MonitorSession, instream, outstream, prompt: str = "") -> None:
    """Read commands until end of input or ``quit``."""
    for raw in instream:
        line = raw.strip()
        if line in ("quit", "exit"):
            break
        if not line or line.startswith("#"):
            continue
        if prompt:
            outstream.write(prompt + line + "\n")
        response = monitor_command(session, line)
        if response:
            outstream.write(response + "\n")
        outstream.flush()
