"""Structured execution faults."""

from __future__ import annotations


class MachineFault(Exception):
    """Execution stopped; ``kind`` classifies the cause."""

    def __init__(self, kind: str, message: str, pc: int | None = None, imark: int | None = None):
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.pc = pc
        self.imark = imark

    def __str__(self) -> str:
        where = []
        if self.pc is not None:
            where.append(f"sb 0x{self.pc:x}")
        if self.imark is not None:
            where.append(f"insn 0x{self.imark:x}")
        return f"{self.message} ({', '.join(where)})" if where else self.message
