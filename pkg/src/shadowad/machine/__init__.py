"""Synthetic CPU executing IR programs over guest state, memory and shadow memory."""

from .core import DEFAULT_FUEL, HALT, Machine, RunResult, Thread, ThreadRun, run_program
from .dirty import Registry, default_ccalls, default_dirty
from .faults import MachineFault
from .memory import Memory
from .ops import SEMANTICS, evaluate

__all__ = [
    "DEFAULT_FUEL",
    "HALT",
    "Machine",
    "MachineFault",
    "Memory",
    "Registry",
    "RunResult",
    "SEMANTICS",
    "Thread",
    "ThreadRun",
    "default_ccalls",
    "default_dirty",
    "evaluate",
    "run_program",
]
