"""Where shadows live, and what to do with operations lacking a rule."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..ir.nodes import Superblock
from ..ir.types import IrType
from ..ir.validate import M_GS


@dataclass
class Layout:
    """Index shifts for one superblock.

    Originals keep ``[0, m_tmp)``, the shadow of ``t<i>`` is ``t<i + m_tmp>``
    and temporaries introduced by the pass start at ``2 * m_tmp``.
    """

    m_tmp: int
    m_gs: int = M_GS
    types: dict[int, IrType] = field(default_factory=dict)
    next_fresh: int = -1

    def __post_init__(self):
        if self.m_tmp < 1:
            raise ValueError("m_tmp must be positive")
        if self.next_fresh < 0:
            self.next_fresh = 2 * self.m_tmp

    @classmethod
    def for_superblock(cls, sb: Superblock, m_gs: int = M_GS) -> Layout:
        types = dict(sb.tmp_types)
        m_tmp = max(sb.max_tmp + 1, 1)
        for i, ty in sb.tmp_types.items():
            types[i + m_tmp] = ty
        return cls(m_tmp, m_gs, types)

    def shadow(self, tmp: int) -> int:
        return tmp + self.m_tmp

    def fresh(self, ty: IrType) -> int:
        i = self.next_fresh
        self.next_fresh += 1
        self.types[i] = ty
        return i


@dataclass
class AdPolicy:
    """Options of the pass plus the warnings it collected.

    Operations without a rule get a zero dot of their result type and a
    warning ``(superblock address, statement index, opcode)``.
    """

    math_wrappers: bool = True
    warnings: list[tuple[int, int, str]] = field(default_factory=list)
    _where: tuple[int, int] = (0, 0)

    def warn(self, opcode: str) -> None:
        self.warnings.append((*self._where, opcode))

    def at(self, sb_addr: int, idx: int) -> None:
        self._where = (sb_addr, idx)

    def report(self) -> str:
        return "\n".join(f"0x{a:x}\t{i}\t{op}" for a, i, op in self.warnings)
