from __future__ import annotations

import enum


class IrType(enum.Enum):
    """Value types of the IR. ``I1`` guards occupy one byte in storage."""

    I1 = "I1"
    I8 = "I8"
    I16 = "I16"
    I32 = "I32"
    I64 = "I64"
    F32 = "F32"
    F64 = "F64"
    V128 = "V128"

    @property
    def width(self) -> int:
        """Storage width in bytes."""
        return _WIDTH[self]

    @property
    def bits(self) -> int:
        if self is IrType.I1:
            return 1
        return _WIDTH[self] * 8

    @property
    def mask(self) -> int:
        return (1 << self.bits) - 1

    @property
    def is_float(self) -> bool:
        return self in (IrType.F32, IrType.F64)

    @property
    def is_int(self) -> bool:
        return self in (IrType.I1, IrType.I8, IrType.I16, IrType.I32, IrType.I64)

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, name: str) -> IrType:
        try:
            return cls(name)
        except ValueError:
            raise ValueError(f"unknown IR type {name!r}") from None


_WIDTH = {
    IrType.I1: 1,
    IrType.I8: 1,
    IrType.I16: 2,
    IrType.I32: 4,
    IrType.I64: 8,
    IrType.F32: 4,
    IrType.F64: 8,
    IrType.V128: 16,
}

I1 = IrType.I1
I8 = IrType.I8
I16 = IrType.I16
I32 = IrType.I32
I64 = IrType.I64
F32 = IrType.F32
F64 = IrType.F64
V128 = IrType.V128
