"""Client memory: sparse little-endian bytes, zero where never written."""

from __future__ import annotations

PAGE_BITS = 12
PAGE_SIZE = 1 << PAGE_BITS
_OFF = PAGE_SIZE - 1
ADDR_MASK = (1 << 64) - 1


class Memory:
    def __init__(self):
        self._pages: dict[int, bytearray] = {}

    def read(self, addr: int, length: int) -> bytes:
        addr &= ADDR_MASK
        off = addr & _OFF
        if off + length <= PAGE_SIZE:
            page = self._pages.get(addr >> PAGE_BITS)
            return bytes(length) if page is None else bytes(page[off : off + length])
        out = bytearray()
        while length:
            off = addr & _OFF
            n = min(length, PAGE_SIZE - off)
            page = self._pages.get(addr >> PAGE_BITS)
            out += bytes(n) if page is None else page[off : off + n]
            addr = (addr + n) & ADDR_MASK
            length -= n
        return bytes(out)

    def write(self, addr: int, data: bytes) -> None:
        addr &= ADDR_MASK
        pos = 0
        while pos < len(data):
            off = addr & _OFF
            n = min(len(data) - pos, PAGE_SIZE - off)
            key = addr >> PAGE_BITS
            page = self._pages.get(key)
            if page is None:
                page = self._pages[key] = bytearray(PAGE_SIZE)
            page[off : off + n] = data[pos : pos + n]
            addr = (addr + n) & ADDR_MASK
            pos += n

    def read_int(self, addr: int, width: int) -> int:
        off = addr & _OFF
        if off + width <= PAGE_SIZE:
            page = self._pages.get((addr & ADDR_MASK) >> PAGE_BITS)
            if page is None:
                return 0
            return int.from_bytes(page[off : off + width], "little")
        return int.from_bytes(self.read(addr, width), "little")

    def write_int(self, addr: int, value: int, width: int) -> None:
        off = addr & _OFF
        data = value.to_bytes(width, "little")
        if off + width <= PAGE_SIZE:
            key = (addr & ADDR_MASK) >> PAGE_BITS
            page = self._pages.get(key)
            if page is None:
                page = self._pages[key] = bytearray(PAGE_SIZE)
            page[off : off + width] = data
        else:
            self.write(addr, data)

    @property
    def pages_touched(self) -> int:
        return len(self._pages)

    def pages(self):
        return sorted(k << PAGE_BITS for k in self._pages)
