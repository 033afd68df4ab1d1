"""Sparse shadow byte store over the 64-bit address space.

Addresses are split 21/21/22 bits from the top. The first two levels are
dict-backed interior nodes; the 22-bit bottom level covers a 4 MiB region
held as a table of 1024 lazily allocated 4 KiB pages. Bytes that were never
written read as 0x00, which decodes to a +0.0 dot.
"""

from __future__ import annotations

PAGE_BITS = 12
PAGE_SIZE = 1 << PAGE_BITS
LEVEL_BITS = (21, 21, 22)
_L1_SHIFT = 64 - LEVEL_BITS[0]  # 43
_L2_SHIFT = _L1_SHIFT - LEVEL_BITS[1]  # 22
_L2_MASK = (1 << LEVEL_BITS[1]) - 1
_LEAF_MASK = (1 << LEVEL_BITS[2]) - 1
_PAGES_PER_LEAF = 1 << (LEVEL_BITS[2] - PAGE_BITS)
ADDR_MASK = (1 << 64) - 1


class ShadowMap:
    """Trie from addresses to shadow bytes; pages are never freed."""

    def __init__(self):
        self._root: dict[int, dict[int, list]] = {}
        self.pages_allocated = 0
        self.nodes_allocated = 1  # the root
        self.bytes_written = 0

    # leaf tables are lists of 1024 slots, None until a page is written
    def _page(self, addr: int, create: bool):
        i1 = addr >> _L1_SHIFT
        mid = self._root.get(i1)
        if mid is None:
            if not create:
                return None
            mid = self._root[i1] = {}
            self.nodes_allocated += 1
        i2 = (addr >> _L2_SHIFT) & _L2_MASK
        leaf = mid.get(i2)
        if leaf is None:
            if not create:
                return None
            leaf = mid[i2] = [None] * _PAGES_PER_LEAF
            self.nodes_allocated += 1
        slot = (addr & _LEAF_MASK) >> PAGE_BITS
        page = leaf[slot]
        if page is None and create:
            page = leaf[slot] = bytearray(PAGE_SIZE)
            self.pages_allocated += 1
        return page

    def read(self, addr: int, length: int) -> bytes:
        if length < 1:
            raise ValueError("length must be at least 1")
        addr &= ADDR_MASK
        off = addr & (PAGE_SIZE - 1)
        if off + length <= PAGE_SIZE:
            page = self._page(addr, False)
            return bytes(length) if page is None else bytes(page[off : off + length])
        out = bytearray()
        while length:
            off = addr & (PAGE_SIZE - 1)
            n = min(length, PAGE_SIZE - off)
            page = self._page(addr, False)
            out += bytes(n) if page is None else page[off : off + n]
            addr = (addr + n) & ADDR_MASK
            length -= n
        return bytes(out)

    def write(self, addr: int, data: bytes) -> None:
        addr &= ADDR_MASK
        self.bytes_written += len(data)
        pos = 0
        while pos < len(data):
            off = addr & (PAGE_SIZE - 1)
            n = min(len(data) - pos, PAGE_SIZE - off)
            page = self._page(addr, True)
            page[off : off + n] = data[pos : pos + n]
            addr = (addr + n) & ADDR_MASK
            pos += n

    def read_int(self, addr: int, width: int) -> int:
        return int.from_bytes(self.read(addr, width), "little")

    def write_int(self, addr: int, value: int, width: int) -> None:
        self.write(addr, (value & ((1 << (8 * width)) - 1)).to_bytes(width, "little"))

    def pages(self):
        """Base addresses of allocated pages, ascending."""
        out = []
        for i1, mid in self._root.items():
            for i2, leaf in mid.items():
                for slot, page in enumerate(leaf):
                    if page is not None:
                        out.append((i1 << _L1_SHIFT) | (i2 << _L2_SHIFT) | (slot << PAGE_BITS))
        return sorted(out)

    def stats(self) -> dict[str, int]:
        return {
            "pages": self.pages_allocated,
            "nodes": self.nodes_allocated,
            "bytes_written": self.bytes_written,
        }

    # aliases matching the operation names used in the docs
    shadow_read = read
    shadow_write = write
