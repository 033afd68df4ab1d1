import random

from hypothesis import given, settings, strategies as st

from shadowad.fpcodec import decode
from shadowad.shadowmem import PAGE_SIZE, ShadowMap


def test_fresh_map_reads_zero():
    m = ShadowMap()
    assert m.read(0x1000, 8) == bytes(8)
    assert decode(m.read_int(0x1000, 8)) == 0.0
    assert m.pages_allocated == 0


def test_read_your_write():
    m = ShadowMap()
    m.write(0x1000, b"\xaa")
    assert m.read(0x1000, 1) == b"\xaa"


def test_read_straddles_unwritten_page():
    m = ShadowMap()
    m.write(0x1FFC, b"\x01\x02\x03\x04")
    assert m.read(0x1FFC, 8) == b"\x01\x02\x03\x04" + bytes(4)
    assert m.pages_allocated == 1


def test_write_read_identity_high_address():
    m = ShadowMap()
    data = bytes(range(1, 9))
    m.write(0xFFFF_FFFF_FFFF_FFF0, data)
    assert m.read(0xFFFF_FFFF_FFFF_FFF0, 8) == data


def test_disjoint_pages_allocate_two():
    m = ShadowMap()
    m.write(0x10, b"x")
    m.write(0x7F00_0000_0000, b"y")
    assert m.pages_allocated == 2
    assert len(m.pages()) == 2


def test_overlap_last_writer_wins():
    m = ShadowMap()
    m.write(0x100, b"\x11" * 8)
    m.write(0x104, b"\x22" * 8)
    assert m.read(0x100, 12) == b"\x11" * 4 + b"\x22" * 8


def test_write_spanning_pages():
    m = ShadowMap()
    m.write(PAGE_SIZE - 2, b"abcd")
    assert m.pages_allocated == 2
    assert m.bytes_written == 4


_addr = st.one_of(st.integers(0, 3 * PAGE_SIZE), st.integers(0, 2**64 - 64))


@settings(max_examples=200)
@given(st.lists(st.tuples(_addr, st.binary(min_size=1, max_size=40)), max_size=30),
       st.lists(st.tuples(_addr, st.integers(1, 40)), max_size=30))
def test_matches_flat_reference(writes, reads):
    m = ShadowMap()
    flat: dict[int, int] = {}
    touched = set()
    for addr, data in writes:
        m.write(addr, data)
        for i, b in enumerate(data):
            flat[addr + i] = b
            touched.add((addr + i) // PAGE_SIZE)
    for addr, n in reads + [(a, len(d)) for a, d in writes]:
        assert m.read(addr, n) == bytes(flat.get(addr + i, 0) for i in range(n))
    assert m.pages_allocated <= len(touched)


def test_sparsity_counter_on_random_sequence():
    rng = random.Random(3)
    m = ShadowMap()
    pages = set()
    for _ in range(500):
        a = rng.randrange(0, 1 << 40)
        m.write(a, b"\x01" * 8)
        pages.update({a // PAGE_SIZE, (a + 7) // PAGE_SIZE})
    assert m.pages_allocated == len(pages)
