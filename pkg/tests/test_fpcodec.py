import math
import struct
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shadowad import fpcodec as fc
from shadowad.ir import I32, I64, V128


def struct_f64(bits):
    return struct.unpack("<d", struct.pack("<Q", bits))[0]


def struct_f32(bits):
    return struct.unpack("<f", struct.pack("<I", bits))[0]


def same(a, b):
    return (math.isnan(a) and math.isnan(b)) or (a == b and math.copysign(1, a) == math.copysign(1, b))


def is_nan_pattern(bits, fmt):
    f = fc._fmt(fmt)
    e = (bits >> f.frac_bits) & ((1 << f.exp_bits) - 1)
    return e == (1 << f.exp_bits) - 1 and bits & ((1 << f.frac_bits) - 1)


@pytest.mark.parametrize("bits,value", [(0, 0.0), (0x4000000000000000, 2.0), (0x3FF0000000000000, 1.0)])
def test_decode_examples(bits, value):
    assert same(fc.decode(bits), value)


def test_encode_examples():
    assert fc.encode(0.0) == 0
    assert fc.encode(2.0) == 0x4000000000000000
    assert fc.encode(-3.0) == fc.encode(3.0) | fc.SIGN64
    assert fc.encode(-0.0) == fc.SIGN64


def test_encode_overflow_and_rounding():
    assert fc.encode(1e300, "binary32") == 0x7F800000
    assert fc.encode(-1e300, "binary32") == 0xFF800000
    # exact tie between 1 and 1+2^-23 in binary32 goes to even (1.0)
    assert fc.encode(1 + 2**-24, "binary32") == 0x3F800000
    assert fc.encode(1 + 3 * 2**-24, "binary32") == 0x3F800002
    assert fc.encode(Fraction(1, 2**1075)) == 0  # half the smallest subnormal, ties to even
    assert fc.encode(Fraction(3, 2**1076)) == 1  # above the tie
    assert fc.encode(Fraction(3, 2**1075)) == 2  # 1.5 ulp ties to even
    assert fc.encode(math.inf) == 0x7FF0000000000000


def test_decode_rejects_wide_pattern():
    with pytest.raises(ValueError):
        fc.decode(1 << 32, "binary32")


_any64 = st.integers(0, 2**64 - 1)
_any32 = st.integers(0, 2**32 - 1)


@settings(max_examples=2000)
@given(_any64)
def test_decode64_matches_struct(bits):
    assert same(fc.decode(bits), struct_f64(bits))


@settings(max_examples=2000)
@given(_any32)
def test_decode32_matches_struct(bits):
    assert same(fc.decode(bits, "binary32"), struct_f32(bits))


@settings(max_examples=2000)
@given(st.floats(allow_nan=False))
def test_encode32_matches_struct_rounding(x):
    assert fc.encode(x, "binary32") == fc.f32_bits(x)


@settings(max_examples=1000)
@given(st.fractions(max_denominator=10**30))
def test_encode_fraction_matches_float_division(q):
    # Python's int/int true division is correctly rounded
    assert fc.encode(q) == fc.f64_bits(q.numerator / q.denominator)


@settings(max_examples=2000)
@given(_any64)
def test_sign_mask_identities(bits):
    if is_nan_pattern(bits, 64):
        return
    v = fc.decode(bits)
    assert same(fc.decode(bits & 0x7FFFFFFFFFFFFFFF), abs(v))
    assert same(fc.decode(bits ^ fc.SIGN64), -v)


def test_x87_zero_and_one():
    assert fc.f64_to_x87(fc.encode(0.0)) == bytes(10)
    img = fc.f64_to_x87(fc.encode(1.0))
    mant = int.from_bytes(img[:8], "little")
    se = int.from_bytes(img[8:], "little")
    assert se >> 15 == 0 and se & 0x7FFF == 16383
    assert mant >> 63 == 1 and mant & ((1 << 63) - 1) == 0


def longdouble_image(x: float) -> bytes:
    return np.array([x], dtype=np.longdouble).tobytes()[:10]


needs_x87 = pytest.mark.skipif(np.finfo(np.longdouble).nmant != 63, reason="host long double is not x87")


@needs_x87
@settings(max_examples=3000)
@given(st.floats(allow_nan=False))
def test_x87_image_matches_host_long_double(x):
    assert fc.f64_to_x87(fc.f64_bits(x)) == longdouble_image(x)


@needs_x87
def test_x87_narrowing_matches_host():
    rng = np.random.default_rng(7)
    mants = rng.integers(0, 2**63, size=2000, dtype=np.uint64) | np.uint64(1 << 63)
    exps = rng.integers(16383 - 1100, 16383 + 1100, size=2000)
    for m, e in zip(mants.tolist(), exps.tolist()):
        img = int(m).to_bytes(8, "little") + int(e).to_bytes(2, "little")
        host = float(np.frombuffer(img + bytes(6), dtype=np.longdouble)[0])
        assert fc.x87_to_f64(img) == fc.f64_bits(host)


def test_x87_special_inputs():
    inf = fc.f64_to_x87(0x7FF0000000000000)
    assert fc.x87_to_f64(inf) == 0x7FF0000000000000
    nan = fc.f64_to_x87(0x7FF8000000000123)
    assert fc.x87_to_f64(nan) == 0x7FF8000000000123
    unnormal = (1).to_bytes(8, "little") + (16383).to_bytes(2, "little")
    assert math.isnan(fc.from_bits64(fc.x87_to_f64(unnormal)))
    pseudo_denormal = (1 << 63).to_bytes(8, "little") + (0).to_bytes(2, "little")
    assert math.isnan(fc.from_bits64(fc.x87_to_f64(pseudo_denormal)))
    huge = (1 << 63).to_bytes(8, "little") + (16383 + 2000).to_bytes(2, "little")
    assert fc.x87_to_f64(huge) == 0x7FF0000000000000
    with pytest.raises(ValueError):
        fc.x87_to_f64(bytes(8))


def test_x87_round_trip_subnormals():
    for bits in (1, 2, 0xFFFFFFFFFFFFF, 0x8000000000000001):
        assert fc.x87_to_f64(fc.f64_to_x87(bits)) == bits


def test_lanes_examples():
    assert fc.lanes(0, V128, 64) == [0, 0]
    assert fc.lanes(0x4000000000000000, I64, 32) == [0, 0x40000000]
    # .long -1, 2147483647, 0, 0 in memory order
    fabs_mask = fc.join_lanes([0xFFFFFFFF, 0x7FFFFFFF, 0, 0], 32)
    assert fc.lanes(fabs_mask, V128, 64) == [0x7FFFFFFFFFFFFFFF, 0]
    with pytest.raises(ValueError):
        fc.lanes(0, I32, 64)


def test_lanes_join_inverse():
    v = 0x0123456789ABCDEF_FEDCBA9876543210
    assert fc.join_lanes(fc.lanes(v, V128, 32), 32) == v
