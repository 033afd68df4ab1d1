"""Bit-exact binary32/binary64 codec, lane views and x87 80-bit conversion.

``decode``/``encode`` work from the field layout directly (sign, biased
exponent, significand) rather than going through the host's float packing,
so they can be checked against ``struct`` as an independent route. The fast
``*_bits``/``from_bits*`` helpers below use ``struct`` and back the machine's
hot paths.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from fractions import Fraction

_Q = struct.Struct("<Q")
_D = struct.Struct("<d")
_I = struct.Struct("<I")
_F = struct.Struct("<f")


@dataclass(frozen=True)
class Format:
    name: str
    exp_bits: int
    frac_bits: int

    @property
    def width(self) -> int:
        return 1 + self.exp_bits + self.frac_bits

    @property
    def bias(self) -> int:
        return (1 << (self.exp_bits - 1)) - 1

    @property
    def emin(self) -> int:
        return 1 - self.bias

    @property
    def emax(self) -> int:
        return self.bias


BINARY32 = Format("binary32", 8, 23)
BINARY64 = Format("binary64", 11, 52)
_FORMATS = {"binary32": BINARY32, "binary64": BINARY64, 32: BINARY32, 64: BINARY64}

CANONICAL_NAN64 = 0x7FF8000000000000
SIGN64 = 1 << 63
SIGN32 = 1 << 31


def _fmt(format) -> Format:
    if isinstance(format, Format):
        return format
    try:
        return _FORMATS[format]
    except KeyError:
        raise ValueError(f"unsupported format {format!r}") from None


def decode(bits: int, format="binary64") -> float:
    """Real number represented by ``bits``; NaN patterns all decode to NaN."""
    f = _fmt(format)
    if not 0 <= bits < (1 << f.width):
        raise ValueError(f"{bits:#x} is not a {f.name} pattern")
    sign = bits >> (f.width - 1)
    biased = (bits >> f.frac_bits) & ((1 << f.exp_bits) - 1)
    frac = bits & ((1 << f.frac_bits) - 1)
    if biased == (1 << f.exp_bits) - 1:
        if frac:
            return math.nan
        return -math.inf if sign else math.inf
    if biased == 0:
        # no implicit leading digit; exponent pinned at emin
        magnitude = math.ldexp(float(frac), f.emin - f.frac_bits)
    else:
        e = biased - f.bias
        magnitude = math.ldexp(float((1 << f.frac_bits) | frac), e - f.frac_bits)
    return -magnitude if sign else magnitude


def round_rational(sign: int, num: int, den: int, format="binary64") -> int:
    """Round ``(-1)**sign * num/den`` to the nearest-even pattern of ``format``."""
    f = _fmt(format)
    sign_bit = sign << (f.width - 1)
    if num == 0:
        return sign_bit
    p = f.frac_bits + 1
    e = num.bit_length() - den.bit_length()
    if (num << max(0, -e)) < (den << max(0, e)):
        e -= 1
    e = max(e, f.emin)
    shift = e - (p - 1)
    if shift >= 0:
        q, r = divmod(num, den << shift)
        d = den << shift
    else:
        q, r = divmod(num << -shift, den)
        d = den
    if 2 * r > d or (2 * r == d and q & 1):
        q += 1
    if q == 1 << p:
        q >>= 1
        e += 1
    if e > f.emax:
        return sign_bit | (((1 << f.exp_bits) - 1) << f.frac_bits)
    if q < 1 << (p - 1):
        return sign_bit | q
    return sign_bit | ((e + f.bias) << f.frac_bits) | (q - (1 << (p - 1)))


def encode(value, format="binary64") -> int:
    """Nearest-even encoding of a float, int or Fraction; overflow gives inf."""
    f = _fmt(format)
    inf_bits = ((1 << f.exp_bits) - 1) << f.frac_bits
    if isinstance(value, float):
        if math.isnan(value):
            return inf_bits | (1 << (f.frac_bits - 1))
        sign = 1 if math.copysign(1.0, value) < 0 else 0
        if math.isinf(value):
            return (sign << (f.width - 1)) | inf_bits
        num, den = abs(value).as_integer_ratio()
    else:
        frac = Fraction(value)
        sign = 1 if frac < 0 else 0
        num, den = abs(frac.numerator), frac.denominator
    return round_rational(sign, num, den, f)


# ------------------------------------------------------------- fast host path


def f64_bits(x: float) -> int:
    return _Q.unpack(_D.pack(x))[0]


def from_bits64(b: int) -> float:
    return _D.unpack(_Q.pack(b))[0]


def f32_bits(x: float) -> int:
    """binary32 pattern nearest to the double ``x`` (overflow gives inf)."""
    try:
        return _I.unpack(_F.pack(x))[0]
    except OverflowError:
        return 0xFF800000 if x < 0 else 0x7F800000


def from_bits32(b: int) -> float:
    return _F.unpack(_I.pack(b))[0]


def round_f32(x: float) -> float:
    return from_bits32(f32_bits(x))


# ------------------------------------------------------------------ x87 80-bit

X87_BIAS = 16383


def f64_to_x87(bits64: int) -> bytes:
    """binary64 pattern -> 10-byte double-extended image (little-endian)."""
    sign = bits64 >> 63
    exp = (bits64 >> 52) & 0x7FF
    frac = bits64 & ((1 << 52) - 1)
    if exp == 0x7FF:
        exp80, mant = 0x7FFF, (1 << 63) | (frac << 11)
    elif exp == 0:
        if frac == 0:
            exp80, mant = 0, 0
        else:
            nb = frac.bit_length()
            mant = frac << (64 - nb)
            exp80 = (nb - 1 - 1074) + X87_BIAS
    else:
        exp80, mant = exp - 1023 + X87_BIAS, (1 << 63) | (frac << 11)
    return mant.to_bytes(8, "little") + ((sign << 15) | exp80).to_bytes(2, "little")


def x87_to_f64(image: bytes) -> int:
    """10-byte double-extended image -> binary64 pattern, rounding to nearest even.

    Unnormals, pseudo-denormals, pseudo-infinities and pseudo-NaNs (explicit
    integer bit inconsistent with the exponent) decode as the default NaN.
    """
    if len(image) != 10:
        raise ValueError("x87 double-extended values are 10 bytes")
    mant = int.from_bytes(image[:8], "little")
    se = int.from_bytes(image[8:10], "little")
    sign, exp = se >> 15, se & 0x7FFF
    integer_bit = mant >> 63
    if exp == 0x7FFF:
        if not integer_bit:
            return CANONICAL_NAN64
        fraction = mant & ((1 << 63) - 1)
        if fraction == 0:
            return (sign << 63) | 0x7FF0000000000000
        payload = (mant >> 11) & ((1 << 52) - 1)
        if payload == 0:
            payload = 1 << 51
        return (sign << 63) | 0x7FF0000000000000 | payload
    if exp == 0:
        if mant == 0:
            return sign << 63
        if integer_bit:
            return CANONICAL_NAN64
        return round_rational(sign, mant, 1 << (X87_BIAS - 1 + 63), BINARY64)
    if not integer_bit:
        return CANONICAL_NAN64
    scale = exp - X87_BIAS - 63
    if scale >= 0:
        return round_rational(sign, mant << scale, 1, BINARY64)
    return round_rational(sign, mant, 1 << -scale, BINARY64)


# ----------------------------------------------------------------------- lanes


def lanes(bits: int, width, granularity: int) -> list[int]:
    """Split a ``width``-bit pattern into lanes, lane 0 least significant.

    ``width`` is a bit count or an IrType. Lane order matches little-endian
    memory order: lane 0 sits at the lowest address.
    """
    w = getattr(width, "bits", width)
    if granularity not in (32, 64) or granularity > w or w % granularity:
        raise ValueError(f"cannot split {w} bits into {granularity}-bit lanes")
    mask = (1 << granularity) - 1
    return [(bits >> (granularity * i)) & mask for i in range(w // granularity)]


def join_lanes(parts, granularity: int) -> int:
    out = 0
    for i, v in enumerate(parts):
        out |= (v & ((1 << granularity) - 1)) << (granularity * i)
    return out
