"""Table-driven sine in the style of a C library's internals.

The argument is reduced with the rounding trick (add and subtract
1.5 * 2**52), the quotient indexes a table of sin/cos values at multiples of
STEP, and short polynomials handle the remainder. The resulting value is
accurate, but an engine differentiating the machine code sees the rounding
as the identity, so the remainder's dot cancels and the sine's dot is lost.
"""

from __future__ import annotations

import math
import struct

ROUNDER = 1.5 * 2.0**52
STEPS_PER_PI = 32
STEP = math.pi / STEPS_PER_PI
INV_STEP = STEPS_PER_PI / math.pi
HALF_TABLE = 2 * STEPS_PER_PI  # quotients in [-64, 64]: |x| <= 2*pi (plus half a step)
TABLE_LEN = 2 * HALF_TABLE + 1
DOMAIN = 2 * math.pi

# Taylor coefficients in Horner order, innermost last
SIN_COEFFS = (1.0, -1.0 / 6.0, 1.0 / 120.0, -1.0 / 5040.0)
COS_COEFFS = (1.0, -1.0 / 2.0, 1.0 / 24.0, -1.0 / 720.0)


def tables() -> tuple[bytes, bytes]:
    """Packed little-endian sin and cos tables, entry ``i`` at quotient ``i - HALF_TABLE``."""
    ks = range(-HALF_TABLE, HALF_TABLE + 1)
    sin_t = struct.pack(f"<{TABLE_LEN}d", *(math.sin(k * STEP) for k in ks))
    cos_t = struct.pack(f"<{TABLE_LEN}d", *(math.cos(k * STEP) for k in ks))
    return sin_t, cos_t


def horner(r2: float, coeffs) -> float:
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = c + r2 * acc
    return acc


def soft_sin(x: float) -> float:
    """Host-side reference of the compiled routine, operation for operation."""
    n = (x * INV_STEP + ROUNDER) - ROUNDER
    r = x - n * STEP
    k = int(n) + HALF_TABLE
    s, c = math.sin((k - HALF_TABLE) * STEP), math.cos((k - HALF_TABLE) * STEP)
    r2 = r * r
    return s * horner(r2, COS_COEFFS) + c * (r * horner(r2, SIN_COEFFS))
