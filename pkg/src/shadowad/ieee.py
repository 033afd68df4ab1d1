"""Host float operations with IEEE results in place of Python exceptions."""

from __future__ import annotations

import math


def fdiv(x: float, y: float) -> float:
    try:
        return x / y
    except ZeroDivisionError:
        if x != x or x == 0.0:
            return math.nan
        return math.copysign(math.inf, x) * math.copysign(1.0, y)


def fsqrt(x: float) -> float:
    if x < 0.0:
        return math.nan
    return math.sqrt(x)
