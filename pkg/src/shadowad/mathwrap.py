"""Math functions with analytic partial derivatives.

Each wrapped function computes its value with the host's libm (through
``math``) and its dot as ``sum(partial_i * dot_i)``. Evaluation never raises:
arguments outside a function's domain give NaN and overflow gives ±inf, the
way the C functions report them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .ieee import fdiv


def _ieee(fn):
    """Call ``fn`` with C-like results instead of Python exceptions."""

    def run(*args):
        try:
            return fn(*args)
        except ZeroDivisionError:
            return math.nan
        except OverflowError:
            return math.inf
        except ValueError:
            return math.nan

    return run


@dataclass(frozen=True)
class MathCall:
    name: str
    arity: int
    value: Callable[..., float]
    partials: tuple[Callable[..., float], ...]
    # arguments carrying a dot; ldexp's exponent is an integer
    differentiable: tuple[bool, ...] = (True, True)


def _exp(x):
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _cosh(x):
    try:
        return math.cosh(x)
    except OverflowError:
        return math.inf


def _sinh(x):
    try:
        return math.sinh(x)
    except OverflowError:
        return math.copysign(math.inf, x)


def _log(x):
    if x == 0.0:
        return -math.inf
    if x < 0.0 or x != x:
        return math.nan
    return math.log(x) if x != math.inf else math.inf


def _log10(x):
    if x == 0.0:
        return -math.inf
    if x < 0.0 or x != x:
        return math.nan
    return math.log10(x) if x != math.inf else math.inf


def _pow(x, y):
    try:
        return math.pow(x, y)
    except OverflowError:
        # only magnitude overflow reaches here; sign follows odd integer y
        neg = x < 0 and float(y).is_integer() and int(y) % 2 == 1
        return -math.inf if neg else math.inf
    except ValueError:
        if x == 0.0 and y < 0:
            odd = float(y).is_integer() and int(y) % 2 == 1
            return math.copysign(math.inf, x) if odd else math.inf
        return math.nan


def _fmod(x, y):
    if y == 0.0 or x != x or y != y or x in (math.inf, -math.inf):
        return math.nan
    return math.fmod(x, y)


def _ldexp(x, k):
    k = int(k)
    try:
        return math.ldexp(x, k)
    except OverflowError:
        return math.copysign(math.inf, x)


def _floor(x):
    return float(math.floor(x)) if math.isfinite(x) else x


def _ceil(x):
    return float(math.ceil(x)) if math.isfinite(x) else x


def _trunc(x):
    return float(math.trunc(x)) if math.isfinite(x) else x


def _zero(*_):
    return 0.0


_s = _ieee
WRAPPED: dict[str, MathCall] = {}


def _reg(name, arity, value, *partials, differentiable=(True, True)):
    WRAPPED[name] = MathCall(name, arity, _s(value), tuple(_s(p) for p in partials), differentiable[:arity])


_reg("sin", 1, math.sin, math.cos)
_reg("cos", 1, math.cos, lambda x: -math.sin(x))
_reg("tan", 1, math.tan, lambda x: 1.0 + math.tan(x) * math.tan(x))
_reg("asin", 1, math.asin, lambda x: fdiv(1.0, math.sqrt(1.0 - x * x)))
_reg("acos", 1, math.acos, lambda x: -fdiv(1.0, math.sqrt(1.0 - x * x)))
_reg("atan", 1, math.atan, lambda x: fdiv(1.0, 1.0 + x * x))
_reg("atan2", 2, math.atan2,
     lambda y, x: fdiv(x, x * x + y * y),
     lambda y, x: fdiv(-y, x * x + y * y))
_reg("sinh", 1, _sinh, _cosh)
_reg("cosh", 1, _cosh, _sinh)
_reg("tanh", 1, math.tanh, lambda x: 1.0 - math.tanh(x) * math.tanh(x))
_reg("exp", 1, _exp, _exp)
_reg("log", 1, _log, lambda x: fdiv(1.0, x))
_reg("log10", 1, _log10, lambda x: fdiv(1.0, x * math.log(10.0)))
_reg("sqrt", 1, lambda x: math.nan if x < 0 else math.sqrt(x), lambda x: fdiv(1.0, 2.0 * math.sqrt(x)))
_reg("pow", 2, _pow,
     lambda x, y: y * _pow(x, y - 1.0),
     lambda x, y: _pow(x, y) * _log(x) if x > 0 else 0.0)
_reg("fabs", 1, math.fabs, lambda x: -1.0 if math.copysign(1.0, x) < 0 else 1.0)
_reg("fmod", 2, _fmod, lambda x, y: 1.0, lambda x, y: -_trunc(fdiv(x, y)))
_reg("floor", 1, _floor, _zero)
_reg("ceil", 1, _ceil, _zero)
_reg("ldexp", 2, _ldexp, lambda x, k: _ldexp(1.0, k), differentiable=(True, False))

UNARY = tuple(n for n, c in WRAPPED.items() if c.arity == 1)
BINARY = tuple(n for n, c in WRAPPED.items() if c.arity == 2)


def lookup(name: str) -> MathCall:
    try:
        return WRAPPED[name]
    except KeyError:
        raise KeyError(f"no wrapped math function {name!r}") from None


def value(name: str, *args: float) -> float:
    call = lookup(name)
    if len(args) != call.arity:
        raise TypeError(f"{name} takes {call.arity} argument(s), got {len(args)}")
    return call.value(*args)


def dot(name: str, args, dots) -> float:
    """Dot of ``name(*args)``: partials applied to dots in argument order."""
    call = lookup(name)
    if len(args) != call.arity or len(dots) != call.arity:
        raise TypeError(f"{name} takes {call.arity} argument(s)")
    if call.name in ("floor", "ceil"):
        return 0.0
    total = None
    for partial, d, diff in zip(call.partials, dots, call.differentiable):
        if not diff:
            continue
        term = partial(*args) * d
        total = term if total is None else total + term
    return total


def wrapped_call(name: str, args, dots) -> tuple[float, float]:
    return value(name, *args), dot(name, args, dots)
