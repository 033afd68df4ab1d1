"""Dirty-call and CCall registries with the built-in behaviors.

A dirty behavior is ``fn(machine, *args) -> int | None`` over evaluated
argument bit patterns. CCall helpers are pure: ``fn(result_type, *args)``.
"""

from __future__ import annotations

from .. import mathwrap
from ..fpcodec import f64_bits, f64_to_x87, from_bits64, x87_to_f64
from ..instrument.bitlogic import ccall_ad_bitlogic
from .faults import MachineFault


class Registry:
    def __init__(self, entries=None):
        self._fns = dict(entries or {})

    def register(self, name: str, fn) -> None:
        if name in self._fns:
            raise ValueError(f"{name!r} is already registered")
        self._fns[name] = fn

    def get(self, name: str):
        return self._fns.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self._fns

    def names(self):
        return sorted(self._fns)

    def copy(self) -> Registry:
        return Registry(self._fns)


def _signed64(v: int) -> int:
    return v - (1 << 64) if v >> 63 else v


# --------------------------------------------------------------- x87 transfers


def x87_store80(m, addr, bits):
    m.memory.write(addr, f64_to_x87(bits))


def x87_load80(m, addr):
    return x87_to_f64(m.memory.read(addr, 10))


def x87_shadow_store80(m, addr, bits):
    m.shadow.write(addr, f64_to_x87(bits))


def x87_shadow_load80(m, addr):
    return x87_to_f64(m.shadow.read(addr, 10))


# ------------------------------------------------------------- shadow memory


def shadow_store(m, addr, value, width):
    m.shadow.write(addr, value.to_bytes(width, "little"))


def shadow_load(m, addr, width):
    return m.shadow.read_int(addr, width)


# ------------------------------------------------------------ client requests
# Outside the tool these requests do nothing, like the native no-op expansion
# of the client-request macros.


def dg_set_dot(m, dst, src, length):
    if m.tool:
        m.shadow.write(dst, m.memory.read(src, length))


def dg_get_dot(m, src, dst, length):
    if m.tool:
        m.memory.write(dst, m.shadow.read(src, length))


# ----------------------------------------------------------------------- I/O


def print_f64(m, bits):
    m.outputs.append(bits)
    if m.stdout is not None:
        print(repr(from_bits64(bits)), file=m.stdout)


def record_dot(m, bits):
    m.dot_outputs.append(bits)


def read_input(m, slot):
    try:
        return f64_bits(float(m.inputs[slot]))
    except IndexError:
        raise MachineFault("input", f"no input in slot {slot}") from None


def read_seed(m, slot):
    seeds = m.seeds
    return f64_bits(float(seeds[slot])) if slot < len(seeds) else 0


# ------------------------------------------------------------------------ math


def _math_value(call):
    if call.name == "ldexp":
        return lambda m, x, k: f64_bits(call.value(from_bits64(x), _signed64(k)))
    if call.arity == 1:
        return lambda m, x: f64_bits(call.value(from_bits64(x)))
    return lambda m, x, y: f64_bits(call.value(from_bits64(x), from_bits64(y)))


def _math_dot(call):
    name = call.name
    if name == "ldexp":
        return lambda m, x, k, xd: f64_bits(
            mathwrap.dot(name, (from_bits64(x), _signed64(k)), (from_bits64(xd), 0.0)))
    if call.arity == 1:
        return lambda m, x, xd: f64_bits(mathwrap.dot(name, (from_bits64(x),), (from_bits64(xd),)))
    return lambda m, x, y, xd, yd: f64_bits(
        mathwrap.dot(name, (from_bits64(x), from_bits64(y)), (from_bits64(xd), from_bits64(yd))))


def default_dirty() -> Registry:
    reg = Registry()
    for fn in (x87_store80, x87_load80, x87_shadow_store80, x87_shadow_load80, shadow_store,
               shadow_load, dg_set_dot, dg_get_dot, print_f64, record_dot, read_input, read_seed):
        reg.register(fn.__name__, fn)
    for call in mathwrap.WRAPPED.values():
        reg.register(f"math_{call.name}", _math_value(call))
        reg.register(f"mathdot_{call.name}", _math_dot(call))
    return reg


def default_ccalls() -> Registry:
    reg = Registry()
    reg.register("ad_bitlogic", ccall_ad_bitlogic)
    return reg

