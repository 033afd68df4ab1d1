"""Two-dimensional Burgers benchmark.

The solver is a minilang program: an explicit Lax-Friedrichs scheme for the
inviscid Burgers equations on the unit square with fixed boundary values,
followed by the Euclidean norm of the final state. It only uses +, -, *, /
and sqrt. Every initial-state cell is shifted by ``input(0)`` and seeded
with dot 1, so the dot of the norm is its derivative with respect to a
simultaneous shift of all initial components.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

from ..fpcodec import f64_bits, from_bits64
from ..frontend import compile_source
from ..machine import Machine
from .engine import finite_diff_compiled, prepare, rel_error
from .oracle import oracle_eval


@dataclass(frozen=True)
class BenchmarkConfig:
    nx: int = 20
    nt: int = 10
    reps: int = 1

    def __post_init__(self):
        if self.nx < 4 or self.nt < 1 or self.reps < 1:
            raise ValueError(f"invalid benchmark config nx={self.nx} nt={self.nt} reps={self.reps}")


@dataclass
class BenchReport:
    config: BenchmarkConfig
    value: float
    dot: float
    oracle_dot: float
    fd_dot: float
    native_time: float
    instrumented_time: float
    shadow_pages: int
    shadow_nodes: int
    client_pages: int

    @property
    def slowdown(self) -> float:
        return self.instrumented_time / self.native_time

    @property
    def oracle_match(self) -> bool:
        return f64_bits(self.dot) == f64_bits(self.oracle_dot)

    @property
    def fd_error(self) -> float:
        return rel_error(self.dot, self.fd_dot)

    def lines(self) -> list[str]:
        c = self.config
        return [
            f"grid\t{c.nx}x{c.nx}\tsteps\t{c.nt}\treps\t{c.reps}",
            f"value\t{self.value!r}",
            f"dot\t{self.dot!r}",
            f"oracle dot\t{self.oracle_dot!r}\t{'match' if self.oracle_match else 'MISMATCH'}",
            f"fd dot\t{self.fd_dot!r}\trel err\t{self.fd_error:.3e}",
            f"native time\t{self.native_time:.4f} s",
            f"instrumented time\t{self.instrumented_time:.4f} s",
            f"slow-down\t{self.slowdown:.2f}",
            f"shadow pages\t{self.shadow_pages}\ttrie nodes\t{self.shadow_nodes}"
            f"\tclient pages\t{self.client_pages}",
        ]


class BenchError(Exception):
    pass


def burgers_source(nx: int, nt: int) -> str:
    n = nx * nx
    return f"""\
// Lax-Friedrichs scheme for the 2D inviscid Burgers equations, {nx}x{nx} grid, {nt} steps
f64 shift = input(0);
f64 u[{n}];
f64 v[{n}];
f64 un[{n}];
f64 vn[{n}];
f64 dx = 1.0 / {float(nx - 1)!r};
f64 c = 0.2 / 2.0;
f64 px = 0.0;
f64 py = 0.0;
i64 k = 0;
for i in 0..{nx} {{
  for j in 0..{nx} {{
    k = i * {nx} + j;
    px = f64(i) * dx;
    py = f64(j) * dx;
    u[k] = dg_set_dot(1.0 + 4.0 * px * (1.0 - px) * py * (1.0 - py) + shift, 1.0);
    v[k] = dg_set_dot(0.5 + 2.0 * px * (1.0 - py) + shift, 1.0);
    un[k] = u[k];
    vn[k] = v[k];
  }}
}}
for t in 0..{nt} {{
  for i in 1..{nx - 1} {{
    for j in 1..{nx - 1} {{
      k = i * {nx} + j;
      un[k] = 0.25 * (u[k + {nx}] + u[k - {nx}] + u[k + 1] + u[k - 1])
            - c * (u[k] * (u[k + {nx}] - u[k - {nx}]) + v[k] * (u[k + 1] - u[k - 1]));
      vn[k] = 0.25 * (v[k + {nx}] + v[k - {nx}] + v[k + 1] + v[k - 1])
            - c * (u[k] * (v[k + {nx}] - v[k - {nx}]) + v[k] * (v[k + 1] - v[k - 1]));
    }}
  }}
  for k2 in 0..{n} {{
    u[k2] = un[k2];
    v[k2] = vn[k2];
  }}
}}
f64 sum = 0.0;
for k3 in 0..{n} {{
  sum = sum + u[k3] * u[k3] + v[k3] * v[k3];
}}
output(sqrt(sum));
"""


def _timed_run(program, ad: bool, inputs) -> tuple[float, Machine]:
    m = Machine(tool=ad, inputs=inputs, seeds=[1.0])
    t0 = time.perf_counter()
    m.run(program)
    return time.perf_counter() - t0, m


def bench_burgers(config: BenchmarkConfig = BenchmarkConfig(), h: float = 1e-6) -> BenchReport:
    src = burgers_source(config.nx, config.nt)
    compiled = compile_source(src)
    native_prog, _ = prepare(compiled, ad=False)
    ad_prog, _ = prepare(compiled, ad=True)
    inputs = [0.0]
    native_times, ad_times = [], []
    for _ in range(config.reps):
        t, _ = _timed_run(native_prog, False, inputs)
        native_times.append(t)
        t, m = _timed_run(ad_prog, True, inputs)
        ad_times.append(t)
    value = math.nan if not m.outputs else from_bits64(m.outputs[0])
    dot = from_bits64(m.dot_outputs[0]) if m.dot_outputs else math.nan
    if math.isnan(value) or math.isnan(dot):
        raise BenchError(f"divergent solution (nx={config.nx}, nt={config.nt})")
    oracle = oracle_eval(src, inputs, 0)
    fd = finite_diff_compiled(compiled, inputs, 0, h)[0]
    stats = m.shadow.stats()
    return BenchReport(config, value, dot, oracle.dots[0], fd, min(native_times), min(ad_times),
                       stats["pages"], stats["nodes"], m.memory.pages_touched)
