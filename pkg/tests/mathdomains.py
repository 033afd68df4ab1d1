"""Sampling domains for checking the wrapped math functions against finite differences."""

import math
import random

H = 1e-6

# name -> sampler(rng) returning an argument tuple away from singular points
DOMAINS = {
    "sin": lambda r: (r.uniform(-10, 10),),
    "cos": lambda r: (r.uniform(-10, 10),),
    "tan": lambda r: (r.uniform(-1.3, 1.3),),
    "asin": lambda r: (r.uniform(-0.95, 0.95),),
    "acos": lambda r: (r.uniform(-0.95, 0.95),),
    "atan": lambda r: (r.uniform(-10, 10),),
    "atan2": lambda r: (r.uniform(-5, 5), r.choice((-1, 1)) * r.uniform(0.2, 5)),
    "sinh": lambda r: (r.uniform(-5, 5),),
    "cosh": lambda r: (r.uniform(-5, 5),),
    "tanh": lambda r: (r.uniform(-5, 5),),
    "exp": lambda r: (r.uniform(-5, 5),),
    "log": lambda r: (r.uniform(0.1, 100),),
    "log10": lambda r: (r.uniform(0.1, 100),),
    "sqrt": lambda r: (r.uniform(0.05, 100),),
    "pow": lambda r: (r.uniform(0.2, 4), r.uniform(-3, 3)),
    "fabs": lambda r: (r.choice((-1, 1)) * r.uniform(0.01, 100),),
    "fmod": lambda r: _fmod_point(r),
    "floor": lambda r: _off_lattice(r),
    "ceil": lambda r: _off_lattice(r),
    "ldexp": lambda r: (r.uniform(-10, 10), r.randint(-20, 20)),
}


def _off_lattice(r):
    while True:
        x = r.uniform(-50, 50)
        if abs(x - round(x)) > 1e-3:
            return (x,)


def _fmod_point(r):
    while True:
        x, y = r.uniform(-20, 20), r.choice((-1, 1)) * r.uniform(0.5, 5)
        q = x / y
        if abs(q - round(q)) > 1e-3:
            return (x, y)


def central_difference(f, args, i, h=H):
    hi = list(args)
    lo = list(args)
    hi[i] += h
    lo[i] -= h
    return (f(*hi) - f(*lo)) / (2 * h)


def fd_failures(name, value, dot, n=1000, seed=0, differentiable=None):
    """Points where the analytic partials disagree with central differences.

    ``dot(args, dots)`` gives the wrapped dot; each differentiable argument is
    checked separately with a unit seed.
    """
    rng = random.Random(f"{name}:{seed}")
    bad = []
    for _ in range(n):
        args = DOMAINS[name](rng)
        for i in range(len(args)):
            if differentiable is not None and not differentiable[i]:
                continue
            seeds = tuple(1.0 if j == i else 0.0 for j in range(len(args)))
            got = dot(args, seeds)
            fd = central_difference(value, args, i)
            if not abs(got - fd) <= 1e-5 * (1 + abs(fd)) or math.isnan(got):
                bad.append((args, i, got, fd))
    return bad
