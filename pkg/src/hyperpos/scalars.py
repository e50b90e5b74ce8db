"""Dual scalar backend helpers: exact rationals (Fraction) and binary64 floats."""
from __future__ import annotations

import math
import numbers
from fractions import Fraction
from typing import Iterable

RATIONAL = "rational"
FLOAT = "float"


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def all_exact(values: Iterable) -> bool:
    return all(is_exact(v) for v in values)


def parse_scalar(value, backend: str | None = None):
    """Parse a JSON scalar. Strings are read as exact rationals ``"p/q"``."""
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, str):
        x = Fraction(value.strip())
    elif isinstance(value, (int, Fraction)):
        x = Fraction(value)
    elif isinstance(value, numbers.Real):
        x = float(value)
    else:
        raise TypeError(f"cannot parse scalar from {value!r}")
    if backend == RATIONAL and isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError("non-finite value on rational backend")
        x = Fraction(x)
    elif backend == FLOAT:
        x = float(x)
    return x


def serialize_scalar(x):
    """Rationals become ``"p/q"`` strings, floats stay floats (shortest repr)."""
    if is_exact(x):
        return str(Fraction(x))
    if isinstance(x, complex):
        return [x.real, x.imag]
    return float(x)


def total(values: Iterable):
    """Exact sum for rationals, correctly rounded ``math.fsum`` for floats."""
    values = list(values)
    if all_exact(values):
        return sum(values, Fraction(0))
    return math.fsum(float(v) for v in values)


def as_backend(x, backend: str):
    if backend == RATIONAL:
        return x if isinstance(x, Fraction) else Fraction(x)
    return float(x)


def reciprocal_factorial(k: int, exact: bool):
    return Fraction(1, math.factorial(k)) if exact else 1.0 / math.factorial(k)
