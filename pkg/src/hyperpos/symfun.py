"""Partitions, rising factorials and Schur / zonal polynomials.

All functions accept exact rationals (``int`` / ``Fraction``) or floats and
return a value of the same kind. Schur functions are evaluated by the
bialternant formula; at (nearly) coincident points they switch to a
Gelfand-Tsetlin branching sum over semistandard tableaux.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import TolBreach
from .scalars import all_exact

#: Relative gap below which two float arguments count as coincident.
COINCIDENCE_TOL = 1e-8
#: Largest tolerated estimate of the relative rounding error of a float Schur value.
SCHUR_REL_BUDGET = 1e-9

_EPS = np.finfo(float).eps


class Partition(tuple):
    """Weakly decreasing tuple of nonnegative integers, trailing zeros stripped."""

    def __new__(cls, parts: Sequence[int] = ()):
        parts = [int(p) for p in parts]
        if any(p < 0 for p in parts):
            raise ValueError(f"partition parts must be nonnegative: {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ValueError(f"partition parts must be weakly decreasing: {parts}")
        while parts and parts[-1] == 0:
            parts.pop()
        return super().__new__(cls, parts)

    @property
    def weight(self) -> int:
        return sum(self)

    @property
    def length(self) -> int:
        return len(self)

    def padded(self, n: int) -> tuple[int, ...]:
        if len(self) > n:
            raise ValueError(f"partition {tuple(self)} has more than {n} parts")
        return tuple(self) + (0,) * (n - len(self))

    def __repr__(self):
        return f"Partition({tuple(self)})"


def _partitions_of(w: int, max_length: int, max_part: int):
    # reverse-lexicographic: largest first part first
    if w == 0:
        yield ()
        return
    if max_length == 0:
        return
    for first in range(min(w, max_part), 0, -1):
        for rest in _partitions_of(w - first, max_length - 1, first):
            yield (first,) + rest


def partitions_of(weight: int, max_length: int) -> list[Partition]:
    return [Partition(p) for p in _partitions_of(weight, max_length, weight)]


def partitions_up_to(max_weight: int, max_length: int) -> list[Partition]:
    """All partitions with weight <= max_weight and length <= max_length.

    Ordered by weight, then reverse-lexicographically within a weight.
    """
    if max_weight < 0 or max_length < 1:
        raise ValueError("need max_weight >= 0 and max_length >= 1")
    out = []
    for w in range(max_weight + 1):
        out.extend(partitions_of(w, max_length))
    return out


def rising_factorial(a, j: int):
    """Classical rising factorial a(a+1)...(a+j-1)."""
    if j < 0:
        raise ValueError("j must be nonnegative")
    result = 1
    for i in range(j):
        result = result * (a + i)
    return result


def partitional_rising(a, lam: Sequence[int], n: int):
    """Partitional rising factorial prod_j (a-j+1)_{lam_j}, j = 1..n."""
    parts = Partition(lam).padded(n)
    result = 1
    for j, part in enumerate(parts):
        result = result * rising_factorial(a - j, part)
    return result


def rising_ratio(num: Sequence, den: Sequence, lam: Sequence[int], n: int, exact: bool):
    """prod_{a in num} (a)_lam / prod_{b in den} (b)_lam.

    Exact gives a Fraction. The float path multiplies factor by factor so
    large weights neither overflow nor underflow early.
    """
    if exact:
        c = Fraction(1)
        for a in num:
            c *= partitional_rising(Fraction(a), lam, n)
        for b in den:
            c /= partitional_rising(Fraction(b), lam, n)
        return c
    c = 1.0
    for j, part in enumerate(Partition(lam).padded(n)):
        for k in range(part):
            for a in num:
                c *= float(a) - j + k
            for b in den:
                c /= float(b) - j + k
    return c


def beta_n(n: int) -> int:
    """prod_{j=1}^{n} (j-1)!"""
    if n < 1:
        raise ValueError("n must be positive")
    return math.prod(math.factorial(j) for j in range(n))


def _content_product(parts: Sequence[int]) -> int:
    n = len(parts)
    return math.prod(parts[i] - parts[j] - i + j for i in range(n) for j in range(i + 1, n))


def schur_dimension(lam: Sequence[int], n: int) -> int:
    """d_lambda = s_lambda(1, ..., 1) with n ones."""
    parts = Partition(lam).padded(n)
    num = _content_product(parts)
    q, r = divmod(num, beta_n(n))
    assert r == 0
    return q


def omega(lam: Sequence[int], n: int) -> Fraction:
    """Zonal normalization |lam|! d_lambda / (n)_lambda, exactly."""
    lam = Partition(lam)
    return Fraction(math.factorial(lam.weight) * schur_dimension(lam, n), partitional_rising(n, lam, n))


def omega_direct(lam: Sequence[int], n: int) -> Fraction:
    """|lam|! prod_{i<j}(lam_i - lam_j - i + j) / prod_j (lam_j + n - j)!"""
    parts = Partition(lam).padded(n)
    den = math.prod(math.factorial(parts[j] + n - 1 - j) for j in range(n))
    return Fraction(math.factorial(sum(parts)) * _content_product(parts), den)


def vandermonde(x: Sequence):
    """prod_{r<s} (x_r - x_s)"""
    x = list(x)
    result = 1
    for r in range(len(x)):
        for s in range(r + 1, len(x)):
            result = result * (x[r] - x[s])
    return result


def bareiss_det(rows: list[list[int]]) -> int:
    """Fraction-free Gaussian elimination on an integer matrix; the input is not modified."""
    m = [list(r) for r in rows]
    n = len(m)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = m[k][k]
        for i in range(k + 1, n):
            mik = m[i][k]
            row_i, row_k = m[i], m[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - mik * row_k[j]) // prev
        prev = pivot
    return sign * m[n - 1][n - 1]


def exact_det(rows) -> Fraction:
    """Exact determinant of a rational matrix via row scaling and Bareiss."""
    scaled, den = [], 1
    for row in rows:
        row = [Fraction(v) for v in row]
        lcm = math.lcm(*(v.denominator for v in row)) if row else 1
        scaled.append([int(v * lcm) for v in row])
        den *= lcm
    return Fraction(bareiss_det(scaled), den)


def _float_bialternant(parts, x):
    n = len(x)
    exps = [parts[s] + n - 1 - s for s in range(n)]
    m = np.array([[xr ** e for e in exps] for xr in x], dtype=float)
    det = float(np.linalg.det(m))
    # partial pivoting is blind to column scaling, so judge conditioning on
    # the column-equilibrated matrix
    colmax = np.max(np.abs(m), axis=0)
    if np.any(colmax == 0):
        return det, math.inf
    scaled = m / colmax
    scaled_det = abs(det) / float(np.prod(colmax)) if det else 0.0
    hadamard = float(np.prod(np.linalg.norm(scaled, axis=1)))
    return det, hadamard * abs(det) / scaled_det if scaled_det else math.inf


def _coincident(x) -> bool:
    if len(x) < 2:
        return False
    scale = max(1.0, max(abs(float(v)) for v in x))
    xs = sorted(float(v) for v in x)
    return min(b - a for a, b in zip(xs, xs[1:])) < COINCIDENCE_TOL * scale


def _interlacing(parts: tuple[int, ...]):
    # mu with parts[i] >= mu[i] >= parts[i+1], len(mu) = len(parts) - 1
    ranges = [range(parts[i + 1], parts[i] + 1) for i in range(len(parts) - 1)]

    def rec(i, acc):
        if i == len(ranges):
            yield tuple(acc)
            return
        for v in ranges[i]:
            acc.append(v)
            yield from rec(i + 1, acc)
            acc.pop()

    yield from rec(0, [])


def schur_tableau(lam: Sequence[int], x: Sequence):
    """s_lambda(x) as a sum over Gelfand-Tsetlin patterns (one variable at a time)."""
    x = list(x)
    n = len(x)
    lam = Partition(lam)
    if lam.length > n:
        return 0
    if n == 0:
        return 1
    memo: dict = {}

    def branch(parts: tuple[int, ...], k: int):
        # s_parts(x_1..x_k), len(parts) == k
        if k == 1:
            return x[0] ** parts[0]
        key = (parts, k)
        if key in memo:
            return memo[key]
        weight = sum(parts)
        xk = x[k - 1]
        acc = 0
        for mu in _interlacing(parts):
            acc = acc + xk ** (weight - sum(mu)) * branch(mu, k - 1)
        memo[key] = acc
        return acc

    return branch(lam.padded(n), n)


def schur_eval(lam: Sequence[int], x: Sequence):
    """Schur polynomial s_lambda(x_1, ..., x_n).

    Exact inputs give an exact ``Fraction``. Float inputs use the
    bialternant ratio unless points nearly coincide or the elimination is
    too ill-conditioned, in which case the tableau sum is used.
    """
    x = list(x)
    n = len(x)
    lam = Partition(lam)
    if lam.length > n:
        return 0
    if lam.length == 0:
        return Fraction(1) if all_exact(x) else 1.0
    if all_exact(x):
        x = [Fraction(v) for v in x]
        if len(set(x)) < n:
            return Fraction(schur_tableau(lam, x))
        parts = lam.padded(n)
        rows = [[xr ** (parts[s] + n - 1 - s) for s in range(n)] for xr in x]
        return exact_det(rows) / vandermonde(x)

    x = [float(v) for v in x]
    if not _coincident(x):
        det, hadamard = _float_bialternant(lam.padded(n), x)
        if det != 0 and n * _EPS * hadamard / abs(det) <= SCHUR_REL_BUDGET:
            return det / vandermonde(x)
    value = schur_tableau(lam, x)
    bound = schur_tableau(lam, [abs(v) for v in x])
    terms = schur_dimension(lam, n)
    if value != 0 and terms * _EPS * bound / abs(value) > SCHUR_REL_BUDGET:
        raise TolBreach(f"s_{tuple(lam)} at {x}: cancellation exceeds relative budget {SCHUR_REL_BUDGET}")
    return value


def zonal(lam: Sequence[int], x: Sequence):
    """Zonal polynomial Z_lambda = omega_lambda * s_lambda."""
    w = omega(lam, len(x))
    s = schur_eval(lam, x)
    if isinstance(s, float):
        return float(w) * s
    return w * s

