"""Summation identities for hyperdeterminants and the HTP scanning harness."""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DomainError, Divergent, ParameterError
from .hyperdet import DET_BUDGET, HyperArray, hyperdet
from .kernels import (
    DEFAULT_BOX,
    DEFAULT_MIN_GAP,
    EvaluationGrid,
    KernelSpec,
    _is_nonpositive_int,
    _terminating,
    kernel_array,
    weyl_sample,
)
from .scalars import all_exact, serialize_scalar
from .symfun import beta_n, exact_det, partitions_up_to, rising_factorial, rising_ratio, schur_eval, vandermonde

#: relative positivity margin for float hyperdeterminants, times max|entry|^n
HTP_MARGIN = 1e-12


@dataclass(frozen=True)
class TruncatedSum:
    value: object
    max_weight: int
    last_shell_magnitude: object

    def to_json(self) -> dict:
        return {
            "value": serialize_scalar(self.value),
            "max_weight": self.max_weight,
            "last_shell_magnitude": serialize_scalar(self.last_shell_magnitude),
        }


def binet_cauchy_discrete(phi, weights):
    """Both sides of the discrete hyperdeterminantal Binet-Cauchy formula.

    ``phi[k][r][x]`` is phi_{k,r} at ground point x (points ordered by index),
    ``weights[x]`` the measure of x.  Returns ``(lhs, rhs)`` where lhs is Det
    of A(r_1..r_2m) = sum_x prod_k phi_{k,r_k}(x) mu(x) and rhs sums
    prod_k det(phi_{k,r}(x_s)) prod_s mu(x_s) over strictly decreasing
    n-tuples of ground points.
    """
    phi = np.asarray(phi, dtype=object)
    order, n, size = phi.shape
    weights = list(weights)
    if len(weights) != size:
        raise ValueError("one weight per ground point required")
    exact = all_exact(phi.ravel()) and all_exact(weights)
    conv = Fraction if exact else float
    phi = np.vectorize(conv, otypes=[object])(phi)
    weights = [conv(w) for w in weights]

    A = np.empty((n,) * order, dtype=object)
    for idx in itertools.product(range(n), repeat=order):
        A[idx] = sum(
            (math.prod(phi[k, idx[k], x] for k in range(order)) * weights[x] for x in range(size)),
            conv(0),
        )
    lhs = hyperdet(HyperArray(A if exact else A.astype(float)))

    terms = []
    for pts in itertools.combinations(range(size - 1, -1, -1), n):
        prod = math.prod(weights[x] for x in pts)
        for k in range(order):
            mat = [[phi[k, r, x] for x in pts] for r in range(n)]
            prod *= exact_det(mat) if exact else float(np.linalg.det(np.array(mat, dtype=float)))
        terms.append(prod)
    rhs = sum(terms, Fraction(0)) if exact else math.fsum(terms)
    return lhs, rhs


def _check_admissible(b: Sequence, n: int):
    # (b)_{n-j} and (b+n-1)_lambda vanish only for nonpositive integer b
    for bt in b:
        if _is_nonpositive_int(bt):
            raise ParameterError(f"denominator parameter {bt} makes (b)_k vanish")


def _schur_series(a: Sequence, b: Sequence, grid: EvaluationGrid, max_weight: int) -> TruncatedSum:
    n = grid.n
    exact = grid.exact and all_exact(a) and all_exact(b)
    one = Fraction(1) if exact else 1.0
    vecs = [[Fraction(x) for x in v] for v in grid.vectors] if exact else [[float(x) for x in v] for v in grid.vectors]

    def ratio(num):
        return Fraction(num) if exact else float(num)

    prefactor = one
    for j in range(1, n + 1):
        for ai in a:
            prefactor *= ratio(rising_factorial(ai, n - j))
        for bt in b:
            prefactor /= ratio(rising_factorial(bt, n - j))
    vand = one
    for v in vecs:
        vand *= vandermonde(v)

    beta = beta_n(n)
    num = [ai + n - 1 for ai in a]
    # prod_j (lam_j + n - j)! = beta_n * (n)_lam
    den = [bt + n - 1 for bt in b] + [n]
    shells = [[] for _ in range(max_weight + 1)]
    for lam in partitions_up_to(max_weight, n):
        term = rising_ratio(num, den, lam, n, exact)
        if term == 0:
            continue
        term = term / beta
        for v in vecs:
            term *= schur_eval(lam, v)
        shells[lam.weight].append(term)
    shell_sums = [sum(s, Fraction(0)) if exact else math.fsum(s) for s in shells]
    series = sum(shell_sums, Fraction(0)) if exact else math.fsum(shell_sums)
    scale = vand * prefactor
    return TruncatedSum(scale * series, max_weight, abs(scale * shell_sums[max_weight]))


def exp_schur_sum(grid: EvaluationGrid, max_weight: int) -> TruncatedSum:
    """Truncated Schur expansion of Det(exp(x_{1,r_1} ... x_{2m,r_2m})).

    Sums partitions of weight <= max_weight and multiplies back by the
    Vandermonde factors, so the value approximates the hyperdeterminant.
    """
    if max_weight < 0:
        raise ValueError("max_weight must be nonnegative")
    return _schur_series((), (), grid, max_weight)


def pfq_schur_sum(a: Sequence, b: Sequence, grid: EvaluationGrid, max_weight: int) -> TruncatedSum:
    """Truncated Schur expansion of Det(pFq(a; b; x_{1,r_1} ... x_{2m,r_2m}))."""
    if max_weight < 0:
        raise ValueError("max_weight must be nonnegative")
    a, b = tuple(a), tuple(b)
    _check_admissible(b, grid.n)
    p, q = len(a), len(b)
    if not _terminating(a):
        radius = math.prod(max(abs(float(x)) for x in v) for v in grid.vectors)
        if p > q + 1 and radius > 0:
            raise Divergent(f"{p}F{q} series diverges")
        if p == q + 1 and radius >= 1:
            raise DomainError(f"{p}F{q} needs all products inside the unit disc, max is {radius}")
    return _schur_series(a, b, grid, max_weight)


@dataclass
class HTPReport:
    kernel: KernelSpec
    m: int
    n: int
    samples: int
    min_det: float
    violations: int
    seed: int
    min_scaled_det: float = math.inf
    worst_sample: int = -1
    box: tuple = DEFAULT_BOX
    min_gap: float = DEFAULT_MIN_GAP
    claim: str = "HSTP"

    def to_json(self) -> dict:
        return {
            "kernel": self.kernel.to_json(),
            "m": self.m,
            "n": self.n,
            "samples": self.samples,
            "min_det": serialize_scalar(self.min_det),
            "violations": self.violations,
            "seed": self.seed,
            "min_scaled_det": serialize_scalar(self.min_scaled_det),
            "worst_sample": self.worst_sample,
            "box": list(self.box),
            "min_gap": self.min_gap,
            "claim": self.claim,
        }


def _scan_one(spec, m, n, seed, index, box, min_gap, budget):
    grid = weyl_sample(n, m, box=box, min_gap=min_gap, seed=seed, index=index)
    A = kernel_array(spec, grid)
    det = hyperdet(A, budget=budget)
    scale = float(np.max(np.abs(A.values.astype(float)))) ** n
    return index, det, scale


def htp_scan(spec: KernelSpec, m: int, n: int, samples: int, seed: int, box=DEFAULT_BOX,
             min_gap: float = DEFAULT_MIN_GAP, workers: int = 1, budget: int = DET_BUDGET) -> HTPReport:
    """Evaluate hyperdeterminants of ``samples`` random Weyl-chamber grids.

    For strictly positive (HSTP) kernels a violation is Det <= 0; for the
    HTP kernels it is Det < -1e-12 * max|entry|^n.
    """
    if spec.arity != 2 * m:
        raise ValueError(f"kernel arity {spec.arity} does not match m = {m}")
    box = (float(box[0]), float(box[1]))

    def job(i):
        return _scan_one(spec, m, n, seed, i, box, min_gap, budget)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, range(samples)))
    else:
        results = [job(i) for i in range(samples)]

    violations, min_det, min_scaled, worst = 0, math.inf, math.inf, -1
    for index, det, scale in results:
        if spec.strict:
            bad = det <= 0
        else:
            bad = det < -HTP_MARGIN * scale
        violations += bool(bad)
        scaled = float(det) / scale
        if det < min_det:
            min_det = det
        if scaled < min_scaled:
            min_scaled, worst = scaled, index
    return HTPReport(spec, m, n, samples, min_det, violations, seed, min_scaled, worst, box, min_gap,
                     "HSTP" if spec.strict else "HTP")
