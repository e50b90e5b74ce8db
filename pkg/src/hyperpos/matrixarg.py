"""Matrix-argument hypergeometric series and Haar-unitary Monte Carlo checks.

Hermitian arguments are stored by their eigenvalues; Monte Carlo draws
realize them as diagonal matrices conjugated by independent Haar unitaries.
This is the only module that works with complex matrices.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateSpectrum, DomainError, Divergent, ParameterError
from .identities import TruncatedSum
from .kernels import _terminating
from .scalars import all_exact, serialize_scalar
from .symfun import (
    COINCIDENCE_TOL,
    rising_ratio,
    beta_n,
    omega,
    partitions_up_to,
    schur_dimension,
    schur_eval,
    vandermonde,
    zonal,
)

MC_BATCHES = 100
MIN_BATCHES = 30


@dataclass(frozen=True)
class HermitianSpec:
    eigenvalues: tuple

    def __post_init__(self):
        vals = tuple(self.eigenvalues)
        if not vals:
            raise ValueError("need at least one eigenvalue")
        object.__setattr__(self, "eigenvalues", vals)

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    @property
    def norm(self) -> float:
        return max(abs(float(x)) for x in self.eigenvalues)

    def matrix(self) -> np.ndarray:
        return np.diag(np.array([float(x) for x in self.eigenvalues], dtype=complex))


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_error: float
    samples: int
    seed: int
    batches: int = MC_BATCHES
    rejected: int = 0
    imag_mean: float = 0.0

    def to_json(self) -> dict:
        return {
            "mean": self.mean,
            "std_error": self.std_error,
            "samples": self.samples,
            "seed": self.seed,
            "batches": self.batches,
            "rejected": self.rejected,
            "imag_mean": self.imag_mean,
        }


def _as_spec(X) -> HermitianSpec:
    return X if isinstance(X, HermitianSpec) else HermitianSpec(tuple(X))


def haar_unitaries(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` independent Haar unitaries of shape (size, n, n).

    QR of a complex Ginibre matrix with the phases fixed so that R has a
    positive real diagonal.
    """
    z = (rng.standard_normal((size, n, n)) + 1j * rng.standard_normal((size, n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[:, None, :]


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    return haar_unitaries(n, 1, rng)[0]


# -- batched Schur functions of complex eigenvalues -------------------------

def _complete_homogeneous(eigs: np.ndarray, max_degree: int) -> np.ndarray:
    """h_0..h_max of each row of ``eigs`` (N, n) via elementary symmetric polys."""
    N, n = eigs.shape
    e = np.zeros((N, n + 1), dtype=complex)
    e[:, 0] = 1.0
    for i in range(n):
        z = eigs[:, i]
        e[:, 1:i + 2] = e[:, 1:i + 2] + z[:, None] * e[:, 0:i + 1]
    h = np.zeros((N, max_degree + 1), dtype=complex)
    h[:, 0] = 1.0
    for k in range(1, max_degree + 1):
        acc = np.zeros(N, dtype=complex)
        for i in range(1, min(k, n) + 1):
            acc += (-1) ** (i - 1) * e[:, i] * h[:, k - i]
        h[:, k] = acc
    return h


def _jacobi_trudi(lam: Sequence[int], h: np.ndarray) -> np.ndarray:
    """s_lambda = det(h_{lam_i - i + j}) for a batch of h sequences."""
    ell = len(lam)
    N = h.shape[0]
    if ell == 0:
        return np.ones(N, dtype=complex)
    mat = np.zeros((N, ell, ell), dtype=complex)
    for i in range(ell):
        for j in range(ell):
            k = lam[i] - i + j
            if 0 <= k < h.shape[1]:
                mat[:, i, j] = h[:, k]
    if ell == 1:
        return mat[:, 0, 0]
    return np.linalg.det(mat)


def batch_schur(lam: Sequence[int], eigs: np.ndarray) -> np.ndarray:
    h = _complete_homogeneous(eigs, (lam[0] + len(lam) - 1) if len(lam) else 0)
    return _jacobi_trudi(tuple(lam), h)


# -- admissibility and series -----------------------------------------------

def _check_params(a: Sequence, b: Sequence, n: int):
    for bt in b:
        for j in range(1, n + 1):
            v = -bt + j - 1
            if float(v).is_integer() and v >= 0:
                raise ParameterError(f"-b + j - 1 = {v} is a nonnegative integer (b = {bt}, j = {j})")


def _check_convergence(a: Sequence, b: Sequence, norm: float):
    if _terminating(a):
        return
    p, q = len(a), len(b)
    if p > q + 1 and norm > 0:
        raise Divergent(f"{p}F{q} of matrix argument diverges")
    if p == q + 1 and norm >= 1:
        raise DomainError(f"{p}F{q} needs spectral norm < 1, got {norm}")


def _coef(a, b, lam, n, exact, extra_den=()):
    """prod (a_i)_lam / prod (b_t)_lam, with extra denominator parameters."""
    return rising_ratio(a, tuple(b) + tuple(extra_den), lam, n, exact)


def pfq_matrix(a: Sequence, b: Sequence, X, max_weight: int) -> TruncatedSum:
    """Zonal series of pFq(a; b; X), truncated at partitions of weight max_weight."""
    X = _as_spec(X)
    n = X.n
    a, b = tuple(a), tuple(b)
    _check_params(a, b, n)
    _check_convergence(a, b, X.norm)
    exact = all_exact(X.eigenvalues) and all_exact(a) and all_exact(b)
    shells = [[] for _ in range(max_weight + 1)]
    for lam in partitions_up_to(max_weight, n):
        # Z_lam / |lam|! = d_lam / (n)_lam * s_lam
        c = _coef(a, b, lam, n, exact, extra_den=(n,))
        if c == 0:
            continue
        s = schur_eval(lam, X.eigenvalues)
        d = schur_dimension(lam, n)
        shells[lam.weight].append(c * d * s if exact else c * float(d) * float(s))
    return _collect(shells, exact, max_weight)


def _collect(shells, exact, max_weight, scale=1):
    sums = [sum(s, Fraction(0)) if exact else math.fsum(s) for s in shells]
    value = sum(sums, Fraction(0)) if exact else math.fsum(sums)
    return TruncatedSum(scale * value, max_weight, abs(scale * sums[max_weight]))


def extended_series(a: Sequence, b: Sequence, spectra: Sequence, max_weight: int,
                    include_beta: bool = True) -> TruncatedSum:
    """beta_n sum_lam coef * s_lam(X_1)...s_lam(X_2m) / (prod_j (lam_j+n-j)! * d_lam^(2m-2)).

    With a = b = () this is the exponential case; ``include_beta=False``
    drops the leading beta_n.
    """
    specs = [_as_spec(X) for X in spectra]
    n = specs[0].n
    if any(s.n != n for s in specs):
        raise ValueError("all spectra must have the same length")
    k = len(specs)
    if k < 2:
        raise ValueError("need at least two Hermitian arguments")
    a, b = tuple(a), tuple(b)
    exact = all(all_exact(s.eigenvalues) for s in specs) and all_exact(a) and all_exact(b)
    beta = beta_n(n)
    shells = [[] for _ in range(max_weight + 1)]
    for lam in partitions_up_to(max_weight, n):
        # prod_j (lam_j + n - j)! = beta_n * (n)_lam
        c = _coef(a, b, lam, n, exact, extra_den=(n,))
        if c == 0:
            continue
        d = schur_dimension(lam, n) ** (k - 2)
        term = c / (beta * d) if exact else c / beta / float(d)
        for s in specs:
            term *= schur_eval(lam, s.eigenvalues)
        shells[lam.weight].append(term)
    scale = beta if include_beta else 1
    return _collect(shells, exact, max_weight, scale)


# -- Monte Carlo ---------------------------------------------------------------

def _batch_sizes(samples: int) -> list[int]:
    batches = min(MC_BATCHES, samples)
    if batches < MIN_BATCHES:
        raise ValueError(f"need at least {MIN_BATCHES} samples for batch-means errors")
    base, extra = divmod(samples, batches)
    return [base + (i < extra) for i in range(batches)]


def _conjugated_products(mats: Sequence[np.ndarray], size: int, rng) -> np.ndarray:
    n = mats[0].shape[0]
    prod = None
    for X in mats:
        U = haar_unitaries(n, size, rng)
        term = U @ X @ np.conj(np.swapaxes(U, -1, -2))
        prod = term if prod is None else prod @ term
    return prod


def monte_carlo(mats: Sequence[np.ndarray], integrand: Callable, samples: int, seed: int,
                threads: int = 1) -> MCEstimate:
    """Haar average of integrand(prod_k U_k X_k U_k^*) over independent U_k.

    ``integrand`` maps a stack of matrices (N, n, n) to ``(values, keep)``
    with complex values and a boolean acceptance mask.  Batches have fixed
    sizes and their own generator streams, so results do not depend on
    ``threads``.
    """
    mats = [np.asarray(X, dtype=complex) for X in mats]
    sizes = _batch_sizes(samples)
    streams = np.random.SeedSequence(int(seed)).spawn(len(sizes))

    def run(i):
        rng = np.random.Generator(np.random.PCG64(streams[i]))
        P = _conjugated_products(mats, sizes[i], rng)
        values, keep = integrand(P)
        kept = values[keep]
        return math.fsum(kept.real.tolist()), math.fsum(kept.imag.tolist()), int(keep.sum())

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(i) for i in range(len(sizes))]

    used = sum(p[2] for p in parts)
    if used == 0:
        raise Divergent("every Monte Carlo sample was rejected")
    mean = math.fsum(p[0] for p in parts) / used
    imag = math.fsum(p[1] for p in parts) / used
    means = np.array([p[0] / p[2] for p in parts if p[2] > 0])
    se = float(np.std(means, ddof=1) / math.sqrt(len(means))) if len(means) > 1 else 0.0
    return MCEstimate(mean, se, samples, int(seed), len(sizes), samples - used, imag)


def _exp_trace(P):
    vals = np.exp(np.trace(P, axis1=-2, axis2=-1))
    return vals, np.ones(len(vals), dtype=bool)


def _pfq_integrand(a, b, n, max_weight):
    terms = []
    for lam in partitions_up_to(max_weight, n):
        # Z_lam / |lam|! = d_lam / (n)_lam * s_lam
        c = _coef(a, b, lam, n, False, extra_den=(n,))
        if c == 0:
            continue
        c *= schur_dimension(lam, n)
        terms.append((tuple(lam), c))
    check_norm = len(a) == len(b) + 1 and not _terminating(a)

    def integrand(P):
        eigs = np.linalg.eigvals(P)
        h = _complete_homogeneous(eigs, max_weight + n - 1)
        total = np.zeros(P.shape[0], dtype=complex)
        for lam, c in terms:
            total += c * _jacobi_trudi(lam, h)
        if check_norm:
            keep = np.linalg.norm(P, ord=2, axis=(-2, -1)) < 1
        else:
            keep = np.ones(P.shape[0], dtype=bool)
        return total, keep

    return integrand


def _check_spectrum(X: HermitianSpec):
    x = [float(v) for v in X.eigenvalues]
    if len(x) < 2:
        return
    scale = max(1.0, max(abs(v) for v in x))
    xs = sorted(x)
    if min(t - s for s, t in zip(xs, xs[1:])) < COINCIDENCE_TOL * scale:
        raise DegenerateSpectrum(f"eigenvalues {X.eigenvalues} are (nearly) coincident")


def hciz_det_side(X1, X2) -> float:
    """det(exp(x_{1,r} x_{2,s})) / (V(x_1) V(x_2))"""
    X1, X2 = _as_spec(X1), _as_spec(X2)
    x = np.array([float(v) for v in X1.eigenvalues])
    y = np.array([float(v) for v in X2.eigenvalues])
    det = float(np.linalg.det(np.exp(np.outer(x, y))))
    return det / (float(vandermonde(x.tolist())) * float(vandermonde(y.tolist())))


def hciz_check(X1, X2, mc_samples: int, seed: int, max_weight: int, threads: int = 1):
    """Determinant side, Monte Carlo and series for the unitary HCIZ integral.

    All three estimate det(exp(x_r y_s)) / (V(x)V(y)); the Monte Carlo and
    series values are divided by beta_n.
    """
    X1, X2 = _as_spec(X1), _as_spec(X2)
    if X1.n != X2.n:
        raise ValueError("spectra must have equal length")
    _check_spectrum(X1)
    _check_spectrum(X2)
    n = X1.n
    beta = beta_n(n)
    det_side = hciz_det_side(X1, X2)
    raw = monte_carlo([X1.matrix(), X2.matrix()], _exp_trace, mc_samples, seed, threads)
    mc = MCEstimate(raw.mean / beta, raw.std_error / beta, raw.samples, raw.seed, raw.batches,
                    raw.rejected, raw.imag_mean / beta)
    series = extended_series((), (), [X1, X2], max_weight, include_beta=False)
    return det_side, mc, series


def extended_hc_check(spectra: Sequence, mc_samples: int, seed: int, max_weight: int, threads: int = 1):
    """Monte Carlo and truncated series for the 2m-fold conjugated exponential integral."""
    specs = [_as_spec(X) for X in spectra]
    if len(specs) < 2 or len(specs) % 2:
        raise ValueError("need an even number (>= 2) of Hermitian arguments")
    mc = monte_carlo([s.matrix() for s in specs], _exp_trace, mc_samples, seed, threads)
    series = extended_series((), (), specs, max_weight)
    return mc, series


def extended_hc_pfq_check(a: Sequence, b: Sequence, spectra: Sequence, mc_samples: int, seed: int,
                          max_weight: int, threads: int = 1):
    """Monte Carlo and truncated series for the Haar average of pFq(a; b; prod U_k X_k U_k^*).

    Each draw evaluates the matrix-argument series at the eigenvalues of the
    product.  For p = q + 1 every factor must have spectral norm < 1 and
    draws whose product leaves the unit ball are rejected and counted.
    """
    specs = [_as_spec(X) for X in spectra]
    if len(specs) < 2 or len(specs) % 2:
        raise ValueError("need an even number (>= 2) of Hermitian arguments")
    n = specs[0].n
    a, b = tuple(a), tuple(b)
    _check_params(a, b, n)
    _check_convergence(a, b, max(s.norm for s in specs))
    integrand = _pfq_integrand(a, b, n, max_weight)
    mc = monte_carlo([s.matrix() for s in specs], integrand, mc_samples, seed, threads)
    series = extended_series(a, b, specs, max_weight)
    return mc, series


def mean_value_check(lam: Sequence[int], X1, X2, mc_samples: int, seed: int, threads: int = 1):
    """Monte Carlo of the Haar average of Z_lam(U X1 U^* X2) and the closed form Z(X1)Z(X2)/Z(I)."""
    X1, X2 = _as_spec(X1), _as_spec(X2)
    n = X1.n
    lam = tuple(lam)
    w = float(omega(lam, n))

    def integrand(P):
        eigs = np.linalg.eigvals(P)
        vals = w * batch_schur(lam, eigs)
        return vals, np.ones(len(vals), dtype=bool)

    # the second factor is conjugated too; by invariance the law is unchanged
    mc = monte_carlo([X1.matrix(), X2.matrix()], integrand, mc_samples, seed, threads)
    exact = zonal(lam, X1.eigenvalues) * zonal(lam, X2.eigenvalues) / zonal(lam, [1] * n)
    return mc, exact


def report_json(obj) -> dict:
    if hasattr(obj, "to_json"):
        return obj.to_json()
    return serialize_scalar(obj)
