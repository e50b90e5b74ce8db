"""Kernel families and their evaluation on Weyl-chamber grids."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DomainError, Divergent, Infeasible, ParameterError
from .hyperdet import HyperArray
from .scalars import all_exact, is_exact, parse_scalar, serialize_scalar

KINDS = ("exp", "power", "negbinomial", "pfq", "polya")
#: kernels whose hyperdeterminants are claimed strictly positive
STRICT_KINDS = ("exp", "power", "polya")

PFQ_REL_STOP = 1e-16
PFQ_STOP_RUN = 3
PFQ_MAX_TERMS = 10**5

DEFAULT_BOX = (0.0, 1.0)
DEFAULT_MIN_GAP = 1e-3


@dataclass(frozen=True)
class KernelSpec:
    """One of the kernel families, with its arity 2m.

    ``kind`` is one of ``exp`` (exp of the product), ``power``
    (x1 ** (x2 ... x2m)), ``negbinomial`` ((1 - product) ** -a), ``pfq``
    (classical pFq of the product) and ``polya`` (exp(exp(sum))).
    """

    kind: str
    arity: int
    a: tuple = field(default=())
    b: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kernel {self.kind!r}; expected one of {KINDS}")
        if self.arity < 2 or self.arity % 2:
            raise ValueError(f"arity must be even and >= 2, got {self.arity}")
        object.__setattr__(self, "a", tuple(self.a))
        object.__setattr__(self, "b", tuple(self.b))
        if self.kind == "negbinomial" and (len(self.a) != 1 or self.b):
            raise ValueError("negbinomial takes exactly one parameter a")
        if self.kind != "pfq" and self.kind != "negbinomial" and (self.a or self.b):
            raise ValueError(f"kernel {self.kind!r} takes no parameters")

    @classmethod
    def exp_product(cls, arity):
        return cls("exp", arity)

    @classmethod
    def power(cls, arity):
        return cls("power", arity)

    @classmethod
    def neg_binomial(cls, a, arity):
        return cls("negbinomial", arity, (a,))

    @classmethod
    def classical_pfq(cls, a, b, arity):
        return cls("pfq", arity, tuple(a), tuple(b))

    @classmethod
    def polya_exp(cls, arity):
        return cls("polya", arity)

    @property
    def m(self) -> int:
        return self.arity // 2

    @property
    def strict(self) -> bool:
        return self.kind in STRICT_KINDS

    @property
    def hypergeometric(self):
        """(a, b) parameters of the pFq this kernel is a function of the product of."""
        if self.kind == "negbinomial":
            return self.a, ()
        if self.kind == "pfq":
            return self.a, self.b
        if self.kind == "exp":
            return (), ()
        return None

    def to_json(self) -> dict:
        return {
            "kernel": self.kind,
            "a": [serialize_scalar(v) for v in self.a],
            "b": [serialize_scalar(v) for v in self.b],
            "arity": self.arity,
        }

    @classmethod
    def from_json(cls, data: dict) -> "KernelSpec":
        a = tuple(parse_scalar(v) for v in data.get("a", []))
        b = tuple(parse_scalar(v) for v in data.get("b", []))
        return cls(data["kernel"], int(data["arity"]), a, b)


@dataclass(frozen=True)
class EvaluationGrid:
    """2m strictly decreasing vectors of common length n."""

    vectors: tuple

    def __post_init__(self):
        vecs = tuple(tuple(v) for v in self.vectors)
        if not vecs:
            raise ValueError("grid needs at least one vector")
        n = len(vecs[0])
        if n < 1 or any(len(v) != n for v in vecs):
            raise ValueError("grid vectors must share a positive length")
        for k, v in enumerate(vecs):
            if any(v[i] <= v[i + 1] for i in range(n - 1)):
                raise ValueError(f"grid vector {k} is not strictly decreasing: {v}")
        object.__setattr__(self, "vectors", vecs)

    @property
    def arity(self) -> int:
        return len(self.vectors)

    @property
    def n(self) -> int:
        return len(self.vectors[0])

    @property
    def exact(self) -> bool:
        return all(all_exact(v) for v in self.vectors)

    def to_json(self) -> dict:
        return {"vectors": [[serialize_scalar(x) for x in v] for v in self.vectors]}

    @classmethod
    def from_json(cls, data: dict, backend: str | None = None) -> "EvaluationGrid":
        return cls(tuple(tuple(parse_scalar(x, backend) for x in v) for v in data["vectors"]))


def _is_nonpositive_int(x) -> bool:
    return float(x).is_integer() and x <= 0


def _terminating(a: Sequence) -> bool:
    return any(_is_nonpositive_int(ai) for ai in a)


def classical_pfq(a: Sequence, b: Sequence, x):
    """Generalized hypergeometric series pFq(a; b; x) by term summation.

    Stops once the next term is below 1e-16 of the partial sum for three
    consecutive terms (at most 1e5 terms).
    """
    a, b = list(a), list(b)
    for bt in b:
        if _is_nonpositive_int(bt):
            raise ParameterError(f"denominator parameter {bt} is a nonpositive integer")
    terminating = _terminating(a)
    p, q = len(a), len(b)
    if x != 0 and not terminating:
        if p > q + 1:
            raise Divergent(f"{p}F{q} diverges for x = {x}")
        if p == q + 1 and abs(x) >= 1:
            raise DomainError(f"{p}F{q} needs |x| < 1, got {x}")
    exact = is_exact(x) and all_exact(a) and all_exact(b) and terminating
    if exact:
        term, total, i = Fraction(1), Fraction(1), 0
        while term != 0:
            term = term * math.prod(Fraction(ai) + i for ai in a) / math.prod(Fraction(bt) + i for bt in b) * x / (i + 1)
            total += term
            i += 1
        return total
    x = float(x)
    terms = [1.0]
    term, partial, run, i = 1.0, 1.0, 0, 0
    while run < PFQ_STOP_RUN:
        if i >= PFQ_MAX_TERMS:
            raise Divergent(f"{p}F{q} series did not settle within {PFQ_MAX_TERMS} terms at x = {x}")
        ratio = x / (i + 1)
        for ai in a:
            ratio *= ai + i
        for bt in b:
            ratio /= bt + i
        term *= ratio
        terms.append(term)
        partial += term
        i += 1
        if term == 0 and terminating:
            break
        run = run + 1 if abs(term) < PFQ_REL_STOP * abs(partial) else 0
    return math.fsum(terms)


def kernel_value(spec: KernelSpec, args: Sequence):
    """Evaluate the kernel at one point (x_1, ..., x_2m)."""
    args = list(args)
    if len(args) != spec.arity:
        raise ValueError(f"expected {spec.arity} arguments, got {len(args)}")
    kind = spec.kind
    if kind == "exp":
        return math.exp(float(math.prod(args)))
    if kind == "power":
        if args[0] <= 0:
            raise DomainError(f"power kernel needs x1 > 0, got {args[0]}")
        return math.exp(float(math.prod(args[1:])) * math.log(float(args[0])))
    if kind == "polya":
        return math.exp(math.exp(float(sum(args))))
    prod = math.prod(args)
    if kind == "negbinomial":
        (a,) = spec.a
        if abs(prod) >= 1:
            raise DomainError(f"negative-binomial kernel needs |product| < 1, got {prod}")
        if all_exact(args) and is_exact(a) and a == int(a):
            return Fraction(1) / (1 - Fraction(prod)) ** int(a)
        return (1.0 - float(prod)) ** (-float(a))
    return classical_pfq(spec.a, spec.b, prod)


def _product_mesh(vectors) -> np.ndarray:
    out = np.asarray(vectors[0], dtype=float)
    for v in vectors[1:]:
        out = np.multiply.outer(out, np.asarray(v, dtype=float))
    return out


def _first_bad(mask: np.ndarray):
    return tuple(int(i) for i in np.argwhere(mask)[0])


def kernel_array(spec: KernelSpec, grid: EvaluationGrid) -> HyperArray:
    """Array with entry (r_1..r_2m) = K(x_{1,r_1}, ..., x_{2m,r_2m})."""
    if grid.arity != spec.arity:
        raise ValueError(f"grid has {grid.arity} vectors but kernel arity is {spec.arity}")
    vecs = grid.vectors
    n = grid.n
    kind = spec.kind
    if kind == "exp":
        return HyperArray(np.exp(_product_mesh(vecs)))
    if kind == "polya":
        total = np.asarray(vecs[0], dtype=float)
        for v in vecs[1:]:
            total = np.add.outer(total, np.asarray(v, dtype=float))
        return HyperArray(np.exp(np.exp(total)))
    if kind == "power":
        if min(vecs[0]) <= 0:
            raise DomainError(f"power kernel needs x1 > 0; offending index r1={list(vecs[0]).index(min(vecs[0]))}")
        logs = np.log(np.asarray(vecs[0], dtype=float))
        return HyperArray(np.exp(_product_mesh((logs,) + tuple(vecs[1:]))))
    exact = grid.exact and kind == "negbinomial" and is_exact(spec.a[0]) and spec.a[0] == int(spec.a[0])
    if kind == "negbinomial" and not exact:
        prod = _product_mesh(vecs)
        bad = np.abs(prod) >= 1
        if bad.any():
            raise DomainError(f"negative-binomial kernel needs |product| < 1 at index {_first_bad(bad)}")
        return HyperArray((1.0 - prod) ** (-float(spec.a[0])))
    out = np.empty((n,) * spec.arity, dtype=object if exact else float)
    for idx in itertools.product(range(n), repeat=spec.arity):
        point = [vecs[k][r] for k, r in enumerate(idx)]
        try:
            out[idx] = kernel_value(spec, point)
        except DomainError as exc:
            raise type(exc)(f"{exc} (at index {idx})") from None
    return HyperArray(out)


def grid_rng(seed: int, index: int = 0) -> np.random.Generator:
    """Counter-based stream for sample ``index`` of a run seeded with ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(index)])))


def weyl_sample(n: int, m: int, box=DEFAULT_BOX, min_gap: float = DEFAULT_MIN_GAP, seed: int = 0,
                index: int = 0, max_tries: int = 100_000) -> EvaluationGrid:
    """Draw 2m vectors of n uniform points in ``box``, sorted strictly decreasing.

    A vector whose neighbouring gaps fall below ``min_gap`` is redrawn.
    Deterministic per (seed, index).
    """
    lo, hi = float(box[0]), float(box[1])
    if not hi > lo:
        raise Infeasible(f"empty box {box}")
    if min_gap <= 0:
        raise ValueError("min_gap must be positive")
    if n * min_gap > hi - lo:
        raise Infeasible(f"{n} points with gap {min_gap} do not fit in {box}")
    rng = grid_rng(seed, index)
    vectors = []
    for _ in range(2 * m):
        for _ in range(max_tries):
            v = np.sort(rng.uniform(lo, hi, size=n))[::-1]
            if n == 1 or np.min(v[:-1] - v[1:]) >= min_gap:
                break
        else:
            raise Infeasible(f"could not draw {n} points with gap {min_gap} in {box}")
        vectors.append(tuple(float(t) for t in v))
    return EvaluationGrid(tuple(vectors))
