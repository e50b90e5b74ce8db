"""Cayley's first hyperdeterminant of cubical order-2m arrays.

Three evaluation paths are provided:

* ``hyperdet_naive``: literal signed sum over all 2m-tuples of permutations,
  normalized by 1/n!.  Exponential cost; used as the oracle.
* ``hyperdet_reduced``: the last two directions are absorbed into classical
  n x n determinants, giving (n!)^(2m-2) signed determinants.  Production path.
* ``hyperdet_recursive``: single alternating sum over the next-to-last
  direction of "hyperdeterminants" of index-dependent families.  Kept for
  cross-validation only.

Arrays hold either exact rationals (``Fraction``, object dtype) or float64.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .errors import CapExceeded, IndexOutOfRange, ShapeMismatch
from .scalars import FLOAT, RATIONAL, is_exact, parse_scalar, serialize_scalar
from .symfun import exact_det

#: Default cap on the number of inner classical determinants.
DET_BUDGET = 10**7
#: Default cap on the number of permutation tuples of the naive oracle.
NAIVE_BUDGET = 50_000


class Permutation(NamedTuple):
    mapping: tuple[int, ...]
    sign: int


def _sign(p: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(p)
    for i in range(len(p)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = p[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@lru_cache(maxsize=None)
def permutations(n: int) -> tuple[Permutation, ...]:
    """All permutations of range(n) in lexicographic order with their signs."""
    return tuple(Permutation(p, _sign(p)) for p in itertools.permutations(range(n)))


@lru_cache(maxsize=None)
def _perm_arrays(n: int):
    perms = permutations(n)
    maps = np.array([p.mapping for p in perms], dtype=np.intp).reshape(len(perms), n)
    signs = np.array([p.sign for p in perms], dtype=np.int64)
    return maps, signs


def _tuple_index(n: int, k: int):
    """Index maps (T, k, n) and signs (T,) of all k-tuples of permutations.

    Tuples are in lexicographic order of permutation indices, so the first
    permutation is the slowest-varying one.
    """
    maps, signs = _perm_arrays(n)
    count = len(signs)
    if k == 0:
        return np.zeros((1, 0, n), dtype=np.intp), np.ones(1, dtype=np.int64)
    grid = np.indices((count,) * k).reshape(k, -1).T
    return maps[grid], np.prod(signs[grid], axis=1)


class HyperArray:
    """Immutable dense cubical array of even order over a scalar backend."""

    __slots__ = ("_values", "_backend")

    def __init__(self, values):
        arr = np.asarray(values, dtype=object if _has_exact(values) else None)
        if arr.ndim == 0:
            raise ShapeMismatch("a hyperarray needs at least two directions")
        if arr.ndim % 2:
            raise ShapeMismatch(f"odd order {arr.ndim}: the hyperdeterminant vanishes identically")
        side = arr.shape[0]
        if side < 1 or any(s != side for s in arr.shape):
            raise ShapeMismatch(f"array must be cubical, got shape {arr.shape}")
        if arr.dtype == object:
            flat = [parse_scalar(v) if isinstance(v, str) else v for v in arr.ravel()]
            if all(is_exact(v) for v in flat):
                arr = np.array([Fraction(v) for v in flat], dtype=object).reshape(arr.shape)
                backend = RATIONAL
            else:
                arr = np.array([float(v) for v in flat], dtype=float).reshape(arr.shape)
                backend = FLOAT
        else:
            arr = np.array(arr, dtype=float)
            backend = FLOAT
        arr.flags.writeable = False
        self._values = arr
        self._backend = backend

    @classmethod
    def from_flat(cls, order: int, side: int, values: Sequence, backend: str | None = None):
        values = list(values)
        if len(values) != side**order:
            raise ShapeMismatch(f"expected {side ** order} entries, got {len(values)}")
        parsed = [parse_scalar(v, backend) for v in values]
        dtype = object if all(is_exact(v) for v in parsed) else float
        return cls(np.array(parsed, dtype=dtype).reshape((side,) * order))

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def order(self) -> int:
        return self._values.ndim

    @property
    def side(self) -> int:
        return self._values.shape[0]

    @property
    def backend(self) -> str:
        return self._backend

    def __getitem__(self, idx):
        return self._values[idx]

    def __eq__(self, other):
        if not isinstance(other, HyperArray):
            return NotImplemented
        return (
            self.backend == other.backend
            and self._values.shape == other._values.shape
            and bool(np.all(self._values == other._values))
        )

    def __repr__(self):
        return f"HyperArray(order={self.order}, side={self.side}, backend={self.backend!r})"

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "side": self.side,
            "values": [serialize_scalar(v) for v in self._values.ravel()],
        }

    @classmethod
    def from_json(cls, data: dict, backend: str | None = None) -> "HyperArray":
        try:
            return cls.from_flat(int(data["order"]), int(data["side"]), data["values"], backend)
        except KeyError as exc:
            raise ShapeMismatch(f"missing field {exc} in array JSON") from None


def _has_exact(values) -> bool:
    if isinstance(values, np.ndarray):
        return values.dtype == object
    return any(is_exact(v) or isinstance(v, str) for v in np.asarray(values, dtype=object).ravel())


def work_estimate(order: int, side: int) -> dict:
    f = math.factorial(side)
    return {"naive_terms": f**order, "reduced_determinants": f ** (order - 2)}


def _check_budget(required: int, budget: int, what: str):
    if required > budget:
        raise CapExceeded(f"{what}: {required} terms required, budget is {budget}", required, budget)


def cayley_sum(values, normalize: bool = True):
    """Literal Cayley sum over one permutation per direction, any order.

    Works for odd orders too, which is how the vanishing of odd-order
    hyperdeterminants is checked.
    """
    arr = np.asarray(values, dtype=object if _has_exact(values) else float)
    order, n = arr.ndim, arr.shape[0]
    maps, signs = _tuple_index(n, order)
    gathered = arr[tuple(maps[:, k, :] for k in range(order))]  # (T, n)
    if arr.dtype == object:
        terms = [int(s) * math.prod(row) for s, row in zip(signs, gathered)]
        total = sum(terms, Fraction(0))
        return total / math.factorial(n) if normalize else total
    total = math.fsum((signs * np.prod(gathered, axis=1)).tolist())
    return total / math.factorial(n) if normalize else total


def hyperdet_naive(A: HyperArray, budget: int = NAIVE_BUDGET):
    """Oracle: (1/n!) sum over (n!)^(2m) permutation tuples."""
    _check_budget(math.factorial(A.side) ** A.order, budget, "naive hyperdeterminant")
    return cayley_sum(A.values)


def _inner_matrices(arr: np.ndarray, maps: np.ndarray) -> np.ndarray:
    # maps: (T, 2m-2, n); result[t, i, j] = arr[maps[t,0,i], ..., maps[t,-1,i], i, j]
    n = arr.shape[0]
    idx = tuple(maps[:, k, :, None] for k in range(maps.shape[1]))
    rows = np.arange(n)[None, :, None]
    cols = np.arange(n)[None, None, :]
    return arr[idx + (rows, cols)]


def _reduced_chunk(arr: np.ndarray, first: int | None, exact: bool):
    n, order = arr.shape[0], arr.ndim
    pmaps, psigns = _perm_arrays(n)
    if first is None:
        mats = arr[None, ...]
        signs = np.ones(1, dtype=np.int64)
    else:
        maps, signs = _tuple_index(n, order - 3)
        count = maps.shape[0]
        lead = np.broadcast_to(pmaps[first], (count, 1, n))
        maps = np.concatenate([lead, maps], axis=1)
        signs = signs * psigns[first]
        mats = _inner_matrices(arr, maps)
    if exact:
        return sum((int(s) * exact_det(m.tolist()) for s, m in zip(signs, mats)), Fraction(0))
    dets = np.linalg.det(mats.astype(float))
    return math.fsum((signs * dets).tolist())


def hyperdet_reduced(A: HyperArray, budget: int = DET_BUDGET, workers: int = 1):
    """Det(A) as an alternating sum of (n!)^(2m-2) classical determinants.

    Work is split into fixed chunks by the first permutation, independent of
    ``workers``; chunk partials are combined in chunk order.
    """
    n, order = A.side, A.order
    _check_budget(math.factorial(n) ** (order - 2), budget, "reduced hyperdeterminant")
    exact = A.backend == RATIONAL
    arr = A.values
    chunks = [None] if order == 2 else list(range(math.factorial(n)))
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(lambda c: _reduced_chunk(arr, c, exact), chunks))
    else:
        partials = [_reduced_chunk(arr, c, exact) for c in chunks]
    if exact:
        return sum(partials, Fraction(0))
    return math.fsum(partials)


def hyperdet(A: HyperArray, budget: int = DET_BUDGET, workers: int = 1):
    """Hyperdeterminant via the determinant-reduced expansion."""
    if A.side == 1:
        return A.values.ravel()[0]
    return hyperdet_reduced(A, budget=budget, workers=workers)


def _family_sums(A: HyperArray) -> list:
    """For each sigma: signed sum over the first 2m-2 directions of
    prod_j A(s_1(j), ..., s_{2m-2}(j), sigma(j), j), without any 1/n!."""
    arr, n, order = A.values, A.side, A.order
    exact = A.backend == RATIONAL
    maps, signs = _tuple_index(n, order - 2)
    out = []
    for perm in permutations(n):
        idx = tuple(maps[:, k, :] for k in range(order - 2))
        last = (np.broadcast_to(np.array(perm.mapping), (maps.shape[0], n)), np.broadcast_to(np.arange(n), (maps.shape[0], n)))
        gathered = arr[idx + last]
        if exact:
            out.append(sum((int(s) * math.prod(r) for s, r in zip(signs, gathered)), Fraction(0)))
        else:
            out.append(math.fsum((signs * np.prod(gathered, axis=1)).tolist()))
    return out


def hyperdet_recursive(A: HyperArray, budget: int = NAIVE_BUDGET):
    """Det(A) = n! * sum_sigma sgn(sigma) * Det(B_sigma), cross-validation path.

    Here Det(B_sigma) is Cayley's (1/n!)-normalized sum applied to the
    family of order-(2m-2) slices B_{sigma(j), j} that vary with the product
    index j.  With that convention the leading n! is the consistent one
    (checked against ``hyperdet_naive``); pairing 1/n! with the normalized
    inner sums is off by a factor (n!)^2.
    """
    n = A.side
    f = math.factorial(n)
    _check_budget(f ** (A.order - 1), budget, "recursive hyperdeterminant")
    fam = _family_sums(A)
    signs = [p.sign for p in permutations(n)]
    if A.backend == RATIONAL:
        return f * sum((s * Fraction(v, f) for s, v in zip(signs, fam)), Fraction(0))
    return f * math.fsum(s * v / f for s, v in zip(signs, fam))


def expand_2222(A: HyperArray):
    """Four signed 2x2 determinants of an order-4, side-2 array and their sum.

    Returns ``(dets, total)`` with total = d1 - d2 - d3 + d4.
    """
    if A.order != 4 or A.side != 2:
        raise ShapeMismatch("expand_2222 needs an order-4 array of side 2")
    a = A.values

    def det2(p, q):
        # rows indexed by (r1, r2, r3) triples p and q, columns by r4
        return a[p + (0,)] * a[q + (1,)] - a[p + (1,)] * a[q + (0,)]

    dets = (
        det2((0, 0, 0), (1, 1, 1)),
        det2((0, 1, 0), (1, 0, 1)),
        det2((1, 0, 0), (0, 1, 1)),
        det2((1, 1, 0), (0, 0, 1)),
    )
    total = dets[0] - dets[1] - dets[2] + dets[3]
    return dets, total


def _check_slice(A: HyperArray, axis: int, index: int):
    if not 0 <= axis < A.order:
        raise IndexOutOfRange(f"axis {axis} outside 0..{A.order - 1}")
    if not 0 <= index < A.side:
        raise IndexOutOfRange(f"slice {index} outside 0..{A.side - 1}")


def slice_scale(A: HyperArray, axis: int, index: int, factor) -> HyperArray:
    """Copy of A with the slice ``A[..., index, ...]`` along ``axis`` scaled.

    Axes and slices are 0-based.  Det is linear in each slice (every term of
    the Cayley sum picks exactly one entry of it), so Det scales by factor.
    """
    _check_slice(A, axis, index)
    if factor == 0:
        raise ValueError("factor must be nonzero")
    vals = A.values.copy()
    sl = [slice(None)] * A.order
    sl[axis] = index
    if A.backend == RATIONAL:
        factor = Fraction(factor)
        vals[tuple(sl)] = vals[tuple(sl)] * factor
    else:
        vals[tuple(sl)] = vals[tuple(sl)] * float(factor)
    return HyperArray(vals)


def swap_slices(A: HyperArray, axis: int, i: int, j: int) -> HyperArray:
    _check_slice(A, axis, i)
    _check_slice(A, axis, j)
    perm = list(range(A.side))
    perm[i], perm[j] = perm[j], perm[i]
    return HyperArray(np.take(A.values, perm, axis=axis))


def replace_slice(A: HyperArray, axis: int, index: int, new_slice) -> HyperArray:
    _check_slice(A, axis, index)
    vals = A.values.copy()
    sl = [slice(None)] * A.order
    sl[axis] = index
    vals[tuple(sl)] = np.asarray(new_slice, dtype=vals.dtype)
    return HyperArray(vals)
