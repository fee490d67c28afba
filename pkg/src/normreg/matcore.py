"""Dense matrices, index sets, sub-matrix masks and norm estimators.

Matrices are plain ``numpy.ndarray`` objects of dtype float64; ``as_matrix``
is the single validation point. Index sets and masks are small immutable
value objects so that they compare, hash and serialize deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import CapacityError, DimensionError, ParameterError

DEFAULT_REL_TOL = 1e-9
DEFAULT_MAX_ITERS = 10_000
BRUTEFORCE_MAX_COLS = 20


def as_matrix(A) -> np.ndarray:
    """Return ``A`` as a finite 2-D float64 array (no copy when possible)."""
    M = np.asarray(A, dtype=np.float64)
    if M.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {M.shape}")
    if M.shape[0] < 1 or M.shape[1] < 1:
        raise DimensionError(f"matrix must be non-empty, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ParameterError("matrix entries must be finite")
    return M


@dataclass(frozen=True)
class IndexSet:
    """Strictly increasing 0-based indices into a dimension of size ``bound``."""

    indices: tuple[int, ...]
    bound: int

    def __post_init__(self):
        if self.bound < 0:
            raise DimensionError(f"negative bound {self.bound}")
        prev = -1
        for i in self.indices:
            if i <= prev:
                raise DimensionError("indices must be strictly increasing")
            prev = i
        if self.indices and self.indices[-1] >= self.bound:
            raise DimensionError(
                f"index {self.indices[-1]} out of range for bound {self.bound}")

    @classmethod
    def of(cls, indices: Iterable[int], bound: int) -> "IndexSet":
        """Build from any iterable of integers (sorted and de-duplicated)."""
        return cls(tuple(sorted({int(i) for i in indices})), int(bound))

    @classmethod
    def empty(cls, bound: int) -> "IndexSet":
        return cls((), int(bound))

    @classmethod
    def full(cls, bound: int) -> "IndexSet":
        return cls(tuple(range(int(bound))), int(bound))

    @classmethod
    def from_bool(cls, flags) -> "IndexSet":
        flags = np.asarray(flags, dtype=bool)
        return cls(tuple(int(i) for i in np.flatnonzero(flags)), flags.size)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, i) -> bool:
        return i in set(self.indices)

    def __or__(self, other: "IndexSet") -> "IndexSet":
        return self.union(other)

    def union(self, other: "IndexSet") -> "IndexSet":
        if other.bound != self.bound:
            raise DimensionError(f"bound mismatch {self.bound} vs {other.bound}")
        return IndexSet.of(set(self.indices) | set(other.indices), self.bound)

    def complement(self) -> "IndexSet":
        return IndexSet.from_bool(~self.mask())

    def map(self, fn, bound: int | None = None) -> "IndexSet":
        """Apply an index map ``fn`` and re-sort."""
        return IndexSet.of((fn(i) for i in self.indices),
                           self.bound if bound is None else bound)

    def array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.bound, dtype=bool)
        m[self.array()] = True
        return m


@dataclass(frozen=True)
class SubmatrixMask:
    """The block ``rows x cols`` that gets zeroed."""

    rows: IndexSet
    cols: IndexSet

    @classmethod
    def empty(cls, n_rows: int, n_cols: int) -> "SubmatrixMask":
        return cls(IndexSet.empty(n_rows), IndexSet.empty(n_cols))

    @classmethod
    def full(cls, n_rows: int, n_cols: int) -> "SubmatrixMask":
        return cls(IndexSet.full(n_rows), IndexSet.full(n_cols))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows.bound, self.cols.bound)

    def union(self, other: "SubmatrixMask") -> "SubmatrixMask":
        return SubmatrixMask(self.rows | other.rows, self.cols | other.cols)

    def is_empty(self) -> bool:
        return len(self.rows) == 0 or len(self.cols) == 0

    def to_dict(self) -> dict:
        return {
            "n_rows": self.rows.bound,
            "n_cols": self.cols.bound,
            "rows": list(self.rows.indices),
            "cols": list(self.cols.indices),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SubmatrixMask":
        return cls(IndexSet.of(d["rows"], d["n_rows"]),
                   IndexSet.of(d["cols"], d["n_cols"]))


def union_masks(masks: Iterable[SubmatrixMask], n_rows: int,
                n_cols: int) -> SubmatrixMask:
    out = SubmatrixMask.empty(n_rows, n_cols)
    for m in masks:
        out = out.union(m)
    return out


def restrict_columns(A, keep: IndexSet) -> np.ndarray:
    """Zero every column of ``A`` that is not in ``keep``."""
    A = as_matrix(A)
    if keep.bound != A.shape[1]:
        raise DimensionError(
            f"keep.bound={keep.bound} does not match {A.shape[1]} columns")
    out = A.copy()
    out[:, ~keep.mask()] = 0.0
    return out


def zero_columns(A, cols: IndexSet) -> np.ndarray:
    A = as_matrix(A)
    if cols.bound != A.shape[1]:
        raise DimensionError(
            f"cols.bound={cols.bound} does not match {A.shape[1]} columns")
    out = A.copy()
    out[:, cols.array()] = 0.0
    return out


def zero_rows(A, rows: IndexSet) -> np.ndarray:
    A = as_matrix(A)
    if rows.bound != A.shape[0]:
        raise DimensionError(
            f"rows.bound={rows.bound} does not match {A.shape[0]} rows")
    out = A.copy()
    out[rows.array(), :] = 0.0
    return out


def zero_block(A, mask: SubmatrixMask) -> np.ndarray:
    """Return ``A`` with the entries in ``mask.rows x mask.cols`` set to zero."""
    A = as_matrix(A)
    if mask.shape != A.shape:
        raise DimensionError(f"mask shape {mask.shape} does not match {A.shape}")
    out = A.copy()
    if not mask.is_empty():
        out[np.ix_(mask.rows.array(), mask.cols.array())] = 0.0
    return out


def norm_2_to_inf(A) -> float:
    """Largest Euclidean norm of a row."""
    A = as_matrix(A)
    return float(np.sqrt(np.max(np.einsum("ij,ij->i", A, A))))


def schur_bound(A) -> float:
    """Schur test value ``sqrt(max row l1 * max column l1)``; never below the operator norm."""
    A = np.abs(as_matrix(A))
    return float(np.sqrt(A.sum(axis=1).max() * A.sum(axis=0).max()))


def frobenius_norm(A) -> float:
    return float(np.linalg.norm(as_matrix(A)))


class NormEstimate(NamedTuple):
    value: float
    converged: bool


class PowerResult(NamedTuple):
    value: float
    vector: np.ndarray
    converged: bool
    iterations: int


def power_iteration(A: np.ndarray, start: np.ndarray, rel_tol: float,
                    max_iters: int) -> PowerResult:
    """Power iteration on ``A.T @ A`` from a given unit-norm start vector.

    ``value`` is ``||A x||`` for the final unit iterate ``x``, so it is always
    a lower bound on the largest singular value. Successive values are
    non-decreasing; convergence means the last step changed the value by
    less than ``rel_tol`` relatively.
    """
    x = start
    value = 0.0
    for it in range(1, max_iters + 1):
        y = A @ x
        new = float(np.sqrt(y @ y))
        z = A.T @ y
        nz = float(np.sqrt(z @ z))
        if nz == 0.0:
            # x lies in the null space; nothing more to learn from this start
            return PowerResult(max(new, value), x, True, it)
        if new > value:
            done = new - value <= rel_tol * new
            value = new
        else:
            done = True
        x = z / nz
        if done:
            return PowerResult(value, x, True, it)
    return PowerResult(value, x, False, max_iters)


def _power_with_restart(A: np.ndarray, rel_tol: float,
                        max_iters: int) -> PowerResult:
    m = A.shape[1]
    start = np.full(m, 1.0 / np.sqrt(m))
    res = power_iteration(A, start, rel_tol, max_iters)
    # sigma_max >= every column norm; landing below one means the all-ones
    # start was (numerically) orthogonal to the top singular direction
    col_sq = np.einsum("ij,ij->j", A, A)
    j_star = int(np.argmax(col_sq))
    floor = float(np.sqrt(col_sq[j_star]))
    if res.value < floor * (1.0 - rel_tol):
        start = np.ones(m)
        start[j_star] += np.sqrt(m)
        start /= np.linalg.norm(start)
        again = power_iteration(A, start, rel_tol, max_iters)
        if again.value >= res.value:
            res = again
    return res


def op_norm_estimate(A, rel_tol: float = DEFAULT_REL_TOL,
                     max_iters: int = DEFAULT_MAX_ITERS) -> NormEstimate:
    """Deterministic power-iteration estimate of the operator norm.

    Parameters
    ----------
    A : array_like, shape (k, m)
    rel_tol : float
        Stop once successive Rayleigh-quotient values change by less than
        ``rel_tol`` relatively.
    max_iters : int
        Hard cap on Gram-operator applications.

    Returns
    -------
    NormEstimate
        ``(value, converged)``. ``value`` is a lower bound on the largest
        singular value. The start vector is the normalized all-ones vector;
        if the result stalls below the largest column norm the iteration is
        restarted once from all-ones plus a fixed basis-vector bump.
    """
    if not rel_tol > 0:
        raise ParameterError(f"rel_tol must be positive, got {rel_tol}")
    A = as_matrix(A)
    if not np.any(A):
        return NormEstimate(0.0, True)
    res = _power_with_restart(A, rel_tol, max_iters)
    return NormEstimate(res.value, res.converged)


def top_right_singular(A, rel_tol: float = DEFAULT_REL_TOL,
                       max_iters: int = DEFAULT_MAX_ITERS) -> PowerResult:
    """Same iteration as ``op_norm_estimate`` but also returns the direction."""
    A = as_matrix(A)
    if not np.any(A):
        m = A.shape[1]
        return PowerResult(0.0, np.full(m, 1.0 / np.sqrt(m)), True, 0)
    return _power_with_restart(A, rel_tol, max_iters)


def sign_vectors(m: int, chunk: int = 1 << 14):
    """Yield blocks of sign vectors in {+-1}^m with the first coordinate fixed to +1."""
    total = 1 << (m - 1)
    bits = np.arange(m - 1, dtype=np.int64)
    for lo in range(0, total, chunk):
        codes = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
        signs = np.ones((codes.size, m))
        if m > 1:
            signs[:, 1:] = 1.0 - 2.0 * ((codes[:, None] >> bits) & 1)
        yield signs


def norm_inf_to_2_bruteforce(A) -> float:
    """Exact ``max ||A x||_2`` over sign vectors by enumeration (at most 20 columns)."""
    A = as_matrix(A)
    m = A.shape[1]
    if m > BRUTEFORCE_MAX_COLS:
        raise CapacityError(
            f"{m} columns exceeds the enumeration limit of {BRUTEFORCE_MAX_COLS}")
    best = 0.0
    for signs in sign_vectors(m):
        Y = signs @ A.T
        best = max(best, float(np.max(np.einsum("ij,ij->i", Y, Y))))
    return float(np.sqrt(best))


def inf_to_2_lower_bound(A, direction: np.ndarray | None = None) -> float:
    """Cheap lower bound on the infinity-to-2 norm.

    Uses the Frobenius norm (the root-mean-square of ``||A x||`` over random
    signs) and, when given, the sign pattern of ``direction``.
    """
    A = as_matrix(A)
    lb = frobenius_norm(A)
    if direction is not None:
        s = np.where(direction >= 0, 1.0, -1.0)
        lb = max(lb, float(np.linalg.norm(A @ s)))
    return lb
