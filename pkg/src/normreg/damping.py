"""Quantile-ladder damping weights and 2->inf regularization of the small bucket.

A plan is built from a pool of reference samples (squared entries taken from
a disjoint region of the matrix). Each row is then split into value blocks
delimited by the ladder; a block that holds more entries than its quantile
level predicts gets all of its entries damped by a common factor. Columns
whose product of weights over all rows falls below ``e**-2`` are dropped.

Block membership uses intervals that are open on the left and closed on the
right (block 0 is closed at 0). Atoms in the sample distribution, such as
the zeros of a sparse bucket, then fall into the lowest block that reaches
them instead of the top one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ContractError, ParameterError
from .matcore import IndexSet, as_matrix

DEFAULT_L_DAMP = 64.0
COLUMN_CUTOFF = math.exp(-2.0)


def check_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not 0.0 < epsilon <= 0.5:
        raise ParameterError(f"epsilon must lie in (0, 1/2], got {epsilon}")
    return epsilon


@dataclass(frozen=True)
class DampingPlan:
    """Quantile ladder ``qhat[0..t+1]`` and the block start indices into it."""

    K: float
    t: int
    qhat: tuple[float, ...]
    blocks: tuple[int, ...]
    L_damp: float
    n_ref: int

    @property
    def n_blocks(self) -> int:
        return len(self.blocks) - 1

    def lower_edges(self) -> np.ndarray:
        """``qhat[k_i]`` for each block i."""
        return np.asarray([self.qhat[k] for k in self.blocks[:-1]])

    def upper_edges(self) -> np.ndarray:
        """``qhat[k_{i+1}]`` for each block i."""
        return np.asarray([self.qhat[k] for k in self.blocks[1:]])

    def block_caps(self, row_len: int) -> np.ndarray:
        """``L * 2**-k_i * row_len``: the count a block may hold undamped."""
        ks = np.asarray(self.blocks[:-1], dtype=np.float64)
        return self.L_damp * np.exp2(-ks) * row_len


class RowWeights(NamedTuple):
    W: np.ndarray
    nu: np.ndarray
    block_of: np.ndarray


def build_quantile_ladder(samples, epsilon: float, n_ref: int,
                          L_damp: float = DEFAULT_L_DAMP) -> DampingPlan:
    """Empirical tail quantiles and the block recurrence over them.

    Parameters
    ----------
    samples : array_like
        Non-negative reference values (squared entries).
    epsilon : float
        Budget parameter in (0, 1/2]; sets ``K = 1/ln(1/epsilon)``.
    n_ref : int
        Reference dimension; the ladder height is
        ``t = ceil(log2(K * n_ref)) + 1`` and the top rung is ``2 K n_ref``.
    L_damp : float
        Damping constant, at least 1.

    Returns
    -------
    DampingPlan
        ``qhat[k]`` for ``k`` in ``1..t`` is the ``ceil(m 2**-k)``-th largest
        sample, i.e. the largest ``r`` whose empirical tail mass
        ``P[[r, inf)]`` is at least ``2**-k``.
    """
    epsilon = check_epsilon(epsilon)
    y = np.asarray(samples, dtype=np.float64).ravel()
    if y.size == 0:
        raise ParameterError("need at least one sample")
    if np.any(y < 0) or not np.all(np.isfinite(y)):
        raise ParameterError("samples must be finite and non-negative")
    if n_ref < 1:
        raise ParameterError(f"n_ref must be >= 1, got {n_ref}")
    if L_damp < 1:
        raise ParameterError(f"L_damp must be >= 1, got {L_damp}")

    K = 1.0 / math.log(1.0 / epsilon)
    t = max(1, math.ceil(math.log2(K * n_ref)) + 1)
    m = y.size
    desc = np.sort(y)[::-1]
    qhat = [0.0]
    for k in range(1, t + 1):
        s = math.ceil(m * 2.0 ** -k)
        qhat.append(float(desc[s - 1]) if s <= m else 0.0)
    qhat.append(2.0 * K * n_ref)

    blocks = [0]
    while blocks[-1] < t + 1:
        ki = blocks[-1]
        below = [j for j in range(ki + 1, t + 2) if qhat[j] < 2.0 * qhat[ki]]
        blocks.append(max(ki + 1, max(below, default=-1)))
    return DampingPlan(K=K, t=t, qhat=tuple(qhat), blocks=tuple(blocks),
                       L_damp=float(L_damp), n_ref=int(n_ref))


def assign_blocks(X, plan: DampingPlan) -> np.ndarray:
    """Block index of every value; values above the top rung stay in the top block."""
    inner = plan.lower_edges()[1:]
    return np.searchsorted(inner, np.asarray(X, dtype=np.float64), side="left")


def _block_weights(nu: np.ndarray, caps: np.ndarray) -> np.ndarray:
    # cap/nu is shrunk by (nu + 2) units of 2**-52 so that the block bound
    # sum(W_j X_j) <= cap * qhat survives rounding of the sum (relative error
    # below nu * 2**-53 in any order) and of the product on the right. This
    # also damps, by a few ulps, a block whose count equals its cap.
    safe = np.maximum(nu, 1)
    shrink = 1.0 - (safe + 2.0) * 2.0 ** -52
    return np.minimum(1.0, caps / safe * shrink)


def damp_row(X, plan: DampingPlan) -> RowWeights:
    """Damping weights for one row of squared entries."""
    X = np.asarray(X, dtype=np.float64).ravel()
    if np.any(X < 0):
        raise ParameterError("row values must be non-negative")
    block_of = assign_blocks(X, plan)
    nu = np.bincount(block_of, minlength=plan.n_blocks)
    w = _block_weights(nu, plan.block_caps(X.size))
    return RowWeights(W=w[block_of], nu=nu, block_of=block_of)


def damp_rows(X: np.ndarray, plan: DampingPlan) -> np.ndarray:
    """Vectorized ``damp_row`` over the rows of a 2-D array; returns the weights."""
    X = np.asarray(X, dtype=np.float64)
    rows, length = X.shape
    nb = plan.n_blocks
    block_of = assign_blocks(X, plan)
    flat = (block_of + nb * np.arange(rows)[:, None]).ravel()
    nu = np.bincount(flat, minlength=rows * nb).reshape(rows, nb)
    w = _block_weights(nu, plan.block_caps(length)[None, :])
    return np.take_along_axis(w, block_of, axis=1)


class ColumnProducts(NamedTuple):
    V: np.ndarray
    J: IndexSet
    damped_row_sums: np.ndarray


def column_products(X: np.ndarray, samples, epsilon: float, n_ref: int,
                    L_damp: float = DEFAULT_L_DAMP) -> ColumnProducts:
    """Damp every row of ``X`` against a ladder built from ``samples``."""
    plan = build_quantile_ladder(samples, epsilon, n_ref, L_damp)
    W = damp_rows(X, plan)
    # a plain product of factors in [0, 1] never exceeds any single factor,
    # which keeps W[i, j] >= V[j] exact in floating point
    V = np.prod(W, axis=0)
    J = IndexSet.from_bool(V < COLUMN_CUTOFF)
    return ColumnProducts(V=V, J=J, damped_row_sums=np.sum(W * X, axis=1))


@dataclass(frozen=True)
class SmallColumnsDiagnostics:
    n_padded: int
    size_J0: int
    size_JN: int
    size_JNprime: int
    V_min: float
    V_max: float
    max_kept_row_sq: float
    max_damped_row: float
    bound_holds: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


class SmallColumnsResult(NamedTuple):
    J0: IndexSet
    diagnostics: SmallColumnsDiagnostics


def check_strict_upper(T: np.ndarray) -> None:
    if T.shape[0] != T.shape[1]:
        raise ContractError(f"expected a square matrix, got {T.shape}")
    if np.any(np.tril(T) != 0):
        raise ContractError("matrix is not strictly upper triangular")


def split_halves(T: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """The two h x h matrices (h = n/2, n even) that tile the strict upper triangle.

    ``N`` is the top-right block. ``Nprime`` row ``a`` (``a < h-1``) holds
    bottom-right row ``h+a`` in positions ``b > a`` and top-left row
    ``h-2-a`` in positions ``b <= a`` (read right to left); its last row is
    zero. Column ``b`` of ``N`` is column ``h+b`` of ``T``; column ``b`` of
    ``Nprime`` covers columns ``h+b`` and ``h-1-b``.
    """
    n = T.shape[0]
    h = n // 2
    N = T[:h, h:].copy()
    a = np.arange(h)[:, None]
    b = np.arange(h)[None, :]
    upper = (b > a) & (a < h - 1)
    lower = (b <= a) & (a < h - 1)
    rows = np.where(upper, a + h, np.where(lower, h - 2 - a, 0))
    cols = np.where(upper, b + h, np.where(lower, h - 1 - b, 0))
    Nprime = np.where(upper | lower, T[rows, cols], 0.0)
    return N, Nprime


def regularize_small_columns(T, epsilon: float,
                             L_damp: float = DEFAULT_L_DAMP) -> SmallColumnsResult:
    """Columns to drop so every row of the small bucket has O(sqrt(n)) l2 mass.

    Parameters
    ----------
    T : array_like, shape (n, n)
        Strictly upper triangular, entries bounded by ``sqrt(n/ln(1/eps))``.
    epsilon : float
    L_damp : float

    Returns
    -------
    SmallColumnsResult
        ``J0`` in original column indices and diagnostics, including the
        mechanically guaranteed bound
        ``max_i sum_{j not in J0} T_ij^2 <= e^2 * max damped row sum``.
    """
    epsilon = check_epsilon(epsilon)
    T = as_matrix(T)
    check_strict_upper(T)
    n = T.shape[0]
    if n % 2:
        T = np.pad(T, ((0, 1), (0, 1)))
    n2 = T.shape[0]
    h = n2 // 2
    N, Nprime = split_halves(T)
    X_N = N * N
    X_P = Nprime * Nprime

    res_N = column_products(X_N, X_P[: h - 1] if h > 1 else X_P, epsilon, n, L_damp)
    res_P = column_products(X_P, X_N, epsilon, n, L_damp)

    JN, JP = res_N.J.array(), res_P.J.array()
    J0 = set((h + JN).tolist()) | set((h + JP).tolist()) | set((h - 1 - JP).tolist())
    J0.discard(n)  # padding column
    J0 = IndexSet.of(J0, n)

    # per original row: the damped mass of its N part plus its N' part
    damped = np.zeros(n2)
    damped[:h] += res_N.damped_row_sums
    damped[: h - 1] += res_P.damped_row_sums[: h - 1][::-1]
    damped[h:] += res_P.damped_row_sums
    T_sq = T[:n, :n] ** 2
    T_sq[:, J0.array()] = 0.0
    kept = T_sq.sum(axis=1)
    max_kept = float(kept.max())
    max_damped = float(damped.max())
    V_all = np.concatenate([res_N.V, res_P.V])
    diag = SmallColumnsDiagnostics(
        n_padded=n2,
        size_J0=len(J0),
        size_JN=len(res_N.J),
        size_JNprime=len(res_P.J),
        V_min=float(V_all.min()),
        V_max=float(V_all.max()),
        max_kept_row_sq=max_kept,
        max_damped_row=max_damped,
        bound_holds=bool(np.all(kept[:n] <= math.e ** 2 * damped[:n] * (1 + 1e-12))),
    )
    return SmallColumnsResult(J0, diag)
