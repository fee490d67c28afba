"""Magnitude buckets ``T = S + M1 + M2 + L`` and the handlers for the three large ones."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .damping import check_epsilon
from .errors import DimensionError
from .matcore import IndexSet, SubmatrixMask, as_matrix

STAGES = ("L", "M1", "M2", "S-cols", "S-rows", "diag")


@dataclass(frozen=True)
class BucketThresholds:
    s_thr: float
    m_thr: float
    l_thr: float

    @classmethod
    def for_size(cls, n: int, epsilon: float) -> "BucketThresholds":
        epsilon = check_epsilon(epsilon)
        log_inv = math.log(1.0 / epsilon)
        return cls(
            s_thr=math.sqrt(n / log_inv),
            m_thr=math.sqrt(n / (epsilon * log_inv ** 2)),
            l_thr=5.0 * math.sqrt(n / epsilon),
        )


@dataclass(frozen=True)
class BucketDecomposition:
    S: np.ndarray
    M1: np.ndarray
    M2: np.ndarray
    L: np.ndarray
    thresholds: BucketThresholds


@dataclass(frozen=True)
class StageMask:
    mask: SubmatrixMask
    stage: str
    ok: bool
    detail: dict = field(default_factory=dict)
    reason: str = ""
    part: str = "upper"

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "part": self.part,
            "ok": self.ok,
            "reason": self.reason,
            "rows": list(self.mask.rows.indices),
            "cols": list(self.mask.cols.indices),
            "detail": self.detail,
        }


def decompose(T, epsilon: float) -> BucketDecomposition:
    """Split ``T`` by absolute value; each bucket interval is closed on the right."""
    T = as_matrix(T)
    if T.shape[0] != T.shape[1]:
        raise DimensionError(f"expected a square matrix, got {T.shape}")
    thr = BucketThresholds.for_size(T.shape[0], epsilon)
    a = np.abs(T)
    in_s = a <= thr.s_thr
    in_m1 = (a > thr.s_thr) & (a <= thr.m_thr)
    in_m2 = (a > thr.m_thr) & (a <= thr.l_thr)
    in_l = a > thr.l_thr
    pick = lambda sel: np.where(sel, T, 0.0)  # noqa: E731
    return BucketDecomposition(pick(in_s), pick(in_m1), pick(in_m2), pick(in_l), thr)


def _mask_of_entries(rows, cols, shape) -> SubmatrixMask:
    return SubmatrixMask(IndexSet.of(rows.tolist(), shape[0]),
                         IndexSet.of(cols.tolist(), shape[1]))


def handle_L(L, epsilon: float) -> StageMask:
    """Cover every large entry; fine as long as there are at most ``floor(eps n)`` of them."""
    L = as_matrix(L)
    epsilon = check_epsilon(epsilon)
    rows, cols = np.nonzero(L)
    allowed = math.floor(epsilon * L.shape[0])
    ok = rows.size <= allowed
    return StageMask(
        mask=_mask_of_entries(rows, cols, L.shape),
        stage="L",
        ok=ok,
        detail={"nonzeros": int(rows.size), "allowed": allowed},
        reason="" if ok else f"{rows.size} large entries exceed budget {allowed}",
    )


def degree_threshold(epsilon: float, deg_mult: float) -> int:
    return math.ceil(deg_mult * max(1.0, math.log(1.0 / epsilon)))


def handle_M1(M1, epsilon: float, deg_mult: float = 10.0) -> StageMask:
    """Cover the entries sitting in rows or columns with more than ``d`` nonzeros.

    After they are zeroed every row and column keeps at most ``d`` entries,
    so the Schur test bounds the remainder by ``d * m_thr``.
    """
    M1 = as_matrix(M1)
    epsilon = check_epsilon(epsilon)
    d = degree_threshold(epsilon, deg_mult)
    nz = M1 != 0
    heavy_rows = nz.sum(axis=1) > d
    heavy_cols = nz.sum(axis=0) > d
    offending = nz & (heavy_rows[:, None] | heavy_cols[None, :])
    rows, cols = np.nonzero(offending)
    allowed = math.floor(epsilon * M1.shape[0])
    ok = rows.size <= allowed
    return StageMask(
        mask=_mask_of_entries(rows, cols, M1.shape),
        stage="M1",
        ok=ok,
        detail={"degree_threshold": d, "offending": int(rows.size),
                "allowed": allowed},
        reason="" if ok else f"{rows.size} offending entries exceed budget {allowed}",
    )


def handle_M2(M2, epsilon: float, C_budget: float = 4.0) -> StageMask:
    """Rows ``R2 | R1'`` and columns ``C2 | C1'`` of the medium-high bucket.

    ``R1``/``R2``: rows with exactly one / at least two nonzeros.
    ``C2(R1)``: columns holding at least two nonzeros from rows in ``R1``.
    ``R1'``: rows of ``R1`` whose single nonzero lies in ``C2(R1)``.
    The column sets are the same construction on the transpose.
    """
    M2 = as_matrix(M2)
    epsilon = check_epsilon(epsilon)
    nz = M2 != 0

    def side(nzm):
        deg = nzm.sum(axis=1)
        r1 = deg == 1
        r2 = deg >= 2
        c2_of_r1 = nzm[r1].sum(axis=0) >= 2
        r1_prime = r1 & (nzm & c2_of_r1[None, :]).any(axis=1)
        return r2, r1_prime, c2_of_r1

    r2, r1p, c2r1 = side(nz)
    c2, c1p, r2c1 = side(nz.T)
    rows = IndexSet.from_bool(r2 | r1p)
    cols = IndexSet.from_bool(c2 | c1p)
    allowed = math.ceil(C_budget * epsilon * M2.shape[0])
    ok = len(rows) <= allowed and len(cols) <= allowed
    return StageMask(
        mask=SubmatrixMask(rows, cols),
        stage="M2",
        ok=ok,
        detail={"R2": int(r2.sum()), "R1_prime": int(r1p.sum()),
                "C2": int(c2.sum()), "C1_prime": int(c1p.sum()),
                "C2_of_R1": int(c2r1.sum()), "R2_of_C1": int(r2c1.sum()),
                "allowed": allowed},
        reason="" if ok else (f"mask {len(rows)}x{len(cols)} exceeds budget {allowed}"),
    )
