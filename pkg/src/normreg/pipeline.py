"""End-to-end regularization: buckets, small-bucket columns and rows, mask union.

Everything is reduced to strictly upper-triangular runs. The row side of
the small bucket reuses the column code through the anti-transpose
``(i, j) -> (n-1-j, n-1-i)``, which maps strict upper to strict upper. An
i.i.d. matrix is split into its strict upper part, the transpose of its
strict lower part, and the diagonal; a symmetric matrix needs only the
upper run plus a symmetric mask.
"""

from __future__ import annotations

import json
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field, replace

import numpy as np

from .buckets import (StageMask, decompose, handle_L, handle_M1, handle_M2)
from .damping import (DEFAULT_L_DAMP, check_epsilon, check_strict_upper,
                      regularize_small_columns)
from .errors import ContractError, DimensionError, ParameterError
from .gpselect import GPConfig, mean_grid_select
from .matcore import (DEFAULT_REL_TOL, IndexSet, SubmatrixMask, as_matrix,
                      norm_2_to_inf, op_norm_estimate, restrict_columns,
                      union_masks, zero_block, zero_columns, zero_rows)

MODELS = ("upper", "iid", "symmetric")


@dataclass(frozen=True)
class RegConfig:
    epsilon: float = 0.1
    L_damp: float = DEFAULT_L_DAMP
    deg_mult: float = 10.0
    C_budget: float = 4.0
    S_budget: float = 2.0
    gp: GPConfig = field(default_factory=GPConfig)
    norm_tol: float = DEFAULT_REL_TOL

    def __post_init__(self):
        check_epsilon(self.epsilon)
        for name in ("L_damp", "deg_mult", "C_budget", "S_budget", "norm_tol"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive")

    @property
    def C_total(self) -> float:
        """Per-side budget constant: small bucket plus the L, M1 and M2 handlers."""
        return self.S_budget + 1.0 + 1.0 + self.C_budget

    def side_budget(self, n: int) -> int:
        return math.ceil(self.C_total * self.epsilon * n)


@dataclass
class RegularizationReport:
    model: str
    n: int
    epsilon: float
    stage_masks: list[StageMask]
    final_mask: SubmatrixMask
    norm_before: float
    norm_after: float
    norm_2inf_small_after: float
    empirical_constant: float
    ok: bool
    timings: dict[str, float] = field(default_factory=dict)

    def to_dict(self, include_timings: bool = True) -> dict:
        d = {
            "model": self.model,
            "n": self.n,
            "epsilon": self.epsilon,
            "ok": self.ok,
            "norm_before": self.norm_before,
            "norm_after": self.norm_after,
            "norm_2inf_small_after": self.norm_2inf_small_after,
            "empirical_constant": self.empirical_constant,
            "final_mask": self.final_mask.to_dict(),
            "stage_masks": [s.to_dict() for s in self.stage_masks],
        }
        if include_timings:
            d["timings"] = dict(self.timings)
        return d

    def to_json(self, include_timings: bool = True) -> str:
        return json.dumps(self.to_dict(include_timings), indent=2) + "\n"


class _Timer:
    """Accumulates wall-clock seconds per named stage."""

    def __init__(self):
        self.timings: dict[str, float] = {}

    @contextmanager
    def __call__(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = self.timings.get(name, 0.0) + time.perf_counter() - t0


def _small_columns(S: np.ndarray, cfg: RegConfig):
    """Column set ``J* = J0 | J1`` for the small bucket, plus diagnostics."""
    n = S.shape[0]
    J0, diag = regularize_small_columns(S, cfg.epsilon, cfg.L_damp)
    grid = mean_grid_select(S, J0, cfg.epsilon, cfg.gp)
    J_star = J0 | grid.J1
    allowed = math.ceil(cfg.S_budget * cfg.epsilon * n)
    ok = len(J_star) <= allowed
    detail = {
        "J0": len(J0),
        "J1": len(grid.J1),
        "mu_star": grid.mu_star,
        "grid_index": grid.j_star,
        "norm_small_restricted": grid.score,
        "norm_2inf_small_J0c": math.sqrt(diag.max_kept_row_sq),
        "damping_bound_holds": diag.bound_holds,
        "V_min": diag.V_min,
    }
    return J_star, ok, detail, allowed


def regularize_upper_parts(T, cfg: RegConfig, part: str = "upper",
                           timer: _Timer | None = None):
    """Stage masks for one strictly upper-triangular matrix.

    Returns ``(stage_masks, small_2inf)`` where ``small_2inf`` is the
    2->inf norm of the small bucket with ``J0`` removed.
    """
    timer = timer or _Timer()
    T = as_matrix(T)
    check_strict_upper(T)
    n = T.shape[0]
    eps = cfg.epsilon
    with timer(f"{part}/decompose"):
        dec = decompose(T, eps)
    with timer(f"{part}/L"):
        st_L = replace(handle_L(dec.L, eps), part=part)
    with timer(f"{part}/M1"):
        st_M1 = replace(handle_M1(dec.M1, eps, cfg.deg_mult), part=part)
    with timer(f"{part}/M2"):
        st_M2 = replace(handle_M2(dec.M2, eps, cfg.C_budget), part=part)

    with timer(f"{part}/S-cols"):
        J_star, ok_c, det_c, allowed = _small_columns(dec.S, cfg)
    st_cols = StageMask(SubmatrixMask(IndexSet.empty(n), J_star), "S-cols",
                        ok_c, det_c,
                        "" if ok_c else f"{len(J_star)} columns exceed budget {allowed}",
                        part)

    with timer(f"{part}/S-rows"):
        S_ref = dec.S[::-1, ::-1].T
        J_ref, ok_r, det_r, _ = _small_columns(S_ref, cfg)
    K_star = J_ref.map(lambda c: n - 1 - c)
    st_rows = StageMask(SubmatrixMask(K_star, IndexSet.empty(n)), "S-rows",
                        ok_r, det_r,
                        "" if ok_r else f"{len(K_star)} rows exceed budget {allowed}",
                        part)
    small_2inf = det_c["norm_2inf_small_J0c"]
    return [st_L, st_M1, st_M2, st_cols, st_rows], small_2inf


def _diag_stage(A: np.ndarray, cfg: RegConfig) -> StageMask:
    n = A.shape[0]
    l_thr = 5.0 * math.sqrt(n / cfg.epsilon)
    big = IndexSet.from_bool(np.abs(np.diag(A)) > l_thr)
    allowed = math.floor(cfg.epsilon * n)
    ok = len(big) <= allowed
    return StageMask(SubmatrixMask(big, big), "diag", ok,
                     {"large_diagonal": len(big), "allowed": allowed},
                     "" if ok else f"{len(big)} large diagonal entries exceed budget {allowed}",
                     "diag")


def _finish(model: str, A: np.ndarray, stages: list[StageMask], final: SubmatrixMask,
            small_2inf: float, cfg: RegConfig, timer: _Timer) -> RegularizationReport:
    n = A.shape[0]
    with timer("norms"):
        before = op_norm_estimate(A, cfg.norm_tol).value
        if final.is_empty():
            after = before
        else:
            after = op_norm_estimate(zero_block(A, final), cfg.norm_tol).value
    ok = all(s.ok for s in stages)
    return RegularizationReport(
        model=model,
        n=n,
        epsilon=cfg.epsilon,
        stage_masks=stages,
        final_mask=final,
        norm_before=before,
        norm_after=after,
        norm_2inf_small_after=small_2inf,
        empirical_constant=after / math.sqrt(n / cfg.epsilon),
        ok=ok,
        timings=timer.timings,
    )


def regularize_upper(T, cfg: RegConfig = RegConfig()) -> RegularizationReport:
    """Regularize a strictly upper-triangular matrix.

    The final block is (all stage rows) x (all stage columns).
    """
    T = as_matrix(T)
    timer = _Timer()
    stages, small = regularize_upper_parts(T, cfg, "upper", timer)
    n = T.shape[0]
    final = union_masks((s.mask for s in stages), n, n)
    return _finish("upper", T, stages, final, small, cfg, timer)


def _transpose_stage(st: StageMask) -> StageMask:
    return replace(st, mask=SubmatrixMask(st.mask.cols, st.mask.rows))


def regularize_iid(A, cfg: RegConfig = RegConfig()) -> RegularizationReport:
    """Regularize a square matrix with independent entries everywhere.

    The strict lower part is transposed into an upper run and its mask is
    transposed back. Diagonal entries above ``5 sqrt(n/eps)`` join both
    sides of the mask; the rest of the diagonal is left in place.
    """
    A = as_matrix(A)
    n, m = A.shape
    if n != m:
        raise DimensionError(f"expected a square matrix, got {A.shape}")
    timer = _Timer()
    up, small_up = regularize_upper_parts(np.triu(A, 1), cfg, "upper", timer)
    low, small_low = regularize_upper_parts(np.tril(A, -1).T, cfg, "lower", timer)
    low = [_transpose_stage(s) for s in low]
    stages = up + low + [_diag_stage(A, cfg)]
    final = union_masks((s.mask for s in stages), n, n)
    return _finish("iid", A, stages, final, max(small_up, small_low), cfg, timer)


def regularize_symmetric(A, cfg: RegConfig = RegConfig()) -> RegularizationReport:
    """Regularize a symmetric matrix with a symmetric ``R x R`` mask.

    ``R`` is every row and column index produced by the upper run plus the
    large diagonal entries, so zeroing the block also zeroes its mirror.
    """
    A = as_matrix(A)
    n, m = A.shape
    if n != m:
        raise DimensionError(f"expected a square matrix, got {A.shape}")
    if not np.array_equal(A, A.T):
        raise ContractError("matrix is not symmetric")
    timer = _Timer()
    stages, small = regularize_upper_parts(np.triu(A, 1), cfg, "upper", timer)
    stages = stages + [_diag_stage(A, cfg)]
    idx = IndexSet.empty(n)
    for s in stages:
        idx = idx | s.mask.rows | s.mask.cols
    final = SubmatrixMask(idx, idx)
    return _finish("symmetric", A, stages, final, small, cfg, timer)


def regularize(A, model: str, cfg: RegConfig = RegConfig()) -> RegularizationReport:
    if model == "upper":
        return regularize_upper(A, cfg)
    if model == "iid":
        return regularize_iid(A, cfg)
    if model == "symmetric":
        return regularize_symmetric(A, cfg)
    raise ParameterError(f"unknown model {model!r}; expected one of {MODELS}")


@dataclass(frozen=True)
class VerificationRecord:
    norm_before: float
    norm_after: float
    norm_rows_zeroed: float
    norm_cols_zeroed: float
    rows: int
    cols: int
    side_budget: int
    empirical_constant: float
    norm_increased: bool
    checks: dict

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["checks"] = dict(self.checks)
        d["passed"] = self.passed
        return d


def verify(A, mask: SubmatrixMask, cfg: RegConfig = RegConfig()) -> VerificationRecord:
    """Recompute norms for a mask and check the block-combination inequality.

    With ``I, J`` the mask sides, ``||A - A_{IxJ}|| <= ||A with rows I zeroed||
    + ||A with columns J zeroed|| <= 2 ||A||``. Zeroing a block (unlike whole
    rows or columns) can raise the norm, e.g. the (0, 0) entry of
    ``[[1, 1], [1, -1]]``, so an increase is reported but is not a failure.
    All norms are power-iteration estimates, so every comparison allows a
    slack of ``1e-6 * ||A||``.
    """
    A = as_matrix(A)
    if mask.shape != A.shape:
        raise DimensionError(f"mask shape {mask.shape} does not match {A.shape}")
    n = A.shape[0]
    tol = cfg.norm_tol
    before = op_norm_estimate(A, tol).value
    after = op_norm_estimate(zero_block(A, mask), tol).value
    rows_zeroed = op_norm_estimate(zero_rows(A, mask.rows), tol).value
    cols_zeroed = op_norm_estimate(zero_columns(A, mask.cols), tol).value
    slack = 1e-6 * before
    budget = cfg.side_budget(n)
    checks = {
        "norm_at_most_twice": after <= 2 * before + slack,
        "rows_within_budget": len(mask.rows) <= budget,
        "cols_within_budget": len(mask.cols) <= budget,
        "block_combination": after <= rows_zeroed + cols_zeroed + slack,
        "combination_at_most_twice": rows_zeroed + cols_zeroed <= 2 * before + slack,
    }
    return VerificationRecord(
        norm_before=before,
        norm_after=after,
        norm_rows_zeroed=rows_zeroed,
        norm_cols_zeroed=cols_zeroed,
        rows=len(mask.rows),
        cols=len(mask.cols),
        side_budget=budget,
        empirical_constant=after / math.sqrt(A.shape[1] / cfg.epsilon),
        norm_increased=after > before + slack,
        checks=checks,
    )


def restricted_small_2inf(S, J0: IndexSet) -> float:
    """2->inf norm of ``S`` with the columns ``J0`` removed."""
    return norm_2_to_inf(restrict_columns(S, J0.complement()))
