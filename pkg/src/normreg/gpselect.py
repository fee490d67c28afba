"""Deterministic Grothendieck-Pietsch column selection.

The factorization weights are found by multiplicative-weights descent on
``lambda_max(D^-1/2 B^T B D^-1/2)`` over the probability simplex, where
``D = diag(mu)``. The gradient with respect to ``mu_j`` is proportional to
``-x_j**2`` for the maximizing direction ``x`` in original coordinates, so
heavily loaded columns gain weight; columns whose weight ends above
``1/(delta m)`` are the ones removed.

The target ``||B_{J^c}|| <= 2/sqrt(delta m) * ||B||_{inf->2}`` is checked
against cheap lower bounds on ``||B||_{inf->2}``; as soon as a candidate
meets it the search stops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import ParameterError
from .matcore import (IndexSet, as_matrix, inf_to_2_lower_bound,
                      op_norm_estimate, power_iteration, top_right_singular,
                      zero_columns)


@dataclass(frozen=True)
class GPConfig:
    delta: float = 0.1
    mw_iters: int = 200
    mw_step: float = 0.5
    power_tol: float = 1e-6
    inner_iters: int = 30
    check_every: int = 10

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ParameterError(f"delta must lie in (0, 1), got {self.delta}")
        if self.mw_iters < 0 or self.inner_iters < 1 or self.check_every < 1:
            raise ParameterError("iteration counts must be positive")
        if not self.mw_step > 0 or not self.power_tol > 0:
            raise ParameterError("mw_step and power_tol must be positive")


@dataclass(frozen=True)
class GPResult:
    J: IndexSet
    weights: np.ndarray
    achieved_norm: float
    target: float
    iterations: int

    @property
    def certified(self) -> bool:
        """Whether the estimate met the target computed from a lower bound on ``||B||_{inf->2}``."""
        return self.achieved_norm <= self.target


def column_budget(delta: float, m: int) -> int:
    return min(m, math.ceil(delta * m))


def select_heavy(mu: np.ndarray, delta: float) -> IndexSet:
    """Up to ``ceil(delta m)`` heaviest columns among those above ``1/(delta m)``."""
    m = mu.size
    budget = column_budget(delta, m)
    heavy = np.flatnonzero(mu > 1.0 / (delta * m))
    if heavy.size > budget:
        # stable order: weight descending, then index ascending
        order = np.lexsort((heavy, -mu[heavy]))
        heavy = heavy[order[:budget]]
    return IndexSet.of(heavy.tolist(), m)


def gp_column_select(B, cfg: GPConfig = GPConfig()) -> GPResult:
    """Choose at most ``ceil(delta m)`` columns whose removal tames ``||B||``.

    Parameters
    ----------
    B : array_like, shape (k, m)
    cfg : GPConfig

    Returns
    -------
    GPResult
        Removed columns, final simplex weights and the power-iteration
        estimate of ``||B with J zeroed||``. The best candidate seen (the
        empty set, then thresholded weights every ``check_every`` rounds) is
        returned.
    """
    B = as_matrix(B)
    k, m = B.shape
    uniform = np.full(m, 1.0 / m)
    if not np.any(B):
        return GPResult(IndexSet.empty(m), uniform, 0.0, 0.0, 0)

    top = top_right_singular(B, cfg.power_tol)
    lb = inf_to_2_lower_bound(B, top.vector)
    target = 2.0 / math.sqrt(cfg.delta * m) * lb
    best_J, best_norm = IndexSet.empty(m), top.value
    if best_norm <= target or column_budget(cfg.delta, m) == 0:
        return GPResult(best_J, uniform, best_norm, target, 0)

    tried = {best_J}
    mu = uniform.copy()
    y = top.vector.copy()
    it = 0
    for it in range(1, cfg.mw_iters + 1):
        scale = 1.0 / np.sqrt(mu)
        C = B * scale[None, :]
        y = power_iteration(C, y, cfg.power_tol, cfg.inner_iters).vector
        x2 = (scale * y) ** 2
        peak = x2.max()
        if peak == 0.0:
            break
        mu = mu * np.exp(cfg.mw_step * x2 / peak)
        mu /= mu.sum()
        if it % cfg.check_every == 0 or it == cfg.mw_iters:
            J = select_heavy(mu, cfg.delta)
            if J in tried:
                continue
            tried.add(J)
            value = op_norm_estimate(zero_columns(B, J), cfg.power_tol).value
            if value < best_norm:
                best_J, best_norm = J, value
            if best_norm <= target:
                break
    return GPResult(best_J, mu, best_norm, target, it)


def mean_grid(n: int, epsilon: float) -> list[int]:
    """Grid indices ``0, 1, -1, 2, -2, ...`` up to ``ceil(sqrt(ln(1/eps)))``."""
    radius = math.ceil(math.sqrt(math.log(1.0 / epsilon)))
    out = [0]
    for j in range(1, radius + 1):
        out += [j, -j]
    return out


class GridSelection(NamedTuple):
    mu_star: float
    J1: IndexSet
    score: float
    j_star: int


def mean_grid_select(S, J0: IndexSet, epsilon: float,
                     cfg: GPConfig = GPConfig()) -> GridSelection:
    """Search the mean shift ``j/sqrt(n)`` and the GP columns for it.

    For every grid value the shifted matrix ``S - mu 11^T`` (columns ``J0``
    zeroed) goes through ``gp_column_select`` with ``delta = epsilon``; the
    winner minimizes the norm of the *unshifted* ``S`` with ``J0 | J``
    zeroed, ties broken by smaller ``|j|`` then positive ``j``.
    """
    if not 0.0 < epsilon <= 0.5:
        raise ParameterError(f"epsilon must lie in (0, 1/2], got {epsilon}")
    S = as_matrix(S)
    n, m = S.shape
    gp_cfg = replace(cfg, delta=epsilon)
    zero_j0 = J0.mask()
    scores: dict[IndexSet, float] = {}
    best = None
    for j in mean_grid(n, epsilon):
        mu = j / math.sqrt(n)
        B = S - mu
        B[:, zero_j0] = 0.0
        J = gp_column_select(B, gp_cfg).J
        if J not in scores:
            scores[J] = op_norm_estimate(zero_columns(S, J0 | J), cfg.power_tol).value
        key = (scores[J], abs(j), j < 0)
        if best is None or key < best[0]:
            best = (key, mu, J, j)
    (score, _, _), mu, J, j = best
    return GridSelection(mu, J, score, j)
