"""Entry distributions and a counter-based generator keyed by ``(seed, i, j)``.

Each matrix entry is a pure function of its coordinates and the seed, so
triangular, symmetric and full fills see the same value at the same place
regardless of fill order or how trials are spread over workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .errors import ParameterError

KINDS = ("gaussian", "rademacher", "three_point", "pareto_sym", "table")
FILL_MODELS = ("iid", "upper", "symmetric")

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(z: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer; uint64 arithmetic wraps
    z = z + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def counter_bits(seed: int, i, j, stream: int = 0) -> np.ndarray:
    """64 pseudo-random bits for every ``(i, j)`` pair (broadcasting)."""
    key = np.uint64((int(seed) * 0x100000001B3 + int(stream) * 0xD6E8FEB86659FD93) & _MASK64)
    i = np.asarray(i, dtype=np.uint64)
    j = np.asarray(j, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = _mix(np.broadcast_to(key, np.broadcast_shapes(i.shape, j.shape)).copy())
        z = _mix(z ^ i)
        z = _mix(z ^ (j * _M2))
    return z


def counter_uniform(seed: int, i, j, stream: int = 0) -> np.ndarray:
    """Uniform values in the open interval (0, 1)."""
    bits = counter_bits(seed, i, j, stream) >> np.uint64(11)
    return (bits.astype(np.float64) + 0.5) * 2.0 ** -53


def derive_seed(*parts: int) -> int:
    """Fold integers into one 64-bit seed with the same mixing function."""
    z = np.uint64(0)
    with np.errstate(over="ignore"):
        for p in parts:
            z = _mix(np.asarray([z ^ np.uint64(int(p) & _MASK64)], dtype=np.uint64))[0]
    return int(z)


@dataclass(frozen=True)
class SamplerSpec:
    """An entry law.

    ``params`` by kind: three_point ``eps`` (the law puts mass ``eps/n`` on
    each of ``+-sqrt(n/(2 eps))``); pareto_sym ``alpha > 2``; table
    ``values`` and ``probs`` (re-centred and scaled to unit variance).
    """

    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown distribution {self.kind!r}")
        if self.kind == "pareto_sym" and not self.params.get("alpha", 2.5) > 2:
            raise ParameterError("pareto_sym needs alpha > 2 for finite variance")
        if self.kind == "table":
            v, p = self._table()
            if np.any(p < 0) or not math.isclose(p.sum(), 1.0, rel_tol=1e-9):
                raise ParameterError("table probabilities must be >= 0 and sum to 1")
            if v.size != p.size or v.size == 0:
                raise ParameterError("table needs matching non-empty values/probs")

    def label(self) -> str:
        if not self.params:
            return self.kind
        inner = ",".join(f"{k}={self.params[k]}" for k in sorted(self.params))
        return f"{self.kind}({inner})"

    def _table(self):
        return (np.asarray(self.params.get("values", []), dtype=np.float64),
                np.asarray(self.params.get("probs", []), dtype=np.float64))


def three_point_magnitude(n: int, eps: float) -> float:
    return math.sqrt(n / (2.0 * eps))


def draw(spec: SamplerSpec, i, j, n: int) -> np.ndarray:
    """Entry values at coordinates ``(i, j)`` for matrix size ``n``."""
    u = counter_uniform(spec.seed, i, j, 0)
    kind = spec.kind
    if kind == "gaussian":
        return ndtri(u)
    if kind == "rademacher":
        return np.where(u < 0.5, -1.0, 1.0)
    if kind == "three_point":
        eps = float(spec.params.get("eps", 0.1))
        p = eps / n
        if not (eps > 0 and 2 * p <= 1):
            raise ParameterError(f"three_point needs 0 < 2*eps/n <= 1 (eps={eps}, n={n})")
        a = three_point_magnitude(n, eps)
        return np.where(u < p, a, np.where(u < 2 * p, -a, 0.0))
    if kind == "pareto_sym":
        alpha = float(spec.params.get("alpha", 2.5))
        sign = np.where(counter_uniform(spec.seed, i, j, 1) < 0.5, -1.0, 1.0)
        # Pareto(x_m=1) has E[P^2] = alpha/(alpha-2)
        return sign * u ** (-1.0 / alpha) * math.sqrt((alpha - 2.0) / alpha)
    if kind == "table":
        v, p = spec._table()
        mean = float(p @ v)
        sd = math.sqrt(float(p @ (v - mean) ** 2))
        v = (v - mean) / sd if sd > 0 else v - mean
        idx = np.searchsorted(np.cumsum(p)[:-1], u, side="right")
        return v[idx]
    raise ParameterError(f"unknown distribution {kind!r}")


def sample_matrix(spec: SamplerSpec, n: int, model: str = "iid") -> np.ndarray:
    """An ``n x n`` matrix whose free positions hold i.i.d. draws.

    ``iid`` fills everything, ``upper`` the strict upper triangle, and
    ``symmetric`` the upper triangle including the diagonal, mirrored.
    """
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    if model not in FILL_MODELS:
        raise ParameterError(f"unknown model {model!r}")
    i = np.arange(n, dtype=np.uint64)[:, None]
    j = np.arange(n, dtype=np.uint64)[None, :]
    if model == "iid":
        return np.asarray(draw(spec, i, j, n), dtype=np.float64)
    V = np.asarray(draw(spec, np.minimum(i, j), np.maximum(i, j), n), dtype=np.float64)
    return np.triu(V, 1) if model == "upper" else V


def sample_values(spec: SamplerSpec, count: int, n: int) -> np.ndarray:
    """A flat run of ``count`` draws (coordinates ``(k, 0)``), for moment checks."""
    return np.asarray(draw(spec, np.arange(count, dtype=np.uint64), 0, n),
                      dtype=np.float64)
