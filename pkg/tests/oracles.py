"""Independent reference implementations used only by the tests.

None of these share code with the library: the spectral norm comes from a
one-sided Jacobi SVD, the inf->2 norm from plain enumeration, and empirical
quantiles from tail counting rather than sorting.
"""

import itertools
import math

import numpy as np


def jacobi_singular_values(A, tol=1e-14, max_sweeps=60):
    """Singular values by one-sided Jacobi rotations on the columns."""
    U = np.array(A, dtype=np.float64, copy=True)
    if U.shape[0] < U.shape[1]:
        U = U.T.copy()
    m = U.shape[1]
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(m - 1):
            for q in range(p + 1, m):
                alpha = U[:, p] @ U[:, p]
                beta = U[:, q] @ U[:, q]
                gamma = U[:, p] @ U[:, q]
                if gamma == 0.0 or alpha == 0.0 or beta == 0.0:
                    continue
                cos_pq = abs(gamma) / (math.sqrt(alpha) * math.sqrt(beta))
                off = max(off, cos_pq)
                if cos_pq < tol:
                    continue
                zeta = float((beta - alpha) / (2.0 * gamma))
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.hypot(1.0, zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                up = U[:, p].copy()
                U[:, p] = c * up - s * U[:, q]
                U[:, q] = s * up + c * U[:, q]
        if off < tol:
            break
    return np.sort(np.sqrt(np.sum(U * U, axis=0)))[::-1]


def spectral_norm(A):
    A = np.asarray(A, dtype=np.float64)
    if not np.any(A):
        return 0.0
    return float(jacobi_singular_values(A)[0])


def inf_to_2(A):
    """max ||A x||_2 over all x in {-1, +1}^m, no symmetry reduction."""
    A = np.asarray(A, dtype=np.float64)
    best = 0.0
    for signs in itertools.product((-1.0, 1.0), repeat=A.shape[1]):
        best = max(best, float(np.linalg.norm(A @ np.asarray(signs))))
    return best


def tail_quantile(samples, k):
    """sup{r >= 0 : #{y >= r} >= m 2^-k}, searched over the sample values and 0."""
    y = list(samples)
    need = len(y) * 2.0 ** -k
    best = 0.0
    for r in set(y) | {0.0}:
        if sum(1 for v in y if v >= r) >= need:
            best = max(best, r)
    return best


def row_l1_col_l1(A):
    A = np.abs(np.asarray(A, dtype=np.float64))
    return float(A.sum(axis=1).max()), float(A.sum(axis=0).max())
