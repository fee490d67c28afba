import itertools

import numpy as np

from oracles import inf_to_2, jacobi_singular_values, spectral_norm, tail_quantile


def test_jacobi_matches_lapack(rng):
    for shape in [(5, 5), (7, 4), (3, 9)]:
        A = rng.standard_normal(shape)
        np.testing.assert_allclose(jacobi_singular_values(A)[: min(shape)],
                                   np.linalg.svd(A, compute_uv=False), rtol=1e-12)


def test_spectral_norm_known_values():
    assert spectral_norm(np.diag([5.0, 1.0, 1.0])) == 5.0
    assert abs(spectral_norm(np.ones((3, 3))) - 3.0) < 1e-14
    assert spectral_norm(np.zeros((2, 3))) == 0.0


def test_inf_to_2_small_cases():
    assert abs(inf_to_2(np.eye(3)) - np.sqrt(3)) < 1e-15
    assert abs(inf_to_2(np.array([[1.0, 1.0], [1.0, -1.0]])) - 2.0) < 1e-15


def test_tail_quantile_by_hand():
    assert tail_quantile([4, 3, 2, 1], 1) == 3
    assert tail_quantile([4, 3, 2, 1], 2) == 4
    assert tail_quantile([0, 0, 0], 3) == 0
