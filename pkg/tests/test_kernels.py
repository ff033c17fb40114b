import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from relmmd.kernels import KernelSpec, gram_bundle, kernel_eval, median_heuristic, relative_bandwidth


def test_rbf_is_one_at_zero_distance():
    assert kernel_eval(KernelSpec.rbf(1.0), (3, 4), (3, 4)) == 1.0


def test_linear_is_dot_product():
    assert kernel_eval(KernelSpec.linear(), (1, 2), (3, 4)) == 11.0


def test_rbf_closed_form():
    # |u - v|^2 = 4, 2 * bw^2 = 8
    assert kernel_eval(KernelSpec.rbf(2.0), (0, 0), (2, 0)) == pytest.approx(math.exp(-0.5), rel=1e-15)


@pytest.mark.parametrize("u, v", [((1, 2), (1, 2, 3)), ((1, float("nan")), (0, 0)), ((np.inf, 0), (0, 0))])
def test_kernel_eval_rejects_bad_input(u, v):
    with pytest.raises(ValueError):
        kernel_eval(KernelSpec.rbf(1.0), u, v)


@pytest.mark.parametrize("bw", [0.0, -1.0, float("inf"), float("nan"), None])
def test_rbf_bandwidth_validation(bw):
    with pytest.raises(ValueError):
        KernelSpec("gaussian-rbf", bw)


def test_kernel_aliases():
    assert KernelSpec("rbf", 2.0).family == "gaussian-rbf"
    with pytest.raises(ValueError):
        KernelSpec("laplace", 1.0)


def test_gram_bundle_linear_by_hand():
    X = [[1.0], [0.0], [2.0]]
    b = gram_bundle(KernelSpec.linear(), X, X, X)
    expected = np.array([[0, 0, 2], [0, 0, 0], [2, 0, 0]], dtype=float)
    np.testing.assert_array_equal(b.ktil_xx, expected)
    np.testing.assert_array_equal(b.k_xy, np.outer([1, 0, 2], [1, 0, 2]))
    assert (b.m, b.n, b.r) == (3, 3, 3)


def test_gram_bundle_rbf_structure(rng):
    X = rng.normal(size=(12, 3))
    X[1] = X[0]
    Y, Z = rng.normal(size=(5, 3)), rng.normal(size=(7, 3))
    b = gram_bundle(KernelSpec.rbf(1.5), X, Y, Z)
    for K in (b.ktil_xx, b.ktil_yy, b.ktil_zz):
        assert np.all(np.diagonal(K) == 0)
        assert np.array_equal(K, K.T)
    assert b.ktil_xx[0, 1] == 1.0
    for K in (b.ktil_xx, b.ktil_yy, b.ktil_zz, b.k_xy, b.k_xz):
        assert np.all((K >= 0) & (K <= 1))
    assert b.k_xy.shape == (12, 5) and b.k_xz.shape == (12, 7)
    assert not b.k_xy.flags.writeable


def test_gram_entries_match_pointwise(rng):
    X, Y, Z = rng.normal(size=(4, 2)), rng.normal(size=(3, 2)), rng.normal(size=(5, 2))
    spec = KernelSpec.rbf(0.7)
    b = gram_bundle(spec, X, Y, Z)
    assert b.ktil_xx[1, 3] == pytest.approx(kernel_eval(spec, X[1], X[3]), rel=1e-14)
    assert b.k_xz[2, 4] == pytest.approx(kernel_eval(spec, X[2], Z[4]), rel=1e-14)


def test_gram_bundle_errors(rng):
    spec = KernelSpec.rbf(1.0)
    with pytest.raises(ValueError, match="dimension"):
        gram_bundle(spec, rng.normal(size=(5, 2)), rng.normal(size=(5, 3)), rng.normal(size=(5, 2)))
    with pytest.raises(ValueError, match="at least 3"):
        gram_bundle(spec, rng.normal(size=(2, 2)), rng.normal(size=(5, 2)), rng.normal(size=(5, 2)))


def test_linear_gram_exactly_symmetric(rng):
    X = rng.normal(size=(40, 4)) * 1e3
    b = gram_bundle(KernelSpec.linear(), X, X[:5], X[:6])
    assert np.array_equal(b.ktil_xx, b.ktil_xx.T)


def test_median_heuristic_examples():
    assert median_heuristic([[0.0]], [[0.0], [1.0], [3.0]]) == 1.0
    assert median_heuristic([[0.0, 0.0]], [[3.0, 4.0]]) == 5.0
    # even count: mean of the two central distances {1, 3}
    assert median_heuristic([[0.0]], [[1.0], [3.0]]) == 2.0


def test_median_heuristic_all_zero():
    with pytest.raises(ValueError, match="zero"):
        median_heuristic([[1.0, 1.0]] * 3, [[1.0, 1.0]] * 2)


def test_median_heuristic_zero_median_fallback():
    # distances {0, 0, 0, 2}: median 0, smallest nonzero 2
    assert median_heuristic([[0.0], [0.0]], [[0.0], [2.0]]) == 1.0
    assert median_heuristic([[0.0]], [[0.0], [0.0], [0.0], [2.0]]) == 2.0


def test_relative_bandwidth_by_hand():
    # med(X,Y) over {1, 3} = 2; med(X,Z) = 2
    assert relative_bandwidth([[0.0]], [[1.0], [3.0]], [[2.0]]) == 2.0


def test_relative_bandwidth_identical_candidates(rng):
    X, Y = rng.normal(size=(9, 2)), rng.normal(size=(6, 2))
    assert relative_bandwidth(X, Y, Y) == median_heuristic(X, Y)


_samples = arrays(np.float64, st.tuples(st.integers(1, 8), st.just(2)),
                  elements=st.floats(-100, 100).map(lambda v: round(v, 3)))


@settings(max_examples=60, deadline=None)
@given(_samples, _samples)
def test_median_heuristic_symmetric(A, B):
    try:
        ab = median_heuristic(A, B)
    except ValueError:
        with pytest.raises(ValueError):
            median_heuristic(B, A)
        return
    assert ab == median_heuristic(B, A)


@settings(max_examples=60, deadline=None)
@given(_samples, _samples, st.sampled_from([0.25, 0.5, 2.0, 8.0]), st.floats(0.01, 100))
def test_median_heuristic_scales(A, B, pow2, c):
    try:
        base = median_heuristic(A, B)
    except ValueError:
        return
    assert median_heuristic(pow2 * A, pow2 * B) == pow2 * base
    assert median_heuristic(c * A, c * B) == pytest.approx(c * base, rel=1e-12)
