import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lsvgd.kernels import KernelConfig, kernel, kernel_grad_wrt_first, kernel_matrix

from conftest import central_difference, rel_err

finite = st.floats(-3, 3, allow_nan=False)


def test_kernel_values():
    assert kernel([0.3, -1.0], [0.3, -1.0], KernelConfig(gamma=1.0)) == 1.0
    assert kernel([0, 0], [1, 0], KernelConfig(gamma=1.0)) == pytest.approx(np.exp(-1), rel=1e-15)
    assert kernel([0, 0], [1, 0], KernelConfig(gamma=0.5)) == pytest.approx(np.exp(-2), rel=1e-15)


def test_kernel_dimension_mismatch():
    with pytest.raises(ValueError):
        kernel([0, 0], [1, 0, 0], KernelConfig())
    with pytest.raises(ValueError):
        kernel_grad_wrt_first([0], [1, 0], KernelConfig())


@pytest.mark.parametrize("gamma, tau", [(0.0, 0.001), (-1.0, 0.001), (1.0, 1.0), (1.0, -0.1)])
def test_config_validation(gamma, tau):
    with pytest.raises(ValueError):
        KernelConfig(gamma=gamma, truncation_threshold=tau)


def test_grad_values():
    cfg = KernelConfig(gamma=1.0)
    assert np.array_equal(kernel_grad_wrt_first([2.0, 1.0], [2.0, 1.0], cfg), [0.0, 0.0])
    np.testing.assert_allclose(kernel_grad_wrt_first([1, 0], [0, 0], cfg), [-2 * np.exp(-1), 0], rtol=1e-15)


def test_grad_antisymmetry(rng):
    cfg = KernelConfig(gamma=0.3)
    for _ in range(20):
        x, y = rng.normal(size=3), rng.normal(size=3)
        np.testing.assert_array_equal(kernel_grad_wrt_first(x, y, cfg), -kernel_grad_wrt_first(y, x, cfg))


def test_grad_matches_finite_differences(rng):
    for _ in range(100):
        gamma = float(np.exp(rng.uniform(np.log(1e-3), 0.0)))
        cfg = KernelConfig(gamma=gamma)
        x = rng.normal(size=2)
        # keep the pair inside the kernel's active range so the gradient is not ~0
        y = x + rng.normal(size=2) * np.sqrt(gamma)
        h = 1e-4 * np.sqrt(gamma)
        fd = central_difference(lambda v: kernel(v, y, cfg), x, h=h)
        assert rel_err(kernel_grad_wrt_first(x, y, cfg), fd) < 1e-6


def test_kernel_matrix_examples():
    km = kernel_matrix([[0.5, 0.5]], KernelConfig())
    assert km.values.tolist() == [[1.0]] and km.active_mask.tolist() == [[True]]
    km = kernel_matrix([[1.0, 2.0], [1.0, 2.0]], KernelConfig())
    assert np.all(km.values == 1.0)
    km = kernel_matrix([[0, 0], [10, 0]], KernelConfig(gamma=0.01, truncation_threshold=0.001))
    assert km.active_mask.tolist() == [[True, False], [False, True]]


@settings(max_examples=50, deadline=None)
@given(arrays(float, st.tuples(st.integers(1, 8), st.integers(1, 3)), elements=finite), st.floats(1e-3, 2.0))
def test_kernel_matrix_properties(x, gamma):
    km = kernel_matrix(x, KernelConfig(gamma=gamma))
    np.testing.assert_array_equal(km.values, km.values.T)
    np.testing.assert_array_equal(np.diag(km.values), 1.0)
    assert np.all((km.values >= 0) & (km.values <= 1))


@settings(max_examples=50, deadline=None)
@given(arrays(float, st.tuples(st.integers(2, 8), st.just(2)), elements=finite), st.floats(1e-3, 1.0), st.floats(0.01, 1.0))
def test_truncation_monotone_in_gamma(x, gamma, shrink):
    wide = kernel_matrix(x, KernelConfig(gamma=gamma)).active_mask
    narrow = kernel_matrix(x, KernelConfig(gamma=gamma * shrink)).active_mask
    assert not np.any(narrow & ~wide)
