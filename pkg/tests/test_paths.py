import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lpe.paths import ParamPathSpec, integrated_parameter, sample_path


def test_constant_path():
    p = sample_path(ParamPathSpec.constant([0.5, 1.0]), [0, 0.5, 1], 1.0, seed=0)
    assert np.array_equal(p.values, [[0.5, 1.0]] * 3)
    assert np.array_equal(integrated_parameter(p, 1.0), [0.5, 1.0])


def test_cosine_path_values():
    spec = ParamPathSpec.cosine([0.5, 1.0], [0.2, 0.4], [4, 4])
    p = sample_path(spec, [0.0, 0.3, 1.0], 1.0, seed=0)
    assert np.allclose(p.values[0], [0.7, 1.4], atol=1e-15)
    t = p.times[:, None]
    assert np.array_equal(p.values, spec.nu + spec.amp * np.cos(2 * np.pi * t * spec.osc / 1.0))


def test_cosine_integrates_to_nu():
    spec = ParamPathSpec.cosine([0.5, 1.0], [0.2, 0.4], [4, 4])
    p = sample_path(spec, np.linspace(0, 1, 10_001), 1.0, seed=0)
    assert np.allclose(integrated_parameter(p, 1.0), [0.5, 1.0], atol=1e-6)


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=4), st.integers(0, 2 ** 32 - 1))
def test_zero_amplitude_cosine_is_constant(nu, seed):
    grid = np.linspace(0, 2, 11)
    a = sample_path(ParamPathSpec.cosine(nu, [0.0] * len(nu), [3.0] * len(nu)), grid, 2.0, seed)
    b = sample_path(ParamPathSpec.constant(nu), grid, 2.0, seed)
    assert np.array_equal(a.values, b.values)


@given(st.integers(0, 2 ** 32 - 1))
def test_martingale_zero_vol_and_reproducible(seed):
    grid = np.linspace(0, 1, 50)
    flat = sample_path(ParamPathSpec.martingale([1.0, 2.0], [0.0, 0.0]), grid, 1.0, seed)
    assert np.array_equal(flat.values, np.tile([1.0, 2.0], (50, 1)))
    spec = ParamPathSpec.martingale([1.0], [0.3], positive=[True])
    a = sample_path(spec, grid, 1.0, seed)
    b = sample_path(spec, grid, 1.0, seed)
    assert np.array_equal(a.values, b.values)
    assert np.all(a.values > 0)


def test_martingale_increments_uncorrelated():
    spec = ParamPathSpec.martingale([0.0], [1.0])
    grid = [0.0, 0.5, 1.0]
    inc = np.array([np.diff(sample_path(spec, grid, 1.0, s).values[:, 0]) for s in range(10_000)])
    r = np.corrcoef(inc[:, 0], inc[:, 1])[0, 1]
    assert abs(r) < 0.05
    assert inc.std(axis=0) == pytest.approx([np.sqrt(0.5)] * 2, rel=0.05)


def test_martingale_integral_is_trapezoid():
    spec = ParamPathSpec.martingale([1.0], [0.5])
    grid = np.linspace(0, 1, 101)
    p = sample_path(spec, grid, 1.0, 3)
    v = p.values[:, 0]
    assert integrated_parameter(p, 1.0)[0] == pytest.approx(np.sum((v[1:] + v[:-1]) / 2 * 0.01))


def test_reflection_keeps_positive_components_above_floor():
    spec = ParamPathSpec.martingale([1e-6], [5.0], positive=[True])
    p = sample_path(spec, np.linspace(0, 1, 1000), 1.0, 1)
    assert np.all(p.values >= spec.floor)


def test_grid_validation():
    spec = ParamPathSpec.constant([1.0])
    with pytest.raises(ValueError):
        sample_path(spec, [0.0, 0.5, 0.5], 1.0, 0)
    with pytest.raises(ValueError):
        sample_path(spec, [0.0, 2.0], 1.0, 0)
    with pytest.raises(ValueError):
        integrated_parameter(sample_path(spec, [0.1, 1.0], 1.0, 0), 1.0)
    with pytest.raises(ValueError):
        ParamPathSpec.cosine([1.0, 2.0], [0.1], [1.0])
    with pytest.raises(ValueError):
        ParamPathSpec.martingale([1.0], [-1.0])
