import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from elasticdepth.geometry import uniform_grid
from elasticdepth.simulate import (
    MODELS,
    GpConfig,
    ScenarioSpec,
    _cholesky,
    _warping_values,
    derive_seed,
    harmonic_sample,
    random_warping,
    sample_gp,
    sample_scenario,
    sincos_scenario,
    substream,
)


def values(sample):
    return np.array([t.values for t in sample.trajectories])


@pytest.mark.parametrize("model", MODELS)
def test_layout_and_labels(model):
    sample = sample_scenario(ScenarioSpec(model=model, seed=3))
    assert len(sample) == 100
    assert np.array_equal(np.flatnonzero(sample.shape_outlier_labels), np.arange(90, 100))
    mags = np.flatnonzero(sample.magnitude_outlier_labels)
    assert len(mags) == 10 and mags.max() < 90
    assert all(t.grid.size == 30 for t in sample.trajectories)


@pytest.mark.parametrize("model", MODELS)
def test_same_seed_same_sample(model):
    a = sample_scenario(ScenarioSpec(model=model, seed=11))
    b = sample_scenario(ScenarioSpec(model=model, seed=11))
    c = sample_scenario(ScenarioSpec(model=model, seed=12))
    assert np.array_equal(values(a), values(b))
    assert not np.array_equal(values(a), values(c))


def test_switching_magnitude_outliers_leaves_other_draws_alone():
    full = sample_scenario(ScenarioSpec(model=1, seed=5))
    plain = sample_scenario(ScenarioSpec(model=1, seed=5, magnitude_outlier_fraction=0.0))
    mags = full.magnitude_outlier_labels
    assert not plain.magnitude_outlier_labels.any()
    assert np.array_equal(values(full)[~mags], values(plain)[~mags])
    shift = values(full)[mags] - values(plain)[mags]
    assert np.allclose(np.abs(shift), 10.0)
    assert np.allclose(shift, shift[:, :1])


def test_phase_noise_is_off_for_phase_scenarios():
    assert ScenarioSpec(model=7).phase_noise_sigma == 0.0
    assert ScenarioSpec(model="sincos").phase_noise_sigma == 0.0
    assert ScenarioSpec(model=1).phase_noise_sigma == 0.1
    assert ScenarioSpec(model="3").model == 3


@pytest.mark.parametrize(
    "kwargs",
    [{"model": 8}, {"model": "x"}, {"n_inlier": -1}, {"grid_size": 2}, {"phase_noise_sigma": -0.1},
     {"magnitude_outlier_fraction": 1.5}, {"seed": -1}],
)
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        ScenarioSpec(**kwargs)


def test_model_means_without_noise():
    # a tiny covariance scale and no phase or magnitude noise expose the means
    spec = ScenarioSpec(model=3, seed=1, phase_noise_sigma=0.0, magnitude_outlier_fraction=0.0,
                        n_inlier=200, n_outlier=200)
    sample = sample_scenario(spec)
    grid = sample.trajectories[0].grid
    vals = values(sample)
    assert np.allclose(vals[:200].mean(axis=0), grid**3 - 2 * grid**2 + 0.5 * grid, atol=0.25)
    assert np.allclose(vals[200:].mean(axis=0), 2 * grid**3 + grid**2 - 0.5 * grid, atol=0.25)


def test_model6_jumps_and_model7_warps():
    s6 = sample_scenario(ScenarioSpec(model=6, seed=2, phase_noise_sigma=0.0))
    jumps = s6.extras["jump_times"]
    assert jumps.shape == (10,) and np.all((jumps >= 0.4) & (jumps <= 0.6))
    s7 = sample_scenario(ScenarioSpec(model=7, seed=2))
    warps = s7.extras["outlier_warpings"]
    assert warps.shape == (10, 30)
    assert np.all(np.diff(warps, axis=1) >= 0) and np.all(warps[:, -1] == 1.0)


def test_gp_covariance():
    grid = uniform_grid(6)
    rng = np.random.default_rng(0)
    paths = np.array([t.values for t in sample_gp(GpConfig(scale=0.5), grid, 20000, rng)])
    expected = np.exp(-((grid[:, None] - grid[None, :]) ** 2) / 0.5)
    assert np.allclose(np.cov(paths.T), expected, atol=0.05)
    shifted = sample_gp(GpConfig(mean="sin2pi"), grid, 1, np.random.default_rng(0))[0]
    assert np.allclose(shifted.values - paths[0], np.sin(2 * np.pi * grid))


def test_cholesky_jitter_escalates():
    # a smooth kernel on a dense grid is numerically singular without jitter
    points = np.linspace(0, 1, 200)
    chol = _cholesky(points, 50.0, 1e-10)
    assert np.all(np.isfinite(chol))
    with pytest.raises(np.linalg.LinAlgError):
        _cholesky(points, 50.0, 1e-30)


def test_gp_config_validation():
    with pytest.raises(ValueError):
        GpConfig(scale=0)
    with pytest.raises(ValueError):
        GpConfig(mean="tan")
    assert np.allclose(GpConfig(mean=lambda t: 2 * t).mean_at(np.array([0.5])), [1.0])


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_warping_closed_form_matches_quadrature(a1, a2):
    norm = np.hypot(a1, a2)
    if norm < 1e-6:
        return

    def psi(t):
        v = a1 * np.sqrt(2) * np.sin(2 * np.pi * t) + a2 * np.sqrt(2) * np.cos(2 * np.pi * t)
        return (np.cos(norm) + np.sin(norm) * v / norm) ** 2

    t = np.array([0.0, 0.2, 0.45, 0.7, 1.0])
    # clipping and monotone fixing only ever act at rounding level
    expected = [quad(psi, 0, x)[0] for x in t]
    assert np.allclose(_warping_values(a1, a2, t), expected, atol=1e-9)


@given(st.floats(0, 10), st.integers(0, 2**32))
def test_random_warping_is_valid(sigma, seed):
    w = random_warping(sigma, uniform_grid(40), np.random.default_rng(seed))
    assert w.values[0] == 0 and w.values[-1] == 1
    assert np.all(np.diff(w.values) >= 0)


def test_zero_sigma_is_identity():
    grid = uniform_grid(9)
    assert np.array_equal(random_warping(0.0, grid, np.random.default_rng(0)).values, grid)
    with pytest.raises(ValueError):
        random_warping(-1, grid, np.random.default_rng(0))


def test_seed_derivation():
    assert derive_seed(0, 0) != derive_seed(0, 1)
    assert derive_seed(5, 3) == derive_seed(5, 3)
    a = substream(1, "delta").standard_normal(3)
    assert np.array_equal(a, substream(1, "delta").standard_normal(3))
    assert not np.array_equal(a, substream(1, "jump").standard_normal(3))


def test_sincos_scenario():
    sample = sincos_scenario(n_inlier=20, n_outlier=5, seed=4)
    assert sample.spec.model == "sincos"
    assert not sample.magnitude_outlier_labels.any()
    assert sample.shape_outlier_labels.sum() == 5


def test_harmonic_sample_same_curves_at_any_rate():
    coarse = harmonic_sample(5, 20, seed=1)
    fine = harmonic_sample(5, 77, seed=1)
    # the grids share 0 and 1, and 20 - 1 divides 77 - 1 = 76
    assert np.allclose([c.values for c in coarse], [f.values[::4] for f in fine])
    with pytest.raises(ValueError):
        harmonic_sample(1)
