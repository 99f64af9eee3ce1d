import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from elasticdepth.geometry import (
    Trajectory,
    apply_rotation,
    check_grid,
    check_rotation,
    curve_length,
    gradient,
    interpolate,
    is_uniform,
    normalize_length,
    parallel_transport_s2,
    resample,
    slerp,
    transport_to,
    uniform_grid,
)
from helpers import great_circle

unit = st.lists(st.floats(-1, 1), min_size=3, max_size=3).map(np.array).filter(
    lambda v: np.linalg.norm(v) > 0.1
).map(lambda v: v / np.linalg.norm(v))


@pytest.mark.parametrize(
    "points, message",
    [
        ([0.0, 0.5], "at least 3"),
        ([0.1, 0.5, 1.0], "start at 0"),
        ([0.0, 0.5, 0.9], "end at 1"),
        ([0.0, 0.6, 0.5, 1.0], "increasing"),
        ([0.0, 0.5, 0.5, 1.0], "increasing"),
        ([0.0, np.nan, 1.0], "non-finite"),
    ],
)
def test_check_grid_rejects(points, message):
    with pytest.raises(ValueError, match=message):
        check_grid(points)


def test_uniform_grid():
    grid = uniform_grid(5)
    assert np.array_equal(grid, [0, 0.25, 0.5, 0.75, 1])
    assert is_uniform(grid)
    assert not is_uniform(np.array([0, 0.2, 1.0]))


def test_trajectory_validation():
    grid = uniform_grid(4)
    assert Trajectory(grid, np.ones((4, 1))).values.shape == (4,)
    with pytest.raises(ValueError, match="unknown manifold"):
        Trajectory(grid, np.ones(4), "R7")
    with pytest.raises(ValueError, match="samples"):
        Trajectory(grid, np.ones(3))
    with pytest.raises(ValueError, match="dimension >= 2"):
        Trajectory(grid, np.ones((4, 1)), "Rn")
    with pytest.raises(ValueError, match="unit norm"):
        Trajectory(grid, np.ones((4, 3)), "S2")
    with pytest.raises(ValueError, match="non-finite"):
        Trajectory(grid, [0, 1, np.inf, 2])
    traj = Trajectory(grid, np.arange(4.0))
    with pytest.raises(ValueError):
        traj.values[0] = 5.0


def test_interpolate_hits_samples_and_is_linear():
    grid = uniform_grid(11)
    traj = Trajectory(grid, grid**2)
    assert np.allclose(interpolate(traj, grid), grid**2)
    assert interpolate(traj, 0.05) == pytest.approx(0.5 * (0.0 + 0.01))


def test_slerp_midpoint():
    a, b = np.array([1.0, 0, 0]), np.array([0, 1.0, 0])
    assert np.allclose(slerp(a, b, 0.5), np.array([[1, 1, 0]]) / np.sqrt(2))
    assert np.allclose(slerp(a, a, 0.3), a)


@given(unit, unit, st.floats(0, 1))
def test_s2_interpolation_stays_on_sphere(a, b, frac):
    if np.linalg.norm(a + b) < 1e-3:
        return
    grid = uniform_grid(3)
    mid = slerp(a, b, 0.5)[0]
    traj = Trajectory(grid, np.stack([a, mid, b]), "S2")
    point = interpolate(traj, [frac])
    assert np.linalg.norm(point) == pytest.approx(1.0, abs=1e-12)


def test_resample_same_grid_is_identity():
    grid = uniform_grid(7)
    traj = Trajectory(grid, np.sin(grid))
    assert resample(traj, grid) is traj
    finer = resample(traj, uniform_grid(13))
    assert np.allclose(finer.values[::2], traj.values)


def test_gradient_exact_on_quadratics():
    grid = uniform_grid(9)
    traj = Trajectory(grid, 3 * grid**2 - grid + 2)
    assert np.allclose(gradient(traj), 6 * grid - 1, atol=1e-12)


def test_gradient_tangent_on_sphere():
    grid = uniform_grid(21)
    traj = great_circle(grid, [1, 0, 0], [0, 1, 1], 1.0)
    deriv = gradient(traj)
    assert np.allclose(np.sum(deriv * traj.values, axis=1), 0, atol=1e-12)


def test_length_and_normalization():
    grid = uniform_grid(11)
    line = Trajectory(grid, np.column_stack([grid, 2 * grid]), "Rn")
    assert curve_length(line) == pytest.approx(np.sqrt(5))
    assert curve_length(normalize_length(line)) == pytest.approx(1.0)
    with pytest.raises(ValueError, match="zero length"):
        normalize_length(Trajectory(grid, np.ones((11, 2)), "Rn"))
    with pytest.raises(ValueError, match="Rn"):
        normalize_length(Trajectory(grid, grid))


@given(unit, unit, st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_parallel_transport_preserves_norm_and_tangency(start, end, raw):
    if np.linalg.norm(start + end) < 1e-3:
        return
    v = np.array(raw) - (np.array(raw) @ start) * start
    moved = parallel_transport_s2(v, start, end)
    assert abs(np.linalg.norm(moved) - np.linalg.norm(v)) <= 1e-9
    assert abs(moved @ end) <= 1e-9


def test_parallel_transport_along_equator_is_rotation():
    # moving along the equator, the north-pointing vector stays north
    v = np.array([0, 0, 1.0])
    moved = parallel_transport_s2(v, np.array([1.0, 0, 0]), np.array([0, 1.0, 0]))
    assert np.allclose(moved, v)
    east = parallel_transport_s2(np.array([0, 1.0, 0]), np.array([1.0, 0, 0]), np.array([0, 1.0, 0]))
    assert np.allclose(east, [-1, 0, 0])


def test_parallel_transport_errors():
    with pytest.raises(ValueError, match="tangent"):
        parallel_transport_s2(np.array([1.0, 0, 0]), np.array([1.0, 0, 0]), np.array([0, 1.0, 0]))
    with pytest.raises(ValueError, match="antipodal"):
        parallel_transport_s2(np.array([0, 1.0, 0]), np.array([1.0, 0, 0]), np.array([-1.0, 0, 0]))


def test_transport_to_matches_pointwise():
    grid = uniform_grid(15)
    traj = great_circle(grid, [1, 0.2, 0], [0, 0, 1], 2.0)
    deriv = gradient(traj)
    to = np.array([0, 0.6, 0.8])
    batch = transport_to(deriv, traj.values, to)
    single = [parallel_transport_s2(v, p, to) for v, p in zip(deriv, traj.values)]
    assert np.allclose(batch, single, atol=1e-12)


def test_rotations():
    grid = uniform_grid(5)
    traj = Trajectory(grid, np.column_stack([grid, grid**2, np.ones(5)]), "Rn")
    assert np.array_equal(apply_rotation(traj, np.eye(3)).values, traj.values)
    rot = Rotation.from_euler("z", 90, degrees=True).as_matrix()
    assert np.allclose(apply_rotation(traj, rot).values[:, 0], -traj.values[:, 1])
    with pytest.raises(ValueError):
        check_rotation(np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(ValueError):
        apply_rotation(traj, np.eye(2))
