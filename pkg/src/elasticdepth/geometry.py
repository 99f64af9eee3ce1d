"""Grids, sampled trajectories and the manifold primitives they need.

Three manifolds are supported, identified by a tag on each trajectory:

``"R1"``
    real valued functions, ``values`` has shape ``(N,)``
``"Rn"``
    vector valued functions, ``values`` has shape ``(N, n)`` with ``n >= 2``
``"S2"``
    curves on the unit sphere, ``values`` has shape ``(N, 3)`` with unit rows
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "TAGS",
    "Trajectory",
    "check_grid",
    "uniform_grid",
    "is_uniform",
    "check_rotation",
    "resample",
    "interpolate",
    "gradient",
    "curve_length",
    "normalize_length",
    "parallel_transport_s2",
    "transport_to",
    "apply_rotation",
    "slerp",
]

TAGS = ("R1", "Rn", "S2")

SPHERE_TOL = 1e-9
ROTATION_TOL = 1e-9


def check_grid(points):
    """Validate a sampling grid on [0, 1] and return it as a float array.

    The grid must hold at least three strictly increasing points, starting
    at exactly 0 and ending at exactly 1.
    """
    grid = np.asarray(points, dtype=float)
    if grid.ndim != 1:
        raise ValueError("grid must be one-dimensional")
    if grid.size < 3:
        raise ValueError(f"grid needs at least 3 points, got {grid.size}")
    if not np.all(np.isfinite(grid)):
        raise ValueError("grid contains non-finite values")
    if grid[0] != 0.0 or grid[-1] != 1.0:
        raise ValueError("grid must start at 0 and end at 1")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    return grid


def uniform_grid(n):
    """Equidistant grid of `n` points on [0, 1]."""
    return check_grid(np.linspace(0.0, 1.0, int(n)))


def is_uniform(grid, rtol=1e-9):
    steps = np.diff(grid)
    return bool(np.all(np.abs(steps - steps.mean()) <= rtol * steps.mean()))


def check_rotation(matrix, tol=ROTATION_TOL):
    """Return `matrix` as an array after checking it lies in SO(n)."""
    mat = np.asarray(matrix, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("rotation must be a square matrix")
    n = mat.shape[0]
    if np.max(np.abs(mat.T @ mat - np.eye(n))) > tol:
        raise ValueError("rotation matrix is not orthogonal")
    if abs(np.linalg.det(mat) - 1.0) > tol:
        raise ValueError("rotation matrix must have determinant +1")
    return mat


@dataclass(frozen=True, eq=False)
class Trajectory:
    """A function on [0, 1] observed at the nodes of `grid`.

    Parameters
    ----------
    grid : array_like, shape (N,)
        Sampling points, see :func:`check_grid`.
    values : array_like
        ``(N,)`` for ``"R1"``, ``(N, n)`` for ``"Rn"`` and ``"S2"``.
    tag : {"R1", "Rn", "S2"}
        Manifold the values live on.
    """

    grid: np.ndarray
    values: np.ndarray
    tag: str = "R1"

    def __post_init__(self):
        grid = check_grid(self.grid)
        values = np.array(self.values, dtype=float)
        if self.tag not in TAGS:
            raise ValueError(f"unknown manifold tag {self.tag!r}")
        if values.shape[0] != grid.size:
            raise ValueError(
                f"values have {values.shape[0]} samples but grid has {grid.size}"
            )
        if self.tag == "R1":
            if values.ndim == 2 and values.shape[1] == 1:
                values = values[:, 0]
            if values.ndim != 1:
                raise ValueError("R1 values must be one-dimensional")
        else:
            if values.ndim != 2:
                raise ValueError(f"{self.tag} values must have shape (N, dim)")
            if self.tag == "Rn" and values.shape[1] < 2:
                raise ValueError("Rn needs dimension >= 2; use the R1 tag")
            if self.tag == "S2":
                if values.shape[1] != 3:
                    raise ValueError("S2 values must be 3-vectors")
                norms = np.linalg.norm(values, axis=1)
                if np.max(np.abs(norms - 1.0)) > SPHERE_TOL:
                    raise ValueError("S2 values must have unit norm")
        if not np.all(np.isfinite(values)):
            raise ValueError("values contain non-finite entries")
        grid.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def dim(self):
        return 1 if self.values.ndim == 1 else self.values.shape[1]

    def __len__(self):
        return self.grid.size

    def with_values(self, values):
        return Trajectory(self.grid, values, self.tag)


def slerp(a, b, frac):
    """Spherical linear interpolation between rows of unit vectors `a`, `b`."""
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    frac = np.asarray(frac, dtype=float).reshape(-1, 1)
    cos = np.clip(np.sum(a * b, axis=1, keepdims=True), -1.0, 1.0)
    theta = np.arccos(cos)
    sin = np.sin(theta)
    small = sin[:, 0] < 1e-12
    with np.errstate(invalid="ignore", divide="ignore"):
        wa = np.where(small[:, None], 1.0 - frac, np.sin((1.0 - frac) * theta) / sin)
        wb = np.where(small[:, None], frac, np.sin(frac * theta) / sin)
    out = wa * a + wb * b
    return out / np.linalg.norm(out, axis=1, keepdims=True)


def interpolate(traj, points):
    """Evaluate `traj` at arbitrary `points` in [0, 1].

    Piecewise linear for ``R1``/``Rn``; for ``S2`` consecutive samples are
    joined by great-circle arcs.
    """
    points = np.clip(np.asarray(points, dtype=float), 0.0, 1.0)
    grid, vals = traj.grid, traj.values
    if traj.tag == "R1":
        return np.interp(points, grid, vals)
    if traj.tag == "Rn":
        return np.column_stack([np.interp(points, grid, vals[:, d]) for d in range(vals.shape[1])])
    idx = np.clip(np.searchsorted(grid, points, side="right") - 1, 0, grid.size - 2)
    frac = (points - grid[idx]) / (grid[idx + 1] - grid[idx])
    return slerp(vals[idx], vals[idx + 1], frac)


def resample(traj, target):
    """Interpolate `traj` onto the grid `target`."""
    target = check_grid(target)
    if target.shape == traj.grid.shape and np.array_equal(target, traj.grid):
        return traj
    return Trajectory(target, interpolate(traj, target), traj.tag)


def _project_tangent(points, vectors):
    return vectors - np.sum(vectors * points, axis=1, keepdims=True) * points


def gradient(traj):
    """Derivative of `traj` at every grid node.

    Second-order central differences inside, second-order one-sided
    differences at the two ends, all written in terms of divided
    differences so that adding a constant cannot change the result. On
    ``S2`` the result is projected onto the tangent plane at each sample.
    """
    vals = traj.values
    widths = np.diff(traj.grid)
    if vals.ndim == 2:
        widths = widths[:, None]
    slope = np.diff(vals, axis=0) / widths
    left, right = widths[:-1], widths[1:]
    deriv = np.empty_like(vals)
    deriv[1:-1] = (right * slope[:-1] + left * slope[1:]) / (left + right)
    deriv[0] = slope[0] - widths[0] * (slope[1] - slope[0]) / (widths[0] + widths[1])
    deriv[-1] = slope[-1] + widths[-1] * (slope[-1] - slope[-2]) / (widths[-2] + widths[-1])
    if traj.tag == "S2":
        deriv = _project_tangent(traj.values, deriv)
    return deriv


def _speed(traj):
    deriv = gradient(traj)
    return np.abs(deriv) if deriv.ndim == 1 else np.linalg.norm(deriv, axis=1)


def curve_length(traj):
    """Length of the curve, the trapezoidal integral of its speed."""
    return float(np.trapezoid(_speed(traj), traj.grid))


def normalize_length(traj):
    """Rescale an ``Rn`` trajectory so that its length is one.

    Raises
    ------
    ValueError
        If the trajectory is constant (zero length).
    """
    if traj.tag != "Rn":
        raise ValueError("normalize_length applies to Rn trajectories only")
    length = curve_length(traj)
    if not length > 1e-12:
        raise ValueError("trajectory has zero length and cannot be normalized")
    return traj.with_values(traj.values / length)


def transport_to(vectors, points, to):
    """Vectorized :func:`parallel_transport_s2` without input checks.

    `vectors` and `points` have shape ``(N, 3)``; `to` is a single point.
    """
    to = np.asarray(to, dtype=float)
    total = points + to
    sq = np.sum(total * total, axis=1, keepdims=True)
    if np.any(sq < 1e-18):
        raise ValueError("cannot transport between antipodal points")
    return vectors - 2.0 * (vectors @ to)[:, None] * total / sq


def parallel_transport_s2(v, start, end):
    """Parallel transport of tangent vector `v` at `start` to `end` on S2.

    Transport follows the shortest great circle, so `start` and `end` must
    not be antipodal.
    """
    v = np.asarray(v, dtype=float)
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    if abs(v @ start) > 1e-9 * max(1.0, np.linalg.norm(v)):
        raise ValueError("v is not tangent at the starting point")
    total = start + end
    if np.linalg.norm(total) < 1e-9:
        raise ValueError("cannot transport between antipodal points")
    return v - 2.0 * (v @ end) * total / (total @ total)


def apply_rotation(traj, rotation):
    """Rotate every sample of an ``Rn`` trajectory by `rotation`."""
    mat = check_rotation(rotation)
    if traj.tag != "Rn":
        raise ValueError("rotations act on Rn trajectories only")
    if mat.shape[0] != traj.dim:
        raise ValueError(
            f"rotation is {mat.shape[0]}x{mat.shape[0]} but trajectory has dimension {traj.dim}"
        )
    return traj.with_values(traj.values @ mat.T)
