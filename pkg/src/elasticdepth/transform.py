"""Square-root transforms and warping functions.

The square-root slope function ``q = f' / sqrt(|f'|)`` turns the
reparameterization action on trajectories into an isometry of L2, which is
what makes registration by L2 matching meaningful.  The same construction is
used for Rn-valued curves (with the Euclidean norm of ``f'``) and, after
parallel transport into a common tangent plane, for curves on the sphere.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import (
    Trajectory,
    check_grid,
    gradient,
    interpolate,
    transport_to,
)

__all__ = [
    "Warping",
    "QCurve",
    "identity_warping",
    "srsf",
    "srvf",
    "tsrvf",
    "default_reference",
    "warp_apply",
    "warp_compose",
    "warp_inverse",
    "warping_srsf",
]

ZERO_SLOPE = 1e-12
TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Warping:
    """A boundary preserving, non-decreasing map of [0, 1] onto itself."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = check_grid(self.grid)
        values = np.array(self.values, dtype=float)
        if values.shape != grid.shape:
            raise ValueError("warping values must match the grid")
        if abs(values[0]) > TIE_TOL or abs(values[-1] - 1.0) > TIE_TOL:
            raise ValueError("warping must fix 0 and 1")
        if np.any(np.diff(values) < -TIE_TOL):
            raise ValueError("warping must be non-decreasing")
        values[0], values[-1] = 0.0, 1.0
        values = np.maximum.accumulate(np.clip(values, 0.0, 1.0))
        grid.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __call__(self, t):
        return np.interp(t, self.grid, self.values)


@dataclass(frozen=True, eq=False)
class QCurve:
    """Square-root representation of a trajectory.

    `kind` is ``"SRSF"``, ``"SRVF"`` or ``"TSRVF"``; for the transported
    variant `reference` holds the common tangent point.
    """

    grid: np.ndarray
    values: np.ndarray
    kind: str
    reference: np.ndarray = None

    @property
    def matrix(self):
        """Values as an ``(N, d)`` array, whatever the dimension."""
        return self.values.reshape(self.grid.size, -1)

    def norm2(self):
        """Squared L2 norm, trapezoidal rule."""
        return float(np.trapezoid(np.sum(self.matrix**2, axis=1), self.grid))


def identity_warping(grid):
    grid = check_grid(grid)
    return Warping(grid, grid.copy())


def _root_scale(deriv, speed):
    out = np.zeros_like(deriv)
    moving = speed >= ZERO_SLOPE
    root = np.sqrt(speed[moving])
    if deriv.ndim == 1:
        out[moving] = deriv[moving] / root
    else:
        out[moving] = deriv[moving] / root[:, None]
    return out


def srsf(traj):
    """Square-root slope function of a real valued trajectory.

    ``q(t) = f'(t) / sqrt(|f'(t)|)``, set to zero where the slope vanishes.
    """
    if traj.tag != "R1":
        raise ValueError("srsf expects an R1 trajectory")
    deriv = gradient(traj)
    return QCurve(traj.grid, _root_scale(deriv, np.abs(deriv)), "SRSF")


def srvf(traj):
    """Square-root velocity function of an Rn trajectory.

    The caller is expected to have length-normalized the curve, in which
    case the result has unit L2 norm up to quadrature error.
    """
    if traj.tag != "Rn":
        raise ValueError("srvf expects an Rn trajectory")
    deriv = gradient(traj)
    return QCurve(traj.grid, _root_scale(deriv, np.linalg.norm(deriv, axis=1)), "SRVF")


def default_reference(trajectories):
    """Normalized Euclidean mean of the starting points of S2 trajectories."""
    starts = np.array([traj.values[0] for traj in trajectories])
    mean = starts.mean(axis=0)
    norm = np.linalg.norm(mean)
    if norm < 1e-12:
        raise ValueError("starting points average to zero; pass a reference point")
    return mean / norm


def tsrvf(traj, reference):
    """Transported square-root velocity field of a curve on the sphere.

    Every velocity ``f'(t)`` is parallel transported from ``f(t)`` to the
    tangent plane at `reference` and divided by ``sqrt(|f'(t)|)``.
    """
    if traj.tag != "S2":
        raise ValueError("tsrvf expects an S2 trajectory")
    ref = np.asarray(reference, dtype=float)
    if abs(np.linalg.norm(ref) - 1.0) > 1e-9:
        raise ValueError("reference point must lie on the unit sphere")
    deriv = gradient(traj)
    moved = transport_to(deriv, traj.values, ref)
    moved -= np.outer(moved @ ref, ref)
    return QCurve(traj.grid, _root_scale(moved, np.linalg.norm(deriv, axis=1)), "TSRVF", ref)


def warp_apply(traj, warping):
    """Compose a trajectory with a warping, ``(f o gamma)(t) = f(gamma(t))``."""
    if not np.array_equal(traj.grid, warping.grid):
        values = interpolate(traj, warping(traj.grid))
    else:
        values = interpolate(traj, warping.values)
    return Trajectory(traj.grid, values, traj.tag)


def warp_compose(outer, inner):
    """``(outer o inner)(t)`` sampled on the grid of `inner`."""
    return Warping(inner.grid, outer(inner.values))


def warp_inverse(warping):
    """Numerical inverse obtained by swapping the axes and re-interpolating."""
    steps = np.diff(warping.values)
    if np.any(steps < TIE_TOL):
        raise ValueError("warping is flat on a grid interval and cannot be inverted")
    return Warping(warping.grid, np.interp(warping.grid, warping.values, warping.grid))


def warping_srsf(warping):
    """``sqrt(gamma')`` at every grid node."""
    deriv = np.gradient(warping.values, warping.grid, edge_order=2)
    return np.sqrt(np.maximum(deriv, 0.0))
