"""Optimal warping and rotation between square-root representations."""

from dataclasses import dataclass, field

import numpy as np

from . import _dp
from .geometry import is_uniform, normalize_length
from .transform import Warping, default_reference, srsf, srvf, tsrvf

__all__ = [
    "AlignmentResult",
    "STEPS",
    "optimal_warping",
    "optimal_rotation",
    "align_pair",
    "represent",
    "register",
]

STEPS = _dp.coprime_steps(6)
_TABLES = _dp.step_tables(STEPS)
MAX_ROUNDS = 20
ROUND_TOL = 1e-8
MAX_SLOPE = 6.0
REFINE_TOL = 1e-4


@dataclass(frozen=True, eq=False)
class AlignmentResult:
    """Outcome of registering a second curve onto a first.

    Attributes
    ----------
    warping : Warping
        Optimal reparameterization of the second curve.
    rotation : ndarray or None
        Optimal rotation of the second curve (Rn only).
    residual_cost : float
        Squared L2 distance between the first representation and the warped,
        rotated second one.
    inner : float
        L2 inner product between the same two functions.
    norms : tuple of float
        Squared L2 norms of the first and of the warped second function.
    root_slope_integral : float
        Integral of ``sqrt(gamma')``, used for the phase distance.
    history : list of float
        Objective after each alternation round (a single entry unless the
        rotation is optimized).
    """

    warping: Warping
    rotation: np.ndarray
    residual_cost: float
    inner: float
    norms: tuple
    root_slope_integral: float
    history: list = field(default_factory=list)


def _as_matrix(q):
    return np.ascontiguousarray(q.matrix, dtype=float)


def _check_pair(q1, q2):
    if q1.kind != q2.kind:
        raise ValueError(f"cannot align {q1.kind} with {q2.kind}")
    if q1.grid.shape != q2.grid.shape or not np.allclose(q1.grid, q2.grid, rtol=0, atol=1e-12):
        raise ValueError("curves are sampled on different grids; resample them onto a common uniform grid")
    if not is_uniform(q1.grid):
        raise ValueError("registration needs a uniform grid; resample the trajectories first")
    if q1.matrix.shape != q2.matrix.shape:
        raise ValueError("curves have different dimensions")


def _kabsch(cross, tol=1e-10):
    u, s, vt = np.linalg.svd(cross)
    dim = cross.shape[0]
    if s[0] <= 1e-300 or (dim >= 2 and s[dim - 2] <= tol * s[0]):
        return np.eye(dim), True
    diag = np.ones(dim)
    diag[-1] = np.sign(np.linalg.det(u @ vt)) or 1.0
    return (u * diag) @ vt, False


def _tables(steps):
    return _TABLES if steps is STEPS else _dp.step_tables(steps)


def _improve(m1, m2, h, pos, refine):
    if refine:
        pos = _dp.refine_positions(m1, m2, pos, MAX_SLOPE, REFINE_TOL)
    return pos, _dp.node_terms(m1, m2, pos, h)


def register(m1, m2, h, rotate=False, steps=STEPS, refine=True):
    """Low-level registration of ``(N, d)`` arrays on a uniform grid.

    The lattice path found by dynamic programming seeds a continuous local
    refinement of the warping at every node (skipped with
    ``refine=False``). Returns ``(cost, positions, rotation, inner, norm1,
    norm2, history)`` where `positions` is the warping at each node in
    index units.
    """
    tables = _tables(steps)
    table = _dp.warped_table(m2, tables)
    if not rotate:
        _, pi, pj = _dp.dp_path(m1, m2, tables, h, table)
        pos, (cross, n1, n2) = _improve(m1, m2, h, _dp.path_positions(pi, pj), refine)
        cost = _dp.node_residual(m1, m2, pos, h)
        return cost, pos, None, float(np.trace(cross)), n1, n2, [cost]
    # the first step fits a rotation at the identity warping; starting this
    # way makes the whole alternation equivariant under rotations of m2
    pos = np.arange(m1.shape[0], dtype=float)
    cross, n1, n2 = _dp.node_terms(m1, m2, pos, h)
    rot, _ = _kabsch(cross)
    history = [max(n1 + n2 - 2.0 * float(np.sum(rot * cross)), 0.0)]
    for _ in range(MAX_ROUNDS):
        rotated = np.ascontiguousarray(m2 @ rot.T)
        _, pi, pj = _dp.dp_path(m1, rotated, tables, h, _dp.rotate_table(table, rot))
        candidates = [_dp.path_positions(pi, pj), pos]
        best = None
        for start in candidates:
            trial, _ = _improve(m1, rotated, h, start, refine)
            score = _dp.node_terms(m1, rotated, trial, h)[0].trace()
            if best is None or score > best[0]:
                best = (score, trial)
        # the previous warping stays a candidate, so the objective never rises
        pos = best[1]
        cross, n1, n2 = _dp.node_terms(m1, m2, pos, h)
        rot, _ = _kabsch(cross)
        inner = float(np.sum(rot * cross))
        history.append(max(n1 + n2 - 2.0 * inner, 0.0))
        if history[-2] - history[-1] <= ROUND_TOL * max(history[-2], 1e-300):
            break
    cost = _dp.node_residual(m1, np.ascontiguousarray(m2 @ rot.T), pos, h)
    return cost, pos, rot, inner, n1, n2, history


def _result(grid, cost, pos, rot, inner, n1, n2, history):
    h = grid[1] - grid[0]
    values = pos * h
    values[0] = 0.0
    values[-1] = 1.0
    return AlignmentResult(
        warping=Warping(grid, values),
        rotation=rot,
        residual_cost=float(max(cost, 0.0)),
        inner=float(inner),
        norms=(float(n1), float(n2)),
        root_slope_integral=float(_dp.root_slope_integral(pos)),
        history=[float(v) for v in history],
    )


def optimal_warping(q1, q2, steps=STEPS, refine=True):
    """Warping of `q2` that best matches `q1` in L2, by dynamic programming.

    The search runs over monotone lattice paths whose local steps
    ``(di, dj)`` are coprime with entries up to 6, so local slopes lie in
    [1/6, 6]. The best path then seeds a local refinement that moves each
    node continuously within the same slope bounds and never increases the
    cost. The identity path is admissible, hence the residual never
    exceeds ``||q1 - q2||^2``.
    """
    _check_pair(q1, q2)
    h = q1.grid[1] - q1.grid[0]
    out = register(_as_matrix(q1), _as_matrix(q2), h, rotate=False, steps=steps, refine=refine)
    return _result(q1.grid, *out)


def optimal_rotation(q1, q2, full_output=False):
    """Rotation ``O`` in SO(n) maximizing the integral of ``<q1, O q2>``.

    With ``full_output=True`` a ``(rotation, degenerate)`` pair is returned;
    `degenerate` is set when the cross-covariance is too close to rank
    deficient to fix a rotation, in which case the identity is returned.
    """
    _check_pair(q1, q2)
    m1, m2 = q1.matrix, q2.matrix
    if m1.shape[1] < 2:
        raise ValueError("rotations need dimension >= 2")
    cross = np.trapezoid(m1[:, :, None] * m2[:, None, :], q1.grid, axis=0)
    rot, degenerate = _kabsch(cross)
    return (rot, degenerate) if full_output else rot


def represent(traj, reference=None):
    """Square-root representation used for registration of `traj`."""
    if traj.tag == "R1":
        return srsf(traj)
    if traj.tag == "Rn":
        return srvf(normalize_length(traj))
    if reference is None:
        raise ValueError("S2 trajectories need a reference point")
    return tsrvf(traj, reference)


def align_pair(f, g, reference=None):
    """Register `g` onto `f`.

    ``R1`` and ``S2`` curves are aligned over warpings only. ``Rn`` curves
    are length-normalized and aligned over warpings and rotations by
    alternating the two optimizations. Starting from the identity warping
    and rotation, the rotation is fitted first; rounds continue until the
    objective stops improving (relative change below 1e-8) or 20 rounds
    have run.
    """
    if f.tag != g.tag:
        raise ValueError("trajectories live on different manifolds")
    if f.grid.shape != g.grid.shape or not np.array_equal(f.grid, g.grid):
        raise ValueError("trajectories are sampled on different grids; resample first")
    if f.tag == "S2" and reference is None:
        reference = default_reference([f, g])
    q1, q2 = represent(f, reference), represent(g, reference)
    _check_pair(q1, q2)
    h = q1.grid[1] - q1.grid[0]
    out = register(_as_matrix(q1), _as_matrix(q2), h, rotate=f.tag == "Rn")
    return _result(q1.grid, *out)
