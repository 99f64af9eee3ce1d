"""Elastic amplitude and phase distances, and pairwise distance matrices."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._dp import root_slope_integral
from .alignment import AlignmentResult, _result, represent, register
from .geometry import is_uniform
from .transform import default_reference

__all__ = [
    "ElasticDistances",
    "DistanceMatrices",
    "amplitude_distance_r1",
    "amplitude_distance_rn",
    "amplitude_distance_s2",
    "elastic_distances",
    "phase_distance",
    "distance_matrices",
]


@dataclass(frozen=True, eq=False)
class ElasticDistances:
    """Amplitude distance, phase distance and the alignment realizing them."""

    amplitude: float
    phase: float
    alignment: AlignmentResult


@dataclass(frozen=True, eq=False)
class DistanceMatrices:
    """Pairwise amplitude and phase distances of a sample.

    Entry ``(i, j)`` with ``i < j`` holds the distances obtained by
    registering trajectory ``j`` onto trajectory ``i``; the lower triangle
    mirrors it.
    """

    amplitude: np.ndarray
    phase: np.ndarray

    def __len__(self):
        return self.amplitude.shape[0]


def _clipped_arccos(x):
    return float(np.arccos(np.clip(x, -1.0, 1.0)))


def phase_distance(warping):
    """Angle between ``sqrt(gamma')`` and the constant function 1.

    The integral of ``sqrt(gamma')`` is exact for the piecewise linear
    interpolant of the sampled warping.
    """
    steps = np.diff(warping.values)
    widths = np.diff(warping.grid)
    return _clipped_arccos(np.sum(np.sqrt(steps * widths)) / np.sum(widths))


def _amplitude(tag, cost, inner, n1, n2):
    if tag == "Rn":
        # angle between the normalized SRVFs from their chord length, which
        # stays accurate for nearly identical shapes
        a, b = np.sqrt(n1), np.sqrt(n2)
        if not a * b > 0:
            return np.pi / 2
        chord2 = max((cost - (a - b) ** 2) / (a * b), 0.0)
        return float(2.0 * np.arcsin(min(np.sqrt(chord2) / 2.0, 1.0)))
    return float(np.sqrt(max(cost, 0.0)))


def _pair(m1, m2, h, tag):
    out = register(m1, m2, h, rotate=tag == "Rn")
    cost, pos, rot, inner, n1, n2, _ = out
    amplitude = _amplitude(tag, cost, inner, n1, n2)
    phase = _clipped_arccos(root_slope_integral(pos))
    return amplitude, phase, out


def _check_common(trajectories):
    first = trajectories[0]
    for traj in trajectories[1:]:
        if traj.tag != first.tag:
            raise ValueError("all trajectories must share a manifold tag")
        if traj.grid.shape != first.grid.shape or not np.array_equal(traj.grid, first.grid):
            raise ValueError("trajectories are sampled on different grids; resample onto a common uniform grid")
        if traj.dim != first.dim:
            raise ValueError("trajectories have different dimensions")
    if not is_uniform(first.grid):
        raise ValueError("distances need a uniform grid; resample the trajectories first")


def elastic_distances(f, g, reference=None):
    """Amplitude and phase distance between two trajectories.

    `g` is registered onto `f`. For ``S2`` curves both are transported to
    `reference`, by default the normalized mean of their starting points.
    """
    _check_common([f, g])
    if f.tag == "S2" and reference is None:
        reference = default_reference([f, g])
    m1 = represent(f, reference).matrix
    m2 = represent(g, reference).matrix
    h = f.grid[1] - f.grid[0]
    amplitude, phase, out = _pair(np.ascontiguousarray(m1), np.ascontiguousarray(m2), h, f.tag)
    return ElasticDistances(amplitude, phase, _result(f.grid, *out))


def amplitude_distance_r1(f, g):
    """Elastic distance between real valued functions.

    The smallest L2 distance between the SRSF of `f` and the SRSF of `g`
    over all reparameterizations of `g`.
    """
    if f.tag != "R1" or g.tag != "R1":
        raise ValueError("expected R1 trajectories")
    return elastic_distances(f, g)


def amplitude_distance_rn(f, g):
    """Elastic shape distance between Rn curves.

    Both curves are scaled to unit length; the distance is the arc length
    on the unit L2 sphere between their SRVFs after optimizing over
    rotations and reparameterizations of `g`.
    """
    if f.tag != "Rn" or g.tag != "Rn":
        raise ValueError("expected Rn trajectories")
    return elastic_distances(f, g)


def amplitude_distance_s2(f, g, reference=None):
    """Elastic distance between curves on the sphere via their TSRVFs."""
    if f.tag != "S2" or g.tag != "S2":
        raise ValueError("expected S2 trajectories")
    return elastic_distances(f, g, reference)


def distance_matrices(sample, reference=None, threads=1):
    """Amplitude and phase distances between all pairs of `sample`.

    Only the ``n (n - 1) / 2`` pairs ``i < j`` are aligned; each pair is
    independent, so they are spread over `threads` worker threads without
    affecting the result.

    Parameters
    ----------
    sample : sequence of Trajectory
        Trajectories sharing one tag and one uniform grid.
    reference : array_like, optional
        Tangent point for ``S2`` samples. Defaults to the normalized mean of
        the starting points of the whole sample.
    threads : int
        Number of worker threads.
    """
    sample = list(sample)
    if len(sample) < 1:
        raise ValueError("empty sample")
    _check_common(sample)
    tag = sample[0].tag
    if tag == "S2" and reference is None:
        reference = default_reference(sample)
    reps = [np.ascontiguousarray(represent(traj, reference).matrix) for traj in sample]
    h = sample[0].grid[1] - sample[0].grid[0]
    n = len(sample)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def work(chunk):
        return [_pair(reps[i], reps[j], h, tag)[:2] for i, j in chunk]

    threads = max(1, int(threads))
    if threads == 1 or len(pairs) < 2:
        values = work(pairs)
    else:
        size = -(-len(pairs) // (4 * threads))
        chunks = [pairs[k:k + size] for k in range(0, len(pairs), size)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = [v for part in pool.map(work, chunks) for v in part]

    amp = np.zeros((n, n))
    phs = np.zeros((n, n))
    for (i, j), (a, p) in zip(pairs, values):
        amp[i, j] = amp[j, i] = a
        phs[i, j] = phs[j, i] = p
    # self-distances are computed, checked and then zeroed
    for i in range(n):
        a, p, _ = _pair(reps[i], reps[i], h, tag)
        if a > 1e-6 or p > 1e-6:
            raise RuntimeError(f"self distance of trajectory {i} is not zero ({a:.3g}, {p:.3g})")
    return DistanceMatrices(amp, phs)
