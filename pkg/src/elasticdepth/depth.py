"""Sample elastic depths.

The outlyingness of a trajectory is the median of its distances to every
member of the sample, its own zero self-distance included. Depth is
``1 / (1 + outlyingness)``, computed separately from the amplitude and from
the phase distances.
"""

from dataclasses import dataclass

import numpy as np

from .distance import DistanceMatrices, distance_matrices

__all__ = ["DepthValues", "sample_outlyingness", "elastic_depths", "depths_of"]


@dataclass(frozen=True, eq=False)
class DepthValues:
    amplitude: np.ndarray
    phase: np.ndarray
    outlyingness_amplitude: np.ndarray
    outlyingness_phase: np.ndarray

    def __len__(self):
        return self.amplitude.size

    def channel(self, name):
        if name not in ("amplitude", "phase"):
            raise ValueError(f"unknown channel {name!r}")
        return getattr(self, name)


def _row_medians(matrix):
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("distance matrix must be square")
    if matrix.shape[0] < 2:
        raise ValueError("need at least two trajectories")
    # np.median averages the two central values for even lengths
    return np.median(matrix, axis=1)


def sample_outlyingness(matrices):
    """Row medians of the amplitude and phase distance matrices."""
    return _row_medians(matrices.amplitude), _row_medians(matrices.phase)


def elastic_depths(matrices):
    """Amplitude and phase depths from precomputed distance matrices.

    Examples
    --------
    >>> import numpy as np
    >>> d = np.array([[0., 1., 3.], [1., 0., 2.], [3., 2., 0.]])
    >>> elastic_depths(DistanceMatrices(d, d)).amplitude
    array([0.5       , 0.5       , 0.33333333])
    """
    amp, phs = sample_outlyingness(matrices)
    return DepthValues(1.0 / (1.0 + amp), 1.0 / (1.0 + phs), amp, phs)


def depths_of(sample, reference=None, threads=1):
    """Elastic depths of every trajectory in `sample`."""
    return elastic_depths(distance_matrices(sample, reference=reference, threads=threads))
