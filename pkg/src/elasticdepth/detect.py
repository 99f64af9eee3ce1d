"""Depth boxplots and depth thresholding for flagging shape outliers.

The boxplot is one sided: depths only run from the deepest curve outward.
With ``m`` the median depth and ``IQR = max(depth) - m``, the whisker is
``c = m - k * IQR`` and a trajectory is flagged when its depth is strictly
below ``c``. The thresholded variant also requires the depth to be below
the ``(1 - p)`` quantile of the depths, so that at most a ``1 - p``
fraction can be flagged.
"""

from dataclasses import dataclass

import numpy as np

from .depth import DepthValues, depths_of

__all__ = [
    "BoxplotConfig",
    "BoxplotStats",
    "OutlierReport",
    "depth_boxplot",
    "depth_boxplot_thresholded",
    "detect",
]

CHANNELS = ("amplitude", "phase")


@dataclass(frozen=True)
class BoxplotConfig:
    """Whisker multiplier `k` and optional quantile threshold `p`."""

    k: float = 2.0
    p: float = None

    def __post_init__(self):
        if not (np.isfinite(self.k) and self.k > 0):
            raise ValueError("k must be a positive number")
        if self.p is not None and not 0 < self.p < 1:
            raise ValueError("p must lie strictly between 0 and 1")


@dataclass(frozen=True, eq=False)
class BoxplotStats:
    """Summary of a depth boxplot on one channel.

    `median` is the median depth used by the whisker, `deepest` the largest
    depth (the centre of the boxplot) and `deepest_index` where it occurs.
    """

    median: float
    deepest: float
    deepest_index: int
    iqr: float
    whisker: float
    quantile_cutoff: float
    flags: np.ndarray

    @property
    def outliers(self):
        return np.flatnonzero(self.flags)


def _check_depths(depths):
    depths = np.asarray(depths, dtype=float)
    if depths.ndim != 1 or depths.size < 2:
        raise ValueError("need at least two depth values")
    return depths


def depth_boxplot(depths, k=2.0):
    """Flag depths strictly below ``median - k * (max - median)``.

    Examples
    --------
    >>> stats = depth_boxplot([0.9, 0.8, 0.7, 0.6, 0.5, 0.1], k=1.8)
    >>> round(stats.whisker, 10), stats.outliers
    (0.2, array([5]))
    """
    depths = _check_depths(depths)
    median = float(np.median(depths))
    deepest = int(np.argmax(depths))
    iqr = float(depths[deepest] - median)
    whisker = median - k * iqr
    return BoxplotStats(median, float(depths[deepest]), deepest, iqr, whisker, None, depths < whisker)


def depth_boxplot_thresholded(depths, k=2.0, p=0.95):
    """Depth boxplot that also requires depth below the ``(1 - p)`` quantile.

    The quantile interpolates linearly between order statistics.
    """
    if not 0 < p < 1:
        raise ValueError("p must lie strictly between 0 and 1")
    stats = depth_boxplot(depths, k)
    depths = np.asarray(depths, dtype=float)
    cutoff = float(np.quantile(depths, 1.0 - p))
    flags = depths < min(stats.whisker, cutoff)
    return BoxplotStats(
        stats.median, stats.deepest, stats.deepest_index, stats.iqr, stats.whisker, cutoff, flags
    )


def _boxplot(depths, config):
    if config.p is None:
        return depth_boxplot(depths, config.k)
    return depth_boxplot_thresholded(depths, config.k, config.p)


@dataclass(frozen=True, eq=False)
class OutlierReport:
    """Depths and boxplot results for both channels.

    The scalar fields (`median_depth`, `iqr`, `whisker`, `quantile_cutoff`)
    describe the boxplot of the requested `channel`.
    """

    depths: DepthValues
    channel: str
    config: BoxplotConfig
    amplitude: BoxplotStats
    phase: BoxplotStats

    @property
    def stats(self):
        return getattr(self, self.channel)

    @property
    def median_depth(self):
        return self.stats.median

    @property
    def iqr(self):
        return self.stats.iqr

    @property
    def whisker(self):
        return self.stats.whisker

    @property
    def quantile_cutoff(self):
        return self.stats.quantile_cutoff

    @property
    def flags(self):
        return self.stats.flags

    @property
    def flags_amplitude(self):
        return self.amplitude.flags

    @property
    def flags_phase(self):
        return self.phase.flags

    def to_dict(self):
        def side(stats, depths):
            return {
                "median": stats.median,
                "deepest": stats.deepest,
                "deepest_index": stats.deepest_index,
                "iqr": stats.iqr,
                "whisker": stats.whisker,
                "quantile_cutoff": stats.quantile_cutoff,
                "outliers": [int(i) for i in stats.outliers],
                "flags": [bool(f) for f in stats.flags],
                "depths": [float(d) for d in depths],
            }

        return {
            "channel": self.channel,
            "k": self.config.k,
            "p": self.config.p,
            "median_depth": self.median_depth,
            "iqr": self.iqr,
            "whisker": self.whisker,
            "quantile_cutoff": self.quantile_cutoff,
            "outliers": [int(i) for i in self.stats.outliers],
            "amplitude": side(self.amplitude, self.depths.amplitude),
            "phase": side(self.phase, self.depths.phase),
        }


def report_from_depths(depths, config=BoxplotConfig(), channel="amplitude"):
    if channel not in CHANNELS:
        raise ValueError(f"channel must be one of {CHANNELS}")
    return OutlierReport(
        depths=depths,
        channel=channel,
        config=config,
        amplitude=_boxplot(depths.amplitude, config),
        phase=_boxplot(depths.phase, config),
    )


def detect(sample, config=BoxplotConfig(), channel="amplitude", reference=None, threads=1):
    """Compute elastic depths of `sample` and flag outliers on `channel`."""
    if channel not in CHANNELS:
        raise ValueError(f"channel must be one of {CHANNELS}")
    return report_from_depths(depths_of(sample, reference, threads), config, channel)
