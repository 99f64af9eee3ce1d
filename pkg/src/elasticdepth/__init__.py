"""Elastic amplitude and phase depths for functional data.

Trajectories on the real line, on ``R^n`` and on the unit sphere are
compared with elastic distances, which separate shape (amplitude) from
timing (phase) differences. Depths derived from these distances feed a
one sided boxplot that flags shape outliers.
"""

__version__ = "0.1.0"

from .alignment import AlignmentResult, align_pair, optimal_rotation, optimal_warping
from .depth import DepthValues, depths_of, elastic_depths, sample_outlyingness
from .detect import (
    BoxplotConfig,
    BoxplotStats,
    OutlierReport,
    depth_boxplot,
    depth_boxplot_thresholded,
    detect,
)
from .distance import (
    DistanceMatrices,
    ElasticDistances,
    amplitude_distance_r1,
    amplitude_distance_rn,
    amplitude_distance_s2,
    distance_matrices,
    elastic_distances,
    phase_distance,
)
from .evaluate import (
    ExperimentReport,
    F1Breakdown,
    f1_experiment,
    f1_score,
    k_sensitivity_sweep,
    rank_experiment,
)
from .geometry import Trajectory, resample, uniform_grid
from .io import parse_hurricane_tracks, parse_trajectory_csv, write_trajectory_csv
from .simulate import LabeledSample, ScenarioSpec, random_warping, sample_scenario
from .transform import QCurve, Warping, srsf, srvf, tsrvf

__all__ = [name for name in dir() if not name.startswith("_")]
