"""Simulate a Model 1 sample, compute elastic depths and flag shape outliers.

Run with ``python3 demos/outlier_detection.py``.
"""

import numpy as np

from elasticdepth.depth import depths_of
from elasticdepth.detect import BoxplotConfig, report_from_depths
from elasticdepth.evaluate import f1_score
from elasticdepth.simulate import ScenarioSpec, sample_scenario

sample = sample_scenario(ScenarioSpec(model=1, seed=42))
depths = depths_of(sample.trajectories)

report = report_from_depths(depths, BoxplotConfig(k=1.8))
print(f"median depth {report.median_depth:.3f}, whisker at {report.whisker:.3f}")
print("flagged:", np.flatnonzero(report.flags).tolist())
print("planted:", np.flatnonzero(sample.shape_outlier_labels).tolist())
print("magnitude outliers (should not be flagged):", np.flatnonzero(sample.magnitude_outlier_labels).tolist())
print(f"F1 = {f1_score(report.flags, sample.shape_outlier_labels).f1:.3f}")

# the deepest curve is the sample's elastic median
print("deepest curve:", int(np.argmax(depths.amplitude)))
