"""Depth skewness of the same curves sampled below and above their Nyquist rate.

The curves carry 21 harmonics. At 20 points they are under-sampled,
alignments degrade and depths pile up on the low side (negative skewness).
"""

from elasticdepth.evaluate import undersampling_skewness

for seed in range(3):
    skew = undersampling_skewness(grid_sizes=(20, 80), seed=seed)
    print(f"seed {seed}: skewness at 20 points {skew['20']:+.3f}, at 80 points {skew['80']:+.3f}")
