"""Read storm tracks from a CSV, map them to the sphere and rank them by depth.

A synthetic file stands in for real best-track data: most storms drift west
then recurve north-east, one heads straight north.
"""

import tempfile
from pathlib import Path

import numpy as np

from elasticdepth.depth import depths_of
from elasticdepth.io import parse_hurricane_tracks

rng = np.random.default_rng(7)
rows = ["storm_id,timestamp,lat,lon"]
for s in range(12):
    n = int(rng.integers(28, 40))
    t = np.linspace(0, 1, n)
    lat0, lon0 = 12 + rng.normal(0, 1.5), -35 + rng.normal(0, 3)
    if s == 11:
        lat, lon = lat0 + 25 * t, lon0 + 0 * t
    else:
        lat = lat0 + 22 * t**2 + rng.normal(0, 0.1, n)
        lon = lon0 - 40 * t + 45 * t**3 + rng.normal(0, 0.1, n)
    rows += [f"S{s:02d},{6 * 3600 * k},{la:.2f},{lo:.2f}" for k, (la, lo) in enumerate(zip(lat, lon))]

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "tracks.csv"
    path.write_text("\n".join(rows) + "\n")
    ids, tracks = parse_hurricane_tracks(path, min_obs=25)

depths = depths_of(tracks)
order = np.argsort(depths.amplitude)
print("least deep storms:", [(ids[i], round(float(depths.amplitude[i]), 3)) for i in order[:3]])
print("deepest storm:", ids[order[-1]])
