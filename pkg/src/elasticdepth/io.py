"""Reading and writing trajectory files, labels and hurricane tracks.

Trajectory files are CSV. An optional first line ``# manifold: <tag>``
declares the manifold (``R1``, ``Rn`` or ``S2``). For ``R1`` the next row
is ``t, <grid...>`` and every later row is ``<id>, <values...>``. For
``Rn`` and ``S2`` the header is ``t, dim, <grid...>`` and each trajectory
takes ``dim`` consecutive rows ``<id>, <coordinate>, <values...>`` with
coordinates ``0 .. dim-1`` in order. Without the declaration a file with a
``dim`` column is read as ``Rn``.
"""

import csv
import io
import logging
import warnings
from datetime import datetime

import numpy as np

from .geometry import TAGS, Trajectory, check_grid, resample, uniform_grid

__all__ = [
    "TrajectoryFileError",
    "parse_trajectory_csv",
    "read_trajectory_csv",
    "load_trajectories",
    "write_trajectory_csv",
    "trajectory_csv",
    "labels_csv",
    "write_labels_csv",
    "read_labels_csv",
    "parse_hurricane_tracks",
    "lat_lon_to_unit",
]

log = logging.getLogger(__name__)

UNIT_TOL = 1e-6
RENORMALIZE_TOL = 1e-3
HURRICANE_MIN_OBS = 25
HURRICANE_GRID = 50


class TrajectoryFileError(ValueError):
    """Malformed input file; the message names the offending line."""


def _fail(source, line, message):
    raise TrajectoryFileError(f"{source}:{line}: {message}")


def _floats(cells, source, line):
    try:
        return np.array([float(c) for c in cells])
    except ValueError as exc:
        _fail(source, line, f"non-numeric value ({exc})")


def _rows(text):
    # (line number, cells) for every non-blank line
    for number, cells in enumerate(csv.reader(io.StringIO(text)), start=1):
        cells = [c.strip() for c in cells]
        if cells and any(cells):
            yield number, cells


def _unit_rows(values, source, line):
    norms = np.linalg.norm(values, axis=1)
    worst = float(np.max(np.abs(norms - 1.0)))
    if worst > RENORMALIZE_TOL:
        _fail(source, line, f"S2 values are not unit vectors (norm off by {worst:.3g})")
    if worst > UNIT_TOL:
        warnings.warn(
            f"{source}:{line}: S2 norms off by up to {worst:.3g}; renormalized", stacklevel=3
        )
    return values / norms[:, None]


def parse_trajectory_csv(path):
    """Read a trajectory file; see the module docstring for the layout.

    Raises
    ------
    TrajectoryFileError
        On a bad grid, ragged or non-numeric rows, misordered coordinates,
        or S2 values whose norms are off by more than 1e-3. Norms off by
        more than 1e-6 are renormalized with a warning.
    """
    return load_trajectories(path)[1]


def load_trajectories(path):
    """Like :func:`parse_trajectory_csv` but returns ``(ids, trajectories)``."""
    with open(path, newline="") as fh:
        text = fh.read()
    return _parse(text, str(path))


def read_trajectory_csv(text, source="<string>"):
    """Parse trajectory CSV content held in a string into ``(ids, trajectories)``."""
    return _parse(text, source)


def _parse(text, source):
    tag = None
    lines = text.splitlines()
    start = 0
    while start < len(lines) and (not lines[start].strip() or lines[start].lstrip().startswith("#")):
        comment = lines[start].lstrip().lstrip("#").strip()
        if comment.lower().startswith("manifold"):
            tag = comment.split(":", 1)[-1].strip()
            if tag not in TAGS:
                _fail(source, start + 1, f"unknown manifold {tag!r}; expected one of {TAGS}")
        start += 1
    rows = [(n + start, cells) for n, cells in _rows("\n".join(lines[start:]))]
    if not rows:
        _fail(source, start + 1, "missing grid row")
    line, header = rows[0]
    if header[0].lower() != "t":
        _fail(source, line, "first row must start with 't' followed by the grid")
    has_dim = len(header) > 1 and header[1].lower() == "dim"
    if tag is None:
        tag = "Rn" if has_dim else "R1"
    if (tag == "R1") == has_dim:
        _fail(source, line, f"{tag} files {'must not' if tag == 'R1' else 'must'} have a 'dim' column")
    grid = _floats(header[2 if has_dim else 1:], source, line)
    try:
        grid = check_grid(grid)
    except ValueError as exc:
        _fail(source, line, str(exc))
    width = grid.size + (2 if has_dim else 1)
    records = []
    for line, cells in rows[1:]:
        if len(cells) != width:
            _fail(source, line, f"expected {width} fields, found {len(cells)}")
        if has_dim:
            try:
                coord = int(cells[1])
            except ValueError:
                _fail(source, line, f"coordinate index {cells[1]!r} is not an integer")
            records.append((line, cells[0], coord, _floats(cells[2:], source, line)))
        else:
            records.append((line, cells[0], 0, _floats(cells[1:], source, line)))
    if not has_dim:
        return [r[1] for r in records], [Trajectory(grid, r[3], "R1") for r in records]
    ids, out = [], []
    i = 0
    while i < len(records):
        line, ident = records[i][0], records[i][1]
        block = [records[i]]
        while i + len(block) < len(records) and records[i + len(block)][1] == ident:
            block.append(records[i + len(block)])
        coords = [b[2] for b in block]
        if coords != list(range(len(block))):
            _fail(source, line, f"trajectory {ident!r} must list coordinates 0..dim-1 in order")
        values = np.column_stack([b[3] for b in block])
        if tag == "S2":
            if values.shape[1] != 3:
                _fail(source, line, f"S2 trajectory {ident!r} has {values.shape[1]} coordinates")
            values = _unit_rows(values, source, line)
        try:
            out.append(Trajectory(grid, values, tag))
        except ValueError as exc:
            _fail(source, line, str(exc))
        ids.append(ident)
        i += len(block)
    return ids, out


def _fmt(x):
    # shortest repr that round-trips exactly
    return repr(float(x))


def trajectory_csv(trajectories, ids=None):
    """Trajectory file content for a list of trajectories on a common grid."""
    if not trajectories:
        raise ValueError("nothing to write")
    first = trajectories[0]
    for traj in trajectories:
        if traj.tag != first.tag or not np.array_equal(traj.grid, first.grid) or traj.dim != first.dim:
            raise ValueError("trajectories must share manifold, grid and dimension")
    ids = [str(i) for i in (ids if ids is not None else range(len(trajectories)))]
    if len(ids) != len(trajectories):
        raise ValueError("one id per trajectory is required")
    buf = io.StringIO()
    buf.write(f"# manifold: {first.tag}\n")
    writer = csv.writer(buf, lineterminator="\n")
    grid = [_fmt(x) for x in first.grid]
    if first.tag == "R1":
        writer.writerow(["t"] + grid)
        for ident, traj in zip(ids, trajectories):
            writer.writerow([ident] + [_fmt(v) for v in traj.values])
    else:
        writer.writerow(["t", "dim"] + grid)
        for ident, traj in zip(ids, trajectories):
            for d in range(traj.dim):
                writer.writerow([ident, d] + [_fmt(v) for v in traj.values[:, d]])
    return buf.getvalue()


def write_trajectory_csv(path, trajectories, ids=None):
    with open(path, "w", newline="") as fh:
        fh.write(trajectory_csv(trajectories, ids))


def labels_csv(shape, magnitude, ids=None):
    n = len(shape)
    ids = [str(i) for i in (ids if ids is not None else range(n))]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "shape_outlier", "magnitude_outlier"])
    for ident, s, m in zip(ids, shape, magnitude):
        writer.writerow([ident, int(bool(s)), int(bool(m))])
    return buf.getvalue()


def write_labels_csv(path, shape, magnitude, ids=None):
    """Write ``id, shape_outlier, magnitude_outlier`` rows with 0/1 flags."""
    with open(path, "w", newline="") as fh:
        fh.write(labels_csv(shape, magnitude, ids))


def read_labels_csv(path):
    """Return ``(ids, shape, magnitude)`` from a labels file."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    ids = [r["id"] for r in rows]
    shape = np.array([r["shape_outlier"] == "1" for r in rows])
    magnitude = np.array([r["magnitude_outlier"] == "1" for r in rows])
    return ids, shape, magnitude


def lat_lon_to_unit(lat, lon):
    """Unit 3-vectors for latitudes and longitudes in degrees.

    >>> lat_lon_to_unit(0.0, 0.0)
    array([1., 0., 0.])
    """
    phi = np.radians(np.asarray(lat, dtype=float))
    lam = np.radians(np.asarray(lon, dtype=float))
    return np.stack([np.cos(phi) * np.cos(lam), np.cos(phi) * np.sin(lam), np.sin(phi)], axis=-1)


_COLUMNS = {
    "storm_id": ("storm_id", "storm", "id"),
    "timestamp": ("timestamp", "time", "datetime"),
    "lat": ("lat", "lat_degrees", "latitude"),
    "lon": ("lon", "lon_degrees", "longitude"),
}


def _time(cell, source, line):
    try:
        return float(cell)
    except ValueError:
        pass
    try:
        return datetime.fromisoformat(cell).timestamp()
    except ValueError:
        _fail(source, line, f"unreadable timestamp {cell!r}")


def parse_hurricane_tracks(path, min_obs=HURRICANE_MIN_OBS, grid_size=HURRICANE_GRID, bbox=None):
    """Storm tracks from a CSV of ``storm_id, timestamp, lat, lon`` records.

    A header row naming the columns is required. Timestamps are numbers or
    ISO 8601 strings. Each storm's records are ordered by time, mapped to
    the unit sphere, put on [0, 1] by their elapsed time, and resampled to
    `grid_size` equidistant points along great-circle arcs. Storms with
    fewer than `min_obs` records are dropped with a log notice, as are
    storms whose first record lies outside
    ``bbox = (lat_min, lat_max, lon_min, lon_max)`` when it is given.

    Returns
    -------
    ids : list of str
    tracks : list of Trajectory
        ``S2`` trajectories in order of first appearance.
    """
    source = str(path)
    with open(path, newline="") as fh:
        rows = list(_rows(fh.read()))
    if not rows:
        _fail(source, 1, "empty file")
    line, header = rows[0]
    lower = [h.lower() for h in header]
    pos = {}
    for key, names in _COLUMNS.items():
        found = [i for i, h in enumerate(lower) if h in names]
        if not found:
            _fail(source, line, f"missing column {key!r}")
        pos[key] = found[0]
    storms = {}
    for line, cells in rows[1:]:
        if len(cells) != len(header):
            _fail(source, line, f"expected {len(header)} fields, found {len(cells)}")
        lat, lon = _floats([cells[pos["lat"]], cells[pos["lon"]]], source, line)
        if not -90.0 <= lat <= 90.0:
            _fail(source, line, f"latitude {lat} outside [-90, 90]")
        if not -180.0 <= lon <= 180.0:
            _fail(source, line, f"longitude {lon} outside [-180, 180]")
        storms.setdefault(cells[pos["storm_id"]], []).append(
            (_time(cells[pos["timestamp"]], source, line), lat, lon, line)
        )
    target = uniform_grid(grid_size)
    ids, tracks = [], []
    for ident, obs in storms.items():
        if len(obs) < min_obs:
            log.info("dropping storm %s: %d observations (minimum %d)", ident, len(obs), min_obs)
            continue
        obs.sort(key=lambda o: o[0])
        times = np.array([o[0] for o in obs])
        if np.any(np.diff(times) <= 0):
            _fail(source, obs[0][3], f"storm {ident!r} has repeated timestamps")
        if bbox is not None:
            lat_min, lat_max, lon_min, lon_max = bbox
            if not (lat_min <= obs[0][1] <= lat_max and lon_min <= obs[0][2] <= lon_max):
                log.info("dropping storm %s: origin outside the bounding box", ident)
                continue
        grid = (times - times[0]) / (times[-1] - times[0])
        grid[-1] = 1.0
        points = lat_lon_to_unit([o[1] for o in obs], [o[2] for o in obs])
        tracks.append(resample(Trajectory(grid, points, "S2"), target))
        ids.append(ident)
    return ids, tracks
