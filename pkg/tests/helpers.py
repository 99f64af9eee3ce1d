import numpy as np

from elasticdepth.geometry import Trajectory


def r1(grid, fn):
    return Trajectory(grid, fn(grid), "R1")


def great_circle(grid, start, direction, speed):
    """Unit-speed-scaled arc from `start` along the tangent `direction`."""
    start = np.asarray(start, float) / np.linalg.norm(start)
    direction = np.asarray(direction, float)
    direction = direction - (direction @ start) * start
    direction /= np.linalg.norm(direction)
    angle = speed * np.asarray(grid)[:, None]
    return Trajectory(grid, np.cos(angle) * start + np.sin(angle) * direction, "S2")
