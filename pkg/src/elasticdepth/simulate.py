"""Seeded generators for the simulated outlier models.

Every scenario draws from independent named substreams of a counter-based
generator (Philox), so switching one noise source on or off leaves the
draws of all the others untouched.

Models (``t`` in [0, 1], ``e`` a centered Gaussian process with covariance
``exp(-(x - x')**2 / r)``, ``delta ~ N(0, 1)``):

=====  ==========================================  =========================================
model  inliers                                      shape outliers
=====  ==========================================  =========================================
1      ``sin(5 pi t) + 4t + e + delta``, r = 0.5    ``4 sin(5 pi t) + 4t + e + delta``
2      as model 1                                   ``sin(5 pi t) / 6 + 4t + e + delta``
3      ``t^3 - 2t^2 + 0.5t + e``, r = 0.5           ``2t^3 + t^2 - 0.5t + e``
4      as model 1 but r = 50                        as model 1 but r = 2
5      ``sin(2 pi t) + 4t + e + delta``, r = 0.5    ``sin(12 pi t) + 4t + e + delta``
6      as model 1                                   adds ``-2`` before and ``+3`` after a
                                                    jump at ``T ~ U[0.4, 0.6]``
7      as model 1                                   model 1 inlier evaluated at ``gamma(t)``
                                                    for a random warping with sigma = 6
=====  ==========================================  =========================================

The ``"sincos"`` scenario draws inliers around ``sin(2 pi t)`` and outliers
around ``cos(2 pi t)`` with r = 0.5 and no translation.
"""

from dataclasses import dataclass, field

import numpy as np

from .geometry import Trajectory, check_grid, uniform_grid
from .transform import Warping

__all__ = [
    "MODELS",
    "GpConfig",
    "ScenarioSpec",
    "LabeledSample",
    "substream",
    "derive_seed",
    "sample_gp",
    "random_warping",
    "sample_scenario",
    "sincos_scenario",
    "harmonic_sample",
]

MODELS = (1, 2, 3, 4, 5, 6, 7, "sincos")
PHASE_SCENARIOS = (7, "sincos")
OUTLIER_WARP_SIGMA = 6.0
JITTER_RETRIES = 3
HARMONICS = 21

# fixed positions in the spawn key; never reorder
STREAMS = (
    "gp_inlier",
    "gp_outlier",
    "delta",
    "jump",
    "outlier_warp",
    "phase_noise",
    "magnitude",
    "harmonics",
)


def substream(seed, name):
    """Generator for the named substream of a scenario seed."""
    seq = np.random.SeedSequence(int(seed), spawn_key=(STREAMS.index(name),))
    return np.random.Generator(np.random.Philox(seq))


def derive_seed(seed, index):
    """64-bit seed of replication `index` under a master `seed`."""
    seq = np.random.SeedSequence(int(seed), spawn_key=(1_000_000 + int(index),))
    return int(seq.generate_state(1, np.uint64)[0])


def _named_mean(name):
    means = {
        "zero": lambda t: np.zeros_like(t),
        "sin2pi": lambda t: np.sin(2 * np.pi * t),
        "cos2pi": lambda t: np.cos(2 * np.pi * t),
    }
    if name not in means:
        raise ValueError(f"unknown mean function {name!r}")
    return means[name]


@dataclass(frozen=True)
class GpConfig:
    """Gaussian process with covariance ``exp(-(x - x')**2 / scale)``.

    `mean` is a callable of ``t`` or one of ``"zero"``, ``"sin2pi"``,
    ``"cos2pi"``. `jitter` is added to the diagonal before factorizing and
    is raised tenfold, up to three times, if the factorization fails.
    """

    mean: object = "zero"
    scale: float = 0.5
    jitter: float = 1e-10

    def __post_init__(self):
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise ValueError("covariance scale must be positive")
        if not self.jitter > 0:
            raise ValueError("jitter must be positive")
        if not callable(self.mean):
            _named_mean(self.mean)

    def mean_at(self, t):
        fn = self.mean if callable(self.mean) else _named_mean(self.mean)
        return np.broadcast_to(np.asarray(fn(t), dtype=float), np.shape(t))


def _cholesky(points, scale, jitter):
    diff = points[:, None] - points[None, :]
    cov = np.exp(-(diff ** 2) / scale)
    eye = np.eye(points.size)
    for attempt in range(JITTER_RETRIES + 1):
        try:
            return np.linalg.cholesky(cov + jitter * 10.0 ** attempt * eye)
        except np.linalg.LinAlgError:
            pass
    raise np.linalg.LinAlgError(
        f"covariance factorization failed with jitter up to {jitter * 10.0 ** JITTER_RETRIES:g}"
    )


def _gp_paths(points, scale, jitter, rng, count):
    chol = _cholesky(np.asarray(points, dtype=float), scale, jitter)
    z = rng.standard_normal((count, chol.shape[0]))
    return z @ chol.T


def sample_gp(config, grid, count, rng):
    """`count` R1 trajectories ``mean(t) + e(t)`` drawn on `grid`."""
    grid = check_grid(grid)
    paths = _gp_paths(grid, config.scale, config.jitter, rng, count) + config.mean_at(grid)
    return [Trajectory(grid, row) for row in paths]


def _warping_values(a1, a2, t):
    # The two basis functions are orthonormal, so |v| = |a| and the integral
    # of psi^2 has a closed form; it equals 1 over [0, 1].
    norm = np.hypot(a1, a2)
    if norm == 0.0:
        return np.array(t, dtype=float)
    b1, b2 = a1 / norm, a2 / norm
    c, s = np.cos(norm), np.sin(norm)
    w = 2 * np.pi * t
    int_u = np.sqrt(2) * (b1 * (1 - np.cos(w)) + b2 * np.sin(w)) / (2 * np.pi)
    int_u2 = (
        t
        + (b2 ** 2 - b1 ** 2) * np.sin(2 * w) / (4 * np.pi)
        + b1 * b2 * (1 - np.cos(2 * w)) / (2 * np.pi)
    )
    gamma = c * c * t + 2 * c * s * int_u + s * s * int_u2
    gamma[0], gamma[-1] = 0.0, 1.0
    return np.maximum.accumulate(np.clip(gamma, 0.0, 1.0))


def random_warping(sigma, grid, rng):
    """Random warping from the exponential map on the Hilbert sphere.

    A tangent vector ``v = a1 sqrt(2) sin(2 pi t) + a2 sqrt(2) cos(2 pi t)``
    with ``a1, a2 ~ N(0, sigma^2)`` is mapped to
    ``psi = cos(|v|) + sin(|v|) v / |v|`` and integrated,
    ``gamma(t) = int_0^t psi^2``. The integral is evaluated in closed form.
    """
    if not sigma >= 0:
        raise ValueError("sigma must be nonnegative")
    grid = check_grid(grid)
    a1, a2 = sigma * rng.standard_normal(2)
    return Warping(grid, _warping_values(a1, a2, grid))


@dataclass(frozen=True)
class ScenarioSpec:
    """Parameters of one simulated sample.

    Phase noise is forced off for the phase scenarios (model 7 and
    ``"sincos"``), since it would blur the differences they are built on.
    Magnitude outliers are drawn among the inliers and shifted by
    ``+magnitude_shift`` or ``-magnitude_shift``.
    """

    model: object = 1
    n_inlier: int = 90
    n_outlier: int = 10
    grid_size: int = 30
    phase_noise_sigma: float = 0.1
    magnitude_outlier_fraction: float = 0.1
    magnitude_shift: float = 10.0
    seed: int = 0

    def __post_init__(self):
        model = self.model
        if isinstance(model, str) and model.isdigit():
            model = int(model)
        if model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected 1..7 or 'sincos'")
        object.__setattr__(self, "model", model)
        if self.n_inlier < 0 or self.n_outlier < 0:
            raise ValueError("counts must be nonnegative")
        if self.grid_size < 3:
            raise ValueError("grid_size must be at least 3")
        if self.phase_noise_sigma < 0:
            raise ValueError("phase_noise_sigma must be nonnegative")
        if not 0 <= self.magnitude_outlier_fraction <= 1:
            raise ValueError("magnitude_outlier_fraction must lie in [0, 1]")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if model in PHASE_SCENARIOS:
            object.__setattr__(self, "phase_noise_sigma", 0.0)

    @property
    def size(self):
        return self.n_inlier + self.n_outlier


@dataclass(frozen=True, eq=False)
class LabeledSample:
    """Simulated trajectories, inliers first, with their labels."""

    trajectories: list
    shape_outlier_labels: np.ndarray
    magnitude_outlier_labels: np.ndarray
    spec: ScenarioSpec = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.trajectories)
        shape = np.asarray(self.shape_outlier_labels, dtype=bool)
        mag = np.asarray(self.magnitude_outlier_labels, dtype=bool)
        if shape.shape != (n,) or mag.shape != (n,):
            raise ValueError("label lists must match the number of trajectories")
        if np.any(shape & mag):
            raise ValueError("an index cannot be both a shape and a magnitude outlier")
        object.__setattr__(self, "shape_outlier_labels", shape)
        object.__setattr__(self, "magnitude_outlier_labels", mag)

    def __len__(self):
        return len(self.trajectories)


def _base(t):
    return np.sin(5 * np.pi * t) + 4 * t


# model -> (inlier mean, inlier r, outlier mean, outlier r, translated)
_LAYOUT = {
    1: (_base, 0.5, lambda t: 4 * np.sin(5 * np.pi * t) + 4 * t, 0.5, True),
    2: (_base, 0.5, lambda t: np.sin(5 * np.pi * t) / 6 + 4 * t, 0.5, True),
    3: (
        lambda t: t ** 3 - 2 * t ** 2 + 0.5 * t,
        0.5,
        lambda t: 2 * t ** 3 + t ** 2 - 0.5 * t,
        0.5,
        False,
    ),
    4: (_base, 50.0, _base, 2.0, True),
    5: (
        lambda t: np.sin(2 * np.pi * t) + 4 * t,
        0.5,
        lambda t: np.sin(12 * np.pi * t) + 4 * t,
        0.5,
        True,
    ),
    6: (_base, 0.5, _base, 0.5, True),
    7: (_base, 0.5, _base, 0.5, True),
    "sincos": (_named_mean("sin2pi"), 0.5, _named_mean("cos2pi"), 0.5, False),
}


def _outliers(spec, grid, jitter, extras):
    model = spec.model
    _, _, mean, scale, _ = _LAYOUT[model]
    count = spec.n_outlier
    rng = substream(spec.seed, "gp_outlier")
    if model == 7:
        warp_rng = substream(spec.seed, "outlier_warp")
        rows, warps = [], []
        for _ in range(count):
            gamma = random_warping(OUTLIER_WARP_SIGMA, grid, warp_rng).values
            rows.append(mean(gamma) + _gp_paths(gamma, scale, jitter, rng, 1)[0])
            warps.append(gamma)
        extras["outlier_warpings"] = np.array(warps).reshape(count, grid.size)
        return np.array(rows).reshape(count, grid.size)
    values = mean(grid) + _gp_paths(grid, scale, jitter, rng, count)
    if model == 6:
        jumps = substream(spec.seed, "jump").uniform(0.4, 0.6, size=count)
        values += np.where(grid[None, :] < jumps[:, None], -2.0, 3.0)
        extras["jump_times"] = jumps
    return values


def sample_scenario(spec, jitter=1e-10):
    """Draw the labeled sample described by `spec`.

    Inliers come first, then shape outliers. Afterwards every trajectory is
    composed with a random warping of size ``phase_noise_sigma`` and a
    random ``magnitude_outlier_fraction`` of the inliers is shifted up or
    down by ``magnitude_shift``.
    """
    grid = uniform_grid(spec.grid_size)
    in_mean, in_scale, _, _, translated = _LAYOUT[spec.model]
    extras = {}
    inliers = in_mean(grid) + _gp_paths(
        grid, in_scale, jitter, substream(spec.seed, "gp_inlier"), spec.n_inlier
    )
    values = np.vstack([inliers, _outliers(spec, grid, jitter, extras)])
    if translated:
        delta = substream(spec.seed, "delta").standard_normal(spec.size)
        values += delta[:, None]

    if spec.phase_noise_sigma > 0:
        rng = substream(spec.seed, "phase_noise")
        for row in values:
            gamma = random_warping(spec.phase_noise_sigma, grid, rng).values
            row[:] = np.interp(gamma, grid, row)

    magnitude = np.zeros(spec.size, dtype=bool)
    n_mag = min(int(round(spec.magnitude_outlier_fraction * spec.size)), spec.n_inlier)
    if n_mag > 0:
        rng = substream(spec.seed, "magnitude")
        chosen = rng.choice(spec.n_inlier, size=n_mag, replace=False)
        signs = rng.choice([-1.0, 1.0], size=n_mag)
        values[chosen] += spec.magnitude_shift * signs[:, None]
        magnitude[chosen] = True

    shape = np.zeros(spec.size, dtype=bool)
    shape[spec.n_inlier:] = True
    return LabeledSample(
        [Trajectory(grid, row) for row in values], shape, magnitude, spec, extras
    )


def sincos_scenario(n_inlier=90, n_outlier=10, seed=0, grid_size=30):
    """Pure phase scenario: GP noise around ``sin(2 pi t)`` versus ``cos(2 pi t)``."""
    spec = ScenarioSpec(
        model="sincos",
        n_inlier=n_inlier,
        n_outlier=n_outlier,
        grid_size=grid_size,
        phase_noise_sigma=0.0,
        magnitude_outlier_fraction=0.0,
        seed=seed,
    )
    return sample_scenario(spec)


def harmonic_sample(n=100, grid_size=20, seed=0, harmonics=HARMONICS):
    """Curves built from the first `harmonics` sine frequencies.

    Curve ``i`` is ``sum_j a_ij sin(2 pi j t + phi_ij)`` with
    ``a_ij ~ N(1, 0.3^2)`` and ``phi_ij ~ N(0, 0.3^2)``. The coefficients do
    not depend on `grid_size`, so the same curves can be sampled below and
    above their Nyquist rate (``2 * harmonics`` points).
    """
    if n < 2 or harmonics < 1:
        raise ValueError("need n >= 2 curves and at least one harmonic")
    rng = substream(seed, "harmonics")
    amp = 1.0 + 0.3 * rng.standard_normal((n, harmonics))
    phase = 0.3 * rng.standard_normal((n, harmonics))
    grid = uniform_grid(grid_size)
    freq = 2.0 * np.pi * np.arange(1, harmonics + 1)
    values = np.einsum("nj,njt->nt", amp, np.sin(freq[None, :, None] * grid + phase[:, :, None]))
    return [Trajectory(grid, row[:, None], "R1") for row in values]
