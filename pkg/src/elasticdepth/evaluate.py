"""Scoring and seeded experiment drivers for the simulated models.

Every replication ``r`` of an experiment with master seed ``s`` simulates
its sample from ``derive_seed(s, r)``. Two experiments with the same model,
seed and design therefore see identical samples, and an optional depth
cache lets them share the expensive distance computations.
"""

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata, skew

from .depth import depths_of
from .detect import BoxplotConfig, report_from_depths
from .simulate import PHASE_SCENARIOS, ScenarioSpec, derive_seed, harmonic_sample, sample_scenario

__all__ = [
    "F1Breakdown",
    "ExperimentReport",
    "f1_score",
    "rank_experiment",
    "f1_experiment",
    "k_sensitivity_sweep",
    "undersampling_skewness",
    "summarize",
]

DEFAULT_K_VALUES = tuple(np.round(np.arange(1.0, 3.0001, 0.25), 2))


@dataclass(frozen=True)
class F1Breakdown:
    tp: int
    fp: int
    fn: int
    tn: int
    f1: float


def f1_score(flags, labels):
    """Confusion counts and F1 of outlier `flags` against true `labels`.

    F1 is ``2 tp / (2 tp + fn + fp)``, and 0 when nothing is flagged and
    nothing is an outlier.

    Examples
    --------
    >>> f1_score([1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0], [1, 1, 1, 1, 1, 1, 1, 1, 0, 1, 1])
    F1Breakdown(tp=8, fp=1, fn=2, tn=0, f1=0.8421052631578947)
    """
    flags = np.asarray(flags, dtype=bool)
    labels = np.asarray(labels, dtype=bool)
    if flags.shape != labels.shape or flags.ndim != 1:
        raise ValueError(f"flags and labels differ in length ({flags.size} vs {labels.size})")
    tp = int(np.sum(flags & labels))
    fp = int(np.sum(flags & ~labels))
    fn = int(np.sum(~flags & labels))
    tn = int(np.sum(~flags & ~labels))
    denom = 2 * tp + fn + fp
    return F1Breakdown(tp, fp, fn, tn, 2 * tp / denom if denom else 0.0)


def _rate(num, den):
    return num / den if den else float("nan")


def summarize(kind, records):
    """Aggregate statistics of an experiment from its per-replication records."""
    if kind == "rank":
        ranks = np.array([r["rank"] for r in records], dtype=float)
        return {
            "mean_rank": float(np.mean(ranks)),
            "rank_one_fraction": float(np.mean(ranks == 1.0)),
            "max_rank": float(np.max(ranks)),
        }
    if kind == "f1":
        f1 = np.array([r["f1"] for r in records], dtype=float)
        q1, med, q3 = np.quantile(f1, [0.25, 0.5, 0.75])
        return {
            "mean_f1": float(np.mean(f1)),
            "q1_f1": float(q1),
            "median_f1": float(med),
            "q3_f1": float(q3),
            "min_f1": float(np.min(f1)),
        }
    if kind == "ksweep":
        ks = sorted({r["k"] for r in records})
        tpr, tnr = [], []
        for k in ks:
            rows = [r for r in records if r["k"] == k]
            tpr.append(float(np.nanmean([_rate(r["tp"], r["tp"] + r["fn"]) for r in rows])))
            tnr.append(float(np.mean([_rate(r["tn"], r["tn"] + r["fp"]) for r in rows])))
        return {"k": [float(k) for k in ks], "tpr": tpr, "tnr": tnr}
    raise ValueError(f"unknown experiment kind {kind!r}")


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    """Per-replication records of an experiment and their summary.

    `summary` is always ``summarize(kind, records)`` plus any entries from
    side demonstrations stored in `extras`.
    """

    kind: str
    model_id: object
    replications: int
    seed: int
    settings: dict
    records: list
    extras: dict = field(default_factory=dict)

    @property
    def summary(self):
        out = summarize(self.kind, self.records)
        out.update(self.extras)
        return out

    def __getattr__(self, name):
        # mean_f1, mean_rank, tpr, tnr, ... straight from the summary
        if name.startswith("_"):
            raise AttributeError(name)
        summary = self.summary
        if name in summary:
            return summary[name]
        raise AttributeError(name)

    def to_dict(self):
        return {
            "kind": self.kind,
            "model": self.model_id,
            "replications": self.replications,
            "seed": self.seed,
            "settings": self.settings,
            "summary": self.summary,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self):
        """One row per record (per replication, and per ``k`` for sweeps)."""
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(self.records[0]), lineterminator="\n")
        writer.writeheader()
        for row in self.records:
            writer.writerow({key: _cell(value) for key, value in row.items()})
        return buf.getvalue()


def _cell(value):
    if isinstance(value, float):
        return repr(value)
    return value


def _channel(model_id):
    return "phase" if model_id in PHASE_SCENARIOS else "amplitude"


def _check_replications(replications):
    if int(replications) < 1:
        raise ValueError("replications must be at least 1")
    return int(replications)


def _replicate(model_id, index, seed, design, threads, cache):
    spec = ScenarioSpec(model=model_id, seed=derive_seed(seed, index), **design)
    key = (spec.model, spec.n_inlier, spec.n_outlier, spec.grid_size, spec.phase_noise_sigma,
           spec.magnitude_outlier_fraction, spec.magnitude_shift, spec.seed)
    if cache is not None and key in cache:
        depths, labels = cache[key]
    else:
        sample = sample_scenario(spec)
        depths = depths_of(sample.trajectories, threads=threads)
        labels = sample.shape_outlier_labels
        if cache is not None:
            cache[key] = (depths, labels)
    return spec, depths, labels


def rank_experiment(model_id, replications=100, seed=0, threads=1, cache=None, **design):
    """Rank of a single planted outlier among 99 inliers.

    Trajectories are sorted by ascending depth (rank 1 is the most
    outlying) with tied depths sharing their average rank. The amplitude
    depth is used for the amplitude models and the phase depth for the
    phase scenarios; both ranks are recorded.
    """
    replications = _check_replications(replications)
    design = {"n_inlier": 99, "n_outlier": 1, **design}
    records = []
    for r in range(replications):
        spec, depths, labels = _replicate(model_id, r, seed, design, threads, cache)
        target = int(np.flatnonzero(labels)[0])
        rank_a = float(rankdata(depths.amplitude)[target])
        rank_p = float(rankdata(depths.phase)[target])
        records.append({
            "replication": r,
            "seed": spec.seed,
            "channel": _channel(spec.model),
            "outlier_index": target,
            "rank_amplitude": rank_a,
            "rank_phase": rank_p,
            "rank": rank_p if _channel(spec.model) == "phase" else rank_a,
        })
    return ExperimentReport("rank", spec.model, replications, seed, {"design": design}, records)


def f1_experiment(model_id, replications=100, config=BoxplotConfig(k=1.8), seed=0, threads=1,
                  cache=None, **design):
    """F1 of the depth boxplot on the 90 inlier / 10 outlier design.

    Amplitude depths are used for the amplitude models and phase depths for
    the phase scenarios. Magnitude outliers count as inliers.
    """
    replications = _check_replications(replications)
    design = {"n_inlier": 90, "n_outlier": 10, **design}
    records = []
    for r in range(replications):
        spec, depths, labels = _replicate(model_id, r, seed, design, threads, cache)
        channel = _channel(spec.model)
        flags = report_from_depths(depths, config, channel).flags
        score = f1_score(flags, labels)
        records.append({"replication": r, "seed": spec.seed, "channel": channel, **vars(score)})
    settings = {"k": config.k, "p": config.p, "design": design}
    return ExperimentReport("f1", spec.model, replications, seed, settings, records)


def undersampling_skewness(grid_sizes=(20, 80), n=100, seed=0, threads=1):
    """Sample skewness of amplitude depths of one harmonic sample per grid size.

    The same curves (21 harmonics) are sampled at every grid size; below
    the Nyquist rate poor alignments pile depths up on the low side.
    """
    out = {}
    for size in grid_sizes:
        depths = depths_of(harmonic_sample(n, size, seed), threads=threads)
        out[str(size)] = float(skew(depths.amplitude))
    return out


def k_sensitivity_sweep(model_id, k_values=DEFAULT_K_VALUES, replications=100, seed=0, threads=1,
                        cache=None, undersampling=True, **design):
    """True positive and true negative rates of the boxplot over `k`.

    Each replication's depths are computed once and thresholded at every
    `k`. Rates are averaged over replications. With `undersampling` the
    report also carries the skewness of amplitude depths of a harmonic
    sample at 20 and 80 grid points.
    """
    k_values = [float(k) for k in k_values]
    if not k_values:
        raise ValueError("k_values must not be empty")
    replications = _check_replications(replications)
    design = {"n_inlier": 90, "n_outlier": 10, **design}
    records = []
    for r in range(replications):
        spec, depths, labels = _replicate(model_id, r, seed, design, threads, cache)
        channel = _channel(spec.model)
        for k in k_values:
            flags = report_from_depths(depths, BoxplotConfig(k=k), channel).flags
            score = f1_score(flags, labels)
            records.append({"replication": r, "seed": spec.seed, "k": k, **vars(score)})
    extras = {}
    if undersampling:
        extras["undersampling_skewness"] = undersampling_skewness(seed=seed, threads=threads)
    settings = {"k_values": k_values, "design": design}
    return ExperimentReport("ksweep", spec.model, replications, seed, settings, records, extras)
