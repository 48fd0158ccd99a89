"""Confidence metrics over posterior distributions.

Three metrics cover distinct failure modes: the winning probability itself,
the margin over the runner-up, and the distance to the per-class prototype
(the mean posterior over all training samples assigned to the predicted
class). A weighted combination yields the single confidence the admission
threshold acts on; the distance metric is inverted so that higher is better
everywhere.
"""

from dataclasses import dataclass

import numpy as np

from .datasets import to_arrays
from .classifier import predict_proba_batch
from .ensemble import ensemble_predict
from .errors import ConfigError, DataError, MissingPrototypeError

COMBINE_MODES = ("bounded", "reciprocal")


@dataclass
class PrototypeTable:
    """Per-class mean posterior distributions with sample counts."""

    table: np.ndarray  # (C, C); row y = mean posterior over samples labelled y
    counts: np.ndarray  # (C,) samples per class

    def present(self, label) -> bool:
        return 0 <= label < len(self.counts) and self.counts[label] > 0

    def get(self, label) -> np.ndarray:
        if not self.present(label):
            raise MissingPrototypeError(f"no prototype for class {label}")
        return self.table[label]


@dataclass(frozen=True)
class MetricWeights:
    w_a: float
    w_b: float
    w_c: float

    def __post_init__(self):
        if self.w_a < 0 or self.w_b < 0 or self.w_c < 0:
            raise ConfigError("metric weights must be non-negative")
        if self.w_a + self.w_b + self.w_c <= 0:
            raise ConfigError("metric weights must not all be zero")

    @classmethod
    def equal(cls):
        return cls(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)


@dataclass
class ConfidenceReport:
    predicted_label: int
    runner_up: int
    c_a: float
    c_b: float
    c_c: float
    combined: float


def top_two(dist):
    """Indices of the two largest entries; ties go to the lower index."""
    dist = np.asarray(dist)
    if dist.shape[0] < 2:
        raise DataError("top_two needs at least two classes")
    order = np.argsort(-dist, kind="stable")
    return int(order[0]), int(order[1])


def metric_ca(dist) -> float:
    """The winning posterior probability."""
    return float(np.max(dist))


def metric_cb(dist) -> float:
    """Margin between the winning and runner-up probabilities."""
    y1, y2 = top_two(dist)
    return float(dist[y1] - dist[y2])


def metric_cc(dist, prototypes) -> float:
    """Euclidean distance from the predicted class's prototype distribution."""
    y1, _ = top_two(dist)
    proto = prototypes.get(y1)
    return float(np.linalg.norm(np.asarray(dist) - proto))


def build_prototypes(model, labelled) -> PrototypeTable:
    """Mean posterior per assigned class over the labelled set."""
    if not labelled:
        raise DataError("cannot build prototypes from an empty labelled set")
    X, y = to_arrays(labelled, labels="assigned")
    probs = predict_proba_batch(model, X)
    table = np.zeros((model.C, model.C))
    counts = np.zeros(model.C, dtype=np.int64)
    for cls in range(model.C):
        mask = y == cls
        counts[cls] = mask.sum()
        if counts[cls]:
            table[cls] = probs[mask].mean(axis=0)
    return PrototypeTable(table=table, counts=counts)


def combine(c_a, c_b, c_c, weights, mode="bounded", epsilon=1e-6) -> float:
    """Weighted sum of the three metrics with the distance metric inverted.

    "bounded" inverts via 1/(1+c_c), which stays in (0, 1] and is finite at a
    perfect prototype match; "reciprocal" is the raw 1/c_c with an epsilon
    floor to avoid the singularity at zero.
    """
    if mode == "bounded":
        inv = 1.0 / (1.0 + c_c)
    elif mode == "reciprocal":
        inv = 1.0 / max(c_c, epsilon)
    else:
        raise ConfigError(f"unknown combine mode {mode!r}")
    return weights.w_a * c_a + weights.w_b * c_b + weights.w_c * inv


def metrics_for_sample(
    model, prototypes, plan, sample, seed, population_std=True
):
    """Ensemble-select a distribution and compute the three raw metrics.

    Returns (y1, y2, c_a, c_b, c_c). Raises MissingPrototypeError when the
    predicted class has no prototype; callers skip such samples.
    """
    result = ensemble_predict(
        model, plan, sample, seed, population_std=population_std
    )
    dist = result.distribution
    y1, y2 = top_two(dist)
    proto = prototypes.get(y1)
    c_a = float(dist[y1])
    c_b = float(dist[y1] - dist[y2])
    c_c = float(np.linalg.norm(dist - proto))
    return y1, y2, c_a, c_b, c_c


def score_sample(
    model,
    prototypes,
    plan,
    sample,
    weights,
    mode="bounded",
    seed=0,
    population_std=True,
    epsilon=1e-6,
) -> ConfidenceReport:
    """Full confidence pipeline for one sample: ensemble, metrics, combination."""
    y1, y2, c_a, c_b, c_c = metrics_for_sample(
        model, prototypes, plan, sample, seed, population_std=population_std
    )
    c = combine(c_a, c_b, c_c, weights, mode=mode, epsilon=epsilon)
    return ConfidenceReport(
        predicted_label=y1, runner_up=y2, c_a=c_a, c_b=c_b, c_c=c_c, combined=c
    )


def weights_from_scored(rows) -> MetricWeights:
    """Weights proportional to each metric's top-half label accuracy.

    ``rows`` are (c_a, c_b, c_c, correct) tuples. Samples are ranked
    best-first per metric (ascending for the distance metric) and the
    accuracy of the top half measured; weights are the three accuracies
    normalized to sum to one, falling back to equal when all are zero.
    """
    if not rows:
        raise DataError("cannot calibrate weights from an empty scored list")
    correct = np.array([r[3] for r in rows], dtype=np.float64)
    half = (len(rows) + 1) // 2

    def top_half_accuracy(values, higher_is_better):
        keys = -values if higher_is_better else values
        order = np.argsort(keys, kind="stable")
        return float(correct[order[:half]].mean())

    accs = np.array(
        [
            top_half_accuracy(np.array([r[0] for r in rows]), True),
            top_half_accuracy(np.array([r[1] for r in rows]), True),
            top_half_accuracy(np.array([r[2] for r in rows]), False),
        ]
    )
    total = accs.sum()
    if total <= 0:
        return MetricWeights.equal()
    return MetricWeights(*(accs / total))


def calibrate_weights(
    model, prototypes, plan, calibration, seed, population_std=True
) -> MetricWeights:
    """Score labelled calibration samples and weight the metrics by accuracy."""
    if not calibration:
        raise DataError("cannot calibrate weights on an empty set")
    rows = []
    for s in calibration:
        if s.assigned_label is None:
            raise DataError(f"calibration sample {s.id} has no label")
        try:
            y1, _, c_a, c_b, c_c = metrics_for_sample(
                model, prototypes, plan, s, seed, population_std=population_std
            )
        except MissingPrototypeError:
            continue
        rows.append((c_a, c_b, c_c, y1 == s.assigned_label))
    if not rows:
        raise DataError("no calibration sample could be scored")
    return weights_from_scored(rows)
