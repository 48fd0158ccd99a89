"""Accuracy-constrained admission thresholds.

The threshold is learned by sweeping the distinct confidence values observed
on labelled training data and keeping the smallest value whose pass-set label
accuracy meets the target. Learning on training data is deliberate: the model
is most confident on samples it has seen, which makes the learned cut-off
conservative when transferred to the unlabelled pool. If no candidate meets
the target the sentinel +inf admits nothing.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass
class ThresholdPolicy:
    target_accuracy: float  # required accuracy of the admitted set
    value: float  # learned cut-off; +inf admits nothing
    source: str = "train_data"  # "train_data" or "manual"
    strict: bool = False  # False: admit confidence >= value; True: >


def _pass_counts(confidences, correct, strict):
    """Pass-set size and correct count at every distinct candidate value.

    Returns (candidates desc, k, num_correct) where k[i] is the number of
    samples passing candidate i under the admit rule.
    """
    order = np.argsort(-confidences, kind="stable")
    c_sorted = confidences[order]
    cum_correct = np.cumsum(correct[order])
    n = len(c_sorted)
    is_last = np.empty(n, dtype=bool)
    is_last[:-1] = c_sorted[:-1] != c_sorted[1:]
    is_last[-1] = True
    last_idx = np.nonzero(is_last)[0]
    candidates = c_sorted[last_idx]
    if strict:
        # conf > candidate: everything before the candidate's first occurrence
        first_idx = np.concatenate(([0], last_idx[:-1] + 1))
        k = first_idx
        num_correct = np.where(k > 0, cum_correct[np.maximum(k - 1, 0)], 0)
    else:
        k = last_idx + 1
        num_correct = cum_correct[last_idx]
    return candidates, k, num_correct


def threshold_accuracy(scored, t_c, strict=False):
    """Label accuracy among samples passing ``t_c``; None if nothing passes.

    ``scored`` rows are (confidence, predicted_label, true_label).
    """
    if not scored:
        raise DataError("threshold_accuracy needs a non-empty scored list")
    total = 0
    correct = 0
    for conf, pred, true in scored:
        passes = conf > t_c if strict else conf >= t_c
        if passes:
            total += 1
            correct += pred == true
    if total == 0:
        return None
    return correct / total


def learn_threshold(scored, target_accuracy, strict=False) -> float:
    """Smallest observed confidence whose pass set is accurate enough.

    Candidates are exactly the distinct confidence values in ``scored``;
    candidates whose pass set is empty are excluded rather than counted as
    successes. Returns +inf when no candidate qualifies.
    """
    if not scored:
        raise DataError("cannot learn a threshold from an empty scored list")
    confidences = np.array([row[0] for row in scored], dtype=np.float64)
    correct = np.array([row[1] == row[2] for row in scored], dtype=np.int64)
    candidates, k, num_correct = _pass_counts(confidences, correct, strict)
    with np.errstate(invalid="ignore", divide="ignore"):
        q = np.where(k > 0, num_correct / np.maximum(k, 1), np.nan)
    ok = (k > 0) & (q >= target_accuracy)
    if not ok.any():
        return math.inf
    # candidates are in descending order; the smallest qualifying one is last
    return float(candidates[np.nonzero(ok)[0][-1]])


def select_admissions(scored_unlabelled, t_c, strict=False):
    """Admission tuples (id, label, confidence) for samples passing ``t_c``.

    ``scored_unlabelled`` rows are (id, ConfidenceReport).
    """
    out = []
    for sid, report in scored_unlabelled:
        passes = report.combined > t_c if strict else report.combined >= t_c
        if passes:
            out.append((sid, report.predicted_label, report.combined))
    return out
