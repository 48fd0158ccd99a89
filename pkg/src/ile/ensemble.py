"""Augmentation-ensemble inference.

All A augmented copies of a sample are scored by the model, giving an A x C
matrix of posteriors. The per-class standard deviation across the ensemble is
subtracted from every row as a disagreement penalty, the row whose best
penalized score is highest wins, and that row's *unscaled* distribution is
what the confidence metrics see.
"""

from dataclasses import dataclass

import numpy as np

from . import augment
from .classifier import predict_proba_batch


@dataclass
class EnsembleResult:
    chosen_index: int
    distribution: np.ndarray  # unscaled posterior of the chosen augmentation
    sigma: np.ndarray  # per-class std across the ensemble
    scaled_max: float  # best penalized score of the chosen row


def select_distribution(posteriors, population_std=True) -> EnsembleResult:
    """Pick the winning row of an (A, C) posterior matrix.

    ``population_std`` selects the divide-by-A std (well defined at A=1);
    the sample std (divide by A-1) is available as a variant and treated as
    zero when A=1. Ties go to the lowest row index.
    """
    z = np.asarray(posteriors, dtype=np.float64)
    ddof = 0 if population_std else 1
    if z.shape[0] > ddof:
        sigma = z.std(axis=0, ddof=ddof)
    else:
        sigma = np.zeros(z.shape[1])
    row_best = (z - sigma).max(axis=1)
    a = int(np.argmax(row_best))
    return EnsembleResult(
        chosen_index=a,
        distribution=z[a].copy(),
        sigma=sigma,
        scaled_max=float(row_best[a]),
    )


def ensemble_predict(model, plan, sample, seed, population_std=True) -> EnsembleResult:
    """Score all augmentations of ``sample`` and select the winner."""
    vectors = augment.apply(plan, sample, seed)
    z = predict_proba_batch(model, np.stack(vectors))
    return select_distribution(z, population_std=population_std)
