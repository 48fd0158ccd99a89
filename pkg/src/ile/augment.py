"""Feature-space augmentations for ensemble scoring.

The transforms are generic stand-ins that work on any flat feature vector:
additive gaussian jitter plus horizontal flip and shift for vectors that are
row-major flattenings of a rows x cols grid. The transform list is fully
config-driven; the original sample is always element 0 of the ensemble.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .seeding import rng


@dataclass(frozen=True)
class Identity:
    def apply(self, features, stream):
        return features.copy()


@dataclass(frozen=True)
class GaussianJitter:
    sigma: float

    def apply(self, features, stream):
        if self.sigma == 0.0:
            return features.copy()
        return features + stream.normal(0.0, self.sigma, size=features.shape)


def _as_grid(features, rows, cols):
    if features.shape != (rows * cols,):
        raise DataError(
            f"grid transform needs {rows * cols} features, got {features.shape}"
        )
    return features.reshape(rows, cols)


@dataclass(frozen=True)
class GridHFlip:
    rows: int
    cols: int

    def apply(self, features, stream):
        return _as_grid(features, self.rows, self.cols)[:, ::-1].reshape(-1).copy()


@dataclass(frozen=True)
class GridShift:
    """Translate the grid by (dx, dy) cells, zero-filling vacated cells."""

    rows: int
    cols: int
    dx: int
    dy: int

    def apply(self, features, stream):
        g = _as_grid(features, self.rows, self.cols)
        out = np.zeros_like(g)
        r0, r1 = max(self.dy, 0), self.rows + min(self.dy, 0)
        c0, c1 = max(self.dx, 0), self.cols + min(self.dx, 0)
        if r0 < r1 and c0 < c1:
            out[r0:r1, c0:c1] = g[r0 - self.dy : r1 - self.dy, c0 - self.dx : c1 - self.dx]
        return out.reshape(-1)


_KINDS = {
    "identity": Identity,
    "gaussian_jitter": GaussianJitter,
    "grid_hflip": GridHFlip,
    "grid_shift": GridShift,
}


def make_transform(kind, **params):
    cls = _KINDS.get(kind)
    if cls is None:
        raise ConfigError(f"unknown transform kind {kind!r}")
    try:
        return cls(**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for transform {kind!r}: {exc}") from exc


def transform_to_dict(t) -> dict:
    for kind, cls in _KINDS.items():
        if isinstance(t, cls):
            out = {"kind": kind}
            for name in getattr(cls, "__dataclass_fields__", {}):
                out[name] = getattr(t, name)
            return out
    raise ConfigError(f"unknown transform object {t!r}")


def transform_from_dict(spec) -> object:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"transform spec must be a dict with a 'kind': {spec!r}")
    params = {k: v for k, v in spec.items() if k != "kind"}
    return make_transform(spec["kind"], **params)


@dataclass(frozen=True)
class AugmentationPlan:
    """Ordered transform list; the first entry must be the identity."""

    transforms: tuple

    def __post_init__(self):
        if not self.transforms:
            raise ConfigError("augmentation plan needs at least one transform")
        if not isinstance(self.transforms[0], Identity):
            raise ConfigError("the first transform must be the identity")

    @property
    def count(self) -> int:
        return len(self.transforms)

    @classmethod
    def from_transforms(cls, transforms):
        return cls(tuple(transforms))

    @classmethod
    def identity_only(cls):
        return cls((Identity(),))


def apply(plan, sample, seed):
    """The A augmented feature vectors for one sample, original first.

    Stochastic transforms draw from a stream derived from
    (seed, sample id, transform index), so results are independent of the
    order in which samples are processed.
    """
    features = np.asarray(sample.features, dtype=np.float64)
    out = []
    for i, t in enumerate(plan.transforms):
        out.append(t.apply(features, rng(seed, sample.id, i)))
    return out
