"""Run configuration: JSON file schema, validation and round-trip serialization.

Unknown keys are rejected so that typos fail loudly instead of silently
falling back to defaults. Every consumer module reads exactly one section.
"""

import json
from dataclasses import dataclass, field

from .augment import AugmentationPlan, Identity, transform_from_dict, transform_to_dict
from .classifier import MLP, SOFTMAX_REGRESSION, TrainConfig
from .confidence import COMBINE_MODES, MetricWeights
from .errors import ConfigError

SYNTH_KINDS = ("blobs", "moons", "rings", "digits_grid")
REFRESH_POLICIES = ("every_iteration", "freeze_after_first")
ADMIT_RULES = ("closed", "open")


def _check_keys(mapping, allowed, where):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _require(mapping, key, where):
    if key not in mapping:
        raise ConfigError(f"missing required key {key!r} in {where}")
    return mapping[key]


@dataclass(frozen=True)
class SynthSpec:
    kind: str
    classes: int
    per_class: int
    noise: float = 0.0

    def validate(self):
        if self.kind not in SYNTH_KINDS:
            raise ConfigError(f"unsupported synthetic kind {self.kind!r}")
        if self.classes < 2:
            raise ConfigError("synthetic data needs at least 2 classes")
        if self.per_class < 1:
            raise ConfigError("per_class must be >= 1")
        if self.noise < 0:
            raise ConfigError("noise must be >= 0")


@dataclass(frozen=True)
class DataSource:
    path: str | None = None
    format: str = "csv"
    synth: SynthSpec | None = None

    def validate(self):
        if (self.path is None) == (self.synth is None):
            raise ConfigError("data source needs exactly one of 'path' or 'synth'")
        if self.format not in ("csv", "binary"):
            raise ConfigError(f"unknown data format {self.format!r}")
        if self.synth is not None:
            self.synth.validate()


@dataclass(frozen=True)
class SplitSpec:
    labelled_per_class: int
    validation_count: int


@dataclass(frozen=True)
class ClassifierSpec:
    architecture: str = SOFTMAX_REGRESSION
    hidden_units: int | None = None
    train: TrainConfig = field(default_factory=TrainConfig)

    def validate(self):
        if self.architecture not in (SOFTMAX_REGRESSION, MLP):
            raise ConfigError(f"unknown architecture {self.architecture!r}")
        if self.architecture == MLP and (
            self.hidden_units is None or self.hidden_units < 1
        ):
            raise ConfigError("mlp requires hidden_units >= 1")
        self.train.validate()


@dataclass(frozen=True)
class ConfidenceSpec:
    weights: MetricWeights | None = None  # None means calibrate each iteration
    combine_mode: str = "bounded"
    epsilon: float = 1e-6

    def validate(self):
        if self.combine_mode not in COMBINE_MODES:
            raise ConfigError(f"unknown combine mode {self.combine_mode!r}")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be > 0")


@dataclass(frozen=True)
class ThresholdSpec:
    target_accuracy: float = 0.99
    manual: float | None = None
    refresh: str = "every_iteration"
    admit_rule: str = "closed"

    def validate(self):
        if not 0 < self.target_accuracy <= 1:
            raise ConfigError("target_accuracy must be in (0, 1]")
        if self.refresh not in REFRESH_POLICIES:
            raise ConfigError(f"unknown refresh policy {self.refresh!r}")
        if self.admit_rule not in ADMIT_RULES:
            raise ConfigError(f"unknown admit rule {self.admit_rule!r}")


@dataclass(frozen=True)
class LoopSpec:
    max_iterations: int = 25
    patience: int = 2
    repeat_count: int = 1
    rescore_admitted: bool = False

    def validate(self):
        if self.max_iterations < 0:
            raise ConfigError("max_iterations must be >= 0")
        if self.patience < 1:
            raise ConfigError("patience must be >= 1")
        if self.repeat_count < 1:
            raise ConfigError("repeat_count must be >= 1")


@dataclass(frozen=True)
class RunConfig:
    data: DataSource
    split: SplitSpec
    classifier: ClassifierSpec = field(default_factory=ClassifierSpec)
    augment: AugmentationPlan = field(
        default_factory=AugmentationPlan.identity_only
    )
    confidence: ConfidenceSpec = field(default_factory=ConfidenceSpec)
    threshold: ThresholdSpec = field(default_factory=ThresholdSpec)
    loop: LoopSpec = field(default_factory=LoopSpec)
    population_std: bool = True
    seed: int = 0
    output_dir: str | None = None

    def validate(self):
        self.data.validate()
        if self.split.labelled_per_class < 1:
            raise ConfigError("labelled_per_class must be >= 1")
        if self.split.validation_count < 0:
            raise ConfigError("validation_count must be >= 0")
        self.classifier.validate()
        self.confidence.validate()
        self.threshold.validate()
        self.loop.validate()


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def config_from_dict(raw) -> RunConfig:
    _check_keys(
        raw,
        [
            "data",
            "split",
            "classifier",
            "augment",
            "confidence",
            "threshold",
            "loop",
            "ensemble",
            "seed",
            "output_dir",
        ],
        "config",
    )
    cfg = RunConfig(
        data=_parse_data(_require(raw, "data", "config")),
        split=_parse_split(_require(raw, "split", "config")),
        classifier=_parse_classifier(raw.get("classifier", {})),
        augment=_parse_augment(raw.get("augment")),
        confidence=_parse_confidence(raw.get("confidence", {})),
        threshold=_parse_threshold(raw.get("threshold", {})),
        loop=_parse_loop(raw.get("loop", {})),
        population_std=_parse_ensemble(raw.get("ensemble", {})),
        seed=int(raw.get("seed", 0)),
        output_dir=raw.get("output_dir"),
    )
    cfg.validate()
    return cfg


def _parse_data(raw):
    _check_keys(raw, ["path", "format", "synth"], "data")
    synth = None
    if "synth" in raw:
        s = raw["synth"]
        _check_keys(s, ["kind", "classes", "per_class", "noise"], "data.synth")
        synth = SynthSpec(
            kind=_require(s, "kind", "data.synth"),
            classes=int(_require(s, "classes", "data.synth")),
            per_class=int(_require(s, "per_class", "data.synth")),
            noise=float(s.get("noise", 0.0)),
        )
    return DataSource(
        path=raw.get("path"), format=raw.get("format", "csv"), synth=synth
    )


def _parse_split(raw):
    _check_keys(raw, ["labelled_per_class", "validation_count"], "split")
    return SplitSpec(
        labelled_per_class=int(_require(raw, "labelled_per_class", "split")),
        validation_count=int(_require(raw, "validation_count", "split")),
    )


def _parse_classifier(raw):
    _check_keys(raw, ["architecture", "hidden_units", "train"], "classifier")
    train_raw = raw.get("train", {})
    _check_keys(
        train_raw,
        ["epochs", "learning_rate", "batch_size", "l2", "early_stop_patience"],
        "classifier.train",
    )
    train = TrainConfig(
        epochs=int(train_raw.get("epochs", 200)),
        learning_rate=float(train_raw.get("learning_rate", 0.1)),
        batch_size=int(train_raw.get("batch_size", 32)),
        l2=float(train_raw.get("l2", 1e-4)),
        early_stop_patience=(
            None
            if train_raw.get("early_stop_patience") is None
            else int(train_raw["early_stop_patience"])
        ),
    )
    hidden = raw.get("hidden_units")
    return ClassifierSpec(
        architecture=raw.get("architecture", SOFTMAX_REGRESSION),
        hidden_units=None if hidden is None else int(hidden),
        train=train,
    )


def _parse_augment(raw):
    if raw is None:
        return AugmentationPlan.identity_only()
    if not isinstance(raw, list):
        raise ConfigError("augment must be a list of transform specs")
    transforms = [transform_from_dict(spec) for spec in raw]
    if not transforms or not isinstance(transforms[0], Identity):
        raise ConfigError("the first augment transform must be {'kind': 'identity'}")
    return AugmentationPlan.from_transforms(transforms)


def _parse_confidence(raw):
    _check_keys(raw, ["weights", "combine_mode", "epsilon"], "confidence")
    weights_raw = raw.get("weights", [1 / 3, 1 / 3, 1 / 3])
    if weights_raw == "calibrate":
        weights = None
    elif isinstance(weights_raw, list) and len(weights_raw) == 3:
        weights = MetricWeights(*(float(w) for w in weights_raw))
    else:
        raise ConfigError(
            "confidence.weights must be 'calibrate' or a list of three numbers"
        )
    return ConfidenceSpec(
        weights=weights,
        combine_mode=raw.get("combine_mode", "bounded"),
        epsilon=float(raw.get("epsilon", 1e-6)),
    )


def _parse_threshold(raw):
    _check_keys(
        raw, ["target_accuracy", "manual", "refresh", "admit_rule"], "threshold"
    )
    manual = raw.get("manual")
    return ThresholdSpec(
        target_accuracy=float(raw.get("target_accuracy", 0.99)),
        manual=None if manual is None else float(manual),
        refresh=raw.get("refresh", "every_iteration"),
        admit_rule=raw.get("admit_rule", "closed"),
    )


def _parse_loop(raw):
    _check_keys(
        raw,
        ["max_iterations", "patience", "repeat_count", "rescore_admitted"],
        "loop",
    )
    return LoopSpec(
        max_iterations=int(raw.get("max_iterations", 25)),
        patience=int(raw.get("patience", 2)),
        repeat_count=int(raw.get("repeat_count", 1)),
        rescore_admitted=bool(raw.get("rescore_admitted", False)),
    )


def _parse_ensemble(raw):
    _check_keys(raw, ["std"], "ensemble")
    std = raw.get("std", "population")
    if std not in ("population", "sample"):
        raise ConfigError("ensemble.std must be 'population' or 'sample'")
    return std == "population"


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def config_to_dict(cfg) -> dict:
    data = {"format": cfg.data.format}
    if cfg.data.path is not None:
        data["path"] = cfg.data.path
    if cfg.data.synth is not None:
        s = cfg.data.synth
        data["synth"] = {
            "kind": s.kind,
            "classes": s.classes,
            "per_class": s.per_class,
            "noise": s.noise,
        }
    out = {
        "data": data,
        "split": {
            "labelled_per_class": cfg.split.labelled_per_class,
            "validation_count": cfg.split.validation_count,
        },
        "classifier": {
            "architecture": cfg.classifier.architecture,
            "hidden_units": cfg.classifier.hidden_units,
            "train": {
                "epochs": cfg.classifier.train.epochs,
                "learning_rate": cfg.classifier.train.learning_rate,
                "batch_size": cfg.classifier.train.batch_size,
                "l2": cfg.classifier.train.l2,
                "early_stop_patience": cfg.classifier.train.early_stop_patience,
            },
        },
        "augment": [transform_to_dict(t) for t in cfg.augment.transforms],
        "confidence": {
            "weights": (
                "calibrate"
                if cfg.confidence.weights is None
                else [
                    cfg.confidence.weights.w_a,
                    cfg.confidence.weights.w_b,
                    cfg.confidence.weights.w_c,
                ]
            ),
            "combine_mode": cfg.confidence.combine_mode,
            "epsilon": cfg.confidence.epsilon,
        },
        "threshold": {
            "target_accuracy": cfg.threshold.target_accuracy,
            "manual": cfg.threshold.manual,
            "refresh": cfg.threshold.refresh,
            "admit_rule": cfg.threshold.admit_rule,
        },
        "loop": {
            "max_iterations": cfg.loop.max_iterations,
            "patience": cfg.loop.patience,
            "repeat_count": cfg.loop.repeat_count,
            "rescore_admitted": cfg.loop.rescore_admitted,
        },
        "ensemble": {"std": "population" if cfg.population_std else "sample"},
        "seed": cfg.seed,
        "output_dir": cfg.output_dir,
    }
    return out


def load_config(path) -> RunConfig:
    try:
        with open(path, "r") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw)
