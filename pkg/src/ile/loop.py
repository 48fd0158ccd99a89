"""The iterative self-training cycle.

Each iteration re-initializes the model from a derived seed, trains it on the
current labelled set, rebuilds the class prototypes, learns the admission
threshold on training-data confidences, scores the whole unlabelled pool with
the augmentation ensemble plus confidence metrics, and admits every sample
that clears the threshold. A labelled-only benchmark is computed first so
improvement is attributable to the admissions alone: given the same seed, the
benchmark and the first iteration's training are the identical computation.
"""

import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from . import datasets
from .classifier import evaluate, fit, init_model
from .confidence import (
    ConfidenceReport,
    build_prototypes,
    combine,
    metrics_for_sample,
    weights_from_scored,
)
from .config import RunConfig, config_to_dict
from .datasets import DatasetTriple, admit, load_table, release_pseudo
from .errors import ConfigError, DataError, MissingPrototypeError
from .seeding import derive_seed
from .synth import generate
from .threshold import learn_threshold, select_admissions

log = logging.getLogger("ile")


@dataclass
class IterationRecord:
    """One row of the run log; sizes are taken at iteration start."""

    iteration: int
    dl_size: int
    du_size: int
    added_count: int
    addition_accuracy: float | None
    cumulative_addition_accuracy: float | None
    val_error: float | None
    threshold: float
    wall_time: float


@dataclass
class RunReport:
    config: dict
    iterations: list
    benchmark_val_error: float | None
    final_val_error: float | None
    improvement: float | None


@dataclass
class LoopState:
    config: RunConfig
    triple: DatasetTriple
    d: int
    C: int
    frozen_threshold: float | None = None
    admitted_total: int = 0
    admitted_with_truth: int = 0
    admitted_correct: int = 0


# ---------------------------------------------------------------------------
# Scoring (serial or fanned out to worker processes)
# ---------------------------------------------------------------------------

def _raw_score_batch(payload):
    model, prototypes, plan, population_std, seed, samples = payload
    rows = []
    for s in samples:
        try:
            rows.append(
                (
                    s.id,
                    metrics_for_sample(
                        model, prototypes, plan, s, seed, population_std
                    ),
                )
            )
        except MissingPrototypeError:
            rows.append((s.id, None))
    return rows


def _score_all(samples, model, prototypes, plan, population_std, seed, executor, workers):
    """Raw metric rows (id, (y1, y2, c_a, c_b, c_c) | None), ordered by id.

    Results are independent of worker count: per-sample streams depend only
    on (seed, sample id) and chunks are reassembled in order.
    """
    ordered = sorted(samples, key=lambda s: s.id)
    if executor is None or workers <= 1 or len(ordered) < 2 * workers:
        return _raw_score_batch(
            (model, prototypes, plan, population_std, seed, ordered)
        )
    chunk = max(1, math.ceil(len(ordered) / (workers * 4)))
    payloads = [
        (model, prototypes, plan, population_std, seed, ordered[i : i + chunk])
        for i in range(0, len(ordered), chunk)
    ]
    rows = []
    for part in executor.map(_raw_score_batch, payloads):
        rows.extend(part)
    return rows


def _combine_rows(raw_rows, weights, mode, epsilon):
    """Attach combined confidences: (id, ConfidenceReport | None)."""
    out = []
    for sid, raw in raw_rows:
        if raw is None:
            out.append((sid, None))
            continue
        y1, y2, c_a, c_b, c_c = raw
        c = combine(c_a, c_b, c_c, weights, mode=mode, epsilon=epsilon)
        out.append(
            (
                sid,
                ConfidenceReport(
                    predicted_label=y1,
                    runner_up=y2,
                    c_a=c_a,
                    c_b=c_b,
                    c_c=c_c,
                    combined=c,
                ),
            )
        )
    return out


# ---------------------------------------------------------------------------
# One iteration
# ---------------------------------------------------------------------------

def run_iteration(state, iteration_index, base_seed, executor=None, workers=1):
    """Train, score, admit; returns (new state, IterationRecord)."""
    cfg = state.config
    started = time.perf_counter()
    triple = state.triple
    dl_size = len(triple.labelled)
    du_size = len(triple.unlabelled)

    model = init_model(
        cfg.classifier.architecture,
        state.d,
        state.C,
        seed=derive_seed(base_seed, iteration_index, "init"),
        hidden_units=cfg.classifier.hidden_units,
    )
    early_stop = cfg.classifier.train.early_stop_patience is not None
    model = fit(
        model,
        triple.labelled,
        cfg.classifier.train,
        seed=derive_seed(base_seed, iteration_index, "fit"),
        validation=triple.validation if (early_stop and triple.validation) else None,
    )
    val_error = evaluate(model, triple.validation) if triple.validation else None

    prototypes = build_prototypes(model, triple.labelled)
    score_seed = derive_seed(base_seed, iteration_index, "score")

    train_raw = _score_all(
        triple.labelled,
        model,
        prototypes,
        cfg.augment,
        cfg.population_std,
        score_seed,
        executor,
        workers,
    )
    scorable_train = [(sid, raw) for sid, raw in train_raw if raw is not None]
    if not scorable_train:
        raise DataError("no training sample could be scored")
    train_labels = {s.id: s.assigned_label for s in triple.labelled}

    if cfg.confidence.weights is not None:
        weights = cfg.confidence.weights
    else:
        weights = weights_from_scored(
            [
                (raw[2], raw[3], raw[4], raw[0] == train_labels[sid])
                for sid, raw in scorable_train
            ]
        )

    strict = cfg.threshold.admit_rule == "open"
    if cfg.threshold.manual is not None:
        t_c = cfg.threshold.manual
    elif state.frozen_threshold is not None:
        t_c = state.frozen_threshold
    else:
        scored_train = [
            (
                combine(
                    raw[2],
                    raw[3],
                    raw[4],
                    weights,
                    mode=cfg.confidence.combine_mode,
                    epsilon=cfg.confidence.epsilon,
                ),
                raw[0],
                train_labels[sid],
            )
            for sid, raw in scorable_train
        ]
        t_c = learn_threshold(scored_train, cfg.threshold.target_accuracy, strict)
    frozen = state.frozen_threshold
    if cfg.threshold.refresh == "freeze_after_first" and frozen is None:
        frozen = t_c

    if cfg.loop.rescore_admitted:
        triple = release_pseudo(triple)

    pool_raw = _score_all(
        triple.unlabelled,
        model,
        prototypes,
        cfg.augment,
        cfg.population_std,
        score_seed,
        executor,
        workers,
    )
    pool_reports = [
        (sid, rep)
        for sid, rep in _combine_rows(
            pool_raw, weights, cfg.confidence.combine_mode, cfg.confidence.epsilon
        )
        if rep is not None
    ]
    admissions = select_admissions(pool_reports, t_c, strict)
    by_id = {s.id: s for s in triple.unlabelled}
    with_truth = sum(1 for sid, _, _ in admissions if by_id[sid].true_label is not None)
    correct = sum(
        1
        for sid, label, _ in admissions
        if by_id[sid].true_label is not None and by_id[sid].true_label == label
    )

    triple, admission_record = admit(triple, admissions, iteration_index)
    triple.validate()

    new_state = replace(
        state,
        triple=triple,
        frozen_threshold=frozen,
        admitted_total=state.admitted_total + len(admissions),
        admitted_with_truth=state.admitted_with_truth + with_truth,
        admitted_correct=state.admitted_correct + correct,
    )
    cumulative = (
        new_state.admitted_correct / new_state.admitted_with_truth
        if new_state.admitted_with_truth
        else None
    )
    record = IterationRecord(
        iteration=iteration_index,
        dl_size=dl_size,
        du_size=du_size,
        added_count=len(admissions),
        addition_accuracy=admission_record.addition_accuracy,
        cumulative_addition_accuracy=cumulative,
        val_error=val_error,
        threshold=t_c,
        wall_time=time.perf_counter() - started,
    )
    log.info(
        "iteration %d: |D_l|=%d |D_u|=%d added=%d acc=%s val_error=%s T_c=%s",
        iteration_index,
        dl_size,
        du_size,
        record.added_count,
        f"{record.addition_accuracy:.3f}" if record.addition_accuracy is not None else "n/a",
        f"{val_error:.4f}" if val_error is not None else "n/a",
        f"{t_c:.4f}" if math.isfinite(t_c) else "inf",
    )
    return new_state, record


def should_stop(history, config) -> bool:
    """Stop on iteration budget, admission stagnation, or an empty pool."""
    if len(history) >= config.loop.max_iterations:
        return True
    if not history:
        return False
    patience = config.loop.patience
    if len(history) >= patience and all(
        r.added_count == 0 for r in history[-patience:]
    ):
        return True
    last = history[-1]
    return last.du_size - last.added_count <= 0


# ---------------------------------------------------------------------------
# Whole runs
# ---------------------------------------------------------------------------

def _load_samples(cfg):
    if cfg.data.synth is not None:
        s = cfg.data.synth
        return generate(
            s.kind,
            s.classes,
            s.per_class,
            s.noise,
            seed=derive_seed(cfg.seed, "synth"),
        )
    return load_table(cfg.data.path, cfg.data.format)


def run_single(cfg, samples, base_seed, executor=None, workers=1) -> RunReport:
    """One full run on pre-loaded samples: benchmark, then the loop."""
    triple = datasets.split(
        samples,
        cfg.split.labelled_per_class,
        cfg.split.validation_count,
        seed=derive_seed(base_seed, "split"),
    )
    d = len(triple.labelled[0].features)
    C = max(s.true_label for s in samples if s.true_label is not None) + 1

    # labelled-only baseline; identical to iteration 1's training by seed design
    early_stop = cfg.classifier.train.early_stop_patience is not None
    bench_model = init_model(
        cfg.classifier.architecture,
        d,
        C,
        seed=derive_seed(base_seed, 1, "init"),
        hidden_units=cfg.classifier.hidden_units,
    )
    bench_model = fit(
        bench_model,
        triple.labelled,
        cfg.classifier.train,
        seed=derive_seed(base_seed, 1, "fit"),
        validation=triple.validation if (early_stop and triple.validation) else None,
    )
    benchmark = evaluate(bench_model, triple.validation) if triple.validation else None

    state = LoopState(config=cfg, triple=triple, d=d, C=C)
    records = []
    while not should_stop(records, cfg):
        state, record = run_iteration(
            state, len(records) + 1, base_seed, executor=executor, workers=workers
        )
        records.append(record)

    final = records[-1].val_error if records else benchmark
    improvement = (
        benchmark - final if (benchmark is not None and final is not None) else None
    )
    return RunReport(
        config=config_to_dict(cfg),
        iterations=records,
        benchmark_val_error=benchmark,
        final_val_error=final,
        improvement=improvement,
    )


def run(cfg, base_seed=None, workers=1, output_dir=None) -> dict:
    """Benchmark plus iterative loop, repeated per config; writes artifacts.

    Returns the report payload that is also written to ``report.json``.
    ``base_seed`` overrides ``cfg.seed``; ``output_dir`` overrides the
    config's output directory without entering the report snapshot, so two
    runs of the same config into different directories are byte-identical.
    """
    cfg.validate()
    if base_seed is not None:
        cfg = replace(cfg, seed=base_seed)
    out_dir = output_dir if output_dir is not None else cfg.output_dir
    if out_dir is None:
        raise ConfigError("no output directory: set output_dir or pass --out")

    samples = _load_samples(cfg)
    executor = None
    try:
        if workers > 1:
            executor = ProcessPoolExecutor(
                max_workers=workers, mp_context=get_context("spawn")
            )
        reports = []
        for k in range(cfg.loop.repeat_count):
            rep = run_single(
                cfg,
                samples,
                base_seed=derive_seed(cfg.seed, "repeat", k),
                executor=executor,
                workers=workers,
            )
            reports.append(rep)
    finally:
        if executor is not None:
            executor.shutdown()

    payload = build_payload(cfg, reports)
    write_artifacts(out_dir, payload, reports)
    return payload


# ---------------------------------------------------------------------------
# Artifacts
# ---------------------------------------------------------------------------

def _json_float(x):
    if x is None:
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _record_to_dict(r):
    # wall_time deliberately stays out: report.json must be bit-reproducible
    return {
        "iteration": r.iteration,
        "dl_size": r.dl_size,
        "du_size": r.du_size,
        "added_count": r.added_count,
        "addition_accuracy": r.addition_accuracy,
        "cumulative_addition_accuracy": r.cumulative_addition_accuracy,
        "val_error": r.val_error,
        "threshold": _json_float(r.threshold),
    }


def _report_to_dict(rep):
    return {
        "benchmark_val_error": rep.benchmark_val_error,
        "final_val_error": rep.final_val_error,
        "improvement": rep.improvement,
        "iterations": [_record_to_dict(r) for r in rep.iterations],
    }


def _mean_std(values):
    if any(v is None for v in values):
        return None, None
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.mean()), float(arr.std())  # population std, like the run sigma


def build_payload(cfg, reports) -> dict:
    snapshot = config_to_dict(cfg)
    if len(reports) == 1:
        payload = {"config": snapshot}
        payload.update(_report_to_dict(reports[0]))
        return payload
    bench_mean, bench_std = _mean_std([r.benchmark_val_error for r in reports])
    final_mean, final_std = _mean_std([r.final_val_error for r in reports])
    improvement_mean, _ = _mean_std([r.improvement for r in reports])
    added = [sum(rec.added_count for rec in r.iterations) for r in reports]
    cum_accs = [
        r.iterations[-1].cumulative_addition_accuracy if r.iterations else None
        for r in reports
    ]
    known_accs = [a for a in cum_accs if a is not None]
    return {
        "config": snapshot,
        "repeats": [_report_to_dict(r) for r in reports],
        "summary": {
            "repeat_count": len(reports),
            "benchmark_val_error_mean": bench_mean,
            "benchmark_val_error_std": bench_std,
            "final_val_error_mean": final_mean,
            "final_val_error_std": final_std,
            "improvement_mean": improvement_mean,
            "added_count_mean": float(np.mean(added)),
            "cumulative_addition_accuracy_mean": (
                float(np.mean(known_accs)) if known_accs else None
            ),
        },
    }


_CSV_COLUMNS = [
    "repeat",
    "iteration",
    "dl_size",
    "du_size",
    "added_count",
    "addition_accuracy",
    "cumulative_addition_accuracy",
    "val_error",
    "threshold",
    "wall_time",
]


def write_artifacts(out_dir, payload, reports):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(out / "metrics.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_CSV_COLUMNS)
        for k, rep in enumerate(reports):
            for r in rep.iterations:
                writer.writerow(
                    [
                        k,
                        r.iteration,
                        r.dl_size,
                        r.du_size,
                        r.added_count,
                        "" if r.addition_accuracy is None else repr(r.addition_accuracy),
                        ""
                        if r.cumulative_addition_accuracy is None
                        else repr(r.cumulative_addition_accuracy),
                        "" if r.val_error is None else repr(r.val_error),
                        repr(r.threshold),
                        repr(r.wall_time),
                    ]
                )
    log.info("wrote %s and %s", out / "report.json", out / "metrics.csv")
