"""Interleaved test-then-train evaluation, quantile sweeps and synthetic streams."""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .elements import GAUSSIAN, QUANTILE
from .split import HyperParams
from .stream import NUMERIC, DatasetSchema, Sample, SaturationCounter, parse_csv, quantize, write_csv
from .tree import HoeffdingTree

log = logging.getLogger(__name__)

CURVE_EVERY = 10_000


@dataclass
class RunConfig:
    schema_path: str
    data_path: str
    observer: str = QUANTILE
    hp: HyperParams = field(default_factory=HyperParams)
    n_elements: int = 1024
    fixed_point: bool = False
    header: bool = False
    seed: int = 0
    report_path: str | None = None
    curve_path: str | None = None

    def validate(self) -> None:
        if self.observer not in (QUANTILE, GAUSSIAN):
            raise ValueError(f"unknown observer {self.observer!r}")
        if self.observer == QUANTILE and self.hp.n_quantiles < 2:
            raise ValueError(f"quantile mode needs at least 2 quantiles, got {self.hp.n_quantiles}")
        for p in (self.schema_path, self.data_path):
            if not Path(p).exists():
                raise FileNotFoundError(p)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hp"] = asdict(self.hp)
        return d


@dataclass
class EvalReport:
    samples: int = 0
    correct: int = 0
    splits: int = 0
    trials: int = 0
    pool_exhausted: int = 0
    depth_limited: int = 0
    leaf_limited: int = 0
    saturations: int = 0
    n_leaves: int = 1
    depth: int = 1
    # (sample index, cumulative accuracy, accuracy within the last window)
    curve: list[tuple[int, float, float]] = field(default_factory=list)

    @property
    def accuracy(self) -> float:
        return self.correct / self.samples if self.samples else 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["accuracy"] = self.accuracy
        return d

    def write(self, path: str | Path, curve_path: str | Path | None = None) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)
        if curve_path is not None:
            with open(curve_path, "w", newline="") as f:
                w = csv.writer(f, lineterminator="\n")
                w.writerow(["samples", "accuracy", "window_accuracy"])
                w.writerows(self.curve)


def prequential(tree: HoeffdingTree, samples: Iterable[Sample], fixed_point: bool = False,
                predictions: list | None = None, curve_every: int = CURVE_EVERY) -> EvalReport:
    """Predict each sample with the current tree, score it, then train on it."""
    report = EvalReport()
    counter = SaturationCounter()
    window_correct = 0
    for sample in samples:
        if fixed_point:
            sample = Sample(quantize(sample.numeric, counter), sample.categorical, sample.label)
        guess = tree.predict(sample)
        hit = guess == sample.label
        if predictions is not None:
            predictions.append(guess)
        report.samples += 1
        report.correct += hit
        window_correct += hit
        tree.learn_one(sample)
        if report.samples % curve_every == 0:
            report.curve.append((report.samples, report.accuracy, window_correct / curve_every))
            window_correct = 0
    tail = report.samples % curve_every
    if tail:
        report.curve.append((report.samples, report.accuracy, window_correct / tail))
    m = tree.metrics
    report.splits, report.trials = m.splits, m.trials
    report.pool_exhausted, report.depth_limited, report.leaf_limited = m.pool_exhausted, m.depth_limited, m.leaf_limited
    report.saturations = counter.count
    report.n_leaves = tree.n_leaves
    report.depth = tree.depth()
    return report


def build_tree(config: RunConfig, schema: DatasetSchema) -> HoeffdingTree:
    return HoeffdingTree(schema, config.hp, n_elements=config.n_elements, observer=config.observer,
                         fixed_point=config.fixed_point)


def run_prequential(config: RunConfig) -> EvalReport:
    config.validate()
    schema = DatasetSchema.load(config.schema_path)
    tree = build_tree(config, schema)
    samples = parse_csv(config.data_path, schema, header=config.header)
    report = prequential(tree, samples, fixed_point=config.fixed_point)
    log.info("%s: %d samples, accuracy %.4f, %d splits", config.data_path, report.samples,
             report.accuracy, report.splits)
    if config.report_path:
        report.write(config.report_path, config.curve_path)
    return report


@dataclass
class SweepRow:
    quantiles: int | str
    accuracy: float | None
    splits: int | None = None
    error: str | None = None


def _sweep_one(config: RunConfig) -> SweepRow:
    label = config.hp.n_quantiles if config.observer == QUANTILE else GAUSSIAN
    try:
        report = run_prequential(config)
    except ValueError as exc:
        return SweepRow(label, None, None, str(exc))
    return SweepRow(label, report.accuracy, report.splits)


def sweep_quantiles(config: RunConfig, q_values: Sequence[int], with_gaussian: bool = False,
                    jobs: int = 1) -> list[SweepRow]:
    """One prequential run per quantile count over the same stream.

    Bad quantile counts produce an error row instead of aborting the sweep.
    """
    configs = []
    if with_gaussian:
        configs.append(replace(config, observer=GAUSSIAN, report_path=None, curve_path=None))
    for q in q_values:
        try:
            hp = replace(config.hp, n_quantiles=q)
        except ValueError as exc:
            configs.append(SweepRow(q, None, None, str(exc)))
            continue
        configs.append(replace(config, observer=QUANTILE, hp=hp, report_path=None, curve_path=None))
    runnable = [c for c in configs if isinstance(c, RunConfig)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            results = iter(list(ex.map(_sweep_one, runnable)))
    else:
        results = (_sweep_one(c) for c in runnable)
    return [next(results) if isinstance(c, RunConfig) else c for c in configs]


def write_sweep(rows: Sequence[SweepRow], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["quantiles", "accuracy", "splits", "error"])
        for r in rows:
            acc = "" if r.accuracy is None else f"{r.accuracy:.6f}"
            w.writerow([r.quantiles, acc, "" if r.splits is None else r.splits, r.error or ""])


# -- synthetic streams -----------------------------------------------------

SYNTHETIC_KINDS = ("separable", "gaussian-mix", "uniform-noise")


def synthetic_schema(kind: str, n_attrs: int = 3) -> DatasetSchema:
    if kind not in SYNTHETIC_KINDS:
        raise ValueError(f"unknown synthetic kind {kind!r}")
    return DatasetSchema.build([NUMERIC] * n_attrs, 2, names=[f"x{i}" for i in range(n_attrs)])


def synthetic_samples(kind: str, n: int, seed: int, n_attrs: int = 3) -> list[Sample]:
    """Draw a synthetic two-class stream.

    separable
        label ~ Bernoulli(1/2); x0 = s * U(0.5, 1) with s = +1 for label 1 and
        -1 for label 0; remaining attributes U(-1, 1). Classes are split by
        any threshold in (-0.5, 0.5).
    gaussian-mix
        label ~ Bernoulli(1/2); every attribute ~ N(+-0.5, 0.1^2) with the
        sign given by the label. Bayes error Phi(-5 sqrt(d)) per sample.
    uniform-noise
        label ~ Bernoulli(1/2) independent of attributes U(-1, 1).
    """
    if kind not in SYNTHETIC_KINDS:
        raise ValueError(f"unknown synthetic kind {kind!r}")
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, size=n)
    sign = np.where(labels == 1, 1.0, -1.0)
    if kind == "separable":
        x = rng.uniform(-1.0, 1.0, size=(n, n_attrs))
        x[:, 0] = sign * rng.uniform(0.5, 1.0, size=n)
    elif kind == "gaussian-mix":
        x = sign[:, None] * 0.5 + rng.normal(0.0, 0.1, size=(n, n_attrs))
    else:
        x = rng.uniform(-1.0, 1.0, size=(n, n_attrs))
    return [Sample(row, (), int(y)) for row, y in zip(x, labels)]


def gen_synthetic(kind: str, n: int, seed: int, out: str | Path, schema_out: str | Path | None = None,
                  n_attrs: int = 3) -> DatasetSchema:
    samples = synthetic_samples(kind, n, seed, n_attrs)
    schema = synthetic_schema(kind, n_attrs)
    write_csv(out, samples, schema)
    if schema_out is not None:
        schema.save(schema_out)
    return schema
