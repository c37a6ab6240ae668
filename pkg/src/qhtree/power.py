"""Design-time flow for online power monitors.

Power values from trace files are clustered (1-D k-means, cluster count picked
by silhouette), turning power regression into classification; activity
signals are ranked by recursive elimination with an offline CART; and the
resulting design is checked against hardware budgets via the cost models.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.tree import DecisionTreeClassifier

from . import cost

log = logging.getLogger(__name__)

POWER_COLUMN = "power_w"


@dataclass
class TraceSet:
    signals: list[str]
    activity: np.ndarray  # (rows, signals)
    power: np.ndarray  # (rows,)

    def __post_init__(self):
        self.activity = np.asarray(self.activity, dtype=np.float64)
        self.power = np.asarray(self.power, dtype=np.float64)
        if self.activity.ndim != 2 or self.activity.shape[1] != len(self.signals):
            raise ValueError("activity columns do not match signal names")
        if len(self.power) != len(self.activity):
            raise ValueError("activity and power row counts differ")
        if np.any(self.power < 0):
            raise ValueError("power must be non-negative")

    def __len__(self):
        return len(self.power)

    def head(self, n: int) -> "TraceSet":
        return TraceSet(self.signals, self.activity[:n], self.power[:n])


def load_traces(path: str | Path) -> TraceSet:
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise ValueError(f"{path}: empty trace file")
    header = [h.strip() for h in rows[0]]
    if header[-1] != POWER_COLUMN:
        raise ValueError(f"{path}: last column must be {POWER_COLUMN!r}")
    body = []
    for line, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ValueError(f"{path}: expected {len(header)} fields, line {line}")
        body.append([float(v) for v in row])
    data = np.array(body, dtype=np.float64).reshape(-1, len(header))
    return TraceSet(header[:-1], data[:, :-1], data[:, -1])


def write_traces(path: str | Path, traces: TraceSet) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(traces.signals + [POWER_COLUMN])
        for a, p in zip(traces.activity, traces.power):
            w.writerow([repr(float(v)) for v in a] + [repr(float(p))])


# -- clustering ----------------------------------------------------------------


@dataclass
class Clustering:
    centers: np.ndarray  # ascending
    labels: np.ndarray
    silhouette: float | None = None
    inertia: list[float] = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.centers)


def assign(powers, centers) -> np.ndarray:
    """Index of the nearest center; ties go to the lower center."""
    x = np.asarray(powers, dtype=np.float64)[:, None]
    return np.argmin(np.abs(x - np.asarray(centers)[None, :]), axis=1)


def _plus_plus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centers = [x[rng.integers(len(x))]]
    for _ in range(1, k):
        d2 = np.min((x[:, None] - np.array(centers)[None, :]) ** 2, axis=1)
        centers.append(x[rng.choice(len(x), p=d2 / d2.sum())])
    return np.sort(np.array(centers))


def _inertia(x, labels, centers) -> float:
    return float(np.sum((x - centers[labels]) ** 2))


def kmeans_power(powers, k: int, seed: int = 0, max_iter: int = 100, tol: float = 1e-9) -> Clustering:
    """Lloyd's algorithm on scalar power values with k-means++ seeding.

    Values are sorted before seeding so the result does not depend on row
    order.
    """
    x_raw = np.asarray(powers, dtype=np.float64)
    if k < 2:
        raise ValueError("k must be at least 2")
    if len(np.unique(x_raw)) < k:
        raise ValueError(f"need at least {k} distinct power values")
    order = np.argsort(x_raw, kind="stable")
    x = x_raw[order]
    rng = np.random.default_rng(seed)
    centers = _plus_plus(x, k, rng)
    labels = assign(x, centers)
    history = [_inertia(x, labels, centers)]
    for _ in range(max_iter):
        new = centers.copy()
        for c in range(k):
            members = x[labels == c]
            if len(members):
                new[c] = members.mean()
            else:
                # relocate an empty center onto the worst-served point
                new[c] = x[np.argmax((x - centers[labels]) ** 2)]
        moved = np.max(np.abs(new - centers))
        centers = new
        labels = assign(x, centers)
        history.append(_inertia(x, labels, centers))
        assert history[-1] <= history[-2] * (1 + 1e-12) + 1e-300, "k-means inertia increased"
        if moved < tol:
            break
    rank = np.argsort(centers, kind="stable")
    centers = centers[rank]
    labels = np.argsort(rank)[labels]
    out = np.empty_like(labels)
    out[order] = labels
    result = Clustering(centers, out, inertia=history)
    if np.all(np.bincount(out, minlength=k) > 0):
        result.silhouette = silhouette(result, x_raw)
    return result


def _distance_sums(sorted_vals: np.ndarray, prefix: np.ndarray, v: np.ndarray) -> np.ndarray:
    """sum_j |v - sorted_vals[j]| for every entry of v."""
    m = np.searchsorted(sorted_vals, v, side="right")
    below = v * m - prefix[m]
    above = (prefix[-1] - prefix[m]) - v * (len(sorted_vals) - m)
    return below + above


def silhouette(clustering: Clustering, powers) -> float:
    """Exact mean silhouette for 1-D data via sorted prefix sums, O(n k log n)."""
    x = np.asarray(powers, dtype=np.float64)
    labels = np.asarray(clustering.labels)
    if len(labels) != len(x):
        raise ValueError("clustering does not match the data")
    k = clustering.k
    if k < 2:
        raise ValueError("silhouette needs at least two clusters")
    sizes = np.bincount(labels, minlength=k)
    if np.any(sizes == 0):
        raise ValueError("silhouette undefined with an empty cluster")
    mean_dist = np.empty((len(x), k))
    for c in range(k):
        vals = np.sort(x[labels == c])
        prefix = np.concatenate(([0.0], np.cumsum(vals)))
        mean_dist[:, c] = _distance_sums(vals, prefix, x)
    own_size = sizes[labels]
    idx = np.arange(len(x))
    a = np.divide(mean_dist[idx, labels], own_size - 1, out=np.zeros(len(x)), where=own_size > 1)
    other = mean_dist / sizes[None, :]
    other[idx, labels] = np.inf
    b = other.min(axis=1)
    denom = np.maximum(a, b)
    s = np.divide(b - a, denom, out=np.zeros(len(x)), where=denom > 0)
    s[own_size == 1] = 0.0
    return float(s.mean())


@dataclass(frozen=True)
class TuningConstraints:
    max_labels: int = 5
    max_numeric: int = 8
    elements: int = 64
    quantiles: int = 8
    max_depth: int = 7
    bram_fraction: float = 0.20


@dataclass
class KSelection:
    k: int
    clustering: Clustering
    scores: dict[int, float]


def select_k(powers, k_range: Sequence[int], constraints: TuningConstraints = TuningConstraints(),
             seed: int = 0) -> KSelection:
    """Best silhouette over the feasible k; ties go to the smaller k."""
    ks = sorted(k for k in set(k_range) if 2 <= k <= constraints.max_labels)
    if not ks:
        raise ValueError("no feasible cluster count in range")
    scores, best = {}, None
    for k in ks:
        try:
            c = kmeans_power(powers, k, seed)
        except ValueError as exc:
            log.warning("k=%d skipped: %s", k, exc)
            continue
        if c.silhouette is None:
            continue
        scores[k] = c.silhouette
        if best is None or c.silhouette > best.silhouette:
            best = c
    if best is None:
        raise ValueError("no cluster count produced a valid clustering")
    return KSelection(best.k, best, scores)


@dataclass
class LabeledTraces:
    signals: list[str]
    activity: np.ndarray
    labels: np.ndarray
    centers: dict[int, float]

    def reconstruct(self) -> np.ndarray:
        return np.array([self.centers[int(c)] for c in self.labels])


def relabel_traces(traces: TraceSet, clustering: Clustering) -> LabeledTraces:
    if clustering.k < 2:
        raise ValueError("need at least two clusters")
    if len(clustering.labels) != len(traces):
        raise ValueError("clustering row count does not match traces")
    centers = {i: float(c) for i, c in enumerate(clustering.centers)}
    return LabeledTraces(list(traces.signals), traces.activity.copy(), np.asarray(clustering.labels).copy(), centers)


# -- attribute ranking ---------------------------------------------------------


def gini_importance(activity: np.ndarray, labels: np.ndarray, seed: int, max_depth: int = 7) -> np.ndarray:
    model = DecisionTreeClassifier(criterion="gini", max_depth=max_depth, random_state=seed)
    model.fit(activity, labels)
    return model.feature_importances_


def rank_attributes(traces: LabeledTraces, constraints: TuningConstraints = TuningConstraints(),
                    seed: int = 0, max_depth: int = 7) -> list[str]:
    """Recursive elimination, one signal per round, until at most N_max remain.

    Returns every signal, most important first: survivors by their final
    importance, then eliminated signals in reverse elimination order. Equal
    importances drop the later column first.
    """
    names = list(traces.signals)
    if len(names) <= constraints.max_numeric:
        if len(names) < constraints.max_numeric:
            log.warning("only %d signals for a budget of %d; ranking unchanged", len(names), constraints.max_numeric)
        return names
    alive = list(range(len(names)))
    eliminated = []
    while True:
        imp = gini_importance(traces.activity[:, alive], traces.labels, seed, max_depth)
        if len(alive) <= constraints.max_numeric:
            break
        worst = min(range(len(alive)), key=lambda i: (imp[i], -alive[i]))
        eliminated.append(alive.pop(worst))
    survivors = [alive[i] for i in sorted(range(len(alive)), key=lambda i: (-imp[i], alive[i]))]
    return [names[i] for i in survivors + eliminated[::-1]]


# -- hardware constraints ------------------------------------------------------

DEVICE_BRAM36 = 2160
DEVICE_DSP = 6840


@dataclass
class ConstraintReport:
    passed: bool
    violations: list[str]
    bram: dict[str, int]
    dsp: dict[str, int]
    bram_fraction: float
    dsp_fraction: float


def check_constraints(params: cost.DesignParams, constraints: TuningConstraints = TuningConstraints(),
                      device_bram: float = DEVICE_BRAM36, device_dsp: int = DEVICE_DSP) -> ConstraintReport:
    """Check a tuned design against the monitor budgets.

    The BRAM model counts 18 Kb blocks; ``device_bram`` is in 36 Kb blocks,
    so the model total is halved before taking the fraction.
    """
    violations = []
    if params.labels > constraints.max_labels:
        violations.append(f"L ≤ {constraints.max_labels}")
    if params.numeric > constraints.max_numeric:
        violations.append(f"N ≤ {constraints.max_numeric}")
    if params.elements != constraints.elements:
        violations.append(f"E = {constraints.elements}")
    if params.quantiles != constraints.quantiles:
        violations.append(f"Q = {constraints.quantiles}")
    if params.depth > constraints.max_depth:
        violations.append(f"depth ≤ {constraints.max_depth}")
    b = cost.bram(params)
    d = cost.dsp(params)
    bram_fraction = b["overall"] / 2 / device_bram
    if bram_fraction > constraints.bram_fraction:
        violations.append(f"BRAM ≤ {constraints.bram_fraction:.0%} (overall {bram_fraction:.1%})")
    return ConstraintReport(not violations, violations, b, d, bram_fraction, d["overall"] / device_dsp)


# -- whole flow ----------------------------------------------------------------

DESIGN_WINDOW = 5000


@dataclass
class PowerFlowResult:
    k: int
    centers: dict[int, float]
    scores: dict[int, float]
    ranking: list[str]
    selected: list[str]
    params: cost.DesignParams
    constraints: ConstraintReport
    labeled: LabeledTraces  # every row, selected signals only


def run_power_flow(traces: TraceSet, k_range: Sequence[int],
                   constraints: TuningConstraints = TuningConstraints(), seed: int = 0,
                   design_window: int = DESIGN_WINDOW) -> PowerFlowResult:
    """Cluster, rank and budget-check using the first ``design_window`` rows.

    All rows are then labeled by their nearest cluster center so the online
    tree can be trained on the full stream.
    """
    window = traces.head(design_window)
    sel = select_k(window.power, k_range, constraints, seed)
    ranking = rank_attributes(relabel_traces(window, sel.clustering), constraints, seed,
                              constraints.max_depth)
    selected = ranking[:constraints.max_numeric]
    cols = [traces.signals.index(s) for s in selected]
    labels = assign(traces.power, sel.clustering.centers)
    centers = {i: float(c) for i, c in enumerate(sel.clustering.centers)}
    labeled = LabeledTraces(selected, traces.activity[:, cols], labels, centers)
    params = cost.DesignParams(labels=max(sel.k, 2), numeric=len(selected), elements=constraints.elements,
                               quantiles=constraints.quantiles, depth=constraints.max_depth)
    report = check_constraints(params, constraints)
    return PowerFlowResult(sel.k, centers, sel.scores, ranking, selected, params, report, labeled)
