"""Split trials: candidate points, partition deduction, gini scoring, Hoeffding test.

Gini gain is evaluated in its reorganized form

    G = quality / |S| + gini(S) - 1,
    quality = sum_j |S_Lj|^2 / |S_L| + sum_j |S_Rj|^2 / |S_R|

so ranking candidates only needs ``quality``, and the gain difference between
two candidates at the same leaf is ``(quality_1 - quality_2) / |S|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .elements import GAUSSIAN, LeafElement
from .sketches import gaussian_cdf
from .stream import NUMERIC, CATEGORICAL, DatasetSchema, quantize


@dataclass(frozen=True)
class HyperParams:
    n_min: int = 200
    n_split_points: int = 10
    tau: float = 0.05
    delta: float = 1e-3
    R: float = 1.0
    lam: float = 0.01
    n_quantiles: int = 8
    max_depth: int = 15
    max_leaves: int = 1024

    def __post_init__(self):
        for name in ("n_min", "n_split_points", "max_depth", "max_leaves", "n_quantiles"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not 0 < self.tau < 1:
            raise ValueError("tau must lie in (0, 1)")
        if self.R <= 0 or self.lam <= 0:
            raise ValueError("R and lambda must be positive")


@dataclass
class SplitCandidate:
    attribute: int
    value: float
    kind: str
    quality: float
    gain: float
    dist_left: np.ndarray = field(repr=False)
    dist_right: np.ndarray = field(repr=False)


@dataclass
class SplitDecision:
    split: bool
    candidate: SplitCandidate | None
    delta_gain: float
    epsilon: float
    reason: str


def gen_split_points(min_a: float, max_a: float, n_points: int) -> np.ndarray:
    p = np.arange(1, n_points + 1)
    return (max_a - min_a) / (n_points + 1) * p + min_a


def deduce_partition(quantiles: np.ndarray, class_counts: np.ndarray, pt):
    """Left/right class masses from per-class quantile rows.

    ``quantiles`` is (L, Q). ``pt`` may be a scalar or a vector of points, in
    which case the results are (L, P). The left share of class j is the number
    of its quantiles strictly below ``pt`` over Q + 1, i.e. the empirical CDF
    rounded down to the nearest quantile.
    """
    quantiles = np.asarray(quantiles, dtype=np.float64)
    counts = np.asarray(class_counts, dtype=np.float64)
    n_q = quantiles.shape[-1]
    pts = np.asarray(pt, dtype=np.float64)
    below = (quantiles[:, :, None] < pts.reshape(1, 1, -1)).sum(axis=1)
    left = below / (n_q + 1) * counts[:, None]
    right = counts[:, None] - left
    if pts.ndim == 0:
        return left[:, 0], right[:, 0]
    return left, right


def deduce_partition_gaussian(means, variances, class_counts, pts):
    counts = np.asarray(class_counts, dtype=np.float64)[:, None]
    pts = np.asarray(pts, dtype=np.float64)[None, :]
    cdf = gaussian_cdf(np.asarray(means)[:, None], np.asarray(variances)[:, None], pts)
    left = cdf * counts
    return left, counts - left


def gini(counts) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        return 0.0
    p = counts / total
    return float(1.0 - np.dot(p, p))


def split_quality(dist_left, dist_right):
    """Sum of squared class masses over partition size, for both sides.

    Accepts (L,) vectors or (L, P) matrices (one column per split point).
    An empty side contributes 0; both sides empty is undefined.
    """
    left = np.asarray(dist_left, dtype=np.float64)
    right = np.asarray(dist_right, dtype=np.float64)
    n_left = left.sum(axis=0)
    n_right = right.sum(axis=0)
    if np.any((n_left <= 0) & (n_right <= 0)):
        raise ValueError("split quality undefined with both partitions empty")
    q_left = np.divide((left * left).sum(axis=0), n_left, out=np.zeros_like(n_left), where=n_left > 0)
    q_right = np.divide((right * right).sum(axis=0), n_right, out=np.zeros_like(n_right), where=n_right > 0)
    result = q_left + q_right
    return float(result) if result.ndim == 0 else result


def gain_from_quality(quality: float, class_counts) -> float:
    counts = np.asarray(class_counts, dtype=np.float64)
    return quality / counts.sum() + gini(counts) - 1.0


def hoeffding_bound(R: float, delta: float, n: int) -> float:
    if n < 1:
        raise ValueError("Hoeffding bound needs at least one observation")
    return math.sqrt(R * R * math.log(1.0 / delta) / (2.0 * n))


def rank_candidates(candidates: list[SplitCandidate]) -> list[SplitCandidate]:
    """Best first; ties keep the lower attribute index."""
    return sorted(candidates, key=lambda c: (-c.quality, c.attribute))


def decide_split(best: SplitCandidate | None, second: SplitCandidate | None, n: int,
                 hp: HyperParams) -> SplitDecision:
    eps = hoeffding_bound(hp.R, hp.delta, n)
    if best is None:
        return SplitDecision(False, None, 0.0, eps, "no candidate")
    # a missing runner-up is the null split, G = 0
    if second is None:
        delta_gain = best.gain
    else:
        delta_gain = (best.quality - second.quality) / n
    if best.gain <= 0:
        return SplitDecision(False, best, delta_gain, eps, "no gain")
    if delta_gain > eps:
        return SplitDecision(True, best, delta_gain, eps, "bound")
    if delta_gain < eps and eps < hp.tau:
        return SplitDecision(True, best, delta_gain, eps, "tie")
    return SplitDecision(False, best, delta_gain, eps, "undecided")


def _best_of(attribute: int, kind: str, values, left, right, counts) -> SplitCandidate:
    quality = split_quality(left, right)
    k = int(np.argmax(quality))  # first maximum -> lowest split value
    return SplitCandidate(
        attribute=attribute,
        value=float(values[k]),
        kind=kind,
        quality=float(quality[k]),
        gain=gain_from_quality(float(quality[k]), counts),
        dist_left=left[:, k].copy(),
        dist_right=right[:, k].copy(),
    )


def attribute_candidates(element: LeafElement, schema: DatasetSchema, hp: HyperParams) -> list[SplitCandidate]:
    """Best candidate of every scoreable attribute, in schema order."""
    counts = element.class_counts.astype(np.float64)
    out = []
    observer = element.numeric
    for i, attr in enumerate(schema.numeric):
        lo, hi = element.min_a[i], element.max_a[i]
        if not hi > lo:
            continue  # unobserved or constant: no useful split
        pts = gen_split_points(lo, hi, hp.n_split_points)
        if element.observer == GAUSSIAN:
            left, right = deduce_partition_gaussian(observer.mean[i], observer.variance(i), counts, pts)
        else:
            if observer.fixed_point:
                pts = quantize(pts)
            left, right = deduce_partition(observer.values(i), counts, pts)
        out.append(_best_of(attr.index, NUMERIC, pts, left, right, counts))
    for h, attr in zip(element.histograms, schema.categorical):
        left = h.counts.T.astype(np.float64)  # (L, V)
        right = counts[:, None] - left
        out.append(_best_of(attr.index, CATEGORICAL, np.arange(attr.value_count), left, right, counts))
    return out


@dataclass
class TrialResult:
    decision: SplitDecision
    ranked: list[SplitCandidate]


def run_split_trial(element: LeafElement, schema: DatasetSchema, hp: HyperParams) -> TrialResult:
    n = element.n
    element.samples_since_trial = 0
    if n < 2:
        return TrialResult(SplitDecision(False, None, 0.0, math.inf, "too few samples"), [])
    ranked = rank_candidates(attribute_candidates(element, schema, hp))
    best = ranked[0] if ranked else None
    second = ranked[1] if len(ranked) > 1 else None
    return TrialResult(decide_split(best, second, n, hp), ranked)
