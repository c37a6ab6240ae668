"""Per-attribute, per-class distribution summaries.

Three observers are provided:

* signum quantile sets, updated by the asymmetric signum step
  ``q <- q - lam * sgn_alpha(q - x)`` with ``sgn_alpha(z) = -alpha`` for
  ``z < 0`` and ``1 - alpha`` otherwise;
* incremental Gaussian statistics (weighted running mean/variance);
* categorical histograms with a status bit, so a whole histogram can be
  invalidated in O(1) and lazily re-initialized on the next observation.

The ``*Grid`` classes hold one summary per (attribute, class) pair in a single
array, which is how a leaf element stores them.
"""

from __future__ import annotations

import numpy as np

from .stream import RAW_MAX, RAW_MIN, SCALE


def alpha_grid(n_quantiles: int) -> np.ndarray:
    if n_quantiles < 2:
        raise ValueError(f"need at least 2 quantiles, got {n_quantiles}")
    return np.arange(1, n_quantiles + 1) / (n_quantiles + 1)


def signum_step(q, x, alphas, lam):
    """One asymmetric signum update; works elementwise on broadcastable arrays."""
    return np.where(q < x, q + lam * alphas, q - lam * (1.0 - alphas))


def _fixed_steps(alphas, lam):
    up = np.rint(lam * alphas * SCALE).astype(np.int64)
    down = np.rint(lam * (1.0 - alphas) * SCALE).astype(np.int64)
    return up, down


def signum_step_fixed(q, x, up, down):
    """Integer version of :func:`signum_step` on Q2.30 raw values, saturating."""
    return np.clip(np.where(q < x, q + up, q - down), RAW_MIN, RAW_MAX)


class QuantileSet:
    def __init__(self, q, alphas, lam: float):
        self.q = np.array(q, dtype=np.float64)
        self.alphas = np.asarray(alphas, dtype=np.float64)
        self.lam = float(lam)
        if self.q.shape != self.alphas.shape:
            raise ValueError("q and alphas must have the same length")
        if lam <= 0:
            raise ValueError("lambda must be positive")

    def __len__(self):
        return len(self.q)

    def update(self, x: float) -> "QuantileSet":
        self.q = signum_step(self.q, x, self.alphas, self.lam)
        return self


def seed_quantiles(first_value: float, n_quantiles: int, lam: float) -> QuantileSet:
    alphas = alpha_grid(n_quantiles)
    return QuantileSet(np.full(n_quantiles, float(first_value)), alphas, lam)


def signum_update(qs: QuantileSet, x: float) -> QuantileSet:
    return qs.update(x)


class QuantileGrid:
    """Quantile sets for ``n_attrs`` numeric attributes x ``n_labels`` classes.

    A (attribute, class) row is seeded to the first value it observes; until
    then it is reported as unseeded.
    """

    def __init__(self, n_attrs: int, n_labels: int, n_quantiles: int, lam: float, fixed_point: bool = False):
        self.alphas = alpha_grid(n_quantiles)
        self.lam = lam
        self.fixed_point = fixed_point
        dtype = np.int64 if fixed_point else np.float64
        self.q = np.zeros((n_attrs, n_labels, n_quantiles), dtype=dtype)
        self.seeded = np.zeros((n_attrs, n_labels), dtype=bool)
        if fixed_point:
            self._up, self._down = _fixed_steps(self.alphas, lam)

    @property
    def n_quantiles(self) -> int:
        return len(self.alphas)

    def reset(self) -> None:
        self.seeded[:] = False

    def update(self, x: np.ndarray, label: int) -> None:
        if not len(x):
            return
        rows = self.q[:, label, :]
        xs = x[:, None]
        if self.fixed_point:
            xs = np.clip(np.rint(xs * SCALE), RAW_MIN, RAW_MAX).astype(np.int64)
            stepped = signum_step_fixed(rows, xs, self._up, self._down)
        else:
            stepped = signum_step(rows, xs, self.alphas, self.lam)
        fresh = ~self.seeded[:, label]
        self.q[:, label, :] = np.where(fresh[:, None], xs, stepped)
        self.seeded[:, label] = True

    def values(self, attr: int) -> np.ndarray:
        """(n_labels, Q) float estimates for one attribute."""
        row = self.q[attr]
        return row / SCALE if self.fixed_point else row


# -- incremental Gaussian ------------------------------------------------------


class GaussianStat:
    """Weighted running mean and variance."""

    __slots__ = ("w_sum", "mean", "v_sum")

    def __init__(self):
        self.w_sum = 0.0
        self.mean = 0.0
        self.v_sum = 0.0

    def update(self, x: float, weight: float = 1.0) -> "GaussianStat":
        if weight <= 0:
            raise ValueError("weight must be positive")
        if self.w_sum == 0.0:
            self.w_sum, self.mean, self.v_sum = weight, x, 0.0
            return self
        self.w_sum += weight
        prior = self.mean
        self.mean = prior + (x - prior) / self.w_sum
        self.v_sum += (x - prior) * (x - self.mean)
        return self

    @property
    def variance(self) -> float:
        # undefined for w_sum <= 1; reported as 0
        if self.w_sum <= 1.0:
            return 0.0
        return self.v_sum / (self.w_sum - 1.0)

    def cdf(self, pt: float) -> float:
        return float(gaussian_cdf(self.mean, self.variance, pt))


def gaussian_update(g: GaussianStat, x: float, weight: float = 1.0) -> GaussianStat:
    return g.update(x, weight)


_P = 0.3275911
_A = (0.254829592, -0.284496736, 1.421413741, -1.453152027, 1.061405429)


def erf(x):
    """Rational erf approximation, max absolute error 1.5e-7."""
    x = np.asarray(x, dtype=np.float64)
    sign = np.sign(x)
    ax = np.abs(x)
    t = 1.0 / (1.0 + _P * ax)
    poly = t * (_A[0] + t * (_A[1] + t * (_A[2] + t * (_A[3] + t * _A[4]))))
    return sign * (1.0 - poly * np.exp(-ax * ax))


def gaussian_cdf(mean, variance, pt):
    """Normal CDF at ``pt``; zero variance degenerates to a step at the mean."""
    mean = np.asarray(mean, dtype=np.float64)
    variance = np.asarray(variance, dtype=np.float64)
    step = np.where(pt < mean, 0.0, 1.0)
    safe = np.where(variance > 0, variance, 1.0)
    smooth = 0.5 * (1.0 + erf((pt - mean) / np.sqrt(2.0 * safe)))
    return np.where(variance > 0, smooth, step)


class GaussianGrid:
    """Gaussian statistics per (numeric attribute, class), unit weights."""

    def __init__(self, n_attrs: int, n_labels: int):
        self.w_sum = np.zeros((n_attrs, n_labels))
        self.mean = np.zeros((n_attrs, n_labels))
        self.v_sum = np.zeros((n_attrs, n_labels))

    def reset(self) -> None:
        self.w_sum[:] = 0.0
        self.mean[:] = 0.0
        self.v_sum[:] = 0.0

    @property
    def seeded(self) -> np.ndarray:
        return self.w_sum > 0

    def update(self, x: np.ndarray, label: int) -> None:
        if not len(x):
            return
        # from w_sum == 0 the recurrence reduces to the first-sample seeding
        w = self.w_sum[:, label] + 1.0
        prior = self.mean[:, label]
        mean = prior + (x - prior) / w
        self.v_sum[:, label] += (x - prior) * (x - mean)
        self.w_sum[:, label] = w
        self.mean[:, label] = mean

    def variance(self, attr: int) -> np.ndarray:
        w = self.w_sum[attr]
        return np.where(w > 1.0, self.v_sum[attr] / np.where(w > 1.0, w - 1.0, 1.0), 0.0)

    def cdf(self, attr: int, pt: float) -> np.ndarray:
        return gaussian_cdf(self.mean[attr], self.variance(attr), pt)


# -- categorical histogram -----------------------------------------------------


class Histogram:
    """V x L count table guarded by a status bit.

    Clearing only drops the bit; physical counts are left stale and are
    overwritten on the next observation.
    """

    def __init__(self, n_values: int, n_labels: int):
        self._counts = np.zeros((n_values, n_labels), dtype=np.int64)
        self.valid = False

    @property
    def counts(self) -> np.ndarray:
        if not self.valid:
            return np.zeros_like(self._counts)
        return self._counts

    @property
    def shape(self):
        return self._counts.shape

    def invalidate(self) -> None:
        self.valid = False

    def observe(self, value: int, label: int) -> "Histogram":
        n_values, n_labels = self._counts.shape
        if not (0 <= value < n_values and 0 <= label < n_labels):
            raise IndexError(f"histogram index ({value}, {label}) out of range")
        if not self.valid:
            self._counts[:] = 0
            self._counts[value, label] = 1
            self.valid = True
        else:
            self._counts[value, label] += 1
        return self


def histogram_observe(h: Histogram, value: int, label: int) -> Histogram:
    return h.observe(value, label)

