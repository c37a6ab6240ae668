"""Bounded pool of training elements bound to active leaves."""

from __future__ import annotations

import numpy as np

from .sketches import GaussianGrid, Histogram, QuantileGrid
from .stream import DatasetSchema, Sample

QUANTILE = "quantile"
GAUSSIAN = "gaussian"


class LeafElement:
    """Training state for one leaf: class counts, value ranges and observers."""

    def __init__(self, schema: DatasetSchema, observer: str = QUANTILE, n_quantiles: int = 8,
                 lam: float = 0.01, fixed_point: bool = False):
        self.schema = schema
        self.observer = observer
        L = schema.label_count
        n_num = schema.n_numeric
        if observer == QUANTILE:
            self.numeric = QuantileGrid(n_num, L, n_quantiles, lam, fixed_point)
        elif observer == GAUSSIAN:
            self.numeric = GaussianGrid(n_num, L)
        else:
            raise ValueError(f"unknown observer {observer!r}")
        self.histograms = [Histogram(a.value_count, L) for a in schema.categorical]
        self.class_counts = np.zeros(L, dtype=np.int64)
        self.min_a = np.full(n_num, np.inf)
        self.max_a = np.full(n_num, -np.inf)
        self.samples_since_trial = 0

    @property
    def n(self) -> int:
        return int(self.class_counts.sum())

    def reset(self) -> None:
        self.class_counts[:] = 0
        self.min_a[:] = np.inf
        self.max_a[:] = -np.inf
        self.numeric.reset()
        for h in self.histograms:
            h.invalidate()
        self.samples_since_trial = 0

    def observe(self, sample: Sample) -> None:
        y = sample.label
        self.class_counts[y] += 1
        x = sample.numeric
        np.minimum(self.min_a, x, out=self.min_a)
        np.maximum(self.max_a, x, out=self.max_a)
        self.numeric.update(x, y)
        for h, v in zip(self.histograms, sample.categorical):
            h.observe(int(v), y)
        self.samples_since_trial += 1


class PoolError(RuntimeError):
    pass


class ElementPool:
    """Fixed array of elements plus the leaf-id -> element-id table.

    ``allocate`` returns ``None`` when no slot is free; exhaustion is a signal
    the caller handles, not an error.
    """

    def __init__(self, size: int, schema: DatasetSchema, **element_kwargs):
        if size < 1:
            raise ValueError("pool needs at least one element")
        self.elements = [LeafElement(schema, **element_kwargs) for _ in range(size)]
        # popped from the end, so slot 0 is handed out first
        self._free = list(range(size - 1, -1, -1))
        self.table: dict[int, int] = {}

    @property
    def size(self) -> int:
        return len(self.elements)

    @property
    def n_free(self) -> int:
        return len(self._free)

    @property
    def free_slots(self) -> set[int]:
        return set(self._free)

    def allocate(self, leaf_id: int) -> int | None:
        if leaf_id in self.table:
            raise PoolError(f"leaf {leaf_id} is already bound")
        if not self._free:
            return None
        slot = self._free.pop()
        self.elements[slot].reset()
        self.table[leaf_id] = slot
        return slot

    def release(self, leaf_id: int) -> None:
        try:
            slot = self.table.pop(leaf_id)
        except KeyError:
            raise PoolError(f"leaf {leaf_id} is not bound") from None
        self._free.append(slot)

    def element_of(self, leaf_id: int) -> LeafElement | None:
        slot = self.table.get(leaf_id)
        return None if slot is None else self.elements[slot]

    def check(self) -> None:
        bound = list(self.table.values())
        assert len(bound) == len(set(bound)), "slot bound twice"
        assert not set(bound) & set(self._free), "slot both bound and free"
        assert len(bound) + len(self._free) == self.size
