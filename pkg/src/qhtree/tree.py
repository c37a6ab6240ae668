"""Hoeffding tree with quantile (or Gaussian) numeric observers."""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .elements import QUANTILE, ElementPool
from .split import HyperParams, SplitCandidate, TrialResult, run_split_trial
from .stream import NUMERIC, DatasetSchema, Sample


class Node:
    """A leaf, or an internal node once ``attribute`` is set.

    Splitting overwrites a leaf in place, so parents never need re-linking.
    """

    __slots__ = ("leaf_id", "depth", "label_counts", "default_label",
                 "attribute", "position", "kind", "value", "left", "right")

    def __init__(self, leaf_id: int, depth: int, n_labels: int, default_label: int = 0):
        self.leaf_id = leaf_id
        self.depth = depth
        self.label_counts = np.zeros(n_labels, dtype=np.int64)
        self.default_label = default_label
        self.attribute = None
        self.position = None
        self.kind = None
        self.value = None
        self.left = None
        self.right = None

    @property
    def is_leaf(self) -> bool:
        return self.attribute is None

    def goes_left(self, sample: Sample) -> bool:
        if self.kind == NUMERIC:
            return sample.numeric[self.position] <= self.value
        return sample.categorical[self.position] == self.value


def predict_leaf(leaf: Node) -> int:
    if leaf.label_counts.sum() == 0:
        return leaf.default_label
    return int(np.argmax(leaf.label_counts))


@dataclass
class TreeMetrics:
    trials: int = 0
    splits: int = 0
    depth_limited: int = 0
    leaf_limited: int = 0
    pool_exhausted: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


class HoeffdingTree:
    def __init__(self, schema: DatasetSchema, hp: HyperParams | None = None, n_elements: int = 1024,
                 observer: str = QUANTILE, fixed_point: bool = False):
        self.schema = schema
        self.hp = hp or HyperParams()
        self.observer = observer
        self.pool = ElementPool(n_elements, schema, observer=observer, n_quantiles=self.hp.n_quantiles,
                                lam=self.hp.lam, fixed_point=fixed_point)
        self.metrics = TreeMetrics()
        self._positions = {}
        for group in (schema.numeric, schema.categorical):
            for pos, attr in enumerate(group):
                self._positions[attr.index] = pos
        self._next_id = 0
        self.root = self._new_leaf(depth=1, default_label=0)
        self.pool.allocate(self.root.leaf_id)
        self.n_leaves = 1
        self.last_trial: TrialResult | None = None

    def _new_leaf(self, depth: int, default_label: int) -> Node:
        node = Node(self._next_id, depth, self.schema.label_count, default_label)
        self._next_id += 1
        return node

    def traverse(self, sample: Sample) -> Node:
        node = self.root
        while not node.is_leaf:
            node = node.left if node.goes_left(sample) else node.right
        return node

    def predict(self, sample: Sample) -> int:
        return predict_leaf(self.traverse(sample))

    def learn_one(self, sample: Sample) -> bool:
        """Train on one sample; returns True when it triggered a split."""
        leaf = self.traverse(sample)
        leaf.label_counts[sample.label] += 1
        element = self.pool.element_of(leaf.leaf_id)
        element.observe(sample)
        if element.samples_since_trial < self.hp.n_min:
            return False
        trial = run_split_trial(element, self.schema, self.hp)
        self.last_trial = trial
        self.metrics.trials += 1
        if not trial.decision.split:
            return False
        if leaf.depth >= self.hp.max_depth:
            self.metrics.depth_limited += 1
            return False
        if self.n_leaves >= self.hp.max_leaves:
            self.metrics.leaf_limited += 1
            return False
        return self.apply_split(leaf, trial.decision.candidate)

    def apply_split(self, leaf: Node, candidate: SplitCandidate) -> bool:
        # the parent's slot is recycled, so two children need one extra slot
        if self.pool.n_free + 1 < 2:
            self.metrics.pool_exhausted += 1
            return False
        default = predict_leaf(leaf)
        self.pool.release(leaf.leaf_id)
        left = self._new_leaf(leaf.depth + 1, default)
        right = self._new_leaf(leaf.depth + 1, default)
        self.pool.allocate(left.leaf_id)
        self.pool.allocate(right.leaf_id)
        leaf.attribute = candidate.attribute
        leaf.position = self._positions[candidate.attribute]
        leaf.kind = candidate.kind
        leaf.value = candidate.value if candidate.kind == NUMERIC else int(candidate.value)
        leaf.left, leaf.right = left, right
        leaf.leaf_id = None
        self.n_leaves += 1
        self.metrics.splits += 1
        return True

    def leaves(self) -> list[Node]:
        out, stack = [], [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node)
            else:
                stack.extend((node.right, node.left))
        return out

    def depth(self) -> int:
        return max(leaf.depth for leaf in self.leaves())

    def dump(self) -> str:
        """Textual tree, one node per line, parenthesized by nesting."""
        lines = []
        names = [a.name for a in self.schema.attributes]

        def walk(node: Node, indent: int) -> None:
            pad = "  " * indent
            if node.is_leaf:
                counts = ",".join(str(int(c)) for c in node.label_counts)
                lines.append(f"{pad}(leaf {node.leaf_id} predict={predict_leaf(node)} counts=[{counts}])")
                return
            op = "<=" if node.kind == NUMERIC else "=="
            value = f"{node.value:.6g}" if node.kind == NUMERIC else str(node.value)
            lines.append(f"{pad}({names[node.attribute]} {op} {value}")
            walk(node.left, indent + 1)
            walk(node.right, indent + 1)
            lines[-1] += ")"

        walk(self.root, 0)
        return "\n".join(lines)
