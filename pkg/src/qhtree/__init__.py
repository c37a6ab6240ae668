"""Streaming decision trees with quantile-based numeric observers, plus
analytical hardware cost models and a power-monitor design flow."""

from .elements import GAUSSIAN, QUANTILE, ElementPool, LeafElement
from .evaluate import EvalReport, RunConfig, prequential, run_prequential, synthetic_samples
from .split import HyperParams, SplitCandidate, SplitDecision, hoeffding_bound
from .stream import DatasetSchema, Sample, normalize, parse_csv
from .tree import HoeffdingTree

__version__ = "0.1.0"

__all__ = [
    "GAUSSIAN", "QUANTILE", "DatasetSchema", "ElementPool", "EvalReport", "HoeffdingTree", "HyperParams",
    "LeafElement", "RunConfig", "Sample", "SplitCandidate", "SplitDecision", "hoeffding_bound", "normalize",
    "parse_csv", "prequential", "run_prequential", "synthetic_samples",
]
