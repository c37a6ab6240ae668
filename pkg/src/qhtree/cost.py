"""Analytical latency, throughput, execution-time, DSP and BRAM models.

All ceilings are evaluated in integer arithmetic. ``clog2(x)`` is
``ceil(log2(x))`` and ``ceil_pow2(k)`` is ``ceil(2**k)`` (1 for k <= 0).
BRAM terms follow the piecewise formulas as written; their totals line up
with 18 Kb block counts, so halve them for 36 Kb block budgets.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

# inference pipeline constants
L_BUFF = 8
P_LEVEL = 3
L_PRED = 2
# sample bit widths
B_NUMERIC = 32
# profiled constants
B_BUFF_INFERENCE = 32
D_SPLIT = 4
C_PER_SAMPLE = 1.047
DDR_READ_GBPS = 9.5
DDR_WRITE_GBPS = 8.9
BYTES_PER_GB = 10**9


def clog2(x: int) -> int:
    if x < 1:
        raise ValueError(f"clog2 needs a positive integer, got {x}")
    return (int(x) - 1).bit_length()


def ceil_pow2(k: int) -> int:
    return 1 << k if k > 0 else 1


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass
class DesignParams:
    labels: int
    numeric: int
    categorical: int = 0
    values: list[int] = field(default_factory=list)
    quantiles: int = 8
    elements: int = 1024
    depth: int = 15
    freq_mhz: float = 200.0
    samples: int = 0
    cold_start: float = 0.0
    cycles_per_sample: float = C_PER_SAMPLE
    ddr_read_gbps: float = DDR_READ_GBPS
    ddr_write_gbps: float = DDR_WRITE_GBPS

    def __post_init__(self):
        self.values = [int(v) for v in self.values]
        if self.labels < 2:
            raise ValueError("labels must be at least 2")
        if self.numeric < 0 or self.categorical < 0 or self.numeric + self.categorical < 1:
            raise ValueError("need at least one attribute")
        if len(self.values) != self.categorical:
            raise ValueError(f"{self.categorical} categorical attributes but {len(self.values)} value counts")
        if any(v < 2 for v in self.values):
            raise ValueError("categorical value counts must be at least 2")
        for name in ("quantiles", "elements", "depth"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.samples < 0 or self.cold_start < 0:
            raise ValueError("samples and cold start must be non-negative")

    @classmethod
    def load(cls, path: str | Path) -> "DesignParams":
        with open(path) as f:
            return cls(**json.load(f))


# -- performance ---------------------------------------------------------------


def latency(p: DesignParams) -> int:
    return L_BUFF + P_LEVEL * p.depth + L_PRED


def categorical_width(p: DesignParams) -> int:
    return max((clog2(v) for v in p.values), default=0)


def sample_bits(p: DesignParams) -> int:
    return clog2(p.labels) + B_NUMERIC * p.numeric + categorical_width(p) * p.categorical


def throughput(p: DesignParams) -> tuple[float, float]:
    """(device throughput, overall throughput) in bits/s."""
    tp_fpga = sample_bits(p) * p.freq_mhz * 1e6
    ddr = p.ddr_read_gbps * BYTES_PER_GB * 8
    return tp_fpga, min(tp_fpga, ddr)


def exec_cycles(p: DesignParams) -> float:
    return p.cycles_per_sample * p.samples + p.cold_start


def exec_time(p: DesignParams) -> float:
    if p.freq_mhz <= 0:
        raise ValueError("frequency must be positive")
    return exec_cycles(p) / (p.freq_mhz * 1e6)


def fit_cold_start(samples: int, freq_mhz: float, measured_seconds: float,
                   cycles_per_sample: float = C_PER_SAMPLE) -> float:
    """Cold-start cycles that make the execution-time model hit a measurement."""
    return measured_seconds * freq_mhz * 1e6 - cycles_per_sample * samples


# -- DSP -----------------------------------------------------------------------


def dsp(p: DesignParams) -> dict[str, int]:
    d_num = (3 * p.labels + 12) * p.numeric
    d_cat = (2 * p.labels + 4) * p.categorical
    return {"numeric": d_num, "categorical": d_cat, "split": D_SPLIT, "overall": d_num + d_cat + D_SPLIT}


# -- BRAM ----------------------------------------------------------------------


def bram_level(level: int, depth: int, attrs: int) -> int:
    if level == 1:
        return 0
    width = 33 + depth + clog2(depth) + clog2(attrs)
    if level <= 11:
        return ceil_div(width, 18)
    return ceil_div(width, 36) * (1 << (level - 11)) + 4


def bram_tree(p: DesignParams) -> int:
    attrs = p.numeric + p.categorical
    return sum(bram_level(level, p.depth, attrs) for level in range(1, p.depth + 1))


def bram_pred(p: DesignParams) -> int:
    blocks = ceil_div(p.elements, 1024)
    return (ceil_pow2(clog2(p.elements) + clog2(p.labels) - 10) + blocks
            + ceil_div(12 + p.labels + clog2(p.labels), 18) * blocks)


def bram_buff_numeric(p: DesignParams) -> int:
    L, E, N = p.labels, p.elements, p.numeric
    per_attr = 8 + 2 * L + ceil_div(clog2(E) + clog2(L) + 32, 18)
    per_block = 5 + 4 * L + ceil_div(1 + 6 * L, 18) + ceil_div(2 * L, 3)
    return N * per_attr + N * ceil_div(E, 1024) * per_block


def bram_quantile(p: DesignParams) -> int:
    L, E, Q = p.labels, p.elements, p.quantiles
    return p.numeric * (ceil_pow2(clog2(E) + clog2(L) - 10) * 2 * Q + ceil_div(8 * Q, 9) * L)


def bram_buff_categorical(p: DesignParams) -> int:
    return (ceil_div(2 * p.labels, 3) + 2) * ceil_div(p.elements, 1024) + 10 * p.categorical


def bram_histogram(p: DesignParams) -> int:
    e, el = clog2(p.elements), clog2(p.elements) + clog2(p.labels)
    per_pair = (ceil_pow2(e - 9) + 3 * ceil_pow2(el - 11) + ceil_pow2(el - 13)
                + ceil_div(p.elements, 8192))
    return sum(ceil_div(v, 2) * per_pair for v in p.values)


def bram36(p: DesignParams) -> float:
    return bram(p)["overall"] / 2


def bram(p: DesignParams) -> dict[str, int]:
    items = {
        "buff_inference": B_BUFF_INFERENCE,
        "tree": bram_tree(p),
        "pred": bram_pred(p),
        "buff_numeric": bram_buff_numeric(p),
        "quantile": bram_quantile(p),
        "buff_categorical": bram_buff_categorical(p),
        "histogram": bram_histogram(p),
    }
    items["inference"] = items["buff_inference"] + items["tree"] + items["pred"]
    items["numeric"] = items["buff_numeric"] + items["quantile"]
    items["categorical"] = items["buff_categorical"] + items["histogram"]
    items["overall"] = items["inference"] + items["numeric"] + items["categorical"]
    return items


# -- report --------------------------------------------------------------------


@dataclass
class CostReport:
    params: DesignParams
    latency_cycles: int
    tp_fpga_bps: float
    tp_overall_bps: float
    exec_cycles: float
    exec_seconds: float
    dsp: dict[str, int]
    bram: dict[str, int]

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def table(self) -> str:
        rows = [
            ("latency (cycles)", f"{self.latency_cycles}"),
            ("throughput FPGA (Gb/s)", f"{self.tp_fpga_bps / 1e9:.3f}"),
            ("throughput overall (Gb/s)", f"{self.tp_overall_bps / 1e9:.3f}"),
            ("execution time (ms)", f"{self.exec_seconds * 1e3:.4f}"),
        ]
        rows += [(f"DSP {k}", str(v)) for k, v in self.dsp.items()]
        rows += [(f"BRAM {k}", str(v)) for k, v in self.bram.items()]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v:>12}" for k, v in rows)


def report(p: DesignParams) -> CostReport:
    tp_fpga, tp_overall = throughput(p)
    return CostReport(
        params=p,
        latency_cycles=latency(p),
        tp_fpga_bps=tp_fpga,
        tp_overall_bps=tp_overall,
        exec_cycles=exec_cycles(p),
        exec_seconds=exec_time(p),
        dsp=dsp(p),
        bram=bram(p),
    )
