"""Dataset schema, samples, CSV ingestion, normalization and Q2.30 fixed point."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

NUMERIC = "numeric"
CATEGORICAL = "categorical"


class SchemaError(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"{message}, line {line}")
        self.line = line


@dataclass(frozen=True)
class AttributeSchema:
    name: str
    kind: str
    index: int
    value_count: int | None = None
    # optional string tokens for categorical values, position == integer code
    value_names: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.kind == CATEGORICAL:
            if self.value_count is None or self.value_count < 2:
                raise SchemaError(f"categorical attribute {self.name!r} needs at least 2 values")
            if self.value_names is not None and len(self.value_names) != self.value_count:
                raise SchemaError(f"attribute {self.name!r}: value name count mismatch")
        elif self.kind == NUMERIC:
            if self.value_count is not None:
                raise SchemaError(f"numeric attribute {self.name!r} cannot have a value count")
        else:
            raise SchemaError(f"unknown attribute kind {self.kind!r}")

    @property
    def is_numeric(self) -> bool:
        return self.kind == NUMERIC


@dataclass(frozen=True)
class DatasetSchema:
    attributes: tuple[AttributeSchema, ...]
    label_count: int
    label_names: tuple[str, ...] | None = None
    numeric: tuple[AttributeSchema, ...] = field(init=False, repr=False, compare=False)
    categorical: tuple[AttributeSchema, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.attributes:
            raise SchemaError("schema needs at least one attribute")
        if self.label_count < 2:
            raise SchemaError("schema needs at least two labels")
        if [a.index for a in self.attributes] != list(range(len(self.attributes))):
            raise SchemaError("attribute indices must be dense, unique and ordered")
        if self.label_names is not None and len(self.label_names) != self.label_count:
            raise SchemaError("label name count mismatch")
        object.__setattr__(self, "numeric", tuple(a for a in self.attributes if a.is_numeric))
        object.__setattr__(self, "categorical", tuple(a for a in self.attributes if not a.is_numeric))

    @property
    def n_numeric(self) -> int:
        return len(self.numeric)

    @property
    def n_categorical(self) -> int:
        return len(self.categorical)

    @property
    def value_counts(self) -> list[int]:
        return [a.value_count for a in self.categorical]

    @classmethod
    def build(cls, kinds: Sequence[str | int], label_count: int, names: Sequence[str] | None = None):
        """Shorthand: ``kinds`` holds "numeric" or an int value count per attribute."""
        attrs = []
        for i, k in enumerate(kinds):
            name = names[i] if names else f"a{i}"
            if k == NUMERIC:
                attrs.append(AttributeSchema(name, NUMERIC, i))
            else:
                attrs.append(AttributeSchema(name, CATEGORICAL, i, int(k)))
        return cls(tuple(attrs), label_count)

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetSchema":
        attrs = []
        for i, a in enumerate(d["attributes"]):
            kind = a.get("kind", NUMERIC)
            name = a.get("name", f"a{i}")
            if kind == CATEGORICAL:
                values = a.get("values")
                if isinstance(values, list):
                    attrs.append(AttributeSchema(name, kind, i, len(values), tuple(map(str, values))))
                else:
                    attrs.append(AttributeSchema(name, kind, i, values))
            else:
                attrs.append(AttributeSchema(name, kind, i))
        labels = d["labels"]
        if isinstance(labels, list):
            return cls(tuple(attrs), len(labels), tuple(map(str, labels)))
        return cls(tuple(attrs), int(labels))

    def to_dict(self) -> dict:
        attrs = []
        for a in self.attributes:
            entry = {"name": a.name, "kind": a.kind}
            if not a.is_numeric:
                entry["values"] = list(a.value_names) if a.value_names else a.value_count
            attrs.append(entry)
        labels = list(self.label_names) if self.label_names else self.label_count
        return {"attributes": attrs, "labels": labels}

    @classmethod
    def load(cls, path: str | Path) -> "DatasetSchema":
        with open(path) as f:
            return cls.from_dict(json.load(f))

    def save(self, path: str | Path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)


class Sample:
    """One labeled observation. Value arrays are read-only."""

    __slots__ = ("numeric", "categorical", "label")

    def __init__(self, numeric, categorical, label: int):
        num = np.array(numeric, dtype=np.float64)
        cat = np.array(categorical, dtype=np.int64)
        num.flags.writeable = False
        cat.flags.writeable = False
        object.__setattr__(self, "numeric", num)
        object.__setattr__(self, "categorical", cat)
        object.__setattr__(self, "label", int(label))

    def __setattr__(self, key, value):
        raise AttributeError("Sample is immutable")

    def __eq__(self, other):
        if not isinstance(other, Sample):
            return NotImplemented
        return (
            self.label == other.label
            and np.array_equal(self.numeric, other.numeric)
            and np.array_equal(self.categorical, other.categorical)
        )

    def __hash__(self):
        return hash((self.numeric.tobytes(), self.categorical.tobytes(), self.label))

    def __repr__(self):
        return f"Sample({self.numeric.tolist()}, {self.categorical.tolist()}, {self.label})"

    def validate(self, schema: DatasetSchema) -> None:
        if len(self.numeric) != schema.n_numeric or len(self.categorical) != schema.n_categorical:
            raise ValueError("sample arity does not match schema")
        for v, a in zip(self.categorical, schema.categorical):
            if not 0 <= v < a.value_count:
                raise ValueError(f"categorical value {v} out of range for {a.name!r}")
        if not 0 <= self.label < schema.label_count:
            raise ValueError(f"label {self.label} out of range")


def _parse_code(token: str, names, count: int, what: str, line: int) -> int:
    if names is not None and token in names:
        return names.index(token)
    try:
        value = int(token)
    except ValueError:
        raise ParseError(f"unparsable {what} {token!r}", line) from None
    if not 0 <= value < count:
        raise ParseError(f"{what} out of range", line)
    return value


def parse_row(row: Sequence[str], schema: DatasetSchema, line: int) -> Sample:
    if len(row) != len(schema.attributes) + 1:
        raise ParseError(f"expected {len(schema.attributes) + 1} fields, got {len(row)}", line)
    numeric, categorical = [], []
    for attr, token in zip(schema.attributes, row):
        token = token.strip()
        if attr.is_numeric:
            try:
                value = float(token)
            except ValueError:
                raise ParseError(f"unparsable numeric value {token!r}", line) from None
            if not math.isfinite(value):
                raise ParseError(f"non-finite numeric value {token!r}", line)
            numeric.append(value)
        else:
            categorical.append(_parse_code(token, attr.value_names, attr.value_count, "categorical", line))
    label = _parse_code(row[-1].strip(), schema.label_names, schema.label_count, "label", line)
    return Sample(numeric, categorical, label)


def parse_csv(path: str | Path, schema: DatasetSchema, header: bool = False) -> Iterator[Sample]:
    """Yield samples in file order. Blank lines are skipped."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        for row in reader:
            line = reader.line_num
            if header and line == 1:
                continue
            if not row or all(not t.strip() for t in row):
                continue
            yield parse_row(row, schema, line)


def format_row(sample: Sample, schema: DatasetSchema) -> list[str]:
    out = []
    num = iter(sample.numeric)
    cat = iter(sample.categorical)
    for attr in schema.attributes:
        if attr.is_numeric:
            out.append(repr(float(next(num))))
        else:
            v = int(next(cat))
            out.append(attr.value_names[v] if attr.value_names else str(v))
    out.append(schema.label_names[sample.label] if schema.label_names else str(sample.label))
    return out


def write_csv(path: str | Path, samples: Iterable[Sample], schema: DatasetSchema, header: bool = False) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        if header:
            w.writerow([a.name for a in schema.attributes] + ["label"])
        for s in samples:
            w.writerow(format_row(s, schema))


# -- normalization -----------------------------------------------------------


def normalization_stats(samples: Sequence[Sample]) -> tuple[np.ndarray, np.ndarray]:
    if not samples:
        raise ValueError("normalize needs at least one sample")
    values = np.array([s.numeric for s in samples], dtype=np.float64)
    if values.shape[1] == 0:
        return np.zeros(0), np.zeros(0)
    return values.min(axis=0), values.max(axis=0)


def apply_normalization(samples: Iterable[Sample], lo: np.ndarray, hi: np.ndarray) -> list[Sample]:
    span = hi - lo
    constant = span == 0
    safe = np.where(constant, 1.0, span)
    out = []
    for s in samples:
        x = np.where(constant, 0.0, 2.0 * (s.numeric - lo) / safe - 1.0)
        out.append(Sample(x, s.categorical, s.label))
    return out


def normalize(samples: Sequence[Sample]) -> tuple[list[Sample], dict]:
    """Map each numeric attribute affinely so observed min -> -1 and max -> +1.

    Constant attributes map to 0. The returned record holds the per-attribute
    min/max so the transform can be replayed with :func:`apply_normalization`.
    """
    samples = list(samples)
    lo, hi = normalization_stats(samples)
    record = {"min": lo.tolist(), "max": hi.tolist()}
    return apply_normalization(samples, lo, hi), record


# -- fixed point -------------------------------------------------------------

FRAC_BITS = 30
SCALE = 1 << FRAC_BITS
RAW_MIN = -(1 << 31)
RAW_MAX = (1 << 31) - 1


@dataclass
class SaturationCounter:
    count: int = 0


#: process-wide saturation counter, used when no explicit counter is passed
saturations = SaturationCounter()


@dataclass(frozen=True)
class FixedPoint:
    """Signed 32-bit raw value with 30 fractional bits; range [-2, 2)."""

    raw: int

    def __float__(self):
        return self.raw / SCALE


def to_fixed(x: float, counter: SaturationCounter | None = None) -> FixedPoint:
    raw = round(x * SCALE)
    if raw > RAW_MAX or raw < RAW_MIN:
        (counter or saturations).count += 1
        raw = RAW_MAX if raw > RAW_MAX else RAW_MIN
    return FixedPoint(raw)


def from_fixed(f: FixedPoint) -> float:
    return f.raw / SCALE


def to_fixed_array(x, counter: SaturationCounter | None = None) -> np.ndarray:
    raw = np.rint(np.asarray(x, dtype=np.float64) * SCALE)
    over = (raw > RAW_MAX) | (raw < RAW_MIN)
    if over.any():
        (counter or saturations).count += int(over.sum())
        raw = np.clip(raw, RAW_MIN, RAW_MAX)
    return raw.astype(np.int64)


def quantize(x, counter: SaturationCounter | None = None) -> np.ndarray:
    """Round-trip an array through Q2.30."""
    return to_fixed_array(x, counter) / SCALE
