import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qhtree.stream import (
    CATEGORICAL, NUMERIC, RAW_MAX, RAW_MIN, SCALE, AttributeSchema, DatasetSchema, ParseError,
    SaturationCounter, Sample, SchemaError, apply_normalization, from_fixed, normalize, parse_csv,
    quantize, to_fixed, to_fixed_array, write_csv,
)


@pytest.fixture
def mixed_schema():
    # 1 numeric, 1 categorical with 3 values, 2 labels
    return DatasetSchema.build([NUMERIC, 3], 2)


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestSchema:
    def test_categorical_needs_two_values(self):
        with pytest.raises(SchemaError):
            AttributeSchema("a", CATEGORICAL, 0, 1)

    def test_numeric_has_no_value_count(self):
        with pytest.raises(SchemaError):
            AttributeSchema("a", NUMERIC, 0, 3)

    def test_needs_two_labels_and_an_attribute(self):
        with pytest.raises(SchemaError):
            DatasetSchema.build([NUMERIC], 1)
        with pytest.raises(SchemaError):
            DatasetSchema((), 2)

    def test_indices_must_be_dense(self):
        attrs = (AttributeSchema("a", NUMERIC, 0), AttributeSchema("b", NUMERIC, 2))
        with pytest.raises(SchemaError):
            DatasetSchema(attrs, 2)

    def test_json_round_trip(self, tmp_path):
        s = DatasetSchema.from_dict({
            "attributes": [
                {"name": "x", "kind": "numeric"},
                {"name": "day", "kind": "categorical", "values": ["mon", "tue", "wed"]},
                {"name": "flag", "kind": "categorical", "values": 2},
            ],
            "labels": ["UP", "DOWN"],
        })
        s.save(tmp_path / "s.json")
        again = DatasetSchema.load(tmp_path / "s.json")
        assert again == s
        assert again.value_counts == [3, 2]
        assert again.n_numeric == 1 and again.n_categorical == 2

    @pytest.mark.parametrize("path", ["bank", "covertype", "electricity", "person", "telescope"])
    def test_shipped_schemas_load(self, path):
        from pathlib import Path
        f = Path(__file__).parent.parent / "datasets" / f"{path}.schema.json"
        s = DatasetSchema.load(f)
        assert s.label_count >= 2


class TestParse:
    def test_row_maps_fields(self, tmp_path, mixed_schema):
        p = write(tmp_path, "0.5,1,0\n")
        assert list(parse_csv(p, mixed_schema)) == [Sample([0.5], [1], 0)]

    def test_categorical_out_of_range_names_line(self, tmp_path, mixed_schema):
        p = write(tmp_path, "0.1,0,1\n0.5,7,0\n")
        with pytest.raises(ParseError, match="categorical out of range, line 2"):
            list(parse_csv(p, mixed_schema))

    @pytest.mark.parametrize("row", ["0.5,1\n", "abc,1,0\n", "0.5,1,2\n", "0.5,x,0\n", "nan,1,0\n"])
    def test_malformed_rows(self, tmp_path, mixed_schema, row):
        with pytest.raises(ParseError) as e:
            list(parse_csv(write(tmp_path, row), mixed_schema))
        assert e.value.line == 1

    def test_empty_file_is_empty_stream(self, tmp_path, mixed_schema):
        assert list(parse_csv(write(tmp_path, ""), mixed_schema)) == []

    def test_missing_file(self, tmp_path, mixed_schema):
        with pytest.raises(OSError):
            list(parse_csv(tmp_path / "nope.csv", mixed_schema))

    def test_header_skipped_only_when_asked(self, tmp_path, mixed_schema):
        p = write(tmp_path, "x,c,y\n0.5,1,0\n")
        assert len(list(parse_csv(p, mixed_schema, header=True))) == 1
        with pytest.raises(ParseError):
            list(parse_csv(p, mixed_schema))

    def test_named_tokens(self, tmp_path):
        s = DatasetSchema.from_dict({
            "attributes": [{"name": "d", "kind": "categorical", "values": ["a", "b"]}],
            "labels": ["UP", "DOWN"],
        })
        p = write(tmp_path, "b,DOWN\na,UP\n")
        assert list(parse_csv(p, s)) == [Sample([], [1], 1), Sample([], [0], 0)]

    def test_stream_determinism_and_write_round_trip(self, tmp_path, mixed_schema):
        rng = np.random.default_rng(0)
        samples = [Sample([rng.normal()], [rng.integers(3)], rng.integers(2)) for _ in range(200)]
        p = tmp_path / "w.csv"
        write_csv(p, samples, mixed_schema)
        first = list(parse_csv(p, mixed_schema))
        assert first == list(parse_csv(p, mixed_schema)) == samples

    def test_sample_is_immutable(self):
        s = Sample([1.0], [0], 0)
        with pytest.raises(AttributeError):
            s.label = 1
        with pytest.raises(ValueError):
            s.numeric[0] = 2.0


class TestNormalize:
    def col(self, values):
        out, stats = normalize([Sample([v], [], 0) for v in values])
        return [float(s.numeric[0]) for s in out], stats

    def test_affine_endpoints(self):
        assert self.col([0, 5, 10])[0] == [-1.0, 0.0, 1.0]

    def test_constant_attribute(self):
        assert self.col([3, 3, 3])[0] == [0.0, 0.0, 0.0]

    def test_identity_on_normalized(self):
        assert self.col([-1, 1])[0] == [-1.0, 1.0]

    def test_record_replays(self):
        values, stats = self.col([2, 4, 9])
        again = apply_normalization([Sample([v], [], 0) for v in (2, 4, 9)],
                                    np.array(stats["min"]), np.array(stats["max"]))
        assert [float(s.numeric[0]) for s in again] == values
        assert json.loads(json.dumps(stats)) == {"min": [2.0], "max": [9.0]}

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            normalize([])

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=2), min_size=1, max_size=40))
    def test_idempotent(self, rows):
        once, _ = normalize([Sample(r, [], 0) for r in rows])
        twice, _ = normalize(once)
        for a, b in zip(once, twice):
            assert np.allclose(a.numeric, b.numeric, atol=1e-12, rtol=0)
            assert np.all(np.abs(a.numeric) <= 1.0)


class TestFixedPoint:
    def test_exact_dyadic(self):
        f = to_fixed(0.5)
        assert f.raw == 1 << 29
        assert from_fixed(f) == 0.5

    def test_saturates_and_counts(self):
        c = SaturationCounter()
        assert to_fixed(1.99999999999, c).raw == RAW_MAX
        assert from_fixed(to_fixed(1.99999999999, c)) == (2**31 - 1) / 2**30
        assert to_fixed(-5.0, c).raw == RAW_MIN
        assert c.count == 3

    def test_lower_bound_is_representable(self):
        c = SaturationCounter()
        assert to_fixed(-2.0, c).raw == RAW_MIN and c.count == 0

    def test_round_trip_bound_random(self):
        rng = np.random.default_rng(7)
        x = rng.uniform(-2.0, 2.0 - 2.0**-30, size=10**6)
        c = SaturationCounter()
        err = np.abs(quantize(x, c) - x)
        assert err.max() <= 2.0**-30
        assert c.count == 0

    def test_round_to_nearest(self):
        lsb = 1.0 / SCALE
        assert to_fixed(0.4 * lsb).raw == 0
        assert to_fixed(0.6 * lsb).raw == 1
        assert to_fixed(-0.6 * lsb).raw == -1

    def test_scalar_and_array_agree(self):
        rng = np.random.default_rng(1)
        x = rng.uniform(-1.9, 1.9, 1000)
        assert [to_fixed(v).raw for v in x] == to_fixed_array(x).tolist()

    @given(st.floats(-3, 3), st.floats(-3, 3))
    def test_encode_monotone(self, a, b):
        lo, hi = min(a, b), max(a, b)
        assert to_fixed(lo, SaturationCounter()).raw <= to_fixed(hi, SaturationCounter()).raw
