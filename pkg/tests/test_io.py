from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from finitegap import io

finite = st.floats(allow_nan=False, allow_infinity=False)


@given(st.lists(finite, max_size=8))
def test_floats_roundtrip_exactly(vals):
    assert json.loads(io.dumps({"v": vals}))["v"] == vals


@given(st.complex_numbers(allow_nan=False, allow_infinity=False))
def test_complex_roundtrip(z):
    assert io.parse_complex(json.loads(io.dumps(z))) == z


def test_numpy_types():
    out = json.loads(io.dumps({"a": np.arange(3), "b": np.float64(0.1), "c": np.bool_(True)}))
    assert out == {"a": [0, 1, 2], "b": 0.1, "c": True}


def test_rejects_nan():
    with pytest.raises(ValueError):
        io.dumps(float("nan"))


def test_atomic_write_leaves_no_temp(tmp_path):
    p = tmp_path / "sub" / "x.json"
    io.atomic_write(p, "hello")
    assert p.read_text() == "hello"
    assert [f.name for f in p.parent.iterdir()] == ["x.json"]


def test_atomic_write_keeps_old_file_on_error(tmp_path):
    p = tmp_path / "x.txt"
    p.write_text("old")

    with pytest.raises(TypeError):
        io.atomic_write(p, None)
    assert p.read_text() == "old"
    assert [f.name for f in tmp_path.iterdir()] == ["x.txt"]


def test_waveform_csv_roundtrip(tmp_path):
    t = np.linspace(0, 1, 5)
    q = np.exp(1j * t) * 1.0000000000000002
    p = tmp_path / "w.csv"
    p.write_text(io.waveform_csv(t, q))
    t2, q2 = io.read_waveform_csv(p)
    np.testing.assert_array_equal(t2, t)
    np.testing.assert_array_equal(q2, q)
