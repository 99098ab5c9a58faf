"""Distance-matrix validation, closure, generators, and file round trips."""
from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from costgames import (DistanceMatrix, EmptyInstanceError, MetricError,
                       ShapeError, gen_asymmetric_metric,
                       gen_euclidean, load_instance, metric_closure,
                       save_instance, validate_metric)


def test_from_entries_rejects_bad_shapes():
    with pytest.raises(ShapeError):
        DistanceMatrix.from_entries(np.zeros((3, 4)))
    with pytest.raises(EmptyInstanceError):
        DistanceMatrix.from_entries(np.zeros((1, 1)))
    with pytest.raises(MetricError):
        DistanceMatrix.from_entries([[0.0, np.inf], [1.0, 0.0]])


def test_entries_are_read_only():
    m = gen_euclidean(3, seed=0)
    with pytest.raises(ValueError):
        m.entries[0, 1] = 99.0


def test_validation_kinds_and_magnitudes():
    arr = np.array([[0.0, 1.0, 10.0],
                    [1.0, 0.5, 1.0],
                    [10.0, 1.0, 0.0]])
    rep = validate_metric(DistanceMatrix.from_entries(arr))
    assert not rep.valid
    kinds = {v[0] for v in rep.violations}
    assert "diagonal" in kinds           # d[1][1] = 0.5
    assert "triangle" in kinds           # d[0][2] = 10 > d[0][1] + d[1][2] = 2
    tri = next(v for v in rep.violations if v[0] == "triangle")
    _, (i, k, j), excess = tri
    assert arr[i][j] - (arr[i][k] + arr[k][j]) == pytest.approx(excess)
    assert excess > 0

    neg = np.array([[0.0, -1.0], [1.0, 0.0]])
    rep2 = validate_metric(DistanceMatrix.from_entries(neg))
    assert any(v[0] == "negative" for v in rep2.violations)


def test_symmetric_flag_detection():
    assert gen_euclidean(4, seed=1).symmetric
    a = gen_asymmetric_metric(4, seed=1)
    assert not a.symmetric
    assert validate_metric(a).valid


def test_closure_repairs_and_is_idempotent():
    rng = np.random.default_rng(5)
    raw = rng.uniform(1.0, 50.0, size=(6, 6))
    np.fill_diagonal(raw, 0.0)
    m = metric_closure(DistanceMatrix.from_entries(raw))
    assert validate_metric(m).valid
    again = metric_closure(m)
    assert np.array_equal(again.entries, m.entries)
    # closing an already-valid generated matrix changes nothing
    e = gen_euclidean(5, seed=9)
    assert np.array_equal(metric_closure(e).entries, e.entries)


def test_closure_rejects_negative_and_bad_diagonal():
    with pytest.raises(MetricError):
        metric_closure(DistanceMatrix.from_entries([[0.0, -2.0], [1.0, 0.0]]))
    with pytest.raises(MetricError):
        metric_closure(DistanceMatrix.from_entries([[1.0, 2.0], [1.0, 0.0]]))


def test_generators_are_deterministic():
    a = gen_euclidean(6, seed=42)
    b = gen_euclidean(6, seed=42)
    assert np.array_equal(a.entries, b.entries)
    assert not np.array_equal(a.entries, gen_euclidean(6, seed=43).entries)
    x = gen_asymmetric_metric(5, seed=7)
    y = gen_asymmetric_metric(5, seed=7)
    assert np.array_equal(x.entries, y.entries)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(min_value=2, max_value=7),
       seed=st.integers(min_value=0, max_value=10_000))
def test_closure_always_yields_valid_metric(n, seed):
    rng = np.random.default_rng(seed)
    raw = rng.uniform(0.5, 100.0, size=(n, n))
    np.fill_diagonal(raw, 0.0)
    closed = metric_closure(DistanceMatrix.from_entries(raw))
    assert validate_metric(closed).valid
    assert np.array_equal(metric_closure(closed).entries, closed.entries)


def test_instance_round_trip_is_byte_identical(tmp_path):
    m = gen_euclidean(5, seed=13)
    p1 = save_instance(m, tmp_path / "a.json", seed=13, generator="euclidean")
    p2 = save_instance(m, tmp_path / "b.json", seed=13, generator="euclidean")
    assert p1.read_bytes() == p2.read_bytes()
    loaded, meta = load_instance(p1)
    assert np.array_equal(loaded.entries, m.entries)
    assert loaded.symmetric == m.symmetric
    assert meta["seed"] == 13


def test_load_rejects_tampered_files(tmp_path):
    m = gen_euclidean(4, seed=2)
    path = save_instance(m, tmp_path / "ok.json")
    doc = json.loads(path.read_text())

    bad = dict(doc)
    bad["symmetric"] = False          # flag contradicts the entries
    (tmp_path / "flag.json").write_text(json.dumps(bad))
    with pytest.raises(MetricError):
        load_instance(tmp_path / "flag.json")

    bad = json.loads(path.read_text())
    bad["matrix"][0][1] = 1e6        # breaks the triangle inequality
    (tmp_path / "tri.json").write_text(json.dumps(bad))
    with pytest.raises(MetricError):
        load_instance(tmp_path / "tri.json")

    bad = json.loads(path.read_text())
    bad["format"] = "something-else"
    (tmp_path / "fmt.json").write_text(json.dumps(bad))
    with pytest.raises(MetricError):
        load_instance(tmp_path / "fmt.json")
