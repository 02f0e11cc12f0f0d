import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modgraph import (
    ParameterError,
    ShapeError,
    compare_runs,
    detect_segments,
    difference_matrix,
    prune_plan,
)
from modgraph.analysis import CurveSegments, build_report
from modgraph.modularity import ModularityCurve
from modgraph.tensor_io import LayerEntry, RunManifest


def curve(values, names=None):
    values = np.asarray(values, dtype=np.float64)
    names = tuple(names) if names else tuple(f"layer_{i:02d}" for i in range(values.size))
    return ModularityCurve(values=values, layer_names=names)


def manifest_for(n_layers, repeatable=()):
    return RunManifest(
        model="m", dataset="d", num_classes=2, labels_file="y.npy",
        layers=tuple(
            LayerEntry(name=f"layer_{i:02d}", file=f"l{i}.npy", repeatable=i in repeatable)
            for i in range(n_layers)
        ),
    )


class TestDifferenceMatrix:
    def test_single_layer(self):
        d = difference_matrix(curve([0.2]))
        assert d.values.shape == (1, 1) and d.values[0, 0] == 0.0

    def test_hand_values(self):
        d = difference_matrix(curve([0.1, 0.4, 0.35]))
        assert d.values[0] == pytest.approx([0.0, 0.3, 0.25], abs=1e-12)

    def test_exact_contract(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            values = rng.uniform(-1, 1, size=rng.integers(1, 30))
            d = difference_matrix(curve(values)).values
            assert np.array_equal(d, d.T)
            assert (np.diag(d) == 0.0).all()
            expected = np.abs(values[:, None] - values[None, :])
            assert np.array_equal(d, expected)
            assert d.min() >= 0.0


class TestDetectSegments:
    def test_plateau_example(self):
        # deltas: 0.2, 0.01, -0.005, 0.295
        segs = detect_segments(curve([0.1, 0.3, 0.31, 0.305, 0.6]), epsilon=0.02)
        assert segs.plateaus == ((1, 3),)
        assert segs.descents == ()

    def test_strictly_increasing(self):
        segs = detect_segments(curve([0.0, 0.05, 0.12, 0.2]), epsilon=0.02)
        assert segs.plateaus == () and segs.descents == ()

    def test_descent_example(self):
        segs = detect_segments(curve([0.5, 0.4, 0.3]), epsilon=0.02)
        assert segs.descents == ((0, 2),)
        assert segs.plateaus == ()

    def test_single_delta_descent(self):
        segs = detect_segments(curve([0.1, 0.5, 0.3, 0.6]), epsilon=0.02)
        assert segs.descents == ((1, 2),)

    def test_short_flat_run_is_not_a_plateau(self):
        segs = detect_segments(curve([0.1, 0.4, 0.401, 0.6]), epsilon=0.02)
        assert segs.plateaus == ()

    def test_epsilon_validation(self):
        with pytest.raises(ParameterError):
            detect_segments(curve([0.1, 0.2]), epsilon=0.0)
        with pytest.raises(ParameterError):
            detect_segments(curve([0.1, 0.2]), epsilon=-1.0)

    def test_needs_two_layers(self):
        with pytest.raises(ParameterError):
            detect_segments(curve([0.1]), epsilon=0.02)

    def test_reproducible(self):
        values = np.random.default_rng(1).uniform(0, 1, 12)
        a = detect_segments(curve(values), epsilon=0.01)
        b = detect_segments(curve(values), epsilon=0.01)
        assert a == b

    def test_boundary_delta_is_descent_not_flat(self):
        # delta == -eps exactly: descent takes precedence by classification
        segs = detect_segments(curve([0.5, 0.5 - 0.02]), epsilon=0.02)
        assert segs.descents == ((0, 1),)
        assert segs.plateaus == ()


SAFE_DELTAS = [-0.3, -0.05, -0.003, 0.0, 0.001, 0.004, 0.06, 0.2]


@settings(max_examples=100, deadline=None)
@given(
    deltas=st.lists(st.sampled_from(SAFE_DELTAS), min_size=1, max_size=12),
    shift=st.floats(min_value=-0.5, max_value=0.5, allow_nan=False),
    start=st.floats(min_value=-0.3, max_value=0.3, allow_nan=False),
)
def test_shift_invariance(deltas, shift, start):
    values = np.concatenate([[start], start + np.cumsum(deltas)])
    base = detect_segments(curve(values), epsilon=0.005)
    shifted = detect_segments(curve(values + shift), epsilon=0.005)
    assert base.plateaus == shifted.plateaus
    assert base.descents == shifted.descents


class TestPrunePlan:
    def test_plateau_interior_candidates(self):
        c = curve([0.1, 0.3, 0.31, 0.305, 0.6])
        segs = detect_segments(c, epsilon=0.02)
        plan = prune_plan(c, segs, manifest_for(5, repeatable={2, 3}))
        assert [(p.layer_index, p.reason, p.eligible) for p in plan.candidates] == [
            (2, "plateau", True),
            (3, "plateau", True),
        ]

    def test_no_segments_empty_plan(self):
        c = curve([0.0, 0.1, 0.25])
        plan = prune_plan(c, detect_segments(c, epsilon=0.02), manifest_for(3))
        assert plan.candidates == ()

    def test_descent_on_non_repeatable_layer(self):
        c = curve([0.5, 0.3, 0.6])
        plan = prune_plan(c, detect_segments(c, epsilon=0.02), manifest_for(3))
        assert [(p.layer_index, p.reason, p.eligible) for p in plan.candidates] == [
            (1, "descent", False)
        ]

    def test_manifest_length_mismatch(self):
        c = curve([0.5, 0.3, 0.6])
        with pytest.raises(ShapeError):
            prune_plan(c, detect_segments(c, epsilon=0.02), manifest_for(4))

    def test_every_candidate_inside_an_interval(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            values = rng.uniform(0, 1, 10)
            c = curve(values)
            segs = detect_segments(c, epsilon=0.05)
            plan = prune_plan(c, segs, manifest_for(10))
            intervals = list(segs.plateaus) + list(segs.descents)
            for cand in plan.candidates:
                assert any(s < cand.layer_index <= e for s, e in intervals)
                assert cand.eligible is False  # nothing repeatable in this manifest


class TestCompareRuns:
    def test_identical_curves(self):
        report = compare_runs([curve([0.1, 0.5, 0.6]), curve([0.1, 0.5, 0.6])])
        assert report["max_peak_gap"] == 0.0
        assert report["peaks_agree"] is True

    def test_different_lengths_reported(self):
        a = curve([0.1, 0.5, 0.6])
        b = curve([0.1, 0.5, 0.59, 0.6])
        report = compare_runs([a, b])
        assert report["lengths"] == [3, 4]
        assert report["max_peak_gap"] == pytest.approx(0.0, abs=1e-12)
        shared = [row["name"] for row in report["aligned_layers"]]
        assert shared == ["layer_00", "layer_01", "layer_02"]

    def test_single_curve_rejected(self):
        with pytest.raises(ParameterError):
            compare_runs([curve([0.1, 0.2])])


def test_report_schema():
    c = curve([0.1, 0.3, 0.31, 0.305, 0.6])
    segs = detect_segments(c, epsilon=0.02)
    plan = prune_plan(c, segs, manifest_for(5, repeatable={2}))
    report = build_report(c, segs, plan, [0, 1, 0, 0, 2], k=3, n=100, metric="cosine")
    assert set(report) == {
        "curve", "layers", "epsilon", "plateaus", "descents",
        "prune_candidates", "clamped_edges_per_layer", "params",
    }
    assert report["plateaus"] == [[1, 3]]
    assert report["params"] == {"k": 3, "n": 100, "metric": "cosine"}
    assert report["prune_candidates"][0] == {
        "layer": 2, "name": "layer_02", "reason": "plateau", "eligible": True,
    }


def test_segments_empty_constructor():
    segs = CurveSegments.empty(0.01)
    assert segs.plateaus == () and segs.descents == () and segs.epsilon == 0.01
