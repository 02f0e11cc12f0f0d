import numpy as np
import pytest

from modgraph import ParameterError
from modgraph.analysis import difference_matrix
from modgraph.modularity import ModularityCurve
from modgraph.plots import render_curve, render_heatmap, render_overlay


def test_two_point_curve_has_one_polyline_with_two_points(tmp_path):
    path = tmp_path / "c.svg"
    render_curve(np.array([0.1, 0.6]), path)
    text = path.read_text()
    assert text.count("<polyline") == 1
    points = text.split('points="')[1].split('"')[0]
    assert len(points.split(" ")) == 2


def test_heatmap_has_exactly_l_squared_rects(tmp_path):
    for n in (1, 3, 7):
        rng = np.random.default_rng(n)
        values = rng.uniform(0, 1, size=n)
        curve = ModularityCurve(values=values, layer_names=tuple(str(i) for i in range(n)))
        path = tmp_path / f"h{n}.svg"
        render_heatmap(difference_matrix(curve), path)
        assert path.read_text().count("<rect") == n * n


def test_curve_rendering_deterministic(tmp_path):
    values = np.random.default_rng(0).uniform(0, 1, 9)
    render_curve(values, tmp_path / "a.svg")
    render_curve(values, tmp_path / "b.svg")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def test_heatmap_rendering_deterministic(tmp_path):
    m = np.abs(np.random.default_rng(1).standard_normal((5, 5)))
    render_heatmap(m, tmp_path / "a.svg")
    render_heatmap(m, tmp_path / "b.svg")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def test_constant_curve_does_not_degenerate(tmp_path):
    render_curve(np.full(4, 0.3), tmp_path / "flat.svg")
    assert "<polyline" in (tmp_path / "flat.svg").read_text()


def test_overlay_one_polyline_per_curve(tmp_path):
    curves = [("a", np.array([0.1, 0.2])), ("b", np.array([0.3, 0.1])), ("c", np.array([0.0, 0.5]))]
    render_overlay(curves, tmp_path / "o.svg")
    assert (tmp_path / "o.svg").read_text().count("<polyline") == 3


def test_empty_inputs_rejected(tmp_path):
    with pytest.raises(ParameterError):
        render_curve(np.array([]), tmp_path / "x.svg")
    with pytest.raises(ParameterError):
        render_heatmap(np.zeros((0, 0)), tmp_path / "x.svg")
    with pytest.raises(ParameterError):
        render_overlay([], tmp_path / "x.svg")
