"""Dependency-free SVG rendering for curves and difference heatmaps.

Plots are assembled as plain strings with fixed-precision coordinates, so
identical inputs produce identical bytes; that property is load-bearing
for snapshot tests and for the CLI's determinism contract. A curve chart
contains exactly one polyline; a heatmap contains exactly one rect per
matrix cell.
"""

from __future__ import annotations

import numpy as np

from .errors import IoError, ParameterError

_WIDTH, _HEIGHT = 640, 400
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 60, 20, 20, 45

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")

# Dark-violet -> magenta -> yellow, interpolated per cell.
_HEAT_STOPS = ((13, 8, 135), (177, 42, 144), (240, 249, 33))


def _svg_document(body: list[str], width: int, height: int) -> str:
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
    )
    return head + "\n".join(body) + "\n</svg>\n"


def _write(text: str, path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fp:
            fp.write(text)
    except OSError as e:
        raise IoError(f"cannot write '{path}': {e}") from e


def _value_range(values: np.ndarray) -> tuple[float, float]:
    lo, hi = float(values.min()), float(values.max())
    if hi - lo < 1e-9:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _axes(lo: float, hi: float, n_points: int) -> list[str]:
    x0, x1 = _MARGIN_L, _WIDTH - _MARGIN_R
    y0, y1 = _HEIGHT - _MARGIN_B, _MARGIN_T
    parts = [
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        value = lo + frac * (hi - lo)
        y = y0 + frac * (y1 - y0)
        parts.append(f'<line x1="{x0 - 4}" y1="{y:.2f}" x2="{x0}" y2="{y:.2f}" stroke="black"/>')
        parts.append(
            f'<text x="{x0 - 8}" y="{y + 4:.2f}" font-size="11" text-anchor="end">{value:.2f}</text>'
        )
    step = max(1, (n_points - 1) // 10) if n_points > 1 else 1
    for i in range(0, n_points, step):
        x = x0 if n_points == 1 else x0 + i * (x1 - x0) / (n_points - 1)
        parts.append(
            f'<text x="{x:.2f}" y="{y0 + 16}" font-size="11" text-anchor="middle">{i}</text>'
        )
    parts.append(
        f'<text x="{(x0 + x1) / 2:.2f}" y="{_HEIGHT - 10}" font-size="12" '
        f'text-anchor="middle">layer</text>'
    )
    parts.append(
        f'<text x="14" y="{(y0 + y1) / 2:.2f}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 14 {(y0 + y1) / 2:.2f})">modularity</text>'
    )
    return parts


def _polyline(values: np.ndarray, lo: float, hi: float, color: str) -> str:
    x0, x1 = _MARGIN_L, _WIDTH - _MARGIN_R
    y0, y1 = _HEIGHT - _MARGIN_B, _MARGIN_T
    n = values.size
    points = []
    for i, v in enumerate(values):
        x = x0 if n == 1 else x0 + i * (x1 - x0) / (n - 1)
        y = y0 + (float(v) - lo) / (hi - lo) * (y1 - y0)
        points.append(f"{x:.2f},{y:.2f}")
    return f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{" ".join(points)}"/>'


def render_curve(values, path, color: str = _PALETTE[0]) -> None:
    """Line chart of one modularity curve; exactly one polyline element."""
    arr = np.asarray(getattr(values, "values", values), dtype=np.float64)
    if arr.size == 0:
        raise ParameterError("cannot render an empty curve")
    lo, hi = _value_range(arr)
    body = _axes(lo, hi, arr.size) + [_polyline(arr, lo, hi, color)]
    _write(_svg_document(body, _WIDTH, _HEIGHT), path)


def render_overlay(labeled_curves: list[tuple[str, np.ndarray]], path) -> None:
    """Several curves on shared axes, one polyline each, with a text legend."""
    if not labeled_curves:
        raise ParameterError("cannot render an empty overlay")
    stacked = np.concatenate([np.asarray(v, dtype=np.float64) for _, v in labeled_curves])
    lo, hi = _value_range(stacked)
    n = max(np.asarray(v).size for _, v in labeled_curves)
    body = _axes(lo, hi, n)
    for idx, (label, values) in enumerate(labeled_curves):
        color = _PALETTE[idx % len(_PALETTE)]
        body.append(_polyline(np.asarray(values, dtype=np.float64), lo, hi, color))
        body.append(
            f'<text x="{_WIDTH - _MARGIN_R - 6}" y="{_MARGIN_T + 14 + 14 * idx}" font-size="11" '
            f'text-anchor="end" fill="{color}">{label}</text>'
        )
    _write(_svg_document(body, _WIDTH, _HEIGHT), path)


def _heat_color(t: float) -> str:
    stops = _HEAT_STOPS
    pos = t * (len(stops) - 1)
    i = min(int(pos), len(stops) - 2)
    frac = pos - i
    r, g, b = (round(a + frac * (b_ - a)) for a, b_ in zip(stops[i], stops[i + 1]))
    return f"#{r:02x}{g:02x}{b:02x}"


def render_heatmap(matrix, path) -> None:
    """Color-mapped grid of a square matrix; exactly one rect per cell."""
    arr = np.asarray(getattr(matrix, "values", matrix), dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.size == 0:
        raise ParameterError("heatmap needs a non-empty square matrix")
    n = arr.shape[0]
    cell = max(6, min(40, 480 // n))
    pad = 40
    size = pad + n * cell + 10
    vmax = max(float(arr.max()), 1e-12)
    body = []
    for i in range(n):
        for j in range(n):
            color = _heat_color(float(arr[i, j]) / vmax)
            body.append(
                f'<rect x="{pad + j * cell}" y="{pad + i * cell}" width="{cell}" '
                f'height="{cell}" fill="{color}"/>'
            )
    if n <= 40:
        for i in range(n):
            center = pad + i * cell + cell / 2
            body.append(
                f'<text x="{center:.2f}" y="{pad - 6}" font-size="9" text-anchor="middle">{i}</text>'
            )
            body.append(
                f'<text x="{pad - 6}" y="{center + 3:.2f}" font-size="9" text-anchor="end">{i}</text>'
            )
    _write(_svg_document(body, size, size), path)
