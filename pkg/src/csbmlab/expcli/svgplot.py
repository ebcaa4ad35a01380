"""Deterministic SVG line plots for the experiment CSVs.

The emitter is hand-rolled text generation: no timestamps, no generated
ids, fixed float formatting, '\\n' line endings. The same CSV therefore
always produces byte-identical SVG output.

Plot kinds map one-to-one onto the experiment CSV schemas:

* ``exp1`` -- accuracy vs t, one line per a;
* ``exp2`` -- accuracy vs t, one line per mu;
* ``exp3`` -- gamma vs layer, one line per t (optionally log-scale y);
* ``exp4`` -- accuracy vs snr (log x), one line per model, optional
  vertical threshold marker.
"""

from __future__ import annotations

import math
import os

from ..errors import PlotDataError

__all__ = ["read_csv", "emit_plot", "PLOT_KINDS"]

PLOT_KINDS = {
    "exp1": ("t", "mean_accuracy", "a", False, False),
    "exp2": ("t", "mean_accuracy", "mu", False, False),
    "exp3": ("layer", "gamma", "t", False, True),       # log y via flag
    "exp4": ("snr", "mean_accuracy", "model", True, False),  # log x
}

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
            "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2")

_WIDTH, _HEIGHT = 640, 440
_ML, _MR, _MT, _MB = 62, 16, 18, 46


def read_csv(path: str) -> tuple[list[str], list[list[str]]]:
    """Parse a runner CSV; malformed content raises with the line number."""
    with open(path, "r") as fh:
        lines = fh.read().split("\n")
    if not lines or not lines[0].strip():
        raise PlotDataError(f"{path}: empty file", line_number=1)
    header = lines[0].split(",")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise PlotDataError(
                f"{path}: expected {len(header)} columns, found {len(cells)}",
                line_number=lineno)
        rows.append(cells)
    if not rows:
        raise PlotDataError(f"{path}: no data rows", line_number=2)
    return header, rows


def _column(header: list[str], rows: list[list[str]], name: str, path: str) -> list[str]:
    try:
        idx = header.index(name)
    except ValueError:
        raise PlotDataError(f"{path}: missing column {name!r}", line_number=1) from None
    return [row[idx] for row in rows]


def _floats(values: list[str], path: str, column: str) -> list[float]:
    out = []
    for offset, text in enumerate(values):
        try:
            out.append(float(text))
        except ValueError:
            raise PlotDataError(
                f"{path}: column {column!r} has non-numeric value {text!r}",
                line_number=offset + 2) from None
    return out


def _fmt(x: float) -> str:
    return format(x, ".6g")


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min((s for s in (1, 2, 5, 10) if s * mag >= raw), default=10) * mag
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-12 * step:
        ticks.append(0.0 if abs(v) < step * 1e-9 else v)
        v += step
    return ticks


class _Scale:
    def __init__(self, lo: float, hi: float, out_lo: float, out_hi: float, log: bool):
        self.log = log
        if log:
            lo, hi = math.log10(lo), math.log10(hi)
        if hi <= lo:
            hi = lo + 1.0
        self.lo, self.hi = lo, hi
        self.out_lo, self.out_hi = out_lo, out_hi

    def __call__(self, v: float) -> float:
        v = math.log10(v) if self.log else v
        frac = (v - self.lo) / (self.hi - self.lo)
        return self.out_lo + frac * (self.out_hi - self.out_lo)


def emit_plot(csv_path: str, kind: str, out_path: str | None = None,
              log_scale: bool = False, marker: float | None = None) -> str:
    """Render one CSV as an SVG line plot; returns the output path."""
    if kind not in PLOT_KINDS:
        raise PlotDataError(f"unknown plot kind {kind!r}; expected one of {sorted(PLOT_KINDS)}")
    x_col, y_col, group_col, log_x, log_y_allowed = PLOT_KINDS[kind]
    log_y = bool(log_scale and log_y_allowed)
    header, rows = read_csv(csv_path)
    xs = _floats(_column(header, rows, x_col, csv_path), csv_path, x_col)
    ys = _floats(_column(header, rows, y_col, csv_path), csv_path, y_col)
    groups = _column(header, rows, group_col, csv_path)

    series: dict[str, list[tuple[float, float]]] = {}
    for g, x, y in zip(groups, xs, ys):
        series.setdefault(g, []).append((x, y))
    for pts in series.values():
        pts.sort(key=lambda p: p[0])

    if log_y:
        ys_plot = [y for y in ys if y > 0.0]
        if not ys_plot:
            raise PlotDataError(f"{csv_path}: no positive values for log scale")
    else:
        ys_plot = ys
    xs_all = xs + ([marker] if marker is not None else [])
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_plot), max(ys_plot)
    if not log_y:
        pad = 0.05 * (y_hi - y_lo or 1.0)
        y_lo, y_hi = y_lo - pad, y_hi + pad
    sx = _Scale(x_lo, x_hi, _ML, _WIDTH - _MR, log_x)
    sy = _Scale(y_lo, y_hi, _HEIGHT - _MB, _MT, log_y)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{_WIDTH - _ML - _MR}" '
        f'height="{_HEIGHT - _MT - _MB}" fill="none" stroke="#333333"/>',
    ]

    if log_y:
        lo_exp = math.floor(math.log10(y_lo))
        hi_exp = math.ceil(math.log10(y_hi))
        y_ticks = [10.0 ** e for e in range(int(lo_exp), int(hi_exp) + 1)]
    else:
        y_ticks = _ticks(y_lo, y_hi)
    if log_x:
        lo_exp = math.floor(math.log10(x_lo))
        hi_exp = math.ceil(math.log10(x_hi))
        x_ticks = [10.0 ** e for e in range(int(lo_exp), int(hi_exp) + 1)]
        x_ticks = [t for t in x_ticks if x_lo <= t <= x_hi] or [x_lo, x_hi]
    else:
        x_ticks = _ticks(x_lo, x_hi)

    for t in x_ticks:
        px = sx(t)
        parts.append(f'<line x1="{_fmt(px)}" y1="{_HEIGHT - _MB}" x2="{_fmt(px)}" '
                     f'y2="{_HEIGHT - _MB + 5}" stroke="#333333"/>')
        parts.append(f'<text x="{_fmt(px)}" y="{_HEIGHT - _MB + 18}" font-size="11" '
                     f'text-anchor="middle" font-family="sans-serif">{_fmt(t)}</text>')
    for t in y_ticks:
        if not (y_lo <= t <= y_hi):
            continue
        py = sy(t)
        parts.append(f'<line x1="{_ML - 5}" y1="{_fmt(py)}" x2="{_ML}" '
                     f'y2="{_fmt(py)}" stroke="#333333"/>')
        parts.append(f'<text x="{_ML - 8}" y="{_fmt(py)}" font-size="11" '
                     f'text-anchor="end" dominant-baseline="middle" '
                     f'font-family="sans-serif">{_fmt(t)}</text>')

    parts.append(f'<text x="{(_ML + _WIDTH - _MR) // 2}" y="{_HEIGHT - 10}" '
                 f'font-size="13" text-anchor="middle" '
                 f'font-family="sans-serif">{x_col}</text>')
    parts.append(f'<text x="16" y="{(_MT + _HEIGHT - _MB) // 2}" font-size="13" '
                 f'text-anchor="middle" font-family="sans-serif" '
                 f'transform="rotate(-90 16 {(_MT + _HEIGHT - _MB) // 2})">{y_col}</text>')

    if marker is not None:
        px = sx(marker)
        parts.append(f'<line x1="{_fmt(px)}" y1="{_MT}" x2="{_fmt(px)}" '
                     f'y2="{_HEIGHT - _MB}" stroke="#888888" stroke-dasharray="5,4"/>')

    for i, (name, pts) in enumerate(series.items()):
        colour = _PALETTE[i % len(_PALETTE)]
        coords = []
        for x, y in pts:
            if log_y and y <= 0.0:
                continue
            coords.append(f"{_fmt(sx(x))},{_fmt(sy(y))}")
        if coords:
            parts.append(f'<polyline points="{" ".join(coords)}" fill="none" '
                         f'stroke="{colour}" stroke-width="1.6"/>')
        ly = _MT + 16 + 16 * i
        parts.append(f'<line x1="{_WIDTH - _MR - 120}" y1="{ly - 4}" '
                     f'x2="{_WIDTH - _MR - 96}" y2="{ly - 4}" stroke="{colour}" '
                     f'stroke-width="1.6"/>')
        parts.append(f'<text x="{_WIDTH - _MR - 90}" y="{ly}" font-size="11" '
                     f'font-family="sans-serif">{group_col}={name}</text>')

    parts.append("</svg>")
    if out_path is None:
        out_path = os.path.splitext(csv_path)[0] + ".svg"
    with open(out_path, "w", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
    return out_path
