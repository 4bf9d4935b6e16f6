"""Dependency-free SVG output: line/step plots and heat maps.

The documents are self-contained (no fonts, stylesheets or images are
referenced) so they can be diffed byte-for-byte between runs.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#c0392b", "#2471a3", "#229954", "#7d3c98", "#d68910", "#17a589", "#566573", "#a93226")
MARGIN = (56, 16, 24, 40)  # left, right, top, bottom


def _num(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def _frame(width, height, title, xlabel, ylabel):
    left, right, top, bottom = MARGIN
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect class="frame" x="{left}" y="{top}" width="{width - left - right}" '
        f'height="{height - top - bottom}" fill="none" stroke="#000"/>',
    ]
    if title:
        parts.append(f'<text x="{width / 2:.1f}" y="16" text-anchor="middle" font-size="13">{escape(title)}</text>')
    if xlabel:
        parts.append(f'<text x="{width / 2:.1f}" y="{height - 6}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>')
    if ylabel:
        parts.append(f'<text x="14" y="{height / 2:.1f}" text-anchor="middle" font-size="12" '
                     f'transform="rotate(-90 14 {height / 2:.1f})">{escape(ylabel)}</text>')
    return parts


def _limits(values, pad=0.05):
    lo, hi = float(np.min(values)), float(np.max(values))
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    span = hi - lo
    return lo - pad * span, hi + pad * span


def _step_points(x, y):
    xs = np.repeat(x, 2)[1:]
    ys = np.repeat(y, 2)[:-1]
    return xs, ys


def render_svg(data, style: str = "line", width: int = 640, height: int = 360, title: str = "",
               xlabel: str = "", ylabel: str = "", ylim=None, labels=None) -> str:
    """Render series or a grid as an SVG document.

    ``style`` is ``"line"`` or ``"step"`` for ``data`` = one ``(x, y)`` pair or
    a list of them (one polyline each), and ``"heatmap"`` for a 2-D array
    (rows drawn top to bottom, one filled rect per cell; booleans or reals).
    """
    if style == "heatmap":
        return _heatmap(np.asarray(data), width, height, title, xlabel, ylabel)
    if style not in ("line", "step"):
        raise ValueError(f"unknown style {style!r}")
    if isinstance(data, tuple) and len(data) == 2 and np.ndim(data[0]) == 1:
        data = [data]
    series = [(np.asarray(x, dtype=float), np.asarray(y, dtype=float)) for x, y in data]
    if not series or any(x.size == 0 or x.size != y.size for x, y in series):
        raise ValueError("nothing to plot")
    finite_y = np.concatenate([y[np.isfinite(y)] for _, y in series])
    if finite_y.size == 0:
        raise ValueError("no finite values to plot")
    x0, x1 = _limits(np.concatenate([x for x, _ in series]), pad=0.0)
    y0, y1 = ylim if ylim is not None else _limits(finite_y)
    left, right, top, bottom = MARGIN
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + (1 - (np.clip(y, y0, y1) - y0) / (y1 - y0)) * ph

    parts = _frame(width, height, title, xlabel, ylabel)
    for name, val, anchor in (("x", x0, "start"), ("x", x1, "end")):
        parts.append(f'<text x="{px(val):.1f}" y="{top + ph + 14}" text-anchor="{anchor}" font-size="10">{val:.4g}</text>')
    for val in (y0, y1):
        parts.append(f'<text x="{left - 4}" y="{py(val) + 4:.1f}" text-anchor="end" font-size="10">{val:.4g}</text>')
    for k, (x, y) in enumerate(series):
        keep = np.isfinite(y)
        x, y = x[keep], y[keep]
        if style == "step":
            x, y = _step_points(x, y)
        pts = " ".join(f"{_num(px(a))},{_num(py(b))}" for a, b in zip(x, y))
        colour = PALETTE[k % len(PALETTE)]
        label = f' data-label="{escape(labels[k])}"' if labels else ""
        parts.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5"{label} points="{pts}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _heatmap(grid, width, height, title, xlabel, ylabel):
    if grid.ndim != 2 or grid.size == 0:
        raise ValueError("heat map needs a non-empty 2-D grid")
    vals = grid.astype(float)
    finite = vals[np.isfinite(vals)]
    lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    left, right, top, bottom = MARGIN
    rows, cols = grid.shape
    cw = (width - left - right) / cols
    ch = (height - top - bottom) / rows
    parts = _frame(width, height, title, xlabel, ylabel)
    for r in range(rows):
        for c in range(cols):
            v = vals[r, c]
            if not np.isfinite(v):
                fill = "#ffffff"
            else:
                s = 0.0 if hi == lo else (v - lo) / (hi - lo)
                shade = int(round(235 - 200 * s))
                fill = f"#{shade:02x}{shade:02x}{255:02x}" if s else "#f2f2f2"
            parts.append(f'<rect class="cell" x="{left + c * cw:.2f}" y="{top + r * ch:.2f}" '
                         f'width="{cw:.2f}" height="{ch:.2f}" fill="{fill}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
