"""Minimal self-contained SVG emitter for report plots (no plotting
dependency): log-log scatter with fitted lines, and heat-slice grids."""

from __future__ import annotations

import math

WIDTH, HEIGHT = 800, 600
MARGIN = 70


def _fmt(v):
    return f"{v:.6g}"


class SvgCanvas:
    def __init__(self, title=""):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
            f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        ]
        if title:
            self.text(WIDTH / 2, 28, title, size=16, anchor="middle")

    def line(self, x1, y1, x2, y2, color="black", width=1.0, dash=None):
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" '
            f'y2="{_fmt(y2)}" stroke="{color}" '
            f'stroke-width="{width}"{d}/>')

    def circle(self, x, y, r=4, color="steelblue"):
        self.parts.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" '
                          f'r="{r}" fill="{color}"/>')

    def rect(self, x, y, w, h, color):
        self.parts.append(f'<rect x="{_fmt(x)}" y="{_fmt(y)}" '
                          f'width="{_fmt(w)}" height="{_fmt(h)}" '
                          f'fill="{color}"/>')

    def text(self, x, y, s, size=12, anchor="start", rotate=None):
        tr = f' transform="rotate({rotate} {_fmt(x)} {_fmt(y)})"' \
            if rotate is not None else ""
        self.parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{size}" '
            f'font-family="sans-serif" text-anchor="{anchor}"{tr}>'
            f'{s}</text>')

    def to_string(self):
        return "\n".join(self.parts + ["</svg>"])

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_string())


class _LogAxes:
    def __init__(self, xs, ys):
        self.x_lo = math.log10(min(xs)) - 0.08
        self.x_hi = math.log10(max(xs)) + 0.08
        self.y_lo = math.log10(min(ys)) - 0.15
        self.y_hi = math.log10(max(ys)) + 0.15

    def px(self, x):
        f = (math.log10(x) - self.x_lo) / (self.x_hi - self.x_lo)
        return MARGIN + f * (WIDTH - 2 * MARGIN)

    def py(self, y):
        f = (math.log10(y) - self.y_lo) / (self.y_hi - self.y_lo)
        return HEIGHT - MARGIN - f * (HEIGHT - 2 * MARGIN)


def loglog_plot(path, xs, ys, yerrs=None, fit_slope=None, title="",
                xlabel="distance", ylabel="value", annotations=()):
    """Log-log scatter with error bars and an optional fitted power law."""
    pts = [(x, y) for x, y in zip(xs, ys) if x > 0 and y > 0]
    if not pts:
        raise ValueError("nothing positive to plot")
    ax = _LogAxes([p[0] for p in pts], [p[1] for p in pts])
    cv = SvgCanvas(title)
    cv.line(MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN)
    cv.line(MARGIN, MARGIN, MARGIN, HEIGHT - MARGIN)
    cv.text(WIDTH / 2, HEIGHT - 20, xlabel, anchor="middle")
    cv.text(22, HEIGHT / 2, ylabel, anchor="middle", rotate=-90)
    for k, (x, y) in enumerate(pts):
        px, py = ax.px(x), ax.py(y)
        if yerrs is not None and yerrs[k] > 0 and y - yerrs[k] > 0:
            cv.line(px, ax.py(y - yerrs[k]), px, ax.py(y + yerrs[k]),
                    color="gray")
        cv.circle(px, py)
        cv.text(px + 6, py - 6, f"{x:.3g}", size=9)
    if fit_slope is not None:
        x0, y0 = pts[0]
        xs_sorted = sorted(p[0] for p in pts)
        x1 = xs_sorted[0]
        y1 = y0 * (x1 / x0) ** fit_slope
        cv.line(ax.px(x0), ax.py(y0), ax.px(x1), ax.py(y1),
                color="firebrick", width=1.5, dash="6,4")
        cv.text(WIDTH - MARGIN, MARGIN + 16,
                f"slope {fit_slope:.3f}", anchor="end", size=13)
    for i, note in enumerate(annotations):
        cv.text(MARGIN + 8, MARGIN + 16 + 16 * i, note, size=12)
    cv.write(path)


def _heat_color(f):
    f = min(max(f, 0.0), 1.0)
    r = int(255 * min(1.0, 1.5 * f))
    g = int(255 * min(1.0, max(0.0, 1.5 * f - 0.4)))
    b = int(255 * max(0.0, 1.0 - 1.3 * f))
    return f"rgb({r},{g},{b})"


def heat_slice(path, values, extent, title="", label=""):
    """Colored-cell rendering of a 2d scalar field (nan cells skipped).

    ``values`` is an (ny, nx) array scanned bottom-to-top; ``extent`` is
    (x_lo, x_hi, y_lo, y_hi) for the axis labels.
    """
    import numpy as np
    values = np.asarray(values, dtype=float)
    finite = np.isfinite(values)
    if not np.any(finite):
        raise ValueError("no finite cells")
    vmax = float(values[finite].max())
    vmin = float(values[finite].min())
    span = vmax - vmin if vmax > vmin else 1.0
    ny, nx = values.shape
    cw = (WIDTH - 2 * MARGIN) / nx
    ch = (HEIGHT - 2 * MARGIN) / ny
    cv = SvgCanvas(title)
    for i in range(ny):
        for j in range(nx):
            if not finite[i, j]:
                continue
            f = (values[i, j] - vmin) / span
            cv.rect(MARGIN + j * cw,
                    HEIGHT - MARGIN - (i + 1) * ch, cw + 0.5, ch + 0.5,
                    _heat_color(f))
    x_lo, x_hi, y_lo, y_hi = extent
    cv.text(MARGIN, HEIGHT - MARGIN + 18, f"{x_lo:.3g}")
    cv.text(WIDTH - MARGIN, HEIGHT - MARGIN + 18, f"{x_hi:.3g}",
            anchor="end")
    cv.text(MARGIN - 6, HEIGHT - MARGIN, f"{y_lo:.3g}", anchor="end")
    cv.text(MARGIN - 6, MARGIN + 10, f"{y_hi:.3g}", anchor="end")
    if label:
        cv.text(WIDTH / 2, HEIGHT - 16,
                f"{label}  (min {vmin:.3g}, max {vmax:.3g})",
                anchor="middle")
    cv.write(path)
