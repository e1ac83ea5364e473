"""Minimal static SVG charts: bars, semilog lines, error-bar overlays, polar scatter.

Output is a plain string with fixed-precision coordinates and no
timestamps, so identical data gives byte-identical files.
"""

from __future__ import annotations

import math
from html import escape

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=20, top=40, bottom=50)
COLORS = ("#1f77b4", "#2ca02c", "#d62728", "#ff7f0e")


def _f(x: float) -> str:
    return f"{x:.2f}"


class _Canvas:
    def __init__(self, title, xlabel="", ylabel=""):
        self.parts = []
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.x0, self.x1 = MARGIN["left"], WIDTH - MARGIN["right"]
        self.y0, self.y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]

    def add(self, s):
        self.parts.append(s)

    def text(self, x, y, s, size=12, anchor="middle", rotate=None):
        rot = f' transform="rotate({rotate} {_f(x)} {_f(y)})"' if rotate is not None else ""
        self.add(f'<text x="{_f(x)}" y="{_f(y)}" font-size="{size}" text-anchor="{anchor}"{rot}>'
                 f"{escape(s)}</text>")

    def line(self, x1, y1, x2, y2, color="#000", width=1.0, dash=None):
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.add(f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
                 f'stroke="{color}" stroke-width="{width}"{d}/>')

    def frame(self):
        self.line(self.x0, self.y0, self.x1, self.y0)
        self.line(self.x0, self.y0, self.x0, self.y1)
        self.text(WIDTH / 2, 24, self.title, size=14)
        self.text(WIDTH / 2, HEIGHT - 12, self.xlabel)
        self.text(18, HEIGHT / 2, self.ylabel, rotate=-90)

    def render(self) -> str:
        body = "\n".join(self.parts)
        return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
                f'viewBox="0 0 {WIDTH} {HEIGHT}">\n<rect width="100%" height="100%" fill="white"/>\n'
                f"{body}\n</svg>\n")


class _Axes:
    def __init__(self, canvas, xmin, xmax, ymin, ymax, logy=False):
        self.c = canvas
        self.logy = logy
        if logy:
            ymin, ymax = math.log10(ymin), math.log10(ymax)
        if ymax <= ymin:
            ymax = ymin + 1
        if xmax <= xmin:
            xmax = xmin + 1
        self.xmin, self.xmax, self.ymin, self.ymax = xmin, xmax, ymin, ymax

    def X(self, x):
        c = self.c
        return c.x0 + (x - self.xmin) / (self.xmax - self.xmin) * (c.x1 - c.x0)

    def Y(self, y):
        c = self.c
        if self.logy:
            y = math.log10(y) if y > 0 else self.ymin
            y = max(y, self.ymin)
        return c.y0 - (y - self.ymin) / (self.ymax - self.ymin) * (c.y0 - c.y1)

    def ticks(self, xticks):
        c = self.c
        for x in xticks:
            c.line(self.X(x), c.y0, self.X(x), c.y0 + 4)
            c.text(self.X(x), c.y0 + 16, f"{x:g}", size=10)
        if self.logy:
            for e in range(math.floor(self.ymin), math.ceil(self.ymax) + 1):
                if self.ymin <= e <= self.ymax:
                    y = self.Y(10.0**e)
                    c.line(c.x0 - 4, y, c.x0, y)
                    c.text(c.x0 - 6, y + 4, f"1e{e}", size=10, anchor="end")
        else:
            for i in range(6):
                v = self.ymin + i * (self.ymax - self.ymin) / 5
                y = self.Y(v)
                c.line(c.x0 - 4, y, c.x0, y)
                c.text(c.x0 - 6, y + 4, f"{v:.3g}", size=10, anchor="end")


def _legend(canvas, labels):
    for i, lab in enumerate(labels):
        y = MARGIN["top"] + 14 + 16 * i
        canvas.add(f'<rect x="{_f(WIDTH - 170)}" y="{_f(y - 9)}" width="10" height="10" fill="{COLORS[i]}"/>')
        canvas.text(WIDTH - 155, y, lab, size=11, anchor="start")


def bar_chart(values, title, ylabel="|c_n|", xlabel="n") -> str:
    values = [float(v) for v in values]
    cv = _Canvas(title, xlabel, ylabel)
    ax = _Axes(cv, -0.5, len(values) - 0.5, 0.0, max(values + [1e-300]) * 1.05)
    cv.frame()
    ax.ticks(range(len(values)))
    w = 0.7 * (ax.X(1) - ax.X(0))
    for n, v in enumerate(values):
        y = ax.Y(v)
        cv.add(f'<rect x="{_f(ax.X(n) - w / 2)}" y="{_f(y)}" width="{_f(w)}" '
               f'height="{_f(cv.y0 - y)}" fill="{COLORS[0]}"/>')
    return cv.render()


def _log_range(series):
    pos = [v for s in series for v in s if v > 0]
    if not pos:
        return 1e-16, 1.0
    return 10 ** math.floor(math.log10(min(pos))), 10 ** math.ceil(math.log10(max(pos)))


def semilog_lines(x, series: dict, title, ylabel="", xlabel="n") -> str:
    """One polyline with markers per named series on a log10 y axis."""
    cv = _Canvas(title, xlabel, ylabel)
    lo, hi = _log_range(series.values())
    ax = _Axes(cv, min(x), max(x), lo, hi, logy=True)
    cv.frame()
    ax.ticks(x)
    for i, (name, ys) in enumerate(series.items()):
        pts = [(ax.X(xi), ax.Y(yi)) for xi, yi in zip(x, ys) if yi > 0]
        if pts:
            path = " ".join(f"{_f(px)},{_f(py)}" for px, py in pts)
            cv.add(f'<polyline points="{path}" fill="none" stroke="{COLORS[i]}" stroke-width="1.5"/>')
            for px, py in pts:
                cv.add(f'<circle cx="{_f(px)}" cy="{_f(py)}" r="2.5" fill="{COLORS[i]}"/>')
    _legend(cv, list(series))
    return cv.render()


def overlay_chart(exact, estimates, errors, title, ylabel="|c_n|") -> str:
    """Exact values as bars, estimates as circles with error bars."""
    exact = [float(v) for v in exact]
    top = max([e + s for e, s in zip(estimates, errors)] + exact + [1e-300]) * 1.05
    cv = _Canvas(title, "n", ylabel)
    ax = _Axes(cv, -0.5, len(exact) - 0.5, 0.0, top)
    cv.frame()
    ax.ticks(range(len(exact)))
    w = 0.6 * (ax.X(1) - ax.X(0))
    for n, v in enumerate(exact):
        y = ax.Y(v)
        cv.add(f'<rect x="{_f(ax.X(n) - w / 2)}" y="{_f(y)}" width="{_f(w)}" '
               f'height="{_f(cv.y0 - y)}" fill="{COLORS[0]}" fill-opacity="0.6"/>')
    for n, (v, s) in enumerate(zip(estimates, errors)):
        x = ax.X(n)
        cv.line(x, ax.Y(max(v - s, 0.0)), x, ax.Y(v + s), color=COLORS[1], width=1.2)
        cv.add(f'<circle cx="{_f(x)}" cy="{_f(ax.Y(v))}" r="4" fill="none" '
               f'stroke="{COLORS[1]}" stroke-width="1.5"/>')
    _legend(cv, ["exact", "simulated"])
    return cv.render()


def polar_chart(values, title) -> str:
    """Complex coefficients as labelled points in the complex plane."""
    cv = _Canvas(title, "Re c_n", "Im c_n")
    rmax = max([abs(v) for v in values] + [1e-300]) * 1.1
    ax = _Axes(cv, -rmax, rmax, -rmax, rmax)
    cv.frame()
    cx, cy = ax.X(0), ax.Y(0)
    cv.line(ax.X(-rmax), cy, ax.X(rmax), cy, color="#999", dash="4 3")
    cv.line(cx, ax.Y(-rmax), cx, ax.Y(rmax), color="#999", dash="4 3")
    for n, v in enumerate(values):
        if v == 0:
            continue
        x, y = ax.X(v.real), ax.Y(v.imag)
        cv.line(cx, cy, x, y, color=COLORS[0], width=1.0)
        cv.add(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="3.5" fill="{COLORS[0]}"/>')
        cv.text(x + 6, y - 6, str(n), size=10, anchor="start")
    return cv.render()
