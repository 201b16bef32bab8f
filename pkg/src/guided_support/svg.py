"""Minimal deterministic SVG emitter for supports, trajectories and sample clouds."""

from __future__ import annotations

import numpy as np

from .geometry import Ball, ConvexPolygon, Difference, Union

PALETTE = ("#1f77b4", "#d62728", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf", "#bcbd22")
TARGET_FILL = "#b8e6b8"
OTHER_FILL = "#dddddd"


def _f(v: float) -> str:
    return f"{v:.3f}"


class Canvas:
    def __init__(self, box, size=600, margin=20):
        xmin, xmax, ymin, ymax = box
        self.xmin, self.ymax = xmin, ymax
        span = max(xmax - xmin, ymax - ymin)
        self.scale = (size - 2 * margin) / span
        self.margin = margin
        self.width = int(round(2 * margin + (xmax - xmin) * self.scale))
        self.height = int(round(2 * margin + (ymax - ymin) * self.scale))
        self.defs: list[str] = []
        self.items: list[str] = []

    def xy(self, p):
        p = np.asarray(p, dtype=float)
        return self.margin + (p[..., 0] - self.xmin) * self.scale, self.margin + (self.ymax - p[..., 1]) * self.scale

    def shape(self, s, fill, stroke="#555555", uid="s"):
        if isinstance(s, Ball):
            cx, cy = self.xy(s.c)
            self.items.append(
                f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(s.radius * self.scale)}" fill="{fill}" stroke="{stroke}"/>'
            )
        elif isinstance(s, ConvexPolygon):
            xs, ys = self.xy(s.v)
            pts = " ".join(f"{_f(a)},{_f(b)}" for a, b in zip(xs, ys))
            self.items.append(f'<polygon points="{pts}" fill="{fill}" stroke="{stroke}"/>')
        elif isinstance(s, Difference):
            cx, cy = self.xy(s.cut.c)
            r = s.cut.radius * self.scale
            self.defs.append(
                f'<mask id="{uid}"><rect x="0" y="0" width="{self.width}" height="{self.height}" fill="white"/>'
                f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(r)}" fill="black"/></mask>'
            )
            ox, oy = self.xy(s.outer.c)
            self.items.append(
                f'<circle cx="{_f(ox)}" cy="{_f(oy)}" r="{_f(s.outer.radius * self.scale)}" fill="{fill}" '
                f'stroke="{stroke}" mask="url(#{uid})"/>'
            )
        elif isinstance(s, Union):
            for i, q in enumerate(s.parts):
                self.shape(q, fill, stroke, f"{uid}_{i}")
        else:
            raise TypeError(f"cannot draw {type(s).__name__}")

    def polyline(self, pts, color, width=1.5, opacity=1.0):
        pts = np.asarray(pts, dtype=float)
        pts = pts[np.all(np.isfinite(pts), axis=1)]
        if len(pts) < 2:
            return
        xs, ys = self.xy(pts)
        path = " ".join(f"{_f(a)},{_f(b)}" for a, b in zip(xs, ys))
        self.items.append(
            f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="{width}" stroke-opacity="{opacity}"/>'
        )

    def dot(self, p, color, r=3.0):
        if not np.all(np.isfinite(p)):
            return
        x, y = self.xy(p)
        self.items.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{r}" fill="{color}"/>')

    def cross(self, p, color, h=4.0):
        if not np.all(np.isfinite(p)):
            return
        x, y = self.xy(p)
        self.items.append(
            f'<path d="M{_f(x - h)},{_f(y - h)} L{_f(x + h)},{_f(y + h)} M{_f(x - h)},{_f(y + h)} '
            f'L{_f(x + h)},{_f(y - h)}" stroke="{color}" stroke-width="2"/>'
        )

    def text(self, p, s, size=12):
        self.items.append(f'<text x="{_f(p[0])}" y="{_f(p[1])}" font-size="{size}" font-family="sans-serif">{s}</text>')

    def render(self) -> str:
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">'
        )
        body = ['<rect width="100%" height="100%" fill="white"/>']
        if self.defs:
            body.append("<defs>" + "".join(self.defs) + "</defs>")
        return "\n".join([head, *body, *self.items, "</svg>"]) + "\n"


def _window(model, extra=None, pad=0.5):
    boxes = [s.bounding_box() for s in model.supports]
    xmin = min(b.xmin for b in boxes)
    xmax = max(b.xmax for b in boxes)
    ymin = min(b.ymin for b in boxes)
    ymax = max(b.ymax for b in boxes)
    if extra is not None and len(extra):
        e = np.asarray(extra, dtype=float)
        e = e[np.all(np.isfinite(e), axis=1)]
        # keep the view bounded even if a path wanders far out
        e = np.clip(e, [xmin - 3, ymin - 3], [xmax + 3, ymax + 3])
        if len(e):
            xmin, ymin = min(xmin, e[:, 0].min()), min(ymin, e[:, 1].min())
            xmax, ymax = max(xmax, e[:, 0].max()), max(ymax, e[:, 1].max())
    return xmin - pad, xmax + pad, ymin - pad, ymax + pad


def draw_supports(canvas, model, highlight=None):
    highlight = {model.target} if highlight is None else set(highlight)
    for i, s in enumerate(model.supports):
        canvas.shape(s, TARGET_FILL if i in highlight else OTHER_FILL, uid=f"cut{i}")


def trajectories_svg(model, trajs, title="") -> str:
    pts = np.concatenate([t.x_states for t in trajs]) if trajs else None
    c = Canvas(_window(model, pts))
    draw_supports(c, model)
    for i, t in enumerate(trajs):
        color = PALETTE[i % len(PALETTE)]
        c.polyline(t.x_states, color)
        c.dot(t.x_states[0], "#1f3fbf")
        finite = t.x_states[np.all(np.isfinite(t.x_states), axis=1)]
        if len(finite):
            c.cross(finite[-1], color)
    if title:
        c.text((8, 14), title)
    return c.render()


def density_svg(model, samples, targets, title="") -> str:
    samples = np.asarray(samples, dtype=float)
    c = Canvas(_window(model, samples))
    draw_supports(c, model, highlight=range(model.n_components))
    for p, k in zip(samples, targets):
        c.dot(p, PALETTE[int(k) % len(PALETTE)], r=1.2)
    if title:
        c.text((8, 14), title)
    return c.render()
