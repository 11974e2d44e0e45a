"""Plain-text SVG drawings: the pencil circle diagram and traced curves on the spheres.

Sphere points are drawn through a fixed embedding into R^3 followed by an
orthographic projection; the projection axis and embedding are written into
the SVG metadata so a reader can tell which side is being shown.
"""

from __future__ import annotations

import math

import numpy as np

from .segre import discriminant_angles, slice_of

SIZE = 400
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]


def _fmt(x):
    return f"{x:.3f}".rstrip("0").rstrip(".")


def _header(title, meta, width=SIZE):
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{SIZE}" '
             f'viewBox="0 0 {width} {SIZE}">',
             f"<title>{title}</title>", "<metadata>"]
    for k in sorted(meta):
        lines.append(f"  <entry key=\"{k}\">{meta[k]}</entry>")
    lines.append("</metadata>")
    lines.append(f'<rect width="{width}" height="{SIZE}" fill="white"/>')
    return lines


def _meta(extra, timestamp):
    meta = dict(extra)
    if timestamp is not None:
        meta["timestamp"] = timestamp
    return meta


def circle_diagram(profile, title="pencil", timestamp=None):
    """The real pencil as a circle (angle psi in [0, pi) doubled), special members and intervals marked."""
    c, R = SIZE / 2, SIZE * 0.36
    out = _header(title, _meta({"angleMap": "psi -> 2 psi", "merged": str(profile.merged).lower()}, timestamp))
    out.append(f'<circle cx="{c}" cy="{c}" r="{R}" fill="none" stroke="#999" stroke-width="1"/>')

    def xy(psi, rad):
        a = 2 * psi
        return c + rad * math.cos(a), c - rad * math.sin(a)

    for k, iv in enumerate(profile.intervals):
        x, y = xy(iv["sample"], R * 0.8)
        col = "#2ca02c" if iv["tag"] == iv["expected"] else "#d62728"
        out.append(f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="11" fill="{col}" '
                   f'text-anchor="middle">{iv["name"]}</text>')
    for m in profile.members:
        x, y = xy(m["angle"], R)
        lx, ly = xy(m["angle"], R * 1.15)
        out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="4" fill="black"/>')
        out.append(f'<text x="{_fmt(lx)}" y="{_fmt(ly)}" font-size="12" text-anchor="middle">{m["name"]}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


class SphereView:
    """Embedding of one real sphere into R^3 and an orthographic view of it.

    The embedding sends slice coordinates (u, v, x3, x4) to
    (u / r_max, v / r_max, z) with z the base-conic angle rescaled to [-1, 1].
    """

    def __init__(self, S, which, axis=(1.0, 0.35, 0.25)):
        ang = discriminant_angles(S)
        self.lo, self.hi = (ang[0], ang[1]) if which == 1 else (ang[2], ang[3])
        th = np.linspace(self.lo, self.hi, 201)
        r2 = S.beta * np.cos(th) ** 2 + S.gamma * np.sin(th) ** 2 - S.alpha
        self.rmax = float(np.sqrt(max(r2.max(), 1e-12)))
        self.which = which
        a = np.asarray(axis, dtype=float)
        self.axis = a / np.linalg.norm(a)
        up = np.array([0.0, 0.0, 1.0])
        e1 = np.cross(up, self.axis)
        if np.linalg.norm(e1) < 1e-9:
            e1 = np.array([1.0, 0.0, 0.0])
        self.e1 = e1 / np.linalg.norm(e1)
        self.e2 = np.cross(self.axis, self.e1)

    def embed(self, y):
        y = np.asarray(y, dtype=float)
        th = np.arctan2(y[..., 3], y[..., 2])
        z = 2 * (th - self.lo) / (self.hi - self.lo) - 1
        return np.stack([y[..., 0] / self.rmax, y[..., 1] / self.rmax, z], axis=-1)

    def project(self, y):
        p = self.embed(y)
        return p @ self.e1, p @ self.e2, p @ self.axis

    def metadata(self):
        return {"projection": "orthographic", "axis": " ".join(_fmt(v) for v in self.axis),
                "embedding": "(u/rmax, v/rmax, rescaled base angle)", "sphere": f"S{self.which}"}


def _panel(view, components, marks, cx, cy, scale):
    def screen(a, b):
        return cx + scale * a, cy - scale * b

    out = [f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(scale * math.sqrt(2))}" fill="none" stroke="#ddd"/>',
           f'<text x="{_fmt(cx)}" y="{_fmt(cy - scale * 1.45)}" font-size="12" text-anchor="middle">S{view.which}</text>']
    for k, comp in enumerate(components):
        pts = np.asarray(comp.points if hasattr(comp, "points") else comp, dtype=float)
        if len(pts) == 0:
            continue
        a, b, depth = view.project(pts)
        col = PALETTE[k % len(PALETTE)]
        # runs of constant visibility: front solid, back dashed
        front = depth >= 0
        start = 0
        for i in range(1, len(pts) + 1):
            if i == len(pts) or front[i] != front[start]:
                seg = range(start, min(i + 1, len(pts)))
                if len(seg) > 1:
                    d = " ".join("{},{}".format(*map(_fmt, screen(a[j], b[j]))) for j in seg)
                    dash = "" if front[start] else ' stroke-dasharray="4,3" stroke-opacity="0.5"'
                    out.append(f'<polyline points="{d}" fill="none" stroke="{col}" stroke-width="1.5"{dash}/>')
                else:
                    x, y = screen(a[start], b[start])
                    out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="2" fill="{col}"/>')
                start = i
    for label, p in marks:
        p = np.asarray(p, dtype=float)
        y = slice_of(p) if p.shape[-1] == 5 else p
        a, b, _ = view.project(y[None, :])
        x, yy = screen(a[0], b[0])
        out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(yy)}" r="3.5" fill="none" stroke="black"/>')
        out.append(f'<text x="{_fmt(x + 6)}" y="{_fmt(yy - 6)}" font-size="11">{label}</text>')
    return out


def trace_svg(S, components, which=1, marks=(), title="trace", axis=(1.0, 0.35, 0.25), timestamp=None):
    """Polylines for traced components on sphere `which`.

    `marks` is a list of (label, real-form or slice point).
    """
    view = SphereView(S, which, axis)
    out = _header(title, _meta(view.metadata(), timestamp))
    out += _panel(view, components, marks, SIZE / 2, SIZE / 2, SIZE * 0.3)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def section_svg(S, components, marks=(), title="section", axis=(1.0, 0.35, 0.25), timestamp=None):
    """Two panels, S1 left and S2 right; `components` maps sphere index to a list."""
    views = {w: SphereView(S, w, axis) for w in (1, 2)}
    meta = {k: v for k, v in views[1].metadata().items() if k != "sphere"}
    meta["panels"] = "S1 S2"
    out = _header(title, _meta(meta, timestamp), width=2 * SIZE)
    for k, w in enumerate((1, 2)):
        mk = [(lab, p) for lab, p in marks if _sphere_of(p) == w]
        out += _panel(views[w], components.get(w, []), mk, SIZE * (k + 0.5), SIZE / 2, SIZE * 0.28)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _sphere_of(p):
    p = np.asarray(p, dtype=float)
    x4 = p[4] / p[2] if p.shape[-1] == 5 else p[3]
    return 1 if x4 > 0 else 2
