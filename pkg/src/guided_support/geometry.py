"""Compact 2D support sets with exact membership, distance and projection.

Every shape also exposes its vertical chords: for an abscissa ``x1`` the set
``{x2 : (x1, x2) in K}`` as a signed list of intervals (signs only matter for
unions, which use inclusion-exclusion).  The posterior quadrature integrates
analytically along those chords, so chord endpoints must be exact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull

EPS = 1e-12
MAX_REJECTION_DRAWS = 10**6


class DegenerateSetError(ValueError):
    pass


@dataclass(frozen=True)
class Box:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def as_tuple(self):
        return (self.xmin, self.xmax, self.ymin, self.ymax)

    @property
    def diagonal(self) -> float:
        return math.hypot(self.xmax - self.xmin, self.ymax - self.ymin)


def _pts(p):
    return np.asarray(p, dtype=float)


def _norm(v):
    # same rounding as summing v*v over the last axis, without the slow length-2 reduction
    return np.sqrt(v[..., 0] * v[..., 0] + v[..., 1] * v[..., 1])


def _lex_better(q, best_q, dist, best_d):
    # strictly closer, or an exact tie won by the lexicographically smaller point
    tie = dist == best_d
    lex = (q[..., 0] < best_q[..., 0]) | ((q[..., 0] == best_q[..., 0]) & (q[..., 1] < best_q[..., 1]))
    return (dist < best_d) | (tie & lex)


class SupportSet:
    """Common interface; subclasses implement the geometry."""

    kind = "abstract"

    def contains(self, p):
        raise NotImplementedError

    def distance(self, p):
        raise NotImplementedError

    def project(self, p):
        raise NotImplementedError

    def boundary_project(self, p):
        """A nearest point on the boundary (equals project for exterior points)."""
        raise NotImplementedError

    def bounding_box(self) -> Box:
        raise NotImplementedError

    def chords(self, x1):
        """Return (lo, hi, sign) arrays of shape x1.shape + (P,); empty pieces have lo == hi."""
        raise NotImplementedError

    def kinks(self) -> np.ndarray:
        """Abscissae where chord endpoints are not smooth."""
        raise NotImplementedError

    def boundary_points(self, n: int) -> np.ndarray:
        raise NotImplementedError

    def translated(self, v):
        raise NotImplementedError

    @property
    def area(self) -> float:
        return chord_area(self)

    @property
    def is_convex(self) -> bool:
        return False

    def to_dict(self) -> dict:
        raise NotImplementedError


# ----------------------------------------------------------------- Ball


@dataclass(frozen=True, eq=False)
class Ball(SupportSet):
    center: tuple
    radius: float
    kind = "ball"

    def __post_init__(self):
        c = tuple(float(v) for v in self.center)
        if len(c) != 2:
            raise ValueError("ball center must be a 2-vector")
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    def __eq__(self, other):
        return isinstance(other, Ball) and (self.center, self.radius) == (other.center, other.radius)

    def __hash__(self):
        return hash(("ball", self.center, self.radius))

    def __repr__(self):
        return f"Ball(center={self.center}, radius={self.radius})"

    @property
    def c(self):
        return np.array(self.center)

    def contains(self, p):
        return _norm(_pts(p) - self.c) <= self.radius + EPS

    def distance(self, p):
        return np.maximum(_norm(_pts(p) - self.c) - self.radius, 0.0)

    def project(self, p):
        p = _pts(p)
        v = p - self.c
        r = _norm(v)
        outside = r > self.radius
        safe = np.where(outside, r, 1.0)[..., None]
        q = self.c + self.radius * v / safe
        return np.where(outside[..., None], q, p)

    def boundary_project(self, p):
        p = _pts(p)
        v = p - self.c
        r = _norm(v)
        u = np.where((r > 0)[..., None], v / np.where(r > 0, r, 1.0)[..., None], np.array([-1.0, 0.0]))
        return self.c + self.radius * u

    def bounding_box(self):
        (x, y), R = self.center, self.radius
        return Box(x - R, x + R, y - R, y + R)

    def chords(self, x1):
        x1 = np.asarray(x1, dtype=float)
        half = np.sqrt(np.maximum(self.radius**2 - (x1 - self.center[0]) ** 2, 0.0))
        lo = (self.center[1] - half)[..., None]
        hi = (self.center[1] + half)[..., None]
        return lo, hi, np.ones_like(lo)

    def kinks(self):
        return np.array([self.center[0] - self.radius, self.center[0] + self.radius])

    def boundary_points(self, n):
        th = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        return self.c + self.radius * np.stack([np.cos(th), np.sin(th)], axis=-1)

    def boundary_primitives(self):
        return [("circle", self.c, self.radius)]

    def translated(self, v):
        return Ball(tuple(self.c + _pts(v)), self.radius)

    @property
    def area(self):
        return math.pi * self.radius**2

    @property
    def is_convex(self):
        return True

    def to_dict(self):
        return {"kind": "ball", "center": list(self.center), "radius": self.radius}


# ----------------------------------------------------------------- ConvexPolygon


def _segment_project(p, a, b):
    """Nearest points on segments a->b (shape (E, 2)) for points p (..., 2); returns (..., E, 2)."""
    e = b - a
    ee = np.sum(e * e, axis=-1)
    w = p[..., None, :] - a
    t = np.clip(np.sum(w * e, axis=-1) / ee, 0.0, 1.0)
    return a + t[..., None] * e


@dataclass(frozen=True, eq=False)
class ConvexPolygon(SupportSet):
    vertices: tuple
    kind = "polygon"

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValueError("polygon needs at least 3 two-dimensional vertices")
        e = np.roll(v, -1, axis=0) - v
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        if np.any(cross < -EPS):
            raise ValueError("polygon vertices must be convex and counter-clockwise")
        if _shoelace(v) <= 0:
            raise ValueError("polygon must have positive area")
        object.__setattr__(self, "vertices", tuple(tuple(row) for row in v.tolist()))

    def __eq__(self, other):
        return isinstance(other, ConvexPolygon) and self.vertices == other.vertices

    def __hash__(self):
        return hash(("polygon", self.vertices))

    def __repr__(self):
        return f"ConvexPolygon(vertices={list(self.vertices)})"

    @property
    def v(self):
        return np.array(self.vertices)

    def _edges(self):
        a = self.v
        return a, np.roll(a, -1, axis=0)

    def contains(self, p):
        p = _pts(p)
        a, b = self._edges()
        e = b - a
        tol = -EPS * np.max(_norm(e))
        x, y = p[..., 0], p[..., 1]
        inside = np.ones(p.shape[:-1], dtype=bool)
        for (ax, ay), (ex, ey) in zip(a, e):
            inside &= ex * (y - ay) - ey * (x - ax) >= tol
        return inside

    def _nearest_boundary(self, p):
        a, b = self._edges()
        q = _segment_project(p, a, b)
        d = _norm(q - p[..., None, :])
        i = np.argmin(d, axis=-1)
        qi = np.take_along_axis(q, i[..., None, None], axis=-2)[..., 0, :]
        di = np.take_along_axis(d, i[..., None], axis=-1)[..., 0]
        return qi, di

    def distance(self, p):
        p = _pts(p)
        _, d = self._nearest_boundary(p)
        return np.where(self.contains(p), 0.0, d)

    def project(self, p):
        p = _pts(p)
        q, _ = self._nearest_boundary(p)
        return np.where(self.contains(p)[..., None], p, q)

    def boundary_project(self, p):
        return self._nearest_boundary(_pts(p))[0]

    def bounding_box(self):
        v = self.v
        return Box(v[:, 0].min(), v[:, 0].max(), v[:, 1].min(), v[:, 1].max())

    def chords(self, x1):
        x1 = np.asarray(x1, dtype=float)
        a, b = self._edges()
        ax, bx = a[:, 0], b[:, 0]
        slanted = ax != bx
        a, b, ax, bx = a[slanted], b[slanted], ax[slanted], bx[slanted]
        xl, xr = np.minimum(ax, bx), np.maximum(ax, bx)
        xx = x1[..., None]
        inside = (xx >= xl) & (xx <= xr)
        s = np.clip((xx - ax) / (bx - ax), 0.0, 1.0)
        y = a[:, 1] + s * (b[:, 1] - a[:, 1])
        lo = np.min(np.where(inside, y, np.inf), axis=-1)
        hi = np.max(np.where(inside, y, -np.inf), axis=-1)
        empty = ~np.any(inside, axis=-1)
        lo = np.where(empty, 0.0, lo)[..., None]
        hi = np.where(empty, 0.0, hi)[..., None]
        return lo, hi, np.ones_like(lo)

    def kinks(self):
        return np.unique(self.v[:, 0])

    def boundary_points(self, n):
        a, b = self._edges()
        lengths = _norm(b - a)
        counts = np.maximum(2, np.round(n * lengths / lengths.sum()).astype(int))
        out = [a[i] + np.linspace(0, 1, c, endpoint=False)[:, None] * (b[i] - a[i]) for i, c in enumerate(counts)]
        return np.concatenate(out)

    def boundary_primitives(self):
        a, b = self._edges()
        return [("segment", a[i], b[i]) for i in range(len(a))]

    def translated(self, v):
        return ConvexPolygon(tuple(map(tuple, self.v + _pts(v))))

    @property
    def area(self):
        return _shoelace(self.v)

    @property
    def is_convex(self):
        return True

    def to_dict(self):
        return {"kind": "polygon", "vertices": [list(v) for v in self.vertices]}


def _shoelace(v):
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


# ----------------------------------------------------------------- boundary intersections


def _circle_circle(c1, r1, c2, r2):
    d = float(np.hypot(*(c2 - c1)))
    if d == 0 or d > r1 + r2 or d < abs(r1 - r2):
        return []
    a = (r1**2 - r2**2 + d**2) / (2 * d)
    h = math.sqrt(max(r1**2 - a**2, 0.0))
    u = (c2 - c1) / d
    mid = c1 + a * u
    perp = np.array([-u[1], u[0]])
    return [mid + h * perp, mid - h * perp]


def _circle_segment(c, r, a, b):
    e = b - a
    f = a - c
    A, B, C = e @ e, 2 * f @ e, f @ f - r**2
    disc = B * B - 4 * A * C
    if disc < 0:
        return []
    out = []
    for sgn in (-1.0, 1.0):
        t = (-B + sgn * math.sqrt(disc)) / (2 * A)
        if 0.0 <= t <= 1.0:
            out.append(a + t * e)
    return out


def _segment_segment(a, b, c, d):
    r, s = b - a, d - c
    den = r[0] * s[1] - r[1] * s[0]
    if den == 0:
        return []
    w = c - a
    t = (w[0] * s[1] - w[1] * s[0]) / den
    u = (w[0] * r[1] - w[1] * r[0]) / den
    if 0 <= t <= 1 and 0 <= u <= 1:
        return [a + t * r]
    return []


def _primitive_intersections(p, q):
    if p[0] == "circle" and q[0] == "circle":
        return _circle_circle(p[1], p[2], q[1], q[2])
    if p[0] == "circle" and q[0] == "segment":
        return _circle_segment(p[1], p[2], q[1], q[2])
    if p[0] == "segment" and q[0] == "circle":
        return _circle_segment(q[1], q[2], p[1], p[2])
    return _segment_segment(p[1], p[2], q[1], q[2])


def boundary_intersections(s1, s2) -> list:
    pts = []
    for p in s1.boundary_primitives():
        for q in s2.boundary_primitives():
            pts.extend(_primitive_intersections(p, q))
    return pts


# ----------------------------------------------------------------- Difference


def _arc_candidates(p, center, radius, keep):
    """Radial projection of p onto a circle, or None where it falls off the arc kept by ``keep``."""
    v = p - center
    r = _norm(v)
    # the lexicographically smallest circle point breaks the tie at the center
    default = np.broadcast_to(np.array([-1.0, 0.0]), v.shape)
    u = np.where((r > 0)[..., None], v / np.where(r > 0, r, 1.0)[..., None], default)
    q = center + radius * u
    return q, keep(q)


@dataclass(frozen=True, eq=False)
class Difference(SupportSet):
    """Closed crescent: ``outer`` minus the open interior of ``cut``."""

    outer: Ball
    cut: Ball
    kind = "difference"

    def __post_init__(self):
        d = float(np.hypot(*(self.outer.c - self.cut.c)))
        if d + self.outer.radius <= self.cut.radius:
            raise ValueError("difference is empty: cut contains outer")

    def __eq__(self, other):
        return isinstance(other, Difference) and (self.outer, self.cut) == (other.outer, other.cut)

    def __hash__(self):
        return hash(("difference", self.outer, self.cut))

    def __repr__(self):
        return f"Difference(outer={self.outer!r}, cut={self.cut!r})"

    def contains(self, p):
        p = _pts(p)
        return self.outer.contains(p) & (_norm(p - self.cut.c) >= self.cut.radius - EPS)

    def _corners(self):
        return _circle_circle(self.outer.c, self.outer.radius, self.cut.c, self.cut.radius)

    def _nearest_boundary(self, p):
        p = _pts(p)
        o, c = self.outer, self.cut
        q1, ok1 = _arc_candidates(p, o.c, o.radius, lambda q: _norm(q - c.c) >= c.radius - EPS)
        q2, ok2 = _arc_candidates(p, c.c, c.radius, lambda q: _norm(q - o.c) <= o.radius + EPS)
        cands = [(q1, ok1), (q2, ok2)]
        for corner in self._corners():
            cq = np.broadcast_to(corner, p.shape)
            cands.append((cq, np.ones(p.shape[:-1], dtype=bool)))
        best_q = np.full(p.shape, np.nan)
        best_d = np.full(p.shape[:-1], np.inf)
        for q, ok in cands:
            d = np.where(ok, _norm(q - p), np.inf)
            better = ok & _lex_better(q, best_q, d, best_d)
            best_q = np.where(better[..., None], q, best_q)
            best_d = np.where(better, d, best_d)
        return best_q, best_d

    def distance(self, p):
        p = _pts(p)
        _, d = self._nearest_boundary(p)
        return np.where(self.contains(p), 0.0, d)

    def project(self, p):
        p = _pts(p)
        q, _ = self._nearest_boundary(p)
        return np.where(self.contains(p)[..., None], p, q)

    def boundary_project(self, p):
        return self._nearest_boundary(_pts(p))[0]

    def bounding_box(self):
        # extremes sit at surviving axis-extreme points of either circle or at the arc corners
        units = [np.array(u, dtype=float) for u in [(1, 0), (-1, 0), (0, 1), (0, -1)]]
        pts = [b.c + b.radius * u for b in (self.outer, self.cut) for u in units]
        pts = [q for q in pts if self.contains(q)] + self._corners()
        p = np.array(pts)
        return Box(p[:, 0].min(), p[:, 0].max(), p[:, 1].min(), p[:, 1].max())

    def chords(self, x1):
        lo_o, hi_o, _ = self.outer.chords(x1)
        lo_c, hi_c, _ = self.cut.chords(x1)
        in_cut = np.abs(np.asarray(x1)[..., None] - self.cut.center[0]) < self.cut.radius
        lo_c = np.where(in_cut, lo_c, np.inf)
        hi_c = np.where(in_cut, hi_c, np.inf)
        lo1, hi1 = lo_o, np.minimum(hi_o, lo_c)
        lo2, hi2 = np.maximum(lo_o, hi_c), hi_o
        hi1 = np.maximum(hi1, lo1)
        lo2 = np.minimum(lo2, hi2)
        lo = np.concatenate([lo1, lo2], axis=-1)
        hi = np.concatenate([hi1, hi2], axis=-1)
        return lo, hi, np.ones_like(lo)

    def kinks(self):
        ks = list(self.outer.kinks()) + list(self.cut.kinks()) + [q[0] for q in self._corners()]
        return np.unique(np.array(ks))

    def boundary_points(self, n):
        a = self.outer.boundary_points(n)
        b = self.cut.boundary_points(n)
        a = a[_norm(a - self.cut.c) >= self.cut.radius]
        b = b[_norm(b - self.outer.c) <= self.outer.radius]
        return np.concatenate([a, b])

    def boundary_primitives(self):
        return self.outer.boundary_primitives() + self.cut.boundary_primitives()

    def translated(self, v):
        return Difference(self.outer.translated(v), self.cut.translated(v))

    @property
    def area(self):
        d = float(np.hypot(*(self.outer.c - self.cut.c)))
        return math.pi * self.outer.radius**2 - lens_area(self.outer.radius, self.cut.radius, d)

    def to_dict(self):
        return {"kind": "difference", "outer": self.outer.to_dict(), "cut": self.cut.to_dict()}


# ----------------------------------------------------------------- Union


@dataclass(frozen=True, eq=False)
class Union(SupportSet):
    parts: tuple
    kind = "union"

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("union needs at least one part")
        for q in parts:
            if not isinstance(q, (Ball, ConvexPolygon)):
                raise ValueError("union parts must be balls or convex polygons")
        object.__setattr__(self, "parts", parts)

    def __eq__(self, other):
        return isinstance(other, Union) and self.parts == other.parts

    def __hash__(self):
        return hash(("union", self.parts))

    def __repr__(self):
        return f"Union(parts={list(self.parts)!r})"

    def contains(self, p):
        return np.any([q.contains(p) for q in self.parts], axis=0)

    def distance(self, p):
        return np.min([q.distance(p) for q in self.parts], axis=0)

    def project(self, p):
        p = _pts(p)
        d = np.stack([q.distance(p) for q in self.parts], axis=-1)
        proj = np.stack([q.project(p) for q in self.parts], axis=-2)
        i = np.argmin(d, axis=-1)  # first part wins ties
        return np.take_along_axis(proj, i[..., None, None], axis=-2)[..., 0, :]

    def boundary_project(self, p):
        # nearest point over the parts' boundaries; may lie inside another part,
        # which is harmless for its use as a quadrature breakpoint
        p = _pts(p)
        q = np.stack([s.boundary_project(p) for s in self.parts], axis=-2)
        d = _norm(q - p[..., None, :])
        i = np.argmin(d, axis=-1)
        return np.take_along_axis(q, i[..., None, None], axis=-2)[..., 0, :]

    def bounding_box(self):
        boxes = [q.bounding_box() for q in self.parts]
        return Box(
            min(b.xmin for b in boxes), max(b.xmax for b in boxes), min(b.ymin for b in boxes), max(b.ymax for b in boxes)
        )

    def chords(self, x1):
        base = [q.chords(x1) for q in self.parts]
        los, his, signs = [], [], []
        for k in range(1, len(self.parts) + 1):
            for subset in itertools.combinations(range(len(self.parts)), k):
                lo = np.max([base[i][0] for i in subset], axis=0)
                hi = np.min([base[i][1] for i in subset], axis=0)
                nonempty = np.all([base[i][1] > base[i][0] for i in subset], axis=0)
                hi = np.where(nonempty & (hi > lo), hi, lo)
                los.append(lo)
                his.append(hi)
                signs.append(np.full_like(lo, (-1.0) ** (k + 1)))
        return np.concatenate(los, -1), np.concatenate(his, -1), np.concatenate(signs, -1)

    def kinks(self):
        ks = [q.kinks() for q in self.parts]
        for a, b in itertools.combinations(self.parts, 2):
            ks.append(np.array([p[0] for p in boundary_intersections(a, b)]).reshape(-1))
        return np.unique(np.concatenate(ks))

    def boundary_points(self, n):
        return np.concatenate([q.boundary_points(n) for q in self.parts])

    def boundary_primitives(self):
        return [prim for q in self.parts for prim in q.boundary_primitives()]

    def translated(self, v):
        return Union(tuple(q.translated(v) for q in self.parts))

    def to_dict(self):
        return {"kind": "union", "parts": [q.to_dict() for q in self.parts]}


# ----------------------------------------------------------------- helpers


def shape_from_dict(d: dict) -> SupportSet:
    d = dict(d)
    kind = d.pop("kind", None)
    allowed = {"ball": {"center", "radius"}, "polygon": {"vertices"}, "difference": {"outer", "cut"}, "union": {"parts"}}
    if kind not in allowed:
        raise ValueError(f"unknown shape kind {kind!r}; expected one of {sorted(allowed)}")
    extra = set(d) - allowed[kind]
    missing = allowed[kind] - set(d)
    if extra:
        raise ValueError(f"unknown field(s) for {kind}: {sorted(extra)}")
    if missing:
        raise ValueError(f"missing field(s) for {kind}: {sorted(missing)}")
    if kind == "ball":
        return Ball(tuple(d["center"]), d["radius"])
    if kind == "polygon":
        return ConvexPolygon(tuple(map(tuple, d["vertices"])))
    if kind == "difference":
        outer, cut = shape_from_dict(d["outer"]), shape_from_dict(d["cut"])
        if not (isinstance(outer, Ball) and isinstance(cut, Ball)):
            raise ValueError("difference outer and cut must be balls")
        return Difference(outer, cut)
    return Union(tuple(shape_from_dict(q) for q in d["parts"]))


def _segment(r: float, half_angle: float) -> float:
    # circular segment area r^2 (a - sin a cos a); the series avoids cancellation for thin segments
    a = half_angle
    if a < 1e-2:
        x = 2 * a
        return 0.5 * r * r * (x**3 / 6 - x**5 / 120 + x**7 / 5040)
    return r * r * (a - math.sin(a) * math.cos(a))


def lens_area(r1: float, r2: float, d: float) -> float:
    """Area of the intersection of two discs with radii r1, r2 and center distance d."""
    if d >= r1 + r2:
        return 0.0
    if d <= abs(r1 - r2):
        return math.pi * min(r1, r2) ** 2
    # twice the area of the triangle with sides d, r1, r2 (Heron), then half-angles via atan2
    k2 = 0.5 * math.sqrt((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2))
    a1 = math.atan2(2 * k2, d * d + r1 * r1 - r2 * r2)
    a2 = math.atan2(2 * k2, d * d + r2 * r2 - r1 * r1)
    return _segment(r1, a1) + _segment(r2, a2)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(40)


def chord_area(shape: SupportSet) -> float:
    """Area by Gauss-Legendre over x1 between kinks, sine-mapped to absorb sqrt endpoints."""
    box = shape.bounding_box()
    br = np.unique(np.clip(np.concatenate([[box.xmin, box.xmax], shape.kinks()]), box.xmin, box.xmax))
    a, b = br[:-1, None], br[1:, None]
    u = np.sin(0.5 * np.pi * _GL_X)
    jac = 0.5 * (b - a) * 0.5 * np.pi * np.cos(0.5 * np.pi * _GL_X) * _GL_W
    x = 0.5 * (a + b) + 0.5 * (b - a) * u
    lo, hi, sg = shape.chords(x)
    return float(np.sum(jac * np.sum(sg * (hi - lo), axis=-1)))


def sample_uniform(shape: SupportSet, rng: np.random.Generator, n: int | None = None):
    """Uniform draws on the set by rejection from its bounding box."""
    want = 1 if n is None else int(n)
    box = shape.bounding_box()
    lo = np.array([box.xmin, box.ymin])
    span = np.array([box.xmax - box.xmin, box.ymax - box.ymin])
    # expected acceptance sizes each batch; the floor keeps slivers from stalling
    accept = max(shape.area / float(span[0] * span[1]), 1e-3)
    out, have, misses = [], 0, 0
    while have < want:
        batch = min(max(1024, int(1.05 * (want - have) / accept)), 4 * MAX_REJECTION_DRAWS)
        p = lo + span * rng.random((batch, 2))
        keep = p[shape.contains(p)]
        if keep.size == 0:
            misses += batch
            if misses >= MAX_REJECTION_DRAWS:
                raise DegenerateSetError(f"no accepted draw after {misses} proposals")
            continue
        misses = 0
        out.append(keep)
        have += len(keep)
    pts = np.concatenate(out)[:want]
    return pts[0] if n is None else pts


@dataclass(frozen=True)
class SetSeparation:
    d0: float
    D0: float
    R0: float
    pair_gaps: dict


def pair_gap(a: SupportSet, b: SupportSet, n_boundary: int = 4096) -> float:
    """Gap between two sets; exact for ball pairs, boundary-sampled otherwise (0 on overlap)."""
    if isinstance(a, Ball) and isinstance(b, Ball):
        return max(float(np.hypot(*(a.c - b.c))) - a.radius - b.radius, 0.0)
    pa, pb = a.boundary_points(n_boundary), b.boundary_points(n_boundary)
    if np.any(b.contains(pa)) or np.any(a.contains(pb)):
        return 0.0
    return float(min(b.distance(pa).min(), a.distance(pb).min()))


def set_separation(supports, n_boundary: int = 4096) -> SetSeparation:
    gaps = {}
    for i, j in itertools.combinations(range(len(supports)), 2):
        gaps[(i, j)] = pair_gap(supports[i], supports[j], n_boundary)
    pts = np.concatenate([s.boundary_points(n_boundary) for s in supports])
    R0 = float(_norm(pts).max())
    # diameter of a point cloud is attained on its convex hull
    hull = pts[ConvexHull(pts).vertices]
    D0 = float(np.max(_norm(hull[:, None, :] - hull[None, :, :])))
    if all(isinstance(s, Ball) for s in supports):
        R0 = max(float(np.hypot(*s.c)) + s.radius for s in supports)
        D0 = max(
            [2 * s.radius for s in supports]
            + [float(np.hypot(*(a.c - b.c))) + a.radius + b.radius for a, b in itertools.combinations(supports, 2)]
        )
    d0 = min(gaps.values()) if gaps else math.inf
    return SetSeparation(d0=d0, D0=D0, R0=R0, pair_gaps=gaps)


def cap_volume_ratio(ball: Ball, x, r: float) -> float:
    """Area of B(x, r) intersected with the ball, divided by r^2, for a boundary point x."""
    x = _pts(x)
    d = float(np.hypot(*(x - ball.c)))
    if abs(d - ball.radius) > 1e-9:
        raise ValueError("x must lie on the ball boundary")
    if not 0 < r <= ball.radius:
        raise ValueError("need 0 < r <= radius")
    return lens_area(ball.radius, r, ball.radius) / r**2


def distance_laplacian_ball(ball: Ball, p) -> float:
    """Laplacian of dist(., ball) at an exterior point: curvature/(1 + curvature*dist) = 1/(R + dist)."""
    dist = float(ball.distance(p))
    if dist <= 0:
        raise ValueError("point must lie outside the ball")
    return 1.0 / (ball.radius + dist)
