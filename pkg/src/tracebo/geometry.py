"""Workspace geometry: drawn shapes, their electrical contacts, and terminal bars.

All coordinates are millimetres in the drawing plane. The workspace is a
380 x 100 mm rectangle with vertical terminal bars on its left/right edges and
five shapes drawn along the horizontal midline: each shape is either a 100 mm
line or a 100 mm diameter circle. The middle three shape centers may shift
horizontally by up to +/-20 mm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

Point = tuple[float, float]

WORKSPACE_W = 380.0
WORKSPACE_H = 100.0
MIDLINE_Y = WORKSPACE_H / 2.0
SHAPE_SPAN = 100.0  # line length and circle diameter
SHAPE_CENTERS_X = (50.0, 120.0, 190.0, 260.0, 330.0)
OFFSET_LIMIT = 20.0
RESISTIVITY = 0.2  # ohm per mm of drawn trace
MERGE_TOL = 1e-3  # mm; coincident-contact unification and tangency detection


class ShapeKind(IntEnum):
    """Shape category for one slot; the integer values are the wire encoding."""

    LINE = 0
    CIRCLE = 1


@dataclass(frozen=True)
class Pattern:
    """Decision vector: five shape categories plus three center offsets (mm).

    Offsets displace the centers of the middle three shapes horizontally and
    must lie in [-20, 20]; the outer two shape centers are fixed.
    """

    shapes: tuple[ShapeKind, ShapeKind, ShapeKind, ShapeKind, ShapeKind]
    offsets: tuple[float, float, float]

    def __post_init__(self):
        if len(self.shapes) != 5:
            raise ValueError(f"expected 5 shapes, got {len(self.shapes)}")
        if len(self.offsets) != 3:
            raise ValueError(f"expected 3 offsets, got {len(self.offsets)}")
        object.__setattr__(self, "shapes", tuple(ShapeKind(s) for s in self.shapes))
        object.__setattr__(self, "offsets", tuple(float(x) for x in self.offsets))
        for x in self.offsets:
            if not (-OFFSET_LIMIT <= x <= OFFSET_LIMIT) or not math.isfinite(x):
                raise ValueError(f"offset {x} outside [-{OFFSET_LIMIT}, {OFFSET_LIMIT}] mm")

    @classmethod
    def parse(cls, shapes: str, offsets: tuple[float, float, float] = (0.0, 0.0, 0.0)) -> "Pattern":
        """Parse an ``[LC]{5}`` string such as ``"LLCLL"`` plus offsets."""
        s = shapes.strip().upper()
        if len(s) != 5 or any(ch not in "LC" for ch in s):
            raise ValueError(f"shape string must match [LC]{{5}}, got {shapes!r}")
        kinds = tuple(ShapeKind.CIRCLE if ch == "C" else ShapeKind.LINE for ch in s)
        return cls(kinds, tuple(offsets))

    @property
    def circle_count(self) -> int:
        return sum(1 for s in self.shapes if s is ShapeKind.CIRCLE)

    def shape_string(self) -> str:
        return "".join("C" if s is ShapeKind.CIRCLE else "L" for s in self.shapes)

    def center_xs(self) -> tuple[float, ...]:
        """Shape center x-coordinates with offsets applied to slots 2..4."""
        cx = list(SHAPE_CENTERS_X)
        for i, dx in enumerate(self.offsets):
            cx[i + 1] += dx
        return tuple(cx)


@dataclass(frozen=True)
class Segment:
    """Straight trace from p0 to p1."""

    p0: Point
    p1: Point
    resistivity: float = RESISTIVITY

    def __post_init__(self):
        if self.length <= 0.0:
            raise ValueError("segment must have positive length")
        if self.resistivity <= 0.0:
            raise ValueError("resistivity must be positive")

    @property
    def length(self) -> float:
        return math.dist(self.p0, self.p1)

    def point_at(self, t: float) -> Point:
        x0, y0 = self.p0
        x1, y1 = self.p1
        return (x0 + t * (x1 - x0), y0 + t * (y1 - y0))

    def param_of(self, p: Point) -> float:
        """Parameter in [0, 1] of the projection of p onto the segment."""
        x0, y0 = self.p0
        x1, y1 = self.p1
        dx, dy = x1 - x0, y1 - y0
        t = ((p[0] - x0) * dx + (p[1] - y0) * dy) / (dx * dx + dy * dy)
        return min(1.0, max(0.0, t))


@dataclass(frozen=True)
class Ring:
    """Full circular trace."""

    center: Point
    radius: float
    resistivity: float = RESISTIVITY

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError("ring must have positive radius")
        if self.resistivity <= 0.0:
            raise ValueError("resistivity must be positive")

    def angle_of(self, p: Point) -> float:
        """Angle in [0, 2*pi) of p about the center."""
        a = math.atan2(p[1] - self.center[1], p[0] - self.center[0])
        return a % (2.0 * math.pi)

    def point_at(self, angle: float) -> Point:
        return (
            self.center[0] + self.radius * math.cos(angle),
            self.center[1] + self.radius * math.sin(angle),
        )


Conductor = Segment | Ring


@dataclass(frozen=True)
class Bar:
    """Vertical terminal bar at a fixed x, spanning [y_min, y_max]."""

    x: float
    y_min: float = 0.0
    y_max: float = WORKSPACE_H


DEFAULT_BARS = (Bar(0.0), Bar(WORKSPACE_W))

# Junction member identifiers: ("trace", index into the fused conductor list),
# ("bar", index into the bars tuple), or ("obstacle",).
Member = tuple


@dataclass(frozen=True)
class Junction:
    """An electrical contact point joining two or more conductors/terminals."""

    position: Point
    members: frozenset[Member]

    def __post_init__(self):
        if len(self.members) < 2:
            raise ValueError("a junction joins at least two electrical objects")


def shape_geometry(pattern: Pattern) -> list[Conductor]:
    """Conductors for the five shapes of a pattern, left to right.

    Shape i is centered at (c_i + offset_i, midline); a line is a horizontal
    100 mm segment, a circle a 50 mm radius ring.
    """
    half = SHAPE_SPAN / 2.0
    out: list[Conductor] = []
    for kind, cx in zip(pattern.shapes, pattern.center_xs()):
        if kind is ShapeKind.CIRCLE:
            out.append(Ring((cx, MIDLINE_Y), half))
        else:
            out.append(Segment((cx - half, MIDLINE_Y), (cx + half, MIDLINE_Y)))
    return out


def _collinear(a: Segment, b: Segment, tol: float) -> bool:
    ax, ay = a.p1[0] - a.p0[0], a.p1[1] - a.p0[1]
    bx, by = b.p1[0] - b.p0[0], b.p1[1] - b.p0[1]
    la = math.hypot(ax, ay)
    # parallel directions and both of b's endpoints within tol of a's line
    if abs(ax * by - ay * bx) > tol * math.hypot(bx, by):
        return False
    for p in (b.p0, b.p1):
        d = abs((p[0] - a.p0[0]) * ay - (p[1] - a.p0[1]) * ax) / la
        if d > tol:
            return False
    return True


def _intervals_touch(i: tuple[float, float], j: tuple[float, float], tol: float) -> bool:
    return i[0] <= j[1] + tol and j[0] <= i[1] + tol


def fuse_collinear(conductors: list[Conductor], tol: float = MERGE_TOL) -> list[Conductor]:
    """Merge overlapping (or touching) collinear segments into their union.

    Overlapped ink is a single trace, not a doubled cross-section, so two
    segments sharing part of a line become one segment spanning their union.
    Rings and non-overlapping segments pass through unchanged; idempotent.
    """
    segs = [(i, c) for i, c in enumerate(conductors) if isinstance(c, Segment)]
    parent = {i: i for i, _ in segs}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    # group pairwise-collinear-and-touching segments
    for a in range(len(segs)):
        ia, sa = segs[a]
        ux, uy = sa.p1[0] - sa.p0[0], sa.p1[1] - sa.p0[1]
        norm = math.hypot(ux, uy)
        ux, uy = ux / norm, uy / norm
        for b in range(a + 1, len(segs)):
            ib, sb = segs[b]
            if sa.resistivity != sb.resistivity or not _collinear(sa, sb, tol):
                continue
            proj = lambda p: (p[0] - sa.p0[0]) * ux + (p[1] - sa.p0[1]) * uy
            span_a = (min(0.0, proj(sa.p1)), max(0.0, proj(sa.p1)))
            tb = sorted((proj(sb.p0), proj(sb.p1)))
            if _intervals_touch(span_a, (tb[0], tb[1]), tol):
                parent[find(ia)] = find(ib)

    groups: dict[int, list[int]] = {}
    for i, _ in segs:
        groups.setdefault(find(i), []).append(i)

    out: list[Conductor] = []
    consumed: set[int] = set()
    for i, c in enumerate(conductors):
        if isinstance(c, Ring):
            out.append(c)
            continue
        root = find(i)
        if root in consumed:
            continue
        consumed.add(root)
        idxs = sorted(groups[root])
        if len(idxs) == 1:
            out.append(c)
            continue
        ref = conductors[idxs[0]]
        ux, uy = ref.p1[0] - ref.p0[0], ref.p1[1] - ref.p0[1]
        norm = math.hypot(ux, uy)
        ux, uy = ux / norm, uy / norm
        ts = []
        for k in idxs:
            s = conductors[k]
            for p in (s.p0, s.p1):
                ts.append((p[0] - ref.p0[0]) * ux + (p[1] - ref.p0[1]) * uy)
        # union of touching intervals is guaranteed by the grouping; keep hull
        t0, t1 = min(ts), max(ts)
        out.append(
            Segment(
                (ref.p0[0] + t0 * ux, ref.p0[1] + t0 * uy),
                (ref.p0[0] + t1 * ux, ref.p0[1] + t1 * uy),
                ref.resistivity,
            )
        )
    return out


def circle_circle_points(a: Ring, b: Ring, tol: float = MERGE_TOL) -> list[Point]:
    """Intersection points of two rings: two crossings, one tangency, or none."""
    dx = b.center[0] - a.center[0]
    dy = b.center[1] - a.center[1]
    d = math.hypot(dx, dy)
    if d <= tol:  # (near-)concentric
        return []
    if d > a.radius + b.radius + tol:
        return []
    if d < abs(a.radius - b.radius) - tol:  # one ring strictly inside the other
        return []
    ux, uy = dx / d, dy / d
    t = (d * d + a.radius * a.radius - b.radius * b.radius) / (2.0 * d)
    h2 = a.radius * a.radius - t * t
    if h2 <= tol * tol:
        t = min(t, a.radius)  # outside near-tangency: clamp onto ring a
        return [(a.center[0] + t * ux, a.center[1] + t * uy)]
    h = math.sqrt(h2)
    px, py = a.center[0] + t * ux, a.center[1] + t * uy
    return [(px - h * uy, py + h * ux), (px + h * uy, py - h * ux)]


def segment_circle_points(s: Segment, r: Ring, tol: float = MERGE_TOL) -> list[Point]:
    """Points where a segment crosses (or touches) a ring."""
    ex, ey = s.p1[0] - s.p0[0], s.p1[1] - s.p0[1]
    length = math.hypot(ex, ey)
    fx, fy = s.p0[0] - r.center[0], s.p0[1] - r.center[1]
    # foot of the perpendicular from the center, as a segment parameter
    t_foot = -(fx * ex + fy * ey) / (length * length)
    foot = s.point_at(t_foot)
    rho = math.dist(foot, r.center)
    if rho > r.radius + tol:
        return []
    half = math.sqrt(max(r.radius * r.radius - rho * rho, 0.0))
    t_tol = tol / length
    if half <= tol:  # tangency
        ts = [t_foot]
    else:
        dt = half / length
        ts = [t_foot - dt, t_foot + dt]
    out = []
    for t in ts:
        if -t_tol <= t <= 1.0 + t_tol:
            out.append(s.point_at(min(1.0, max(0.0, t))))
    return out


def segment_segment_points(a: Segment, b: Segment, tol: float = MERGE_TOL) -> list[Point]:
    """Proper crossing point of two non-collinear segments, if any.

    Collinear overlap is handled by fuse_collinear, not here.
    """
    ax, ay = a.p1[0] - a.p0[0], a.p1[1] - a.p0[1]
    bx, by = b.p1[0] - b.p0[0], b.p1[1] - b.p0[1]
    den = ax * by - ay * bx
    if abs(den) <= tol * tol:  # parallel or collinear
        return []
    qx, qy = b.p0[0] - a.p0[0], b.p0[1] - a.p0[1]
    t = (qx * by - qy * bx) / den
    u = (qx * ay - qy * ax) / den
    ta, tb = tol / a.length, tol / b.length
    if -ta <= t <= 1.0 + ta and -tb <= u <= 1.0 + tb:
        return [a.point_at(min(1.0, max(0.0, t)))]
    return []


def bar_contact_points(c: Conductor, bar: Bar, tol: float = MERGE_TOL) -> list[Point]:
    """Points where a conductor touches or crosses a terminal bar."""
    lo, hi = bar.y_min - tol, bar.y_max + tol
    if isinstance(c, Ring):
        dx = bar.x - c.center[0]
        if abs(dx) > c.radius + tol:
            return []
        half = math.sqrt(max(c.radius * c.radius - dx * dx, 0.0))
        if half <= tol:  # tangency: report the ring point facing the bar
            x = c.center[0] + math.copysign(c.radius, dx) if dx != 0.0 else bar.x
            p = (x, c.center[1])
            return [p] if lo <= p[1] <= hi else []
        pts = [(bar.x, c.center[1] - half), (bar.x, c.center[1] + half)]
        return [p for p in pts if lo <= p[1] <= hi]
    ex = c.p1[0] - c.p0[0]
    if abs(ex) <= tol * tol:  # parallel to the bar; not produced by this workspace
        return []
    t = (bar.x - c.p0[0]) / ex
    t_tol = tol / c.length
    if -t_tol <= t <= 1.0 + t_tol:
        p = c.point_at(min(1.0, max(0.0, t)))
        if lo <= p[1] <= hi:
            return [(bar.x, p[1])]
    return []


def _cluster(candidates: list[tuple[Point, Member]], tol: float) -> list[Junction]:
    """Unify contact points within tol into junctions (members are unioned)."""
    n = len(candidates)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        pi = candidates[i][0]
        for j in range(i + 1, n):
            if math.dist(pi, candidates[j][0]) <= tol:
                parent[find(i)] = find(j)

    clusters: dict[int, list[int]] = {}
    for i in range(n):
        clusters.setdefault(find(i), []).append(i)

    junctions = []
    for idxs in sorted(clusters.values(), key=min):
        xs = [candidates[i][0][0] for i in idxs]
        ys = [candidates[i][0][1] for i in idxs]
        pos = (math.fsum(xs) / len(idxs), math.fsum(ys) / len(idxs))
        members = frozenset(candidates[i][1] for i in idxs)
        if len(members) >= 2:
            junctions.append(Junction(pos, members))
    return junctions


def find_junctions(
    conductors: list[Conductor],
    bars: tuple[Bar, Bar] = DEFAULT_BARS,
    tol: float = MERGE_TOL,
) -> list[Junction]:
    """All pairwise electrical contacts among conductors and terminal bars.

    Overlapping collinear segments are fused first (see fuse_collinear);
    junction members therefore refer to indices into ``fuse_collinear(conductors)``.
    Contact points closer than tol are unified into a single junction.
    """
    if not conductors:
        raise ValueError("conductor list must be non-empty")
    fused = fuse_collinear(conductors, tol)
    candidates: list[tuple[Point, Member]] = []

    def add(points: list[Point], i: int, j_member: Member):
        for p in points:
            candidates.append((p, ("trace", i)))
            candidates.append((p, j_member))

    for i in range(len(fused)):
        for j in range(i + 1, len(fused)):
            a, b = fused[i], fused[j]
            if isinstance(a, Ring) and isinstance(b, Ring):
                pts = circle_circle_points(a, b, tol)
            elif isinstance(a, Segment) and isinstance(b, Ring):
                pts = segment_circle_points(a, b, tol)
            elif isinstance(a, Ring) and isinstance(b, Segment):
                pts = segment_circle_points(b, a, tol)
            else:
                pts = segment_segment_points(a, b, tol)
            add(pts, i, ("trace", j))
        for bi, bar in enumerate(bars):
            add(bar_contact_points(fused[i], bar, tol), i, ("bar", bi))

    return _cluster(candidates, tol)


def nearest_point_on(c: Conductor, q: Point) -> tuple[Point, float]:
    """Closest point of a conductor to q and its distance.

    For a ring centered exactly at q every point ties; the point at angle pi
    (facing the source side) is returned for determinism.
    """
    if isinstance(c, Segment):
        t = c.param_of(q)
        p = c.point_at(t)
        return p, math.dist(p, q)
    d = math.dist(c.center, q)
    if d == 0.0:
        return c.point_at(math.pi), c.radius
    ux = (q[0] - c.center[0]) / d
    uy = (q[1] - c.center[1]) / d
    p = (c.center[0] + c.radius * ux, c.center[1] + c.radius * uy)
    return p, abs(d - c.radius)
