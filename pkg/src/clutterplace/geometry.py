"""Planar rigid footprints, poses and penetration depth.

A footprint is a union of convex parts (circles and convex polygons) whose
body frame is centred on the area centroid of the union.  Penetration between
two footprints is the deepest minimum-translation depth over all part pairs,
computed with the separating-axis test for polygons and closed forms for
circles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Union

import numpy as np
import shapely
from shapely.geometry import Point, Polygon

from . import _kernels as K

CONTACT_TOL = 1e-7
"""Depths at or below this many surface units are treated as contact, not collision."""

_CIRCLE_RESOLUTION = 256


def wrap_angle(theta: float) -> float:
    """Map an angle to (-pi, pi]."""
    r = math.remainder(theta, 2.0 * math.pi)
    return math.pi if r <= -math.pi else r


def angle_diff(a: float, b: float) -> float:
    """Minimal signed difference a - b in (-pi, pi]."""
    return wrap_angle(a - b)


@dataclass(frozen=True)
class Pose:
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def compose(self, other: "Pose") -> "Pose":
        """Apply ``other`` in this pose's frame (self * other)."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Pose(self.x + c * other.x - s * other.y,
                    self.y + s * other.x + c * other.y,
                    self.theta + other.theta)

    def inverse(self) -> "Pose":
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Pose(-(c * self.x + s * self.y), s * self.x - c * self.y, -self.theta)

    def apply(self, points) -> np.ndarray:
        """Map body-frame points (N x 2) into the world frame."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        c, s = math.cos(self.theta), math.sin(self.theta)
        rot = np.array([[c, -s], [s, c]])
        return pts @ rot.T + np.array([self.x, self.y])

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta])


@dataclass(frozen=True)
class Circle:
    radius: float
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"circle radius must be positive, got {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    def shifted(self, dx: float, dy: float) -> "Circle":
        return Circle(self.radius, (self.center[0] + dx, self.center[1] + dy))

    def to_shapely(self):
        return Point(self.center).buffer(self.radius, quad_segs=_CIRCLE_RESOLUTION)

    @property
    def area(self) -> float:
        return math.pi * self.radius ** 2


@dataclass(frozen=True)
class ConvexPolygon:
    """Strictly convex polygon; clockwise input is reordered counter-clockwise."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = [(float(x), float(y)) for x, y in self.vertices]
        if len(pts) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        if _signed_area(pts) < 0:
            pts = pts[::-1]
        n = len(pts)
        for k in range(n):
            (ax, ay), (bx, by), (cx, cy) = pts[k], pts[(k + 1) % n], pts[(k + 2) % n]
            cross = (bx - ax) * (cy - by) - (by - ay) * (cx - bx)
            scale = max(1.0, abs(bx - ax) + abs(by - ay) + abs(cx - bx) + abs(cy - by))
            if cross <= 1e-12 * scale * scale:
                raise ValueError(f"polygon is not strictly convex at vertex {(k + 1) % n}")
        object.__setattr__(self, "vertices", tuple(pts))

    def shifted(self, dx: float, dy: float) -> "ConvexPolygon":
        return ConvexPolygon(tuple((x + dx, y + dy) for x, y in self.vertices))

    def to_shapely(self):
        return Polygon(self.vertices)

    @property
    def area(self) -> float:
        return _signed_area(self.vertices)

    @property
    def centroid(self) -> tuple[float, float]:
        c = Polygon(self.vertices).centroid
        return (c.x, c.y)


Part = Union[Circle, ConvexPolygon]


def _signed_area(pts) -> float:
    a = 0.0
    n = len(pts)
    for k in range(n):
        x0, y0 = pts[k]
        x1, y1 = pts[(k + 1) % n]
        a += x0 * y1 - x1 * y0
    return 0.5 * a


def _connected(parts: Sequence[Part]) -> bool:
    shapes = [p.to_shapely() for p in parts]
    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for j in range(len(shapes)):
            if j not in seen and shapes[i].distance(shapes[j]) <= 1e-9:
                seen.add(j)
                stack.append(j)
    return len(seen) == len(shapes)


@dataclass(frozen=True, eq=True)
class Footprint:
    """Union of convex parts, re-centred so the union's area centroid is the origin.

    ``offset`` records the shift that was applied: a point ``p`` given in the
    authoring frame sits at ``p - offset`` in the body frame.
    """

    parts: tuple[Part, ...]
    offset: tuple[float, float] = field(default=(0.0, 0.0), compare=False)

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("footprint needs at least one part")
        for p in parts:
            if not isinstance(p, (Circle, ConvexPolygon)):
                raise TypeError(f"unsupported part {p!r}")
        if len(parts) > 1 and not _connected(parts):
            raise ValueError("footprint parts do not form a connected union")
        cx, cy = _union_centroid(parts)
        # already-centred input (e.g. a re-parsed footprint) is kept bit-exact
        if math.hypot(cx, cy) <= _RECENTER_EPS * _extent(parts):
            cx = cy = 0.0
        if cx != 0.0 or cy != 0.0:
            parts = tuple(p.shifted(-cx, -cy) for p in parts)
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "offset", (self.offset[0] + cx, self.offset[1] + cy))

    # -- constructors -----------------------------------------------------
    @classmethod
    def circle(cls, radius: float) -> "Footprint":
        return cls((Circle(radius),))

    @classmethod
    def polygon(cls, vertices) -> "Footprint":
        return cls((ConvexPolygon(tuple(map(tuple, vertices))),))

    @classmethod
    def rectangle(cls, width: float, height: float) -> "Footprint":
        w, h = width / 2.0, height / 2.0
        return cls.polygon([(-w, -h), (w, -h), (w, h), (-w, h)])

    @classmethod
    def regular(cls, n: int, circumradius: float, phase: float = math.pi / 2) -> "Footprint":
        ang = phase + 2.0 * math.pi * np.arange(n) / n
        return cls.polygon(np.c_[circumradius * np.cos(ang), circumradius * np.sin(ang)])

    @classmethod
    def union(cls, parts: Sequence[Part]) -> "Footprint":
        return cls(tuple(parts))

    # -- derived quantities -----------------------------------------------
    @property
    def is_convex_single(self) -> bool:
        return len(self.parts) == 1

    @cached_property
    def area(self) -> float:
        if len(self.parts) == 1:
            return self.parts[0].area
        return shapely.union_all([p.to_shapely() for p in self.parts]).area

    @cached_property
    def distal_radius(self) -> float:
        return distal_radius(self)

    def to_shapely(self, pose: Pose | None = None):
        geom = shapely.union_all([p.to_shapely() for p in self.parts])
        if pose is None:
            return geom
        from shapely import affinity
        geom = affinity.rotate(geom, pose.theta, origin=(0, 0), use_radians=True)
        return affinity.translate(geom, pose.x, pose.y)

    @cached_property
    def packed(self):
        """(kinds, centers, radii, vertex_starts, vertices) arrays for the kernels."""
        kinds, centers, radii, vstarts, verts = [], [], [], [0], []
        for p in self.parts:
            if isinstance(p, Circle):
                kinds.append(K.CIRCLE)
                centers.append(p.center)
                radii.append(p.radius)
            else:
                v = np.asarray(p.vertices)
                c = v.mean(axis=0)
                kinds.append(K.POLYGON)
                centers.append(tuple(c))
                radii.append(float(np.max(np.linalg.norm(v - c, axis=1))) * (1 + 1e-12))
                verts.extend(p.vertices)
            vstarts.append(len(verts))
        return (np.array(kinds, dtype=np.int64),
                np.array(centers, dtype=float).reshape(-1, 2),
                np.array(radii, dtype=float),
                np.array(vstarts, dtype=np.int64),
                np.array(verts, dtype=float).reshape(-1, 2))


_RECENTER_EPS = 1e-12


def _extent(parts: Sequence[Part]) -> float:
    r = 0.0
    for p in parts:
        if isinstance(p, Circle):
            r = max(r, math.hypot(*p.center) + p.radius)
        else:
            r = max(r, max(math.hypot(x, y) for x, y in p.vertices))
    return r


def _union_centroid(parts: Sequence[Part]) -> tuple[float, float]:
    if len(parts) == 1:
        p = parts[0]
        return p.center if isinstance(p, Circle) else p.centroid
    # exact for polygon unions; circles enter as 1024-gons
    c = shapely.union_all([p.to_shapely() for p in parts]).centroid
    return (c.x, c.y)


@dataclass(frozen=True)
class Penetration:
    depth: float
    direction: tuple[float, float]

    @property
    def vector(self) -> np.ndarray:
        return self.depth * np.asarray(self.direction)


def distal_radius(obj: Footprint) -> float:
    """Distance from the body origin to the farthest point of the footprint."""
    r = 0.0
    for p in obj.parts:
        if isinstance(p, Circle):
            r = max(r, math.hypot(*p.center) + p.radius)
        else:
            r = max(r, max(math.hypot(x, y) for x, y in p.vertices))
    return r


class PackedObjects:
    """Flat kernel arrays for a sequence of footprints."""

    def __init__(self, footprints: Sequence[Footprint]):
        obj_ps = [0]
        kinds, centers, radii, vstarts, verts = [], [], [], [], []
        nverts = 0
        for fp in footprints:
            k, c, r, vs, v = fp.packed
            kinds.append(k)
            centers.append(c)
            radii.append(r)
            vstarts.append(vs[:-1] + nverts)
            verts.append(v)
            nverts += len(v)
            obj_ps.append(obj_ps[-1] + len(k))
        cat = lambda xs, dtype=float: np.concatenate(xs) if xs else np.zeros(0, dtype=dtype)
        self.obj_ps = np.array(obj_ps, dtype=np.int64)
        self.kind = cat(kinds, np.int64)
        self.pc = cat(centers).reshape(-1, 2)
        self.prad = cat(radii)
        self.pvs = np.append(cat(vstarts, np.int64), nverts).astype(np.int64)
        self.verts = np.concatenate(verts).reshape(-1, 2) if nverts else np.zeros((0, 2))
        self.bound = np.array([fp.distal_radius for fp in footprints], dtype=float) * (1 + 1e-12)

    def arrays(self):
        return self.obj_ps, self.kind, self.pc, self.prad, self.pvs, self.verts


class PackedSurface:
    """Kernel encoding of a single convex surface part."""

    def __init__(self, surface: Footprint):
        if len(surface.parts) != 1:
            raise ValueError("surface must be a single convex polygon or circle")
        part = surface.parts[0]
        self.footprint = surface
        if isinstance(part, Circle):
            self.kind = K.CIRCLE
            self.nrm = np.zeros((0, 2))
            self.off = np.zeros(0)
            self.cen = np.array(part.center, dtype=float)
            self.rad = part.radius
        else:
            v = np.asarray(part.vertices)
            e = np.roll(v, -1, axis=0) - v
            n = np.c_[e[:, 1], -e[:, 0]]
            n /= np.linalg.norm(n, axis=1)[:, None]
            self.kind = K.POLYGON
            self.nrm = n
            self.off = np.einsum("ij,ij->i", n, v)
            self.cen = np.zeros(2)
            self.rad = 0.0

    def arrays(self):
        return self.kind, self.nrm, self.off, self.cen, self.rad


def _pair_world(a: Footprint, pose_a: Pose, b: Footprint, pose_b: Pose):
    packed = PackedObjects([a, b])
    poses = np.array([pose_a.as_array(), pose_b.as_array()])
    wc = np.empty_like(packed.pc)
    wv = np.empty_like(packed.verts)
    K.transform(poses, np.ones(2, dtype=np.bool_), packed.obj_ps, packed.pc,
                packed.pvs, packed.verts, wc, wv)
    return packed, wc, wv


def penetration(a: Footprint, pose_a: Pose, b: Footprint, pose_b: Pose) -> Penetration:
    """Deepest part-pair penetration of ``a`` into ``b``.

    The direction is the unit translation that moves ``a`` out of ``b`` for
    the deepest part pair.  Depths within ``CONTACT_TOL`` are reported as 0.
    """
    packed, wc, wv = _pair_world(a, pose_a, b, pose_b)
    d, nx, ny, _, _ = K.object_pair(0, 1, packed.obj_ps, packed.kind, wc,
                                    packed.prad, packed.pvs, wv)
    if d <= CONTACT_TOL:
        return Penetration(0.0, (0.0, 0.0))
    return Penetration(float(d), (float(nx), float(ny)))


def in_collision(a: Footprint, pose_a: Pose, b: Footprint, pose_b: Pose,
                 tol: float = CONTACT_TOL) -> bool:
    if tol < 0:
        raise ValueError("tol must be non-negative")
    packed, wc, wv = _pair_world(a, pose_a, b, pose_b)
    d = K.object_pair(0, 1, packed.obj_ps, packed.kind, wc, packed.prad, packed.pvs, wv)[0]
    return d > tol


def boundary_penetration(obj: Footprint, pose: Pose, surface: Footprint) -> Penetration:
    """Largest distance any point of ``obj`` reaches past one surface edge.

    For polygon surfaces the excess is measured per edge line (so a square
    hanging over a corner reports its per-edge overhang, not the corner
    distance); the direction is the inward normal of that edge.
    """
    packed = PackedObjects([obj])
    surf = PackedSurface(surface)
    wc = np.empty_like(packed.pc)
    wv = np.empty_like(packed.verts)
    K.transform(pose.as_array()[None, :], np.ones(1, dtype=np.bool_), packed.obj_ps,
                packed.pc, packed.pvs, packed.verts, wc, wv)
    d, nx, ny, _, _ = K.boundary(0, packed.obj_ps, packed.kind, wc, packed.prad,
                                 packed.pvs, wv, *surf.arrays())
    if d <= CONTACT_TOL:
        return Penetration(0.0, (0.0, 0.0))
    return Penetration(float(d), (float(nx), float(ny)))


def contains_point(surface: Footprint, point, pose: Pose | None = None) -> bool:
    """True if ``point`` lies in the (optionally posed) footprint, boundary included."""
    local = np.asarray(point, dtype=float)
    if pose is not None:
        local = pose.inverse().apply(local)[0]
    for p in surface.parts:
        if isinstance(p, Circle):
            if math.hypot(local[0] - p.center[0], local[1] - p.center[1]) <= p.radius + 1e-12:
                return True
        else:
            v = np.asarray(p.vertices)
            e = np.roll(v, -1, axis=0) - v
            rel = local - v
            if np.all(e[:, 0] * rel[:, 1] - e[:, 1] * rel[:, 0] >= -1e-12):
                return True
    return False


def bounding_box(fp: Footprint, pose: Pose | None = None) -> tuple[float, float, float, float]:
    """(xmin, ymin, xmax, ymax) of a footprint, exact for circles and polygons."""
    pose = pose or Pose()
    xs, ys = [], []
    for p in fp.parts:
        if isinstance(p, Circle):
            c = pose.apply(p.center)[0]
            xs += [c[0] - p.radius, c[0] + p.radius]
            ys += [c[1] - p.radius, c[1] + p.radius]
        else:
            w = pose.apply(p.vertices)
            xs += list(w[:, 0])
            ys += list(w[:, 1])
    return min(xs), min(ys), max(xs), max(ys)
