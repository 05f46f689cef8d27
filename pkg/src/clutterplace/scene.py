"""Problem instances, configurations and the cost functions the searches minimise."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from . import _kernels as K
from .geometry import (
    CONTACT_TOL,
    Circle,
    Footprint,
    PackedObjects,
    PackedSurface,
    Pose,
    angle_diff,
    bounding_box,
    contains_point,
)

OBSTACLE = "obstacle"
MOVABLE = "movable"
NEW = "new"
KINDS = (OBSTACLE, MOVABLE, NEW)

MOVE_EPS_REL = 1e-5
"""Position change (fraction of the surface diameter) above which a movable counts as moved."""
MOVE_EPS_ANGLE = 1e-5
LEX_TOL = 1e-9


class InvalidConfigurationError(ValueError):
    """A configuration does not cover every object it has to."""


class InfeasibleConstraintError(ValueError):
    """A placement constraint cannot be sampled."""


class InvalidSceneError(ValueError):
    pass


@dataclass(frozen=True)
class Region:
    """Placement constraint: the object's centroid must lie inside ``shape`` at ``pose``."""

    shape: Footprint
    pose: Pose = Pose()

    def contains(self, point) -> bool:
        return contains_point(self.shape, point, self.pose)

    def nearest(self, point) -> np.ndarray:
        x, y = K._nearest_in_region(float(point[0]), float(point[1]), 0, len(self.shape.parts),
                                    *self.world_arrays())
        return np.array([x, y])

    @cached_property
    def area(self) -> float:
        return self.shape.area

    def world_arrays(self):
        kind, pc, prad, pvs, verts = self.shape.packed
        wc = self.pose.apply(pc)
        wv = self.pose.apply(verts) if len(verts) else verts
        return kind, wc, prad, pvs, wv


@dataclass(frozen=True)
class ObjectRecord:
    id: str
    kind: str
    footprint: Footprint
    region: Region | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSceneError(f"object {self.id!r}: unknown kind {self.kind!r}")


class Configuration(Mapping[str, Pose]):
    """Immutable map from object id to pose."""

    __slots__ = ("_poses",)

    def __init__(self, poses: Mapping[str, Pose] | Iterable[tuple[str, Pose]] = ()):
        self._poses = MappingProxyType(dict(poses))

    def __getitem__(self, key: str) -> Pose:
        return self._poses[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._poses)

    def __len__(self) -> int:
        return len(self._poses)

    def __repr__(self) -> str:
        return f"Configuration({dict(self._poses)!r})"

    def __eq__(self, other) -> bool:
        if isinstance(other, Configuration):
            return dict(self._poses) == dict(other._poses)
        return NotImplemented

    __hash__ = None

    def __reduce__(self):
        return (Configuration, (dict(self._poses),))

    def with_poses(self, updates: Mapping[str, Pose]) -> "Configuration":
        merged = dict(self._poses)
        merged.update(updates)
        return Configuration(merged)

    def to_dict(self) -> dict[str, dict[str, float]]:
        return {k: {"x": p.x, "y": p.y, "theta": p.theta} for k, p in self._poses.items()}

    @classmethod
    def from_dict(cls, data: Mapping[str, Mapping[str, float]]) -> "Configuration":
        return cls({k: Pose(v["x"], v["y"], v.get("theta", 0.0)) for k, v in data.items()})


class CostC(NamedTuple):
    col_count: int
    pen_sum: float


class CostR(NamedTuple):
    col_count: int
    move_count: int
    change_sum: float


def lex_less(a: Sequence[float], b: Sequence[float], tol: float = LEX_TOL) -> bool:
    """Strict lexicographic order; float components within ``tol`` compare equal."""
    if len(a) != len(b):
        raise ValueError(f"cannot compare tuples of arity {len(a)} and {len(b)}")
    for x, y in zip(a, b):
        if isinstance(x, (int, np.integer)) and isinstance(y, (int, np.integer)):
            if x != y:
                return x < y
        elif x < y - tol:
            return True
        elif x > y + tol:
            return False
    return False


def lex_leq(a, b, tol: float = LEX_TOL) -> bool:
    return not lex_less(b, a, tol)


@dataclass(frozen=True)
class PlacementBalls:
    """Normalised displacement radius (0 freezes, 1 frees) for every movable."""

    radii: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "radii", MappingProxyType(
            {k: min(1.0, max(0.0, float(v))) for k, v in self.radii.items()}))

    @classmethod
    def uniform(cls, scene: "Scene", radius: float) -> "PlacementBalls":
        return cls({o.id: radius for o in scene.movables})

    def __reduce__(self):
        return (PlacementBalls, (dict(self.radii),))

    def with_radius(self, obj_id: str, radius: float) -> "PlacementBalls":
        radii = dict(self.radii)
        radii[obj_id] = radius
        return PlacementBalls(radii)

    def __getitem__(self, obj_id: str) -> float:
        return self.radii[obj_id]


@dataclass(frozen=True)
class CollisionReport:
    pairs: tuple[tuple[str, str, float], ...]
    overhangs: Mapping[str, float]

    def __reduce__(self):
        return (CollisionReport, (self.pairs, dict(self.overhangs)))

    @property
    def count(self) -> int:
        return len(self.pairs) + len(self.overhangs)

    @property
    def pen_sum(self) -> float:
        return float(sum(d for _, _, d in self.pairs) + sum(self.overhangs.values()))

    @property
    def colliding_ids(self) -> set[str]:
        ids = set(self.overhangs)
        for a, b, _ in self.pairs:
            ids.update((a, b))
        return ids


@dataclass(frozen=True, eq=False)
class Scene:
    surface: Footprint
    objects: tuple[ObjectRecord, ...]
    initial: Configuration
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        if not isinstance(self.initial, Configuration):
            object.__setattr__(self, "initial", Configuration(self.initial))
        if len(self.surface.parts) != 1:
            raise InvalidSceneError("surface must be a single convex polygon or circle")
        ids = [o.id for o in self.objects]
        if len(set(ids)) != len(ids):
            raise InvalidSceneError("object ids must be unique")
        for o in self.objects:
            if o.kind == NEW:
                if o.id in self.initial:
                    raise InvalidSceneError(f"new object {o.id!r} must not have an initial pose")
            elif o.id not in self.initial:
                raise InvalidSceneError(f"{o.kind} {o.id!r} has no initial pose")
            if o.region is not None and o.id in self.initial:
                p = self.initial[o.id]
                if not o.region.contains((p.x, p.y)):
                    raise InvalidSceneError(f"initial pose of {o.id!r} violates its region")
        extra = set(self.initial) - set(ids)
        if extra:
            raise InvalidSceneError(f"initial poses for unknown objects {sorted(extra)}")
        rep = collisions(self, self.initial)
        if rep.count:
            raise InvalidSceneError(f"initial configuration is not collision-free: {rep}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scene):
            return NotImplemented
        return (self.surface == other.surface and self.objects == other.objects
                and self.initial == other.initial and dict(self.meta) == dict(other.meta))

    __hash__ = object.__hash__

    # -- lookups ----------------------------------------------------------
    @cached_property
    def ids(self) -> tuple[str, ...]:
        return tuple(o.id for o in self.objects)

    @cached_property
    def index(self) -> dict[str, int]:
        return {oid: i for i, oid in enumerate(self.ids)}

    def record(self, obj_id: str) -> ObjectRecord:
        return self.objects[self.index[obj_id]]

    def of_kind(self, kind: str) -> tuple[ObjectRecord, ...]:
        return tuple(o for o in self.objects if o.kind == kind)

    @property
    def obstacles(self):
        return self.of_kind(OBSTACLE)

    @property
    def movables(self):
        return self.of_kind(MOVABLE)

    @property
    def new_objects(self):
        return self.of_kind(NEW)

    # -- geometry caches --------------------------------------------------
    @cached_property
    def packed(self) -> PackedObjects:
        return PackedObjects([o.footprint for o in self.objects])

    @cached_property
    def packed_surface(self) -> PackedSurface:
        return PackedSurface(self.surface)

    @cached_property
    def bbox(self) -> tuple[float, float, float, float]:
        return bounding_box(self.surface)

    @cached_property
    def diameter(self) -> float:
        part = self.surface.parts[0]
        if isinstance(part, Circle):
            return 2.0 * part.radius
        v = np.asarray(part.vertices)
        return float(np.max(np.linalg.norm(v[:, None, :] - v[None, :, :], axis=2)))

    @cached_property
    def max_d(self) -> dict[str, float]:
        """Distance from each movable's initial centroid to the farthest surface point."""
        part = self.surface.parts[0]
        out = {}
        for o in self.movables:
            p = self.initial[o.id]
            if isinstance(part, Circle):
                out[o.id] = math.hypot(p.x - part.center[0], p.y - part.center[1]) + part.radius
            else:
                v = np.asarray(part.vertices)
                out[o.id] = float(np.max(np.hypot(v[:, 0] - p.x, v[:, 1] - p.y)))
        return out

    @cached_property
    def kinds(self) -> np.ndarray:
        return np.array([o.kind for o in self.objects])

    @cached_property
    def region_arrays(self):
        """Flat world-frame region parts; object i's parts are reg_ps[i]:reg_ps[i+1]."""
        reg_ps = [0]
        kinds, centers, radii, vstarts, verts = [], [], [], [], []
        nv = 0
        for o in self.objects:
            if o.region is not None:
                k, c, r, vs, v = o.region.world_arrays()
                kinds.append(k)
                centers.append(c)
                radii.append(r)
                vstarts.append(vs[:-1] + nv)
                verts.append(v)
                nv += len(v)
                reg_ps.append(reg_ps[-1] + len(k))
            else:
                reg_ps.append(reg_ps[-1])
        if kinds:
            arrays = (np.concatenate(kinds), np.concatenate(centers).reshape(-1, 2),
                      np.concatenate(radii),
                      np.append(np.concatenate(vstarts), nv).astype(np.int64),
                      np.concatenate(verts).reshape(-1, 2))
        else:
            arrays = (np.zeros(0, np.int64), np.zeros((0, 2)), np.zeros(0),
                      np.zeros(1, np.int64), np.zeros((0, 2)))
        return (np.array(reg_ps, dtype=np.int64),) + arrays

    # -- configuration <-> arrays -----------------------------------------
    def to_array(self, config: Mapping[str, Pose], require_new: bool = False):
        """Pose array (n x 3) and mask of placed objects.

        Obstacles and movables must always be present; new objects may be
        absent unless ``require_new``.
        """
        n = len(self.objects)
        poses = np.zeros((n, 3))
        active = np.zeros(n, dtype=np.bool_)
        for i, o in enumerate(self.objects):
            p = config.get(o.id)
            if p is None:
                if o.kind != NEW or require_new:
                    raise InvalidConfigurationError(f"configuration has no pose for {o.id!r}")
                continue
            poses[i] = (p.x, p.y, p.theta)
            active[i] = True
        return poses, active

    def from_array(self, poses: np.ndarray, active: np.ndarray) -> Configuration:
        out = {}
        for i, o in enumerate(self.objects):
            if not active[i]:
                continue
            if o.kind == OBSTACLE:
                out[o.id] = self.initial[o.id]
            else:
                out[o.id] = Pose(poses[i, 0], poses[i, 1], poses[i, 2])
        return Configuration(out)


# -- collision bookkeeping ------------------------------------------------

def _evaluate(scene: Scene, poses: np.ndarray, active: np.ndarray):
    pk = scene.packed
    return K.evaluate(poses, active, pk.bound, *pk.arrays(),
                      *scene.packed_surface.arrays(), CONTACT_TOL)


def collisions(scene: Scene, config: Mapping[str, Pose]) -> CollisionReport:
    poses, active = scene.to_array(config)
    pairs, depths, bdepth = _evaluate(scene, poses, active)
    ids = scene.ids
    return CollisionReport(
        tuple((ids[i], ids[j], float(d)) for (i, j), d in zip(pairs, depths)),
        MappingProxyType({ids[i]: float(bdepth[i]) for i in np.flatnonzero(bdepth)}))


def count_collisions(scene: Scene, config: Mapping[str, Pose]) -> int:
    """Colliding object pairs plus objects overhanging the surface."""
    return collisions(scene, config).count


def cost_p(scene: Scene, config: Mapping[str, Pose]) -> float:
    """Summed penetration depth of colliding pairs and boundary overhangs."""
    return collisions(scene, config).pen_sum


def cost_c(scene: Scene, config: Mapping[str, Pose]) -> CostC:
    rep = collisions(scene, config)
    return CostC(rep.count, rep.pen_sum)


def _displacements(scene: Scene, config: Mapping[str, Pose]):
    eps = MOVE_EPS_REL * scene.diameter
    for o in scene.movables:
        if o.id not in config:
            raise InvalidConfigurationError(f"configuration has no pose for {o.id!r}")
        p0 = scene.initial[o.id]
        p = config[o.id]
        dist = math.hypot(p.x - p0.x, p.y - p0.y)
        dth = abs(angle_diff(p.theta, p0.theta))
        moved = dist > eps or dth > MOVE_EPS_ANGLE
        yield o, moved, dist, dth


def count_moves(scene: Scene, config: Mapping[str, Pose]) -> int:
    return sum(1 for _, moved, _, _ in _displacements(scene, config) if moved)


def cost_d(scene: Scene, config: Mapping[str, Pose]) -> float:
    """Centroid displacement plus distal-point arc length, summed over moved clutter.

    Movables within the displacement epsilon contribute nothing so that
    relaxation drift never shows up as pose change.
    """
    return float(sum(dist + o.footprint.distal_radius * dth
                     for o, moved, dist, dth in _displacements(scene, config) if moved))


def cost_r(scene: Scene, config: Mapping[str, Pose]) -> CostR:
    col = count_collisions(scene, config)
    moves = 0
    change = 0.0
    for o, moved, dist, dth in _displacements(scene, config):
        if moved:
            moves += 1
            change += dist + o.footprint.distal_radius * dth
    return CostR(col, moves, float(change))


def regions_satisfied(scene: Scene, config: Mapping[str, Pose]) -> bool:
    for o in scene.objects:
        if o.region is not None and o.id in config:
            p = config[o.id]
            if not o.region.contains((p.x, p.y)):
                return False
    return True


def is_solution(scene: Scene, config: Mapping[str, Pose]) -> bool:
    """Every object placed, nothing colliding or overhanging, every region honoured."""
    scene.to_array(config, require_new=True)
    return count_collisions(scene, config) == 0 and regions_satisfied(scene, config)


# -- placement constraints --------------------------------------------------

def _ball_radius(scene: Scene, balls: PlacementBalls, obj_id: str) -> float:
    return balls[obj_id] * scene.max_d[obj_id]


def ball_satisfied(scene: Scene, balls: PlacementBalls, config: Mapping[str, Pose]) -> bool:
    slack = 1e-9 * scene.diameter
    for o in scene.movables:
        p0 = scene.initial[o.id]
        p = config[o.id]
        if math.hypot(p.x - p0.x, p.y - p0.y) > _ball_radius(scene, balls, o.id) + slack:
            return False
    return True


def project_to_ball(scene: Scene, balls: PlacementBalls, obj_id: str, pose: Pose) -> Pose:
    """Nearest pose whose centroid lies in the object's placement ball."""
    if obj_id not in scene.index or scene.record(obj_id).kind != MOVABLE:
        raise KeyError(f"{obj_id!r} is not a movable object")
    p0 = scene.initial[obj_id]
    if balls[obj_id] == 0.0:
        return p0
    r = _ball_radius(scene, balls, obj_id)
    dx, dy = pose.x - p0.x, pose.y - p0.y
    d = math.hypot(dx, dy)
    if d <= r:
        return pose
    s = r / d
    return Pose(p0.x + dx * s, p0.y + dy * s, pose.theta)


def project_to_region(scene: Scene, obj_id: str, pose: Pose) -> Pose:
    region = scene.record(obj_id).region
    if region is None or region.contains((pose.x, pose.y)):
        return pose
    x, y = region.nearest((pose.x, pose.y))
    return Pose(x, y, pose.theta)


def ball_arrays(scene: Scene, balls: PlacementBalls | None):
    """Per-object ball centres and absolute radii (inf when unconstrained) for the kernels."""
    n = len(scene.objects)
    centers = np.zeros((n, 2))
    radii = np.full(n, np.inf)
    for o in scene.movables:
        i = scene.index[o.id]
        p0 = scene.initial[o.id]
        centers[i] = (p0.x, p0.y)
        if balls is not None:
            radii[i] = _ball_radius(scene, balls, o.id)
    return centers, radii


# -- random placement -----------------------------------------------------------

_MAX_SAMPLE_TRIES = 10_000


def _sample_point(rng: np.random.Generator, bbox, inside, what: str) -> tuple[float, float]:
    xmin, ymin, xmax, ymax = bbox
    for _ in range(_MAX_SAMPLE_TRIES):
        x = rng.uniform(xmin, xmax)
        y = rng.uniform(ymin, ymax)
        if inside((x, y)):
            return x, y
    raise InfeasibleConstraintError(f"could not sample a point inside {what}")


def random_place_new(scene: Scene, rng: np.random.Generator) -> Configuration:
    """C_I extended with uniformly random poses for every new object.

    Centroids are uniform over the surface (or the object's region); the
    footprint itself may overhang.
    """
    poses = dict(scene.initial)
    for o in scene.new_objects:
        if o.region is not None:
            reg = o.region
            if reg.area <= 0:
                raise InfeasibleConstraintError(f"region of {o.id!r} has empty interior")
            x, y = _sample_point(rng, bounding_box(reg.shape, reg.pose), reg.contains,
                                 f"the region of {o.id!r}")
        else:
            x, y = _sample_point(rng, scene.bbox,
                                 lambda p: contains_point(scene.surface, p), "the surface")
        theta = rng.uniform(-math.pi, math.pi)
        poses[o.id] = Pose(x, y, theta)
    return Configuration(poses)
