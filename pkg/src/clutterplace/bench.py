"""Scene generators for the coverage experiments and benchmark puzzles, plus the trial harness."""

from __future__ import annotations

import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .geometry import ConvexPolygon, Footprint, Pose, bounding_box
from .relax import RelaxParams, relax_arrays
from .scene import (
    MOVABLE,
    NEW,
    OBSTACLE,
    Configuration,
    ObjectRecord,
    Scene,
    collisions,
    count_moves,
)
from .search import ALGORITHMS, SearchBudget, SearchParams, solve

VARIANTS = ("new_objects", "initial_movables", "obstacles")
BENCHMARKS = ("confined", "tight", "elongated", "lshape2d")
BASIC_SHAPES = ("disc", "square", "rectangle", "triangle")


class GenerationInfeasibleError(RuntimeError):
    """Initial objects could not be seated collision-free."""


def basic_shape(name: str, area: float) -> Footprint:
    """One of the four basic convex shapes scaled to ``area``."""
    if name == "disc":
        return Footprint.circle(math.sqrt(area / math.pi))
    if name == "square":
        s = math.sqrt(area)
        return Footprint.rectangle(s, s)
    if name == "rectangle":
        return Footprint.rectangle(math.sqrt(2 * area), math.sqrt(area / 2))
    if name == "triangle":
        side = math.sqrt(4 * area / math.sqrt(3))
        return Footprint.regular(3, side / math.sqrt(3))
    raise ValueError(f"unknown shape {name!r}")


def unit_square() -> Footprint:
    return Footprint.rectangle(1.0, 1.0)


def coverage(scene: Scene) -> float:
    """Total footprint area of every object over the surface area."""
    return sum(o.footprint.area for o in scene.objects) / scene.surface.area


# -- seating initial objects ---------------------------------------------

def _fits(scene_probe: Scene, config: dict) -> bool:
    return collisions(scene_probe, Configuration(config)).count == 0


def _rsa(surface: Footprint, records: list[ObjectRecord], rng, tries: int):
    """Random sequential placement, largest first.  Returns poses or None."""
    probe = Scene(surface, tuple(ObjectRecord(r.id, NEW, r.footprint) for r in records), {})
    order = sorted(records, key=lambda r: -r.footprint.area)
    xmin, ymin, xmax, ymax = probe.bbox
    placed: dict[str, Pose] = {}
    for r in order:
        for _ in range(tries):
            pose = Pose(rng.uniform(xmin, xmax), rng.uniform(ymin, ymax),
                        rng.uniform(-math.pi, math.pi))
            placed[r.id] = pose
            if _fits(probe, placed):
                break
            del placed[r.id]
        else:
            return None
    return placed


def _inflate(surface: Footprint, records: list[ObjectRecord], rng,
             stages: int = 24, start_scale: float = 0.6):
    """Grow shapes from ``start_scale`` to full size, relaxing after each step."""
    params = RelaxParams()
    xmin, ymin, xmax, ymax = surface.to_shapely().bounds
    n = len(records)
    poses = np.c_[rng.uniform(xmin, xmax, n), rng.uniform(ymin, ymax, n),
                  rng.uniform(-math.pi, math.pi, n)]
    active = np.ones(n, dtype=np.bool_)
    for stage in range(stages + 8):
        s = start_scale + (1 - start_scale) * min(1.0, stage / stages)
        scaled = tuple(ObjectRecord(r.id, NEW, _scaled(r.footprint, s)) for r in records)
        probe = Scene(surface, scaled, {})
        poses, _, _ = relax_arrays(probe, None, poses, active, params, rng)
        if s == 1.0 and collisions(probe, probe.from_array(poses, active)).count == 0:
            return {r.id: Pose(*poses[i]) for i, r in enumerate(records)}
    return None


def _scaled(fp: Footprint, s: float) -> Footprint:
    if s == 1.0:
        return fp
    parts = []
    for p in fp.parts:
        if isinstance(p, ConvexPolygon):
            parts.append(ConvexPolygon(tuple((x * s, y * s) for x, y in p.vertices)))
        else:
            parts.append(type(p)(p.radius * s, (p.center[0] * s, p.center[1] * s)))
    return Footprint(tuple(parts))


def seat(surface: Footprint, records: list[ObjectRecord], rng,
         tries: int = 2000, restarts: int = 5) -> dict[str, Pose]:
    """Collision-free, contained poses for ``records``.

    Rejection sampling first; dense sets that jam fall back to growing the
    shapes inside the surface while relaxing them apart.
    """
    if not records:
        return {}
    for _ in range(restarts):
        poses = _rsa(surface, records, rng, tries)
        if poses is not None:
            return poses
    for _ in range(restarts):
        poses = _inflate(surface, records, rng)
        if poses is not None:
            return poses
    raise GenerationInfeasibleError(f"could not seat {len(records)} objects collision-free")


# -- experiments -------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentSpec:
    variant: str = "new_objects"
    coverage_targets: tuple[float, ...] = (0.3, 0.5, 0.7, 0.85)
    trials: int = 60
    budget: SearchBudget = field(default_factory=SearchBudget)
    algorithms: tuple[str, ...] = ALGORITHMS

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        targets = tuple(float(c) for c in self.coverage_targets)
        if list(targets) != sorted(targets):
            raise ValueError("coverage targets must be sorted ascending")
        if any(not 0 <= c <= 0.95 for c in targets):
            raise ValueError("coverage targets must lie in [0, 0.95]")
        object.__setattr__(self, "coverage_targets", targets)
        if self.trials < 1:
            raise ValueError("trials must be positive")
        algos = tuple(a.replace("-", "_") for a in self.algorithms)
        unknown = set(algos) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms {sorted(unknown)}")
        object.__setattr__(self, "algorithms", algos)


BASE_AREA = 0.03
"""Area of each fixed-count object (the obstacle, the four clutter pieces or the four new ones)."""
MIN_CONTROLLED = 4
MAX_CONTROLLED = {"new_objects": 36, "initial_movables": 36, "obstacles": 32}


def _controlled_count(variant: str, target: float, fixed_area: float) -> int:
    lo = fixed_area + MIN_CONTROLLED * BASE_AREA
    hi = 0.95
    frac = 0.0 if target <= lo else min(1.0, (target - lo) / (hi - lo))
    return MIN_CONTROLLED + round(frac * (MAX_CONTROLLED[variant] - MIN_CONTROLLED))


def _records(prefix: str, kind: str, count: int, area: float, start: int = 0):
    return [ObjectRecord(f"{prefix}{k:02d}", kind,
                         basic_shape(BASIC_SHAPES[(start + k) % 4], area))
            for k in range(count)]


TILE_THRESHOLD = 0.45
"""Seated coverage above which random seating is replaced by the tiled layout."""
TILE_FILL_MAX = 0.995


def _tiled(fixed: list[ObjectRecord], prefix: str, kind: str, count: int, area: float,
           rng: np.random.Generator):
    """Dense collision-free layout on the unit square.

    The seated fixed objects stand in a bottom strip; the ``count``
    controlled objects become axis-aligned rectangles, one per cell of a
    row grid filling the rest of the square, all shrunk by the same factor
    so that their total area is ``area``.  Cell order is shuffled by ``rng``.
    """
    poses: dict[str, Pose] = {}
    x = -0.5
    strip = 0.0
    for r in fixed:
        best = None
        for theta in (0.0, math.pi / 2):
            x0, y0, x1, y1 = bounding_box(r.footprint, Pose(0.0, 0.0, theta))
            if best is None or y1 - y0 < best[4] - best[2]:
                best = (theta, x0, y0, x1, y1)
        theta, x0, y0, x1, y1 = best
        poses[r.id] = Pose(x - x0 + 1e-3, -0.5 - y0 + 1e-3, theta)
        x += x1 - x0 + 2e-3
        strip = max(strip, y1 - y0 + 2e-3)
    if x > 0.5:
        raise GenerationInfeasibleError("fixed objects do not fit in one strip")
    # cells: the rest of the strip first (row -1), then a row grid above it
    spare = 0.5 - x
    n_strip = min(count - 1, int(spare / strip)) if strip > 0 else 0
    height = 1.0 - strip
    rows = max(1, round(math.sqrt((count - n_strip) * height)))
    rest = count - n_strip
    per_row = [rest // rows + (k < rest % rows) for k in range(rows)]
    cell_h = height / rows
    cells = [(x + k * spare / n_strip, spare / n_strip, -0.5, strip) for k in range(n_strip)]
    for k, n in enumerate(per_row):
        cells += [(-0.5 + c / n, 1.0 / n, -0.5 + strip + k * cell_h, cell_h) for c in range(n)]
    cell_area = sum(w * h for _, w, _, h in cells)
    fill = math.sqrt(area / cell_area)
    if fill > TILE_FILL_MAX:
        raise GenerationInfeasibleError(f"tiled layout cannot reach controlled area {area:.3f}")
    order = rng.permutation(len(cells))
    records = []
    for k, ci in enumerate(order):
        x0, w, y0, h = cells[ci]
        oid = f"{prefix}{k:02d}"
        records.append(ObjectRecord(oid, kind, Footprint.rectangle(fill * w, fill * h)))
        poses[oid] = Pose(x0 + w / 2, y0 + h / 2, float(rng.choice((0.0, math.pi))))
    return records, poses


def experiment_scene(variant: str, target: float, rng: np.random.Generator,
                     name: str | None = None) -> Scene:
    """One scene of a coverage experiment at total coverage ``target``.

    Seated objects are placed by rejection sampling while that is viable;
    denser seated sets use the tiled layout of :func:`_tiled`.
    """
    surface = unit_square()
    if variant == "new_objects":
        fixed = [ObjectRecord("o00", OBSTACLE, basic_shape("disc", BASE_AREA))]
        fixed += _records("m", MOVABLE, 4, BASE_AREA)
        controlled_kind, prefix = NEW, "n"
    elif variant == "initial_movables":
        fixed = [ObjectRecord("o00", OBSTACLE, basic_shape("disc", BASE_AREA))]
        fixed += _records("n", NEW, 4, BASE_AREA)
        controlled_kind, prefix = MOVABLE, "m"
    elif variant == "obstacles":
        fixed = _records("m", MOVABLE, 4, BASE_AREA) + _records("n", NEW, 4, BASE_AREA, start=1)
        controlled_kind, prefix = OBSTACLE, "o"
    else:
        raise ValueError(f"unknown variant {variant!r}")
    fixed_area = sum(r.footprint.area for r in fixed)
    remaining = target - fixed_area
    count = _controlled_count(variant, target, fixed_area) if remaining > 1e-12 else 0
    seated_fixed = [r for r in fixed if r.kind != NEW]
    seated_area = sum(r.footprint.area for r in seated_fixed)
    if controlled_kind != NEW:
        seated_area += max(remaining, 0.0)
    if count and controlled_kind != NEW and seated_area > TILE_THRESHOLD:
        controlled, poses = _tiled(seated_fixed, prefix, controlled_kind, count, remaining, rng)
    else:
        controlled = _records(prefix, controlled_kind, count, remaining / count) if count else []
        poses = seat(surface, [r for r in fixed + controlled if r.kind != NEW], rng)
    records = fixed + controlled
    name = name or f"{variant}_{target:.2f}"
    return Scene(surface, tuple(records), Configuration(poses),
                 {"name": name, "variant": variant, "coverage": f"{target:.4f}",
                  "units": "surface"})


def gen_experiment(spec: ExperimentSpec, rng: np.random.Generator) -> list[Scene]:
    return [experiment_scene(spec.variant, c, rng) for c in spec.coverage_targets]


# -- benchmarks ----------------------------------------------------------------

def _rect(x0, y0, x1, y1) -> ConvexPolygon:
    return ConvexPolygon(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))


def ring(outer: float, wall: float) -> Footprint:
    """Square frame as four convex bars; the hole is ``outer - 2*wall`` wide."""
    h = outer / 2
    i = h - wall
    return Footprint.union([_rect(-h, -h, h, -i), _rect(-h, i, h, h),
                            _rect(-h, -i, -i, i), _rect(i, -i, h, i)])


def l_shape(long: float, short: float, width: float) -> Footprint:
    """L made of a ``long`` x ``width`` bar and a ``short`` x ``width`` foot."""
    return Footprint.union([_rect(0, 0, width, long), _rect(width, 0, width + short, width)])


def _confined() -> Scene:
    rng = np.random.default_rng(20190501)
    surface = unit_square()
    recs = [ObjectRecord(f"o{k:02d}", OBSTACLE, basic_shape(BASIC_SHAPES[k % 4], 0.025))
            for k in range(8)]
    recs += _records("m", MOVABLE, 4, 0.04)
    recs += _records("n", NEW, 4, 0.035, start=2)
    poses = seat(surface, [r for r in recs if r.kind != NEW], rng)
    return Scene(surface, tuple(recs), Configuration(poses), {"name": "confined"})


def _tight() -> Scene:
    """Two square frames fill a 2 x 1 table and a small block sits in the
    left frame's hole.  The new box fits nowhere except that hole, so the
    block has to be moved into the right frame's (smaller) hole first."""
    surface = Footprint.rectangle(2.0, 1.0)
    recs = [ObjectRecord("m00", MOVABLE, ring(0.95, 0.175)),
            ObjectRecord("m01", MOVABLE, ring(0.85, 0.2)),
            ObjectRecord("m02", MOVABLE, Footprint.rectangle(0.25, 0.25)),
            ObjectRecord("n00", NEW, Footprint.rectangle(0.5, 0.5))]
    init = {"m00": Pose(-0.5, 0.0, 0.0), "m01": Pose(0.5, 0.0, 0.0),
            "m02": Pose(-0.5, 0.05, 0.0)}
    return Scene(surface, tuple(recs), Configuration(init), {"name": "tight"})


def _elongated() -> Scene:
    surface = unit_square()
    width = 0.06
    recs = [ObjectRecord("n00", NEW, Footprint.rectangle(1.2, width))]
    init = {}
    for k in range(11):
        kind = MOVABLE if k < 6 else NEW
        oid = f"{'m' if kind == MOVABLE else 'n'}{k + 1:02d}"
        recs.append(ObjectRecord(oid, kind, Footprint.rectangle(0.5, width)))
        if kind == MOVABLE:
            init[oid] = Pose(-0.2 + 0.08 * k, 0.1, math.pi / 2)
    return Scene(surface, tuple(recs), Configuration(init), {"name": "elongated"})


def _lshape2d() -> Scene:
    surface = Footprint.rectangle(3.0, 2.0)
    recs = [ObjectRecord(f"n{k:02d}", NEW, l_shape(2.0, 1.0, 1.0)) for k in range(2)]
    return Scene(surface, tuple(recs), Configuration({}), {"name": "lshape2d"})


_BENCHMARK_BUILDERS = {"confined": _confined, "tight": _tight,
                       "elongated": _elongated, "lshape2d": _lshape2d}


def gen_benchmark(name: str) -> Scene:
    try:
        return _BENCHMARK_BUILDERS[name]()
    except KeyError:
        raise ValueError(f"unknown benchmark {name!r}; expected one of {BENCHMARKS}") from None


# -- harness -----------------------------------------------------------------

@dataclass(frozen=True)
class TrialMetrics:
    scene: str
    algorithm: str
    seed: int
    coverage: float
    success: bool
    cpu_seconds: float
    objects_moved: int
    col_count: int
    move_count: int
    change_sum: float


ROW_FIELDS = tuple(TrialMetrics.__dataclass_fields__)


def trial_row(scene: Scene, algorithm: str, seed: int, cpu_seconds: float, res) -> TrialMetrics:
    return TrialMetrics(scene.meta.get("name", "scene"), algorithm.replace("-", "_"), seed,
                        round(coverage(scene), 6), bool(res.success), cpu_seconds,
                        count_moves(scene, res.config), res.cost_r.col_count,
                        res.cost_r.move_count, res.cost_r.change_sum)


def run_trial(scene: Scene, algorithm: str, seed: int, timeout: float,
              params: SearchParams | None = None) -> TrialMetrics:
    t0 = time.perf_counter()
    res = solve(scene, algorithm, params, SearchBudget(timeout, seed))
    return trial_row(scene, algorithm, seed, time.perf_counter() - t0, res)


def _run_job(job):
    return run_trial(*job)


def run_harness(scenes: Sequence[Scene], spec: ExperimentSpec,
                params: SearchParams | None = None, jobs: int = 1) -> list[TrialMetrics]:
    """Run every (scene, algorithm, trial) combination; rows come back in that order.

    Trial ``k`` uses seed ``spec.budget.seed + k``.
    """
    work = [(scene, algo, spec.budget.seed + k, spec.budget.timeout, params)
            for scene in scenes for algo in spec.algorithms for k in range(spec.trials)]
    if jobs <= 1:
        return [_run_job(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_job, work))


def summarize(rows: Sequence[TrialMetrics]) -> list[dict]:
    """Per (scene, algorithm) means; failed trials contribute their partial results."""
    groups: dict[tuple[str, str], list[TrialMetrics]] = {}
    for r in rows:
        groups.setdefault((r.scene, r.algorithm), []).append(r)
    out = []
    for (scene, algo), rs in groups.items():
        out.append({
            "scene": scene,
            "algorithm": algo,
            "coverage": rs[0].coverage,
            "trials": len(rs),
            "success_rate": sum(r.success for r in rs) / len(rs),
            "mean_cpu_seconds": statistics.fmean(r.cpu_seconds for r in rs),
            "mean_objects_moved": statistics.fmean(r.objects_moved for r in rs),
        })
    return out


def default_jobs() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1)


def rows_as_dicts(rows: Sequence[TrialMetrics]) -> list[dict]:
    return [asdict(r) for r in rows]
