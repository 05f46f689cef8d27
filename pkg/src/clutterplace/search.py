"""Nested local searches over configurations, plus the two naive baselines.

``intermediate_search`` wraps the relaxation with grid-guided re-placements
of colliding objects and minimises <#col, cost_p>.  ``outermost_search``
wraps that with placement balls that start closed around the clutter and
open up step by step, minimising <#col, #move, cost_d>.  Both only ever
adopt strictly better configurations.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .geometry import CONTACT_TOL, contains_point
from .relax import RelaxParams, relax_arrays
from .scene import (
    MOVABLE,
    NEW,
    Configuration,
    CostC,
    CostR,
    PlacementBalls,
    Scene,
    ball_arrays,
    cost_c,
    cost_r,
    is_solution,
    lex_less,
    random_place_new,
)


class NoFreeCellError(RuntimeError):
    """Grid refinement hit its cap without finding an empty cell."""


@dataclass(frozen=True)
class SearchBudget:
    timeout: float = 300.0
    seed: int = 0

    def __post_init__(self):
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")


@dataclass(frozen=True)
class SearchParams:
    relax: RelaxParams = field(default_factory=RelaxParams)
    start_resolution: int = 2
    max_resolution: int = 256
    radius_step: float = 0.1


@dataclass(frozen=True)
class GridState:
    rows: int
    cols: int
    cell_occupancy: np.ndarray
    """True where a centroid lies in the cell (cells centred outside the surface count as occupied)."""
    free_cells: tuple[tuple[int, int], ...]
    bbox: tuple[float, float, float, float]

    def center(self, cell: tuple[int, int]) -> tuple[float, float]:
        xmin, ymin, xmax, ymax = self.bbox
        r, c = cell
        return (xmin + (c + 0.5) * (xmax - xmin) / self.cols,
                ymin + (r + 0.5) * (ymax - ymin) / self.rows)


@dataclass(frozen=True)
class Adoption:
    layer: str
    cost: tuple
    config: Configuration
    balls: PlacementBalls | None
    call: int = 0
    """Intermediate-call number the adoption belongs to (0 for the outermost layer)."""
    at_timeout: bool = False
    """Adopted because the budget ran out; where that cut falls depends on the clock."""


@dataclass(frozen=True)
class SearchResult:
    config: Configuration
    success: bool
    cost_c: CostC
    cost_r: CostR
    elapsed: float
    inner_calls: int = 0
    intermediate_calls: int = 0
    timed_out: bool = False
    trace: tuple[Adoption, ...] = ()


class _Timeout(Exception):
    pass


def _cell_index(v: float, lo: float, width: float, n: int) -> int:
    # centroids on a grid line belong to the lower-index cell
    k = math.ceil((v - lo) / width) - 1
    return min(max(k, 0), n - 1)


def _grid(scene: Scene, points: np.ndarray, res: int) -> GridState:
    xmin, ymin, xmax, ymax = scene.bbox
    w = (xmax - xmin) / res
    h = (ymax - ymin) / res
    occ = np.zeros((res, res), dtype=bool)
    for x, y in points:
        occ[_cell_index(y, ymin, h, res), _cell_index(x, xmin, w, res)] = True
    if not _is_box(scene):
        for r in range(res):
            for c in range(res):
                if not contains_point(scene.surface, (xmin + (c + 0.5) * w, ymin + (r + 0.5) * h)):
                    occ[r, c] = True
    free = tuple((int(r), int(c)) for r, c in zip(*np.nonzero(~occ)))
    return GridState(res, res, occ, free, scene.bbox)


def _is_box(scene: Scene) -> bool:
    part = scene.surface.parts[0]
    if scene.packed_surface.kind != K.POLYGON or len(part.vertices) != 4:
        return False
    v = np.asarray(part.vertices)
    xmin, ymin, xmax, ymax = scene.bbox
    return bool(np.all(np.isclose(v[:, 0], xmin) | np.isclose(v[:, 0], xmax))
                and np.all(np.isclose(v[:, 1], ymin) | np.isclose(v[:, 1], ymax)))


def free_cells(scene: Scene, config, start_resolution: int = 2,
               max_resolution: int = 256) -> GridState:
    """Coarsest grid (doubling from ``start_resolution``) with at least one centroid-free cell."""
    if isinstance(config, np.ndarray):
        points = config
    else:
        points = np.array([(p.x, p.y) for p in config.values()]).reshape(-1, 2)
    res = start_resolution
    while res <= max_resolution:
        grid = _grid(scene, points, res)
        if grid.free_cells:
            return grid
        res *= 2
    raise NoFreeCellError(f"no free cell at resolution {max_resolution}")


class _Run:
    """Shared state of one search invocation: budget, RNG, counters, trace."""

    def __init__(self, scene: Scene, params: SearchParams | None, budget: SearchBudget):
        self.scene = scene
        self.params = params or SearchParams()
        self.budget = budget
        self.rng = np.random.default_rng(budget.seed)
        self.start = time.perf_counter()
        self.deadline = self.start + budget.timeout
        self.inner_calls = 0
        self.intermediate_calls = 0
        self.timed_out = False
        self.trace: list[Adoption] = []
        self.movable_ix = np.array([o.kind == MOVABLE for o in scene.objects], dtype=bool)
        self.replaceable = np.array([o.kind in (MOVABLE, NEW) for o in scene.objects], dtype=bool)
        pk = scene.packed
        self._geom = (pk.bound, *pk.arrays(), *scene.packed_surface.arrays())

    def check_time(self):
        if time.perf_counter() >= self.deadline:
            self.timed_out = True
            raise _Timeout

    def collisions(self, poses, active):
        pairs, depths, bdepth = K.evaluate(poses, active, *self._geom, CONTACT_TOL)
        colliding = np.zeros(len(poses), dtype=bool)
        colliding[pairs[:, 0]] = True
        colliding[pairs[:, 1]] = True
        colliding |= bdepth > 0
        return CostC(int(len(pairs) + np.count_nonzero(bdepth)),
                     float(depths.sum() + bdepth.sum())), colliding

    def cost_c(self, poses, active) -> CostC:
        return self.collisions(poses, active)[0]

    def relax(self, balls, poses, active):
        self.inner_calls += 1
        out, _, _ = relax_arrays(self.scene, balls, poses, active, self.params.relax, self.rng)
        return out

    def config(self, poses, active) -> Configuration:
        return self.scene.from_array(poses, active)

    def adopt(self, layer, cost, poses, active, balls):
        # once the budget has run out, what gets adopted depends on where the clock cut
        call = self.intermediate_calls if layer == "intermediate" else 0
        self.trace.append(Adoption(layer, tuple(cost), self.config(poses, active), balls, call,
                                   self.timed_out))

    def result(self, config: Configuration) -> SearchResult:
        return SearchResult(
            config=config,
            success=is_solution(self.scene, config),
            cost_c=cost_c(self.scene, config),
            cost_r=cost_r(self.scene, config),
            elapsed=time.perf_counter() - self.start,
            inner_calls=self.inner_calls,
            intermediate_calls=self.intermediate_calls,
            timed_out=self.timed_out,
            trace=tuple(self.trace),
        )


def _replace_pose(run: _Run, balls, i: int, xy, ball_c, ball_r):
    theta = run.rng.uniform(-math.pi, math.pi)
    x, y = K.project_pose(i, xy[0], xy[1], ball_c, ball_r, *run.scene.region_arrays)
    return x, y, theta


def _intermediate(run: _Run, balls: PlacementBalls | None, poses: np.ndarray,
                  active: np.ndarray) -> np.ndarray:
    """Grid-guided re-placement loop.  Returns the final pose array.

    On timeout the best configuration seen so far is returned.
    """
    scene = run.scene
    run.intermediate_calls += 1
    zero = CostC(0, 0.0)
    ball_c, ball_r = ball_arrays(scene, balls)
    frozen = np.zeros(len(poses), dtype=bool)
    if balls is not None:
        for o in scene.movables:
            frozen[scene.index[o.id]] = balls[o.id] == 0.0

    current = poses
    cur_cost = run.cost_c(current, active)
    best, best_cost = current, cur_cost
    try:
        run.check_time()
        nxt = run.relax(balls, current, active)
        nxt_cost = run.cost_c(nxt, active)
        if lex_less(nxt_cost, cur_cost):
            current, cur_cost = nxt, nxt_cost
            run.adopt("intermediate", cur_cost, current, active, balls)
        best, best_cost = current, cur_cost
        while True:
            _, colliding = run.collisions(current, active)
            candidates = [i for i in np.flatnonzero(colliding & run.replaceable & ~frozen)]
            candidates.sort(key=lambda i: scene.ids[i])
            if not candidates:
                return current
            try:
                grid = free_cells(scene, current[active, :2], run.params.start_resolution,
                                  run.params.max_resolution)
            except NoFreeCellError:
                return current
            for i in candidates:
                for cell in grid.free_cells:
                    run.check_time()
                    trial = current.copy()
                    trial[i] = _replace_pose(run, balls, i, grid.center(cell), ball_c, ball_r)
                    x = run.relax(balls, trial, active)
                    x_cost = run.cost_c(x, active)
                    if lex_less(x_cost, best_cost):
                        best, best_cost = x, x_cost
                    if best_cost == zero:
                        break
                if best_cost == zero:
                    break
            if not lex_less(best_cost, cur_cost):
                return current
            current, cur_cost = best, best_cost
            run.adopt("intermediate", cur_cost, current, active, balls)
    except _Timeout:
        if best is not current and lex_less(best_cost, cur_cost):
            run.adopt("intermediate", best_cost, best, active, balls)
            return best
        return current


def _start(run: _Run, config: Configuration | None):
    if config is None:
        config = random_place_new(run.scene, run.rng)
    return run.scene.to_array(config, require_new=True)


def intermediate_search(scene: Scene, balls: PlacementBalls | None = None,
                        config: Configuration | None = None,
                        params: SearchParams | None = None,
                        budget: SearchBudget = SearchBudget()) -> SearchResult:
    """Minimise <#col, cost_p> by relaxation plus re-placement into free grid cells.

    Without ``config`` the new objects are first placed at random.
    ``balls=None`` leaves all clutter unconstrained.
    """
    run = _Run(scene, params, budget)
    poses, active = _start(run, config)
    out = _intermediate(run, balls, poses, active)
    return run.result(run.config(out, active))


def _cost_r(run: _Run, poses, active) -> CostR:
    return cost_r(run.scene, run.config(poses, active))


def outermost_search(scene: Scene, params: SearchParams | None = None,
                     budget: SearchBudget = SearchBudget(),
                     config: Configuration | None = None) -> SearchResult:
    """Minimise <#col, #move, cost_d> by gradually opening the clutter's placement balls."""
    run = _Run(scene, params, budget)
    poses, active = _start(run, config)
    balls = PlacementBalls.uniform(scene, 0.0)
    step = run.params.radius_step
    zero = CostR(0, 0, 0.0)

    current = poses
    cur_cost = _cost_r(run, current, active)
    best, best_cost = current, cur_cost
    try:
        nxt = _intermediate(run, balls, current, active)
        nxt_cost = _cost_r(run, nxt, active)
        if lex_less(nxt_cost, cur_cost):
            current, cur_cost = nxt, nxt_cost
            run.adopt("outermost", cur_cost, current, active, balls)
        best, best_cost = current, cur_cost
        run.check_time()
        while cur_cost != zero:
            for o in sorted(scene.movables, key=lambda o: o.id):
                if balls[o.id] >= 1.0:
                    continue
                balls = balls.with_radius(o.id, min(1.0, round(balls[o.id] + step, 12)))
                child = _intermediate(run, balls, current, active)
                child_cost = _cost_r(run, child, active)
                if lex_less(child_cost, best_cost):
                    best, best_cost = child, child_cost
                run.check_time()
            if not lex_less(best_cost, cur_cost):
                break
            current, cur_cost = best, best_cost
            run.adopt("outermost", cur_cost, current, active, balls)
    except _Timeout:
        if lex_less(best_cost, cur_cost):
            current, cur_cost = best, best_cost
            run.adopt("outermost", cur_cost, current, active, balls)
    return run.result(run.config(current, active))


def inner_search(scene: Scene, params: SearchParams | None = None,
                 budget: SearchBudget = SearchBudget(),
                 config: Configuration | None = None) -> SearchResult:
    """A single relaxation from a random placement, clutter unconstrained."""
    run = _Run(scene, params, budget)
    poses, active = _start(run, config)
    out = run.relax(None, poses, active)
    return run.result(run.config(out, active))


def random_sample(scene: Scene, budget: SearchBudget = SearchBudget(),
                  params: SearchParams | None = None) -> SearchResult:
    """Redraw the new objects uniformly until the placement is collision-free."""
    run = _Run(scene, params, budget)
    poses, active = _start(run, None)
    try:
        while True:
            if run.cost_c(poses, active).col_count == 0 and is_solution(scene, run.config(poses, active)):
                break
            run.check_time()
            poses, active = _start(run, None)
    except _Timeout:
        pass
    return run.result(run.config(poses, active))


def random_restart(scene: Scene, params: SearchParams | None = None,
                   budget: SearchBudget = SearchBudget()) -> SearchResult:
    """Relax from fresh random placements until one relaxes to zero penetration."""
    run = _Run(scene, params, budget)
    best = best_active = None
    best_cost = None
    try:
        while True:
            run.check_time()
            poses, active = _start(run, None)
            out = run.relax(None, poses, active)
            c = run.cost_c(out, active)
            if best_cost is None or lex_less(c, best_cost):
                best, best_active, best_cost = out, active, c
            if c.col_count == 0 and is_solution(scene, run.config(out, active)):
                break
    except _Timeout:
        if best is None:
            best, best_active = _start(run, None)
    return run.result(run.config(best, best_active))


ALGORITHMS = ("inner", "intermediate", "outer", "random_sample", "random_restart")


def solve(scene: Scene, algorithm: str, params: SearchParams | None = None,
          budget: SearchBudget = SearchBudget()) -> SearchResult:
    algorithm = algorithm.replace("-", "_")
    if algorithm == "inner":
        return inner_search(scene, params, budget)
    if algorithm == "intermediate":
        return intermediate_search(scene, None, None, params, budget)
    if algorithm == "outer":
        return outermost_search(scene, params, budget)
    if algorithm == "random_sample":
        return random_sample(scene, budget, params)
    if algorithm == "random_restart":
        return random_restart(scene, params, budget)
    raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
