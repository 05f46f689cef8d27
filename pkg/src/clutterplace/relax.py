"""Potential-field relaxation: push penetrating bodies apart until they settle.

Every penetrating pair (and every overhang) produces a repulsive force
proportional to its penetration depth along the minimum-translation
direction, applied at the contact point so that off-centre contacts also
turn the bodies.  Velocities are damped and integrated semi-implicitly;
obstacles, the surface and frozen clutter push but never move.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels as K
from .geometry import CONTACT_TOL
from .scene import (
    MOVABLE,
    NEW,
    Configuration,
    PlacementBalls,
    Scene,
    ball_arrays,
    cost_p,
)


@dataclass(frozen=True)
class RelaxParams:
    stiffness: float = 1.0
    damping: float = 0.8
    step: float = 0.7
    max_iters: int = 1000
    stall_tol: float | None = None
    """Absolute stall tolerance; ``None`` means ``stall_tol_rel`` times the surface diameter."""
    stall_tol_rel: float = 1e-8
    torque_gain: float = 0.2
    skin_rel: float = 0.0
    """Extra push per contact, as a fraction of the surface diameter."""

    def __post_init__(self):
        if not (self.stiffness > 0 and self.step > 0 and self.torque_gain >= 0):
            raise ValueError("stiffness and step must be positive, torque_gain non-negative")
        if not 0 < self.damping < 1:
            raise ValueError("damping must lie in (0, 1)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.skin_rel < 0:
            raise ValueError("skin_rel must be non-negative")
        if self.stall_tol is not None and self.stall_tol <= 0:
            raise ValueError("stall_tol must be positive")

    def stall_for(self, scene: Scene) -> float:
        return self.stall_tol if self.stall_tol is not None else self.stall_tol_rel * scene.diameter

    def updated(self, **overrides) -> "RelaxParams":
        return replace(self, **overrides)


@dataclass(frozen=True)
class RelaxReport:
    final: Configuration
    iters_used: int
    converged: bool
    cost_p_before: float
    cost_p_after: float


def _mobility(scene: Scene, balls: PlacementBalls | None) -> np.ndarray:
    mobile = np.zeros(len(scene.objects), dtype=np.bool_)
    for i, o in enumerate(scene.objects):
        if o.kind == NEW:
            mobile[i] = True
        elif o.kind == MOVABLE:
            mobile[i] = balls is None or balls[o.id] > 0.0
    return mobile


def _random_dirs(rng: np.random.Generator, k: int = 64) -> np.ndarray:
    ang = rng.uniform(-math.pi, math.pi, size=k)
    return np.c_[np.cos(ang), np.sin(ang)]


def _constrain(scene, poses, mobile, ball_c, ball_r):
    """Snap frozen clutter to C_I and project the rest onto balls/regions."""
    reg = scene.region_arrays
    for o in scene.movables:
        i = scene.index[o.id]
        if not mobile[i]:
            p0 = scene.initial[o.id]
            poses[i] = (p0.x, p0.y, p0.theta)
    for i in np.flatnonzero(mobile):
        poses[i, 0], poses[i, 1] = K.project_pose(i, poses[i, 0], poses[i, 1], ball_c, ball_r, *reg)
    return poses


def relax_arrays(scene: Scene, balls: PlacementBalls | None, poses: np.ndarray,
                 active: np.ndarray, params: RelaxParams, rng: np.random.Generator):
    """Array-level relaxation used by the searches; returns (poses, iters, converged)."""
    mobile = _mobility(scene, balls) & active
    ball_c, ball_r = ball_arrays(scene, balls)
    poses = _constrain(scene, poses.copy(), mobile, ball_c, ball_r)
    pk = scene.packed
    return K.relax(poses, active, mobile, pk.bound, *pk.arrays(),
                   *scene.packed_surface.arrays(),
                   ball_c, ball_r, *scene.region_arrays,
                   params.stiffness, params.damping, params.step, params.max_iters,
                   params.stall_for(scene), params.torque_gain, CONTACT_TOL,
                   params.skin_rel * scene.diameter, _random_dirs(rng))


def innermost_search(scene: Scene, balls: PlacementBalls | None, config: Configuration,
                     params: RelaxParams | None = None,
                     rng: np.random.Generator | None = None) -> RelaxReport:
    """Relax ``config`` towards a local minimum of the summed penetration depth.

    ``balls=None`` leaves every movable unconstrained.  Non-convergence is
    reported through ``converged``, never raised.
    """
    params = params or RelaxParams()
    rng = rng if rng is not None else np.random.default_rng(0)
    poses, active = scene.to_array(config)
    out, iters, converged = relax_arrays(scene, balls, poses, active, params, rng)
    final = scene.from_array(out, active)
    return RelaxReport(final, int(iters), bool(converged),
                       cost_p(scene, config), cost_p(scene, final))


def equilibrium_check(scene: Scene, config: Configuration, params: RelaxParams | None = None,
                      balls: PlacementBalls | None = None) -> bool:
    """True if a single force pass from rest moves no body by ``stall_tol`` or more."""
    params = (params or RelaxParams()).updated(max_iters=1)
    poses, active = scene.to_array(config)
    _, _, converged = relax_arrays(scene, balls, poses, active, params, np.random.default_rng(0))
    return bool(converged)
