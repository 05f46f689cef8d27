"""Independent reference computations used by the tests.

None of these share code with the solver's separating-axis kernels.
"""

import math

import numpy as np
import shapely

from clutterplace.geometry import Circle, ConvexPolygon, Footprint, Pose


def random_convex_polygon(rng, max_vertices=8, scale=1.0):
    """Convex hull of random points, retried until it has 3..max_vertices corners."""
    while True:
        k = rng.integers(3, max_vertices + 1)
        pts = rng.normal(size=(k, 2)) * scale
        hull = shapely.MultiPoint([tuple(p) for p in pts]).convex_hull
        if hull.geom_type != "Polygon" or hull.area < 0.05 * scale * scale:
            continue
        verts = list(hull.exterior.coords)[:-1]
        if 3 <= len(verts) <= max_vertices:
            try:
                return Footprint((ConvexPolygon(tuple(verts)),))
            except ValueError:
                continue


def world_vertices(fp: Footprint, pose: Pose) -> np.ndarray:
    (part,) = fp.parts
    return pose.apply(part.vertices)


def support_depth(va: np.ndarray, vb: np.ndarray, samples: int = 4096, zoom: int = 6):
    """Minimum over directions u of the overlap h_A(u) + h_B(-u).

    For convex A, B this is the penetration depth (positive) or minus the
    separating gap; u minimising it is the direction B pushes A.  Dense
    angular sampling, then repeated zooming around the best sample.
    """
    def overlap(th):
        u = np.stack([np.cos(th), np.sin(th)], axis=-1)
        ha = (va @ u.T).max(axis=0)
        hb = (-(vb @ u.T)).max(axis=0)
        return ha + hb

    th = np.linspace(-math.pi, math.pi, samples, endpoint=False)
    width = 2 * math.pi / samples
    for _ in range(zoom):
        vals = overlap(th)
        k = int(np.argmin(vals))
        best_th = th[k]
        th = np.linspace(best_th - 2 * width, best_th + 2 * width, 401)
        width = 4 * width / 400
    vals = overlap(th)
    k = int(np.argmin(vals))
    # u points from A's side toward B; A escapes along -u
    return float(vals[k]), -np.array([math.cos(th[k]), math.sin(th[k])])


def sampled_distal_radius(fp: Footprint, per_edge: int = 2000) -> float:
    best = 0.0
    for part in fp.parts:
        if isinstance(part, Circle):
            best = max(best, math.hypot(*part.center) + part.radius)
            continue
        v = np.asarray(part.vertices)
        for a, b in zip(v, np.roll(v, -1, axis=0)):
            t = np.linspace(0, 1, per_edge)[:, None]
            best = max(best, float(np.max(np.linalg.norm(a + t * (b - a), axis=1))))
    return best
