"""Deterministic SVG pictures of a scene and a configuration.

Colour code: surface green, obstacles yellow, movables red, new objects
blue.  Every colliding pair gets a dashed magenta outline on both members
and a connector between their centroids; overhanging objects are outlined
the same way.
"""

from __future__ import annotations

from typing import Mapping

from .geometry import Circle, Footprint, Pose, bounding_box
from .scene import MOVABLE, NEW, OBSTACLE, Scene, collisions

FILL = {"surface": "#7fbf7f", OBSTACLE: "#e8c930", MOVABLE: "#d64545", NEW: "#3f6fd6"}
HIGHLIGHT = "#e000e0"
MARGIN = 0.05


def _f(v: float) -> str:
    s = f"{v:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _shape(fp: Footprint, pose: Pose, attrs: str) -> list[str]:
    out = []
    for part in fp.parts:
        if isinstance(part, Circle):
            (cx, cy), = pose.apply([part.center])
            out.append(f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(part.radius)}" {attrs}/>')
        else:
            pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in pose.apply(part.vertices))
            out.append(f'<polygon points="{pts}" {attrs}/>')
    return out


def render_svg(scene: Scene, config: Mapping[str, Pose] | None = None, width_px: int = 600) -> str:
    """SVG document for ``config`` (default: the initial configuration).

    The viewport is the surface bounding box grown by 5% on every side.
    """
    config = scene.initial if config is None else config
    x0, y0, x1, y1 = bounding_box(scene.surface)
    mx, my = MARGIN * (x1 - x0), MARGIN * (y1 - y0)
    x0, y0, x1, y1 = x0 - mx, y0 - my, x1 + mx, y1 + my
    w, h = x1 - x0, y1 - y0
    stroke = _f(0.004 * max(w, h))
    height_px = max(1, round(width_px * h / w))

    placed = [o for o in scene.objects if o.id in config]
    report = collisions(scene, config)
    flagged = report.colliding_ids

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width_px}" height="{height_px}" '
        f'viewBox="{_f(x0)} {_f(-y1)} {_f(w)} {_f(h)}">',
        '<g transform="scale(1,-1)">',
        '<g class="surface">',
        *_shape(scene.surface, Pose(), f'fill="{FILL["surface"]}" stroke="none"'),
        '</g>',
    ]
    for o in placed:
        lines.append(f'<g class="{o.kind}" id="{o.id}">')
        lines += _shape(o.footprint, config[o.id],
                        f'fill="{FILL[o.kind]}" fill-opacity="0.85" stroke="#202020" stroke-width="{stroke}"')
        lines.append('</g>')
    for o in placed:
        if o.id in flagged:
            lines.append(f'<g class="collision-outline" data-id="{o.id}">')
            lines += _shape(o.footprint, config[o.id],
                            f'fill="none" stroke="{HIGHLIGHT}" stroke-width="{_f(2.5 * float(stroke))}" '
                            f'stroke-dasharray="{_f(4 * float(stroke))}"')
            lines.append('</g>')
    for a, b, depth in report.pairs:
        pa, pb = config[a], config[b]
        lines.append(f'<line class="collision-pair" data-pair="{a} {b}" data-depth="{_f(depth)}" '
                     f'x1="{_f(pa.x)}" y1="{_f(pa.y)}" x2="{_f(pb.x)}" y2="{_f(pb.y)}" '
                     f'stroke="{HIGHLIGHT}" stroke-width="{stroke}"/>')
    lines += ['</g>', '</svg>', '']
    return "\n".join(lines)
