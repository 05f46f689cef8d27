"""Collision-free placement of new objects on a cluttered 2D surface.

The solver nests three local searches: a potential-field relaxation that
pushes overlapping footprints apart, a grid-guided search that re-places
colliding objects in empty cells, and an outer search that lets the
existing clutter move only inside slowly growing placement balls.
"""

from .geometry import (
    CONTACT_TOL,
    Circle,
    ConvexPolygon,
    Footprint,
    Penetration,
    Pose,
    boundary_penetration,
    distal_radius,
    in_collision,
    penetration,
)
from .relax import RelaxParams, RelaxReport, equilibrium_check, innermost_search
from .scene import (
    MOVABLE,
    NEW,
    OBSTACLE,
    Configuration,
    CostC,
    CostR,
    ObjectRecord,
    PlacementBalls,
    Region,
    Scene,
    ball_satisfied,
    cost_c,
    cost_d,
    cost_p,
    cost_r,
    count_collisions,
    count_moves,
    is_solution,
    lex_less,
    project_to_ball,
    random_place_new,
)
from .search import (
    SearchBudget,
    SearchParams,
    SearchResult,
    free_cells,
    intermediate_search,
    outermost_search,
    random_restart,
    random_sample,
    solve,
)

__all__ = [
    "RelaxParams",
    "RelaxReport",
    "equilibrium_check",
    "innermost_search",
    "CONTACT_TOL",
    "Circle",
    "ConvexPolygon",
    "Footprint",
    "Penetration",
    "Pose",
    "boundary_penetration",
    "distal_radius",
    "in_collision",
    "penetration",
    "MOVABLE",
    "NEW",
    "OBSTACLE",
    "Configuration",
    "CostC",
    "CostR",
    "ObjectRecord",
    "PlacementBalls",
    "Region",
    "Scene",
    "ball_satisfied",
    "cost_c",
    "cost_d",
    "cost_p",
    "cost_r",
    "count_collisions",
    "count_moves",
    "is_solution",
    "lex_less",
    "project_to_ball",
    "random_place_new",
    "SearchBudget",
    "SearchParams",
    "SearchResult",
    "free_cells",
    "intermediate_search",
    "outermost_search",
    "random_restart",
    "random_sample",
    "solve",
]

__version__ = "0.1.0"
