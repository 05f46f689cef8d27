"""Penetration depth, collision counts and the lexicographic cost tuples.

    python demos/01_geometry_and_costs.py
"""

import math

from clutterplace import (
    MOVABLE,
    NEW,
    Configuration,
    CostC,
    CostR,
    Footprint,
    ObjectRecord,
    Pose,
    Scene,
    cost_c,
    cost_r,
    lex_less,
    penetration,
)

# Two unit squares offset by half a side overlap by 0.5 along x.
square = Footprint.rectangle(1.0, 1.0)
p = penetration(square, Pose(0, 0), square, Pose(0.5, 0))
print(f"square/square: depth {p.depth:.3f}, push the first body along {p.direction}")

# A disc resting on a square's corner.
disc = Footprint.circle(0.5)
p = penetration(disc, Pose(0.8, 0.8), square, Pose(0, 0))
print(f"disc/corner:   depth {p.depth:.4f}")

# A small table: one movable cup and one new plate dropped onto it.
table = Footprint.rectangle(2.0, 1.0)
recs = (ObjectRecord("cup", MOVABLE, Footprint.circle(0.2)),
        ObjectRecord("plate", NEW, Footprint.circle(0.3)))
scene = Scene(table, recs, Configuration({"cup": Pose(-0.5, 0)}))

clash = {"cup": Pose(-0.5, 0), "plate": Pose(-0.2, 0)}
apart = {"cup": Pose(-0.7, 0.1, math.pi / 2), "plate": Pose(0.3, 0)}
for label, cfg in (("overlapping", clash), ("cup nudged", apart)):
    print(f"{label:12s} cost_c {tuple(cost_c(scene, cfg))}  cost_r {tuple(round(v, 3) for v in cost_r(scene, cfg))}")

# Fewer collisions always wins, whatever the penetration; then fewer moves.
print("<19, 1.43> before <20, 1.37>:", lex_less(CostC(19, 1.43), CostC(20, 1.37)))
print("<0, 1, 1.76> before <2, 1, 2.82>:", lex_less(CostR(0, 1, 1.76), CostR(2, 1, 2.82)))
