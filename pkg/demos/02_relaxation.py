"""The innermost layer: push overlapping footprints apart.

Drops the new objects of a 40% coverage scene at random and relaxes them.
Writes before/after pictures to demos/out/.

    python demos/02_relaxation.py
"""

from pathlib import Path

import numpy as np

from clutterplace import count_collisions, innermost_search, random_place_new
from clutterplace.bench import experiment_scene
from clutterplace.render import render_svg

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

rng = np.random.default_rng(7)
scene = experiment_scene("new_objects", 0.4, rng)
start = random_place_new(scene, rng)
report = innermost_search(scene, None, start, rng=rng)

print(f"{len(scene.new_objects)} new objects on a table with {len(scene.movables)} movables "
      f"and {len(scene.obstacles)} obstacle")
print(f"collisions {count_collisions(scene, start)} -> {count_collisions(scene, report.final)}")
print(f"penetration {report.cost_p_before:.4f} -> {report.cost_p_after:.4f} "
      f"in {report.iters_used} iterations (converged: {report.converged})")

(out / "relax_before.svg").write_text(render_svg(scene, start))
(out / "relax_after.svg").write_text(render_svg(scene, report.final))
print(f"pictures in {out}")
