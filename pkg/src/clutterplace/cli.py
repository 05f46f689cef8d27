"""Command-line entry point: ``clutterplace {solve,gen,bench,render}``.

Exit status: 0 when the scene is solved, 2 when only a partial (colliding)
result was found, 1 for any input or usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import time
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import bench
from .relax import RelaxParams
from .render import render_svg
from .scene import InfeasibleConstraintError, InvalidConfigurationError, InvalidSceneError
from .scenefile import SchemaError, dumps, load_config, load_json, load_scene, save_config, save_scene
from .search import ALGORITHMS, SearchBudget, SearchParams, solve

EXIT_SOLVED, EXIT_ERROR, EXIT_PARTIAL = 0, 1, 2
CLI_ALGORITHMS = tuple(a.replace("_", "-") for a in ALGORITHMS)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _algo(name: str) -> str:
    name = name.replace("_", "-")
    if name not in CLI_ALGORITHMS:
        raise argparse.ArgumentTypeError(f"unknown algorithm {name!r} (choose from {', '.join(CLI_ALGORITHMS)})")
    return name


def _positive(v: str) -> float:
    x = float(v)
    if not x > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return x


def _coverages(v: str) -> tuple[float, ...]:
    return tuple(float(c) for c in v.split(","))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="clutterplace", description="Place new objects on a cluttered 2D surface.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve a scene file")
    s.add_argument("--scene", required=True, help="scene JSON file")
    s.add_argument("--algo", type=_algo, default="outer", help=f"one of {', '.join(CLI_ALGORITHMS)}")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--timeout", type=_positive, default=300.0, help="seconds (default 300)")
    s.add_argument("--params", help="JSON file with 'relax' and 'search' overrides")
    s.add_argument("--out-config", help="write the final configuration here")
    s.add_argument("--out-svg", help="write a picture of the final configuration here")
    s.add_argument("--out-metrics", help="write a one-row CSV metrics record here")

    g = sub.add_parser("gen", help="generate experiment or benchmark scenes")
    what = g.add_mutually_exclusive_group(required=True)
    what.add_argument("--benchmark", choices=bench.BENCHMARKS)
    what.add_argument("--variant", choices=bench.VARIANTS)
    g.add_argument("--coverage", type=_coverages, default=(0.3, 0.5, 0.7, 0.85),
                   help="comma-separated coverage targets for --variant")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out-dir", default=".", help="directory for the scene files")

    b = sub.add_parser("bench", help="run the trial harness")
    what = b.add_mutually_exclusive_group(required=True)
    what.add_argument("--benchmark", choices=bench.BENCHMARKS)
    what.add_argument("--variant", choices=bench.VARIANTS)
    b.add_argument("--coverage", type=_coverages, default=(0.3, 0.5, 0.7, 0.85))
    b.add_argument("--algo", type=_algo, action="append",
                   help="algorithm to run (repeatable; default: all)")
    b.add_argument("--trials", type=int, default=60)
    b.add_argument("--seed", type=int, default=0, help="seed of trial 0; trial k uses seed+k")
    b.add_argument("--timeout", type=_positive, default=300.0)
    b.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    b.add_argument("--params")
    b.add_argument("--out-metrics", default="metrics.csv", help="per-trial CSV rows")
    b.add_argument("--out-summary", help="aggregated JSON (default: next to --out-metrics)")

    r = sub.add_parser("render", help="draw a scene (and optionally a configuration) as SVG")
    r.add_argument("--scene", required=True)
    r.add_argument("--config", help="configuration JSON (default: the initial configuration)")
    r.add_argument("--out-svg", required=True)
    return p


# -- helpers ---------------------------------------------------------------------

def load_params(path: str | None) -> SearchParams:
    if path is None:
        return SearchParams()
    doc = load_json(path)
    if not isinstance(doc, dict) or set(doc) - {"relax", "search"}:
        raise SchemaError(f"{path}: expected an object with optional 'relax' and 'search' sections")
    relax_keys = {f.name for f in fields(RelaxParams)}
    search_keys = {f.name for f in fields(SearchParams)} - {"relax"}
    relax_over, search_over = doc.get("relax", {}), doc.get("search", {})
    for section, over, allowed in (("relax", relax_over, relax_keys), ("search", search_over, search_keys)):
        if not isinstance(over, dict):
            raise SchemaError(f"{path}: field /{section}: expected an object")
        bad = sorted(set(over) - allowed)
        if bad:
            raise SchemaError(f"{path}: field /{section}/{bad[0]}: unknown parameter "
                              f"(allowed: {', '.join(sorted(allowed))})")
    try:
        return SearchParams(relax=RelaxParams(**relax_over), **search_over)
    except (TypeError, ValueError) as e:
        raise SchemaError(f"{path}: {e}") from None


def _write_rows(rows, path: str) -> None:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=bench.ROW_FIELDS, lineterminator="\n")
    w.writeheader()
    for row in bench.rows_as_dicts(rows):
        w.writerow(row)
    Path(path).write_text(buf.getvalue())


# -- commands --------------------------------------------------------------------

def solve_command(args) -> int:
    scene = load_scene(args.scene)
    params = load_params(args.params)
    t0 = time.perf_counter()
    res = solve(scene, args.algo, params, SearchBudget(args.timeout, args.seed))
    row = bench.trial_row(scene, args.algo, args.seed, time.perf_counter() - t0, res)
    if args.out_config:
        save_config(res.config, args.out_config)
    if args.out_svg:
        Path(args.out_svg).write_text(render_svg(scene, res.config))
    if args.out_metrics:
        _write_rows([row], args.out_metrics)
    print(f"{'solved' if row.success else 'partial'}: algo={args.algo} seed={args.seed} "
          f"#col={row.col_count} #move={row.move_count} cost_d={row.change_sum:.6g} "
          f"time={row.cpu_seconds:.3f}s")
    return EXIT_SOLVED if row.success else EXIT_PARTIAL


def gen_command(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.benchmark:
        scenes = [bench.gen_benchmark(args.benchmark)]
    else:
        spec = bench.ExperimentSpec(args.variant, args.coverage, trials=1)
        scenes = bench.gen_experiment(spec, np.random.default_rng(args.seed))
    for sc in scenes:
        path = out / f"{sc.meta['name']}.json"
        save_scene(sc, path)
        print(f"{path}  objects={len(sc.objects)} coverage={bench.coverage(sc):.4f}")
    return EXIT_SOLVED


def bench_command(args) -> int:
    params = load_params(args.params)
    algos = tuple(args.algo) if args.algo else CLI_ALGORITHMS
    budget = SearchBudget(args.timeout, args.seed)
    if args.benchmark:
        scenes = [bench.gen_benchmark(args.benchmark)]
        spec = bench.ExperimentSpec("new_objects", (), args.trials, budget, algos)
    else:
        spec = bench.ExperimentSpec(args.variant, args.coverage, args.trials, budget, algos)
        scenes = bench.gen_experiment(spec, np.random.default_rng(args.seed))
    rows = bench.run_harness(scenes, spec, params, jobs=args.jobs)
    _write_rows(rows, args.out_metrics)
    summary = bench.summarize(rows)
    summary_path = args.out_summary or str(Path(args.out_metrics).with_suffix(".summary.json"))
    Path(summary_path).write_text(dumps(summary))
    for s in summary:
        print(f"{s['scene']:>22} {s['algorithm']:>15}  success={s['success_rate']:.2f} "
              f"moved={s['mean_objects_moved']:.2f} cpu={s['mean_cpu_seconds']:.2f}s")
    return EXIT_SOLVED


def render_command(args) -> int:
    scene = load_scene(args.scene)
    config = load_config(args.config) if args.config else None
    Path(args.out_svg).write_text(render_svg(scene, config))
    return EXIT_SOLVED


COMMANDS = {"solve": solve_command, "gen": gen_command, "bench": bench_command, "render": render_command}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_ERROR
    except (SchemaError, InvalidSceneError, InvalidConfigurationError, InfeasibleConstraintError,
            bench.GenerationInfeasibleError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
