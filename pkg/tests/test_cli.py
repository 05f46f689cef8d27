import csv
import json
import math
import subprocess
import sys

import pytest

from clutterplace.bench import gen_benchmark
from clutterplace.cli import EXIT_ERROR, EXIT_PARTIAL, EXIT_SOLVED, main
from clutterplace.geometry import Footprint, Pose
from clutterplace.render import render_svg
from clutterplace.scene import NEW, Configuration, ObjectRecord, Scene, is_solution
from clutterplace.scenefile import load_config, load_scene, save_config, save_scene

SQUARE = Footprint.rectangle(1.0, 1.0)


def write_scene(tmp_path, new_shape, name="scene.json"):
    sc = Scene(SQUARE, (ObjectRecord("n", NEW, new_shape),), Configuration(), {"name": "one"})
    path = tmp_path / name
    save_scene(sc, path)
    return sc, str(path)


def read_rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_solve_trivial_scene(tmp_path, capsys):
    sc, scene = write_scene(tmp_path, Footprint.circle(0.1))
    out = tmp_path / "cfg.json"
    code = main(["solve", "--scene", scene, "--algo", "outer", "--out-config", str(out),
                 "--out-metrics", str(tmp_path / "m.csv"), "--out-svg", str(tmp_path / "s.svg")])
    assert code == EXIT_SOLVED
    assert is_solution(sc, load_config(out))
    (row,) = read_rows(tmp_path / "m.csv")
    assert row["success"] == "True" and row["algorithm"] == "outer"
    assert "solved" in capsys.readouterr().out
    assert (tmp_path / "s.svg").read_text().startswith("<?xml")


def test_solve_oversized_object_is_partial(tmp_path):
    _, scene = write_scene(tmp_path, Footprint.rectangle(1.5, 1.5))
    code = main(["solve", "--scene", scene, "--algo", "intermediate", "--timeout", "1",
                 "--out-metrics", str(tmp_path / "m.csv")])
    assert code == EXIT_PARTIAL
    (row,) = read_rows(tmp_path / "m.csv")
    assert row["success"] == "False" and int(row["col_count"]) >= 1


def test_solve_is_byte_identical_per_seed(tmp_path):
    scene = tmp_path / "confined.json"
    save_scene(gen_benchmark("confined"), scene)
    outs = []
    for k in range(2):
        out = tmp_path / f"cfg{k}.json"
        main(["solve", "--scene", str(scene), "--algo", "intermediate", "--seed", "3",
              "--out-config", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_solve_with_params_file(tmp_path):
    _, scene = write_scene(tmp_path, Footprint.circle(0.1))
    params = tmp_path / "p.json"
    params.write_text(json.dumps({"relax": {"max_iters": 50}, "search": {"radius_step": 0.25}}))
    assert main(["solve", "--scene", scene, "--params", str(params)]) == EXIT_SOLVED
    params.write_text(json.dumps({"relax": {"stifness": 2}}))
    assert main(["solve", "--scene", scene, "--params", str(params)]) == EXIT_ERROR
    params.write_text(json.dumps({"relax": {"damping": 2}}))
    assert main(["solve", "--scene", scene, "--params", str(params)]) == EXIT_ERROR


def test_malformed_scene_reports_the_field(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"surface": {"circle": {"radius": -1}}, "objects": []}))
    assert main(["solve", "--scene", str(path)]) == EXIT_ERROR
    assert "field /surface" in capsys.readouterr().err
    assert main(["solve", "--scene", str(tmp_path / "missing.json")]) == EXIT_ERROR


def test_usage_errors(capsys):
    assert main(["gen", "--benchmark", "kitchen"]) == EXIT_ERROR
    err = capsys.readouterr().err
    assert "usage:" in err and "kitchen" in err
    assert main(["solve"]) == EXIT_ERROR
    assert main(["solve", "--scene", "x.json", "--algo", "annealing"]) == EXIT_ERROR
    assert main(["solve", "--scene", "x.json", "--timeout", "0"]) == EXIT_ERROR
    assert main([]) == EXIT_ERROR


def test_gen_lshape_benchmark(tmp_path):
    assert main(["gen", "--benchmark", "lshape2d", "--out-dir", str(tmp_path)]) == EXIT_SOLVED
    sc = load_scene(tmp_path / "lshape2d.json")
    assert sum(o.footprint.area for o in sc.objects) == pytest.approx(sc.surface.area, abs=1e-9)
    assert sc == gen_benchmark("lshape2d")


def test_gen_variant_is_deterministic(tmp_path):
    for d in ("a", "b"):
        assert main(["gen", "--variant", "obstacles", "--coverage", "0.3,0.6", "--seed", "4",
                     "--out-dir", str(tmp_path / d)]) == EXIT_SOLVED
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == ["obstacles_0.30.json", "obstacles_0.60.json"]
    for n in names:
        assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()


def test_bench_writes_rows_and_summary(tmp_path):
    metrics = tmp_path / "metrics.csv"
    code = main(["bench", "--variant", "new_objects", "--coverage", "0.3", "--trials", "5",
                 "--algo", "inner", "--algo", "random-sample", "--timeout", "2",
                 "--out-metrics", str(metrics)])
    assert code == EXIT_SOLVED
    rows = read_rows(metrics)
    assert len(rows) == 10
    assert {r["algorithm"] for r in rows} == {"inner", "random_sample"}
    assert [r["seed"] for r in rows[:5]] == ["0", "1", "2", "3", "4"]
    summary = json.loads((tmp_path / "metrics.summary.json").read_text())
    assert {s["algorithm"]: s["trials"] for s in summary} == {"inner": 5, "random_sample": 5}


# -- rendering -------------------------------------------------------------------

def test_empty_scene_svg_has_only_the_surface():
    sc = Scene(SQUARE, (), Configuration())
    svg = render_svg(sc)
    assert svg.count("<polygon") == 1 and "<circle" not in svg
    assert 'viewBox="-0.55 -0.55 1.1 1.1"' in svg
    assert "#7fbf7f" in svg


def test_svg_is_deterministic_and_colour_coded():
    sc = gen_benchmark("confined")
    a, b = render_svg(sc), render_svg(sc)
    assert a == b
    for colour in ("#7fbf7f", "#e8c930", "#d64545"):
        assert colour in a
    assert "collision-pair" not in a


def test_single_collision_is_highlighted_once():
    recs = (ObjectRecord("a", NEW, Footprint.circle(0.2)), ObjectRecord("b", NEW, Footprint.circle(0.2)))
    sc = Scene(SQUARE, recs, Configuration())
    svg = render_svg(sc, {"a": Pose(0, 0), "b": Pose(0.3, 0)})
    assert svg.count('class="collision-pair"') == 1
    assert 'data-pair="a b"' in svg
    assert svg.count('class="collision-outline"') == 2
    assert "#3f6fd6" in svg


def test_render_command(tmp_path):
    scene = tmp_path / "tight.json"
    save_scene(gen_benchmark("tight"), scene)
    cfg = tmp_path / "cfg.json"
    save_config({**gen_benchmark("tight").initial, "n00": Pose(0.5, 0, math.pi / 4)}, cfg)
    out = tmp_path / "t.svg"
    assert main(["render", "--scene", str(scene), "--config", str(cfg), "--out-svg", str(out)]) == EXIT_SOLVED
    assert 'class="collision-pair"' in out.read_text()


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "clutterplace.cli", "gen", "--benchmark", "tight",
                           "--out-dir", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "tight.json").exists()
