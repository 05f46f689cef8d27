import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from clutterplace.geometry import Footprint, Pose
from clutterplace.scene import (
    MOVABLE,
    NEW,
    OBSTACLE,
    Configuration,
    CostC,
    CostR,
    InfeasibleConstraintError,
    InvalidConfigurationError,
    InvalidSceneError,
    ObjectRecord,
    PlacementBalls,
    Region,
    Scene,
    ball_satisfied,
    collisions,
    cost_c,
    cost_d,
    cost_p,
    cost_r,
    count_collisions,
    count_moves,
    is_solution,
    lex_leq,
    lex_less,
    project_to_ball,
    project_to_region,
    random_place_new,
)

BIG = Footprint.rectangle(20.0, 20.0)
UNIT = Footprint.rectangle(1.0, 1.0)


def new_circles(radii):
    recs = tuple(ObjectRecord(f"c{k}", NEW, Footprint.circle(r)) for k, r in enumerate(radii))
    return Scene(BIG, recs, Configuration())


def clutter_scene():
    """Two movables and an obstacle on a large table, plus one new box."""
    recs = (ObjectRecord("a", MOVABLE, Footprint.circle(1.0)),
            ObjectRecord("b", MOVABLE, Footprint.circle(2.0)),
            ObjectRecord("wall", OBSTACLE, Footprint.rectangle(1.0, 4.0)),
            ObjectRecord("box", NEW, UNIT))
    init = {"a": Pose(-5, -5), "b": Pose(5, 5), "wall": Pose(0, 0)}
    return Scene(BIG, recs, Configuration(init))


# -- validation ------------------------------------------------------------------

def test_scene_rejects_bad_initial_configurations():
    c = Footprint.circle(1.0)
    with pytest.raises(InvalidSceneError):
        Scene(BIG, (ObjectRecord("a", MOVABLE, c), ObjectRecord("b", MOVABLE, c)),
              Configuration({"a": Pose(0, 0), "b": Pose(1, 0)}))
    with pytest.raises(InvalidSceneError):
        Scene(BIG, (ObjectRecord("a", MOVABLE, c),), Configuration({"a": Pose(9.5, 0)}))
    with pytest.raises(InvalidSceneError):
        Scene(BIG, (ObjectRecord("a", MOVABLE, c),), Configuration())
    with pytest.raises(InvalidSceneError):
        Scene(BIG, (ObjectRecord("a", NEW, c),), Configuration({"a": Pose()}))
    with pytest.raises(InvalidSceneError):
        Scene(BIG, (ObjectRecord("a", NEW, c), ObjectRecord("a", NEW, c)), Configuration())
    with pytest.raises(InvalidSceneError):
        ObjectRecord("a", "furniture", c)


def test_region_must_hold_initially():
    region = Region(Footprint.rectangle(2, 2), Pose(5, 5))
    with pytest.raises(InvalidSceneError):
        Scene(BIG, (ObjectRecord("a", MOVABLE, UNIT, region),), Configuration({"a": Pose(0, 0)}))


# -- collisions and cost_p -----------------------------------------------------------

def test_initial_configuration_is_collision_free():
    sc = clutter_scene()
    assert count_collisions(sc, sc.initial) == 0
    assert cost_c(sc, sc.initial) == CostC(0, 0.0)


def test_three_mutually_overlapping_circles():
    sc = new_circles([1, 1, 1])
    cfg = {"c0": Pose(0, 0), "c1": Pose(0.5, 0), "c2": Pose(0.25, 0.4)}
    assert count_collisions(sc, cfg) == 3


def test_chain_overlap():
    sc = new_circles([1, 1, 1])
    cfg = {"c0": Pose(0, 0), "c1": Pose(1.5, 0), "c2": Pose(3, 0)}
    assert count_collisions(sc, cfg) == 2


def test_cost_p_sums_pair_depths():
    sc = new_circles([0.75, 0.75, 0.5, 0.5])
    cfg = {"c0": Pose(0, 0), "c1": Pose(1.0, 0), "c2": Pose(5, 5), "c3": Pose(5.75, 5)}
    assert cost_p(sc, cfg) == pytest.approx(0.75, abs=1e-12)
    assert cost_c(sc, cfg) == (2, pytest.approx(0.75))


def test_cost_p_offset_squares():
    recs = (ObjectRecord("a", NEW, UNIT), ObjectRecord("b", NEW, UNIT))
    sc = Scene(BIG, recs, Configuration())
    assert cost_p(sc, {"a": Pose(0, 0), "b": Pose(0.8, 0)}) == pytest.approx(0.2, abs=1e-12)


def test_overhang_counts_as_one_collision():
    sc = new_circles([1])
    rep = collisions(sc, {"c0": Pose(10, 10)})
    assert rep.count == 1 and rep.pairs == ()
    assert rep.overhangs["c0"] == pytest.approx(1.0)


def test_obstacles_collide_with_new_objects():
    sc = clutter_scene()
    cfg = sc.initial.with_poses({"box": Pose(0.5, 0)})
    rep = collisions(sc, cfg)
    assert [(a, b) for a, b, _ in rep.pairs] in ([("wall", "box")], [("box", "wall")])


def test_missing_pose_is_an_error():
    sc = clutter_scene()
    with pytest.raises(InvalidConfigurationError):
        count_collisions(sc, {"a": Pose(-5, -5)})


# -- moves and cost_d ---------------------------------------------------------------

def test_new_objects_alone_cost_nothing():
    sc = clutter_scene()
    cfg = sc.initial.with_poses({"box": Pose(3, -3)})
    assert count_moves(sc, cfg) == 0
    assert cost_d(sc, cfg) == 0.0
    assert cost_r(sc, cfg) == CostR(0, 0, 0.0)


def test_translation_and_rotation_each_count_as_a_move():
    sc = clutter_scene()
    assert count_moves(sc, sc.initial.with_poses({"a": Pose(-5.3, -5)})) == 1
    assert count_moves(sc, sc.initial.with_poses({"a": Pose(-5, -5, math.pi)})) == 1
    both = sc.initial.with_poses({"a": Pose(-5.3, -5), "b": Pose(5, 5, 1.0)})
    assert count_moves(sc, both) == 2


def test_drift_below_epsilon_is_not_a_move():
    sc = clutter_scene()
    cfg = sc.initial.with_poses({"a": Pose(-5 + 1e-7, -5, 1e-7)})
    assert count_moves(sc, cfg) == 0 and cost_d(sc, cfg) == 0.0


def test_cost_d_examples():
    sc = clutter_scene()
    assert cost_d(sc, sc.initial.with_poses({"a": Pose(-2, -1)})) == pytest.approx(5.0)
    # circle "b" has distal radius 2
    assert cost_d(sc, sc.initial.with_poses({"b": Pose(5, 5, math.pi)})) == pytest.approx(2 * math.pi)
    # one unit translation plus a quarter turn of the radius-1 circle
    cfg = sc.initial.with_poses({"b": Pose(6, 5), "a": Pose(-5, -5, math.pi / 2)})
    assert cost_d(sc, cfg) == pytest.approx(1 + math.pi / 2)
    assert cost_r(sc, cfg) == (0, 2, pytest.approx(1 + math.pi / 2))


def test_cost_d_uses_minimal_angle():
    sc = clutter_scene()
    a = cost_d(sc, sc.initial.with_poses({"a": Pose(-5, -5, 0.1)}))
    b = cost_d(sc, sc.initial.with_poses({"a": Pose(-5, -5, 0.1 + 4 * math.pi)}))
    c = cost_d(sc, sc.initial.with_poses({"a": Pose(-5, -5, -0.1)}))
    assert a == pytest.approx(b) == pytest.approx(c) == pytest.approx(0.1)


@given(st.permutations(range(5)), st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1),
                                                     st.floats(-3, 3)), min_size=5, max_size=5))
def test_cost_d_is_permutation_invariant(order, moves):
    recs = [ObjectRecord(f"m{k}", MOVABLE, Footprint.rectangle(0.5 + 0.1 * k, 0.5)) for k in range(5)]
    init = {f"m{k}": Pose(-8 + 4 * k, 0) for k in range(5)}
    cfg = {f"m{k}": Pose(-8 + 4 * k + dx, dy, th) for k, (dx, dy, th) in enumerate(moves)}
    a = cost_d(Scene(BIG, tuple(recs), Configuration(init)), cfg)
    shuffled = tuple(recs[i] for i in order)
    b = cost_d(Scene(BIG, shuffled, Configuration(init)), cfg)
    assert a == pytest.approx(b, abs=1e-12)


@given(st.integers(0, 4), st.floats(0.01, 1.0))
def test_each_extra_moved_object_adds_one_move(k, shift):
    recs = tuple(ObjectRecord(f"m{i}", MOVABLE, Footprint.circle(0.5)) for i in range(5))
    init = Configuration({f"m{i}": Pose(-8 + 4 * i, 0) for i in range(5)})
    sc = Scene(BIG, recs, init)
    cfg = dict(init)
    for i in range(k):
        cfg[f"m{i}"] = Pose(-8 + 4 * i, shift)
    before = count_moves(sc, cfg)
    cfg[f"m{k}"] = Pose(-8 + 4 * k, shift)
    assert count_moves(sc, cfg) == before + 1 == k + 1


# -- lexicographic order ------------------------------------------------------------

def test_lex_less_examples():
    assert lex_less(CostC(19, 1.43), CostC(20, 1.37))
    assert not lex_less(CostC(20, 1.37), CostC(19, 1.43))
    assert not lex_less(CostC(2, 0.5), CostC(2, 0.5))
    assert lex_less(CostR(0, 1, 1.76), CostR(2, 1, 2.82))
    assert lex_less((1, 0.5), (1, 0.5 + 1e-6))
    assert not lex_less((1, 0.5), (1, 0.5 + 1e-10))
    assert lex_leq((1, 0.5), (1, 0.5))


def test_lex_less_rejects_arity_mismatch():
    with pytest.raises(ValueError):
        lex_less((1, 2.0), (1, 2, 3.0))


def test_lex_less_is_a_strict_weak_order_on_random_tuples():
    rng = np.random.default_rng(3)
    # small integer and coarse real ranges force many ties
    tuples = [(int(rng.integers(0, 3)), int(rng.integers(0, 3)), float(rng.integers(0, 4)) / 2)
              for _ in range(10_000)]
    for k in range(0, 10_000 - 2):
        a, b, c = tuples[k], tuples[k + 1], tuples[k + 2]
        assert not lex_less(a, a)
        assert not (lex_less(a, b) and lex_less(b, a))
        if lex_less(a, b) and lex_less(b, c):
            assert lex_less(a, c)
        # incomparability is transitive
        inc_ab = not lex_less(a, b) and not lex_less(b, a)
        inc_bc = not lex_less(b, c) and not lex_less(c, b)
        if inc_ab and inc_bc:
            assert not lex_less(a, c) and not lex_less(c, a)


triples = st.tuples(st.integers(0, 3), st.integers(0, 3), st.floats(0, 2, allow_nan=False))


@given(triples, triples, triples)
def test_lex_less_order_properties(a, b, c):
    assert not lex_less(a, a)
    assert not (lex_less(a, b) and lex_less(b, a))
    if lex_less(a, b) and lex_less(b, c):
        assert lex_less(a, c)


# -- solutions -----------------------------------------------------------------------

def test_is_solution_requires_every_new_object():
    sc = clutter_scene()
    with pytest.raises(InvalidConfigurationError):
        is_solution(sc, sc.initial)


def test_is_solution_rejects_overhang_and_accepts_clean_placement():
    sc = clutter_scene()
    assert not is_solution(sc, sc.initial.with_poses({"box": Pose(9.8, 0)}))
    assert is_solution(sc, sc.initial.with_poses({"box": Pose(3, -3)}))


def test_is_solution_honours_regions():
    region = Region(Footprint.rectangle(2, 2), Pose(5, -5))
    sc = Scene(BIG, (ObjectRecord("box", NEW, UNIT, region),), Configuration())
    assert is_solution(sc, {"box": Pose(5, -5)})
    assert not is_solution(sc, {"box": Pose(0, 0)})
    assert project_to_region(sc, "box", Pose(0, -5, 1.0)) == Pose(4, -5, 1.0)


# -- random placement ----------------------------------------------------------------

def test_random_place_new_without_new_objects_is_initial():
    recs = (ObjectRecord("a", MOVABLE, UNIT),)
    sc = Scene(BIG, recs, Configuration({"a": Pose(1, 2)}))
    assert random_place_new(sc, np.random.default_rng(0)) == sc.initial


def test_random_place_new_is_deterministic():
    sc = clutter_scene()
    a = random_place_new(sc, np.random.default_rng(42))
    b = random_place_new(sc, np.random.default_rng(42))
    assert a == b and set(a) == {"a", "b", "wall", "box"}
    assert a["wall"] is sc.initial["wall"]


def test_random_place_new_is_uniform():
    surface = Footprint.rectangle(1.0, 1.0)
    sc = Scene(surface, (ObjectRecord("dot", NEW, Footprint.circle(1e-3)),), Configuration())
    rng = np.random.default_rng(7)
    pts = np.array([[p.x, p.y] for p in (random_place_new(sc, rng)["dot"] for _ in range(1000))])
    counts, _, _ = np.histogram2d(pts[:, 0], pts[:, 1], bins=5, range=[[-0.5, 0.5], [-0.5, 0.5]])
    assert stats.chisquare(counts.ravel()).pvalue > 0.01
    thetas = [random_place_new(sc, rng)["dot"].theta for _ in range(1000)]
    hist, _ = np.histogram(thetas, bins=8, range=(-math.pi, math.pi))
    assert stats.chisquare(hist).pvalue > 0.01


def test_random_place_new_respects_region_and_rejects_empty_region():
    region = Region(Footprint.rectangle(1, 1), Pose(5, 5))
    sc = Scene(BIG, (ObjectRecord("box", NEW, UNIT, region),), Configuration())
    rng = np.random.default_rng(1)
    for _ in range(50):
        p = random_place_new(sc, rng)["box"]
        assert 4.5 <= p.x <= 5.5 and 4.5 <= p.y <= 5.5
    # a thin diagonal sliver: almost no interior inside its bounding box
    sliver = Region(Footprint.polygon(((0, 0), (1, 1), (1, 1 - 1e-6))), Pose(5, 5))
    sc = Scene(BIG, (ObjectRecord("box", NEW, UNIT, sliver),), Configuration())
    with pytest.raises(InfeasibleConstraintError):
        random_place_new(sc, rng)


# -- placement balls -----------------------------------------------------------------

def test_zero_radius_projects_back_to_initial_pose():
    sc = clutter_scene()
    balls = PlacementBalls.uniform(sc, 0.0)
    assert project_to_ball(sc, balls, "a", Pose(3, 3, 2.0)) == sc.initial["a"]


def test_full_radius_admits_every_surface_pose():
    sc = clutter_scene()
    balls = PlacementBalls.uniform(sc, 1.0)
    rng = np.random.default_rng(0)
    for _ in range(200):
        x, y = rng.uniform(-10, 10, size=2)
        p = Pose(x, y, 0.3)
        assert project_to_ball(sc, balls, "a", p) == p
        assert ball_satisfied(sc, balls, sc.initial.with_poses({"a": p, "b": p}))


def test_half_radius_clamps_along_the_displacement_ray():
    sc = clutter_scene()
    balls = PlacementBalls({"a": 0.5, "b": 1.0})
    max_d = sc.max_d["a"]
    assert max_d == pytest.approx(math.hypot(15, 15))
    u = np.array([0.6, 0.8])
    p = project_to_ball(sc, balls, "a", Pose(-5 + 0.9 * max_d * u[0], -5 + 0.9 * max_d * u[1], 1.0))
    assert (p.x, p.y) == pytest.approx((-5 + 0.5 * max_d * u[0], -5 + 0.5 * max_d * u[1]))
    assert p.theta == 1.0
    assert ball_satisfied(sc, balls, sc.initial.with_poses({"a": p}))
    far = Pose(-5 + 0.6 * max_d * u[0], -5 + 0.6 * max_d * u[1])
    assert not ball_satisfied(sc, balls, sc.initial.with_poses({"a": far}))


def test_balls_clamp_and_reject_non_movables():
    sc = clutter_scene()
    balls = PlacementBalls({"a": 1.7, "b": -0.2})
    assert balls["a"] == 1.0 and balls["b"] == 0.0
    with pytest.raises(KeyError):
        project_to_ball(sc, balls, "wall", Pose())
    with pytest.raises(KeyError):
        project_to_ball(sc, balls, "ghost", Pose())


def test_obstacle_poses_round_trip_bit_exact():
    sc = clutter_scene()
    poses, active = sc.to_array(sc.initial)
    poses[sc.index["wall"]] += 0.5   # arrays may drift; the obstacle pose may not
    back = sc.from_array(poses, active)
    assert back["wall"] is sc.initial["wall"]
