import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import qmc

from guided_support.geometry import (
    Ball,
    ConvexPolygon,
    DegenerateSetError,
    Difference,
    Union,
    cap_volume_ratio,
    chord_area,
    distance_laplacian_ball,
    lens_area,
    sample_uniform,
    set_separation,
    shape_from_dict,
)
from guided_support.scenarios import PRESET_NAMES, preset

UNIT_SQUARE = ConvexPolygon(((0, 0), (1, 0), (1, 1), (0, 1)))
CRESCENT = Difference(Ball((0.2, 2.8), 1.2), Ball((0.8, 3.1), 0.85))

coord = st.floats(-6, 6, allow_nan=False)
point = st.tuples(coord, coord)


def all_preset_shapes():
    return [s for n in PRESET_NAMES for s in preset(n).model.supports]


# ----------------------------------------------------------------- membership / distance / projection


def test_contains_examples():
    b = Ball((0, 0), 1)
    assert b.contains((0.5, 0)) and b.contains((1, 0))
    assert not Difference(Ball((0, 0), 1), Ball((0.8, 0), 0.6)).contains((0.9, 0))


def test_distance_examples():
    assert Ball((0, 0), 1).distance((3, 0)) == pytest.approx(2.0)
    assert UNIT_SQUARE.distance((2, 2)) == pytest.approx(math.sqrt(2))


def test_difference_distance_against_point_cloud():
    s = Difference(Ball((0, 0), 1), Ball((0.9, 0), 0.5))
    p = np.array([0.9, 0.0])
    cloud = sample_uniform(s, np.random.default_rng(0), 10**6)
    brute = np.min(np.hypot(*(cloud - p).T))
    # the query sits at the cut's center, so the nearest members are on the cut circle at 0.5
    assert s.distance(p) == pytest.approx(0.5, abs=1e-12)
    assert abs(s.distance(p) - brute) <= 1e-3


def test_projection_examples():
    assert np.allclose(Ball((0, 0), 1).project((2, 0)), (1, 0))
    assert np.allclose(UNIT_SQUARE.project((2, 0.5)), (1, 0.5))
    u = Union((Ball((-2, 0), 1), Ball((2, 0), 1)))
    assert np.array_equal(u.project((0, 0)), np.array([-1.0, 0.0]))


def test_bounding_boxes():
    assert Ball((1, 2), 0.5).bounding_box().as_tuple() == (0.5, 1.5, 1.5, 2.5)
    assert UNIT_SQUARE.bounding_box().as_tuple() == (0, 1, 0, 1)
    u = Union((Ball((-1, 0), 1), Ball((3, 0), 1)))
    assert u.bounding_box().as_tuple() == (-2, 4, -1, 1)


@pytest.mark.parametrize("shape", all_preset_shapes(), ids=lambda s: s.kind)
@given(p=point)
def test_projection_properties(shape, p):
    q = shape.project(p)
    d = shape.distance(p)
    assert shape.contains(q)
    assert np.allclose(shape.project(q), q, atol=1e-12)
    assert abs(np.hypot(*(np.asarray(p) - q)) - d) <= 1e-12
    assert (d == 0) == bool(shape.contains(p))


@pytest.mark.parametrize("shape", all_preset_shapes(), ids=lambda s: s.kind)
def test_distance_matches_point_cloud(shape):
    rng = np.random.default_rng(1)
    cloud = sample_uniform(shape, rng, 200_000)
    for p in rng.uniform(-5, 5, (20, 2)):
        brute = np.min(np.hypot(*(cloud - p).T))
        assert shape.distance(p) <= brute + 1e-12
        assert brute - shape.distance(p) <= 2e-2


@given(p=point)
def test_convex_projection_obtuse_angle(p):
    # for convex sets, (p - Proj p) . (y - Proj p) <= 0 for members y
    b = Ball((0.3, -0.2), 1.1)
    q = b.project(p)
    for y in b.boundary_points(64):
        assert np.dot(np.asarray(p) - q, y - q) <= 1e-9


@given(p=point, v=point)
def test_translation_equivariance(p, v):
    for s in (CRESCENT, Union((Ball((2.2, -0.8), 0.8), Ball((3.0, 0.3), 0.7)))):
        t = s.translated(v)
        assert t.distance(np.add(p, v)) == pytest.approx(s.distance(p), abs=1e-9)


def test_polygon_validation():
    with pytest.raises(ValueError):
        ConvexPolygon(((0, 0), (1, 1), (2, 2)))
    with pytest.raises(ValueError):
        ConvexPolygon(((0, 0), (2, 0), (0.5, 0.5), (0, 2)))  # reflex vertex


def test_ball_validation():
    with pytest.raises(ValueError):
        Ball((0, 0), 0.0)


# ----------------------------------------------------------------- areas and sampling


@pytest.mark.parametrize(
    "shape, area",
    [
        (Ball((0, 0), 1.3), math.pi * 1.69),
        (UNIT_SQUARE, 1.0),
        (Difference(Ball((0, 0), 1), Ball((0.8, 0), 0.6)), math.pi - lens_area(1, 0.6, 0.8)),
        (Union((Ball((0, 0), 1), Ball((1, 0), 1))), 2 * math.pi - lens_area(1, 1, 1)),
    ],
)
def test_chord_area(shape, area):
    assert chord_area(shape) == pytest.approx(area, rel=1e-9)


def test_sample_uniform_ball_mean():
    x = sample_uniform(Ball((0, 0), 1), np.random.default_rng(2), 10**5)
    assert np.all(np.abs(x.mean(axis=0)) <= 0.02)


def test_sample_uniform_square_variance():
    x = sample_uniform(UNIT_SQUARE, np.random.default_rng(3), 10**5)
    assert np.allclose(x.var(axis=0), 1 / 12, rtol=0.05)


def test_sample_uniform_crescent_membership():
    x = sample_uniform(CRESCENT, np.random.default_rng(4), 10**4)
    assert np.all(CRESCENT.contains(x))


def test_sample_uniform_degenerate():
    sliver = Difference(Ball((0, 0), 1.0), Ball((0, 0), 1.0 - 1e-13))
    with pytest.raises(DegenerateSetError):
        sample_uniform(sliver, np.random.default_rng(0), 10)


def test_shape_dict_round_trip():
    for s in all_preset_shapes():
        assert shape_from_dict(s.to_dict()) == s


@pytest.mark.parametrize(
    "d",
    [{"kind": "blob"}, {"kind": "ball", "center": [0, 0]}, {"kind": "ball", "center": [0, 0], "radius": 1, "x": 1}],
)
def test_shape_dict_rejections(d):
    with pytest.raises(ValueError):
        shape_from_dict(d)


# ----------------------------------------------------------------- cap ratio and distance Laplacian


def test_cap_ratio_full_radius():
    v = cap_volume_ratio(Ball((0, 0), 1), (1, 0), 1.0)
    assert v == pytest.approx(2 * math.pi / 3 - math.sqrt(3) / 2, rel=1e-12)
    assert v == pytest.approx(1.2284, abs=1e-4)


def _qmc_cap_ratio(x, r, m=20, seed=0):
    # scrambled Sobol points over the square around B(x, r), counted in both discs
    u = qmc.Sobol(2, scramble=True, seed=seed).random_base2(m)
    p = np.asarray(x) + r * (2 * u - 1)
    inside = (np.hypot(*p.T) <= 1) & (np.hypot(*(p - x).T) <= r)
    return 4 * inside.mean()


@pytest.mark.parametrize("r", [1.0, 0.5, 0.1])
def test_cap_ratio_matches_qmc(r):
    x = np.array([math.cos(0.7), math.sin(0.7)])
    assert abs(cap_volume_ratio(Ball((0, 0), 1), x, r) - _qmc_cap_ratio(x, r)) <= 1e-3


def test_cap_ratio_limits():
    b = Ball((0, 0), 1)
    assert cap_volume_ratio(b, (0, 1), 1e-6) == pytest.approx(math.pi / 2, rel=1e-5)
    # curvature trims the half-disc, so the ratio falls below pi/2 as r grows
    v = [cap_volume_ratio(b, (0, -1), r) for r in (0.01, 0.1, 0.5, 1.0)]
    assert all(0.5 <= a < math.pi / 2 for a in v)
    assert all(q < p for p, q in zip(v, v[1:]))


def test_cap_ratio_preconditions():
    b = Ball((0, 0), 1)
    with pytest.raises(ValueError):
        cap_volume_ratio(b, (0.5, 0), 0.1)
    with pytest.raises(ValueError):
        cap_volume_ratio(b, (1, 0), 2.0)


def test_distance_laplacian_examples():
    assert distance_laplacian_ball(Ball((0, 0), 1), (2, 0)) == pytest.approx(0.5)
    assert distance_laplacian_ball(Ball((0, 0), 1), (1 + 1e-12, 0)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        distance_laplacian_ball(Ball((0, 0), 1), (0.2, 0))


@pytest.mark.parametrize("p", [(4.0, 0.0), (-2.5, 3.1), (0.0, -6.0)])
def test_distance_laplacian_stencil(p):
    b = Ball((0, 0), 2)
    h = 1e-3
    p = np.array(p)
    e = np.eye(2) * h
    lap = sum(b.distance(p + d) + b.distance(p - d) for d in e) - 4 * b.distance(p)
    assert distance_laplacian_ball(b, p) == pytest.approx(lap / h**2, abs=1e-4)


# ----------------------------------------------------------------- separation


def test_convex3_gaps():
    sep = preset("convex3").model.separation()
    # exact center-distance arithmetic for each ball pair
    assert sep.pair_gaps[(0, 2)] == pytest.approx(math.sqrt(17) - 2.2, abs=1e-12)
    assert sep.pair_gaps[(0, 1)] == pytest.approx(math.sqrt(9.14) - 1.9, abs=1e-12)
    assert sep.d0 == pytest.approx(math.sqrt(9.14) - 1.9, abs=1e-12)
    assert sep.d0 < math.sqrt(17) - 2.2


def test_separation_of_nonballs_positive():
    for name in ("nonconvex3", "density5"):
        sep = preset(name).model.separation()
        assert sep.d0 > 0
        assert sep.D0 > sep.d0 and sep.R0 > 0


def test_overlap_gap_zero():
    sep = set_separation([Ball((0, 0), 1), ConvexPolygon(((0.5, 0), (3, 0), (3, 1)))])
    assert sep.d0 == 0.0
