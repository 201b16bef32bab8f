import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from guided_support import diagnostics as dg
from guided_support.geometry import Ball
from guided_support.posterior import MixtureModel
from guided_support.samplers import Trajectory
from guided_support.scenarios import preset
from guided_support.schedule import build_time_grid, lam, sigma

T = 5.0


def make_traj(times, x, target):
    x = np.asarray(x, dtype=float)
    z = x / lam(T - np.asarray(times))[:, None]
    return Trajectory(np.asarray(times), x, z, target.distance(z), target.distance(x), seed=0, T=T)


# ----------------------------------------------------------------- distance_series


def test_constant_at_center_is_zero():
    b = Ball((1.0, 2.0), 0.5)
    times = np.linspace(0, 4.9, 30)
    c = np.tile(b.c, (times.size, 1))
    tr = Trajectory(times, c, c, b.distance(c), b.distance(c), 0, T=T)
    assert all(dx == 0 and dz == 0 for _, dx, dz in dg.distance_series(tr, b))


def test_radial_motion_decreases_linearly():
    b = Ball((0.0, 0.0), 1.0)
    times = np.linspace(0, 1, 11)
    x = np.outer(4 - 2 * times, [0.6, 0.8])
    dx = np.array([r[1] for r in dg.distance_series(make_traj(times, x, b), b)])
    assert np.allclose(np.diff(dx), -0.2, atol=1e-12)


@given(st.floats(-50, 50), st.floats(-50, 50))
def test_distance_series_translation_invariant(vx, vy):
    v = np.array([vx, vy])
    b = Ball((0.3, -0.2), 0.9)
    times = np.linspace(0, 4.9, 12)
    x = np.column_stack([np.linspace(3, 0, 12), np.linspace(-2, 0.5, 12)])
    z = x / lam(T - times)[:, None]
    t1 = Trajectory(times, x, z, b.distance(z), b.distance(x), 0, T=T)
    t2 = Trajectory(times, x + v, z + v, b.distance(z), b.distance(x), 0, T=T)
    a = np.array(dg.distance_series(t1, b))
    c = np.array(dg.distance_series(t2, b.translated(v)))
    assert np.max(np.abs(a - c)) <= 1e-10


# ----------------------------------------------------------------- contraction


def _grid_times():
    return build_time_grid(T, 1e-3, 0.1).nodes


def test_contraction_exponential_decay_passes():
    times = _grid_times()
    rate = np.diff(times) / (2 * sigma(T - times[:-1]) ** 2)
    d = 3.0 * np.exp(-np.concatenate([[0.0], np.cumsum(rate)]))
    rep = dg.contraction_check_series(times, d, T, epsilon=1e-6, tau=0.0)
    assert not rep.empty
    assert rep.pass_fraction == 1.0


def test_contraction_constant_fails():
    times = _grid_times()
    rep = dg.contraction_check_series(times, np.full(times.size, 0.5), T, tau=0.0)
    assert rep.pass_fraction == 0.0


def test_contraction_geometric_factor_property():
    times = _grid_times()
    delta = np.diff(times)
    factor = np.exp(-delta / (4 * sigma(T - times[:-1]) ** 2) * 0.5)
    d = 2.0 * np.concatenate([[1.0], np.cumprod(factor * 0.999)])
    rep = dg.contraction_check_series(times, d, T, epsilon=1e-3, tau=3.0)
    assert rep.pass_fraction == 1.0


def test_contraction_empty():
    times = _grid_times()
    rep = dg.contraction_check_series(times, np.zeros(times.size), T)
    assert rep.empty and math.isnan(rep.pass_fraction)


def test_contraction_only_qualifying_steps():
    times = _grid_times()
    d = np.full(times.size, 0.5)
    rep = dg.contraction_check_series(times, d, T, epsilon=0.1, tau=4.0)
    assert all(s.t >= 4.0 and s.dist >= 0.1 for s in rep.steps)
    assert rep.onset == 4.0


def test_contraction_on_trajectory_objects():
    b = Ball((0.0, 0.0), 1.0)
    times = _grid_times()
    x = np.outer(lam(T - times), [1.5, 0.0])
    rep = dg.contraction_check([make_traj(times, x, b)] * 2, b, epsilon=0.1, tau=4.0)
    single = dg.contraction_check(make_traj(times, x, b), b, epsilon=0.1, tau=4.0)
    assert len(rep.steps) == 2 * len(single.steps)
    assert rep.pass_fraction == 0.0


# ----------------------------------------------------------------- tilted-mean gap


def test_cm_gap_axis_parallel():
    pts = dg.cm_gap_curve(Ball((0, 0), 1), (3.0, 0.0), [0.2, 0.1, 0.05])
    for p in pts:
        assert abs(p.gap_vector[1]) <= 1e-8
        assert p.ratio == pytest.approx(p.gap / (p.sigma * math.log(1 / p.sigma)))


def test_cm_gap_ratio_finite():
    pts = dg.cm_gap_curve(Ball((0, 0), 1), (3.0, 0.0), [0.4, 0.2, 0.1, 0.05, 0.02, 0.01])
    assert all(np.isfinite(p.ratio) and not p.failed for p in pts)


@pytest.mark.parametrize("bad", [[0.5], [1e6], [0.0], [-0.1]])
def test_cm_gap_bandwidth_precondition(bad):
    with pytest.raises(ValueError):
        dg.cm_gap_curve(Ball((0, 0), 1), (3.0, 0.0), bad)


def test_cm_gap_needs_exterior_point():
    with pytest.raises(ValueError):
        dg.cm_gap_curve(Ball((0, 0), 1), (0.5, 0.0), [0.1])


# ----------------------------------------------------------------- off-support tail


def test_tail_monotone_two_ball(two_ball):
    sig = np.linspace(0.6, 0.05, 12)
    curve = dg.offsupport_tail_curve(two_ball, two_ball.target_support.c, dg.times_for_sigmas(sig))
    assert np.all(np.diff(curve.log_tails) < 0)
    assert np.allclose(curve.sigmas, sig, rtol=1e-12)


def test_tail_single_component(one_ball):
    curve = dg.offsupport_tail_curve(one_ball, (0.0, 0.0), [1.0, 2.0])
    assert np.all(curve.tails == 0)


def test_tail_hypothesis_enforced():
    model = preset("convex3").model
    d0 = model.separation().d0
    far = np.array([0.2, 3.0 + 1.2 + d0 / 3 + 0.05])
    with pytest.raises(ValueError):
        dg.offsupport_tail_curve(model, far, [1.0])
    dg.offsupport_tail_curve(model, far, [1.0], check_hypothesis=False)


def test_tail_slope_on_convex3():
    model = preset("convex3").model
    d0 = model.separation().d0
    curve = dg.offsupport_tail_curve(model, model.target_support.c, dg.times_for_sigmas(np.linspace(0.05, 0.5, 10)))
    assert curve.slope <= -0.9 * d0**2 / 24


def test_fit_log_slope_exact_line_and_underflow():
    s = np.array([0.1, 0.2, 0.3, 0.4])
    y = -2.0 / s**2 + 1.5
    y2 = y.copy()
    y2[0] = -np.inf
    assert dg.fit_log_slope(s, y) == pytest.approx((-2.0, 1.5))
    assert dg.fit_log_slope(s, y2) == pytest.approx((-2.0, 1.5))
    assert all(math.isnan(v) for v in dg.fit_log_slope(s[:1], y[:1]))


def test_times_for_sigmas_roundtrip():
    from guided_support.schedule import sigma_tilde

    s = np.array([0.01, 0.3, 2.0])
    assert np.allclose([sigma_tilde(t) for t in dg.times_for_sigmas(s)], s, rtol=1e-12)


# ----------------------------------------------------------------- FD check and fractions


def test_score_fd_check_gaussian_limit(two_ball):
    rep = dg.score_fd_check(two_ball, [((0.3, -0.7), 20.0)], h=1e-4)
    assert rep.max_error <= 1e-6


@pytest.mark.parametrize("h", [1e-7, 1e-2])
def test_score_fd_check_h_precondition(two_ball, h):
    with pytest.raises(ValueError):
        dg.score_fd_check(two_ball, [((0, 0), 1.0)], h=h)


def test_fraction_within_counts_nan_as_miss():
    b = Ball((0, 0), 1)
    times = np.array([0.0, 1.0])
    trs = [
        make_traj(times, [[3, 0], [1.0, 0]], b),
        make_traj(times, [[3, 0], [1.2, 0]], b),
        make_traj(times, [[3, 0], [np.nan, np.nan]], b),
    ]
    assert dg.fraction_within(trs, 0.1) == pytest.approx(1 / 3)
    assert dg.fraction_within(trs, 0.5) == pytest.approx(2 / 3)
