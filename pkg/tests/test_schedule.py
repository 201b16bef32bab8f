import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from guided_support.schedule import (
    NoiseSchedule,
    TimeGrid,
    build_time_grid,
    lam,
    sigma,
    sigma_tilde,
    validate_grid,
)


def test_lambda_examples():
    assert lam(0.0) == 1.0
    assert lam(math.log(2)) == pytest.approx(0.5, abs=1e-16)
    assert lam(5.0) == pytest.approx(6.7379e-3, rel=1e-4)


def test_sigma_examples():
    assert sigma(0.0) == 0.0
    assert sigma(math.log(2)) == pytest.approx(math.sqrt(0.75), rel=1e-15)
    assert abs(sigma(50.0) - 1.0) <= 1e-15


def test_sigma_tilde_examples(goldens):
    assert sigma_tilde(math.log(2)) == pytest.approx(math.sqrt(3), rel=1e-15)
    # reference from 50-digit arithmetic, frozen in goldens.json
    assert sigma_tilde(1e-3) == pytest.approx(goldens["sigma_tilde_0.001"], rel=1e-15)


@pytest.mark.parametrize("t", [1e-4, 1e-8, 1e-12])
def test_sigma_tilde_small_t(t):
    assert sigma_tilde(t) / math.sqrt(2 * t) == pytest.approx(1.0, abs=2 * t)


def test_small_t_sigma_keeps_precision():
    t = 1e-12
    # naive sqrt(1 - exp(-2t)) loses ~4 digits here
    assert sigma(t) == pytest.approx(math.sqrt(2 * t), rel=1e-11)


@pytest.mark.parametrize("f", [lam, sigma])
def test_negative_time_rejected(f):
    with pytest.raises(ValueError):
        f(-0.1)


@pytest.mark.parametrize("t", [0.0, -1.0])
def test_sigma_tilde_needs_positive_time(t):
    with pytest.raises(ValueError):
        sigma_tilde(t)


def test_identity_on_logspace():
    t = np.logspace(-6, math.log10(50), 1000)
    assert np.max(np.abs(lam(t) ** 2 + sigma(t) ** 2 - 1)) <= 1e-14


@given(st.floats(1e-9, 60.0))
def test_identity_hypothesis(t):
    assert abs(lam(t) ** 2 + sigma(t) ** 2 - 1) <= 1e-14
    assert sigma_tilde(t) == pytest.approx(sigma(t) / lam(t), rel=1e-12)


def test_noise_schedule_defaults():
    s = NoiseSchedule()
    assert (s.horizon_T, s.early_stop_delta) == (5.0, 1e-3)
    with pytest.raises(ValueError):
        NoiseSchedule(1.0, 2.0)


def test_geometric_grid_structure():
    g = build_time_grid(5.0, 1e-3, 0.1, "paper-geometric")
    steps = g.steps
    # M = floor(4 / 0.1) + 1 = 41 nodes in the uniform phase (nodes 0..40)
    assert np.allclose(steps[:40], 0.1, atol=1e-12)
    assert g.nodes[40] == pytest.approx(4.0, abs=1e-12)
    gaps = 5.0 - g.nodes[40:-1]
    # T - t shrinks by 1/(1 + kappa) per step after the uniform phase
    assert np.allclose(gaps[1:] / gaps[:-1], 1 / 1.1, rtol=1e-12)
    assert np.all(np.diff(g.nodes) > 0)
    assert g.nodes[-1] == 5.0 - 1e-3
    assert g.nodes[-2] <= 5.0 - 1e-3


def test_geometric_grid_compliant():
    rep = validate_grid(build_time_grid(5.0, 1e-3, 0.1, "paper-geometric"))
    assert rep.compliant
    assert rep.worst_ratio <= 0.1 + 1e-12


def test_uniform_log_example():
    g = build_time_grid(1.0, 0.5, 0.5, "uniform-log", n_steps=2)
    assert np.allclose(g.nodes, [0.0, 1 - math.sqrt(0.5), 0.5], atol=1e-15)


def test_literal_rule_overshoots():
    # the literal rule's first geometric step is kappa/(1+kappa), larger than kappa * (T - t_{k+1})
    rep = validate_grid(build_time_grid(5.0, 1e-3, 0.1, "paper-literal"))
    assert not rep.compliant
    assert rep.worst_ratio > 0.1


@pytest.mark.parametrize("rule", ["paper-geometric", "uniform-log"])
@pytest.mark.parametrize("kappa", [0.5, 0.3, 0.1, 0.05, 0.025])
def test_grids_compliant(rule, kappa):
    g = build_time_grid(5.0, 1e-3, kappa, rule)
    assert validate_grid(g).compliant
    assert g.nodes[0] == 0.0 and g.nodes[-1] == 5.0 - 1e-3


def test_validate_uniform_grid_example():
    g = TimeGrid(np.round(np.arange(41) * 0.1, 12), 5.0, 0.1)
    assert validate_grid(g).compliant


def test_validate_single_step_violation():
    T = 1.0
    t1 = 0.9 * T / 1.9  # Delta_0 = t1 = 0.9 (T - t1), with kappa = 0.5
    g = TimeGrid(np.array([0.0, t1]), T, 0.5)
    rep = validate_grid(g)
    assert rep.violations == [0]
    assert rep.worst_ratio == pytest.approx(0.9)


@pytest.mark.parametrize(
    "args",
    [(5.0, 0.0, 0.1), (5.0, 6.0, 0.1), (5.0, 1e-3, 0.0), (5.0, 1e-3, 1.0)],
)
def test_build_rejects_bad_arguments(args):
    with pytest.raises(ValueError):
        build_time_grid(*args)


def test_build_rejects_unknown_rule():
    with pytest.raises(ValueError, match="unknown grid rule"):
        build_time_grid(5.0, 1e-3, 0.1, "cosine")


@pytest.mark.parametrize("nodes", [[0.1, 0.2], [0.0, 0.2, 0.2], [0.0, 5.0]])
def test_time_grid_rejects_malformed(nodes):
    with pytest.raises(ValueError):
        TimeGrid(np.array(nodes), 5.0, 0.1)


def test_time_grid_equality_and_hash():
    a = build_time_grid(5.0, 1e-3, 0.1)
    b = build_time_grid(5.0, 1e-3, 0.1)
    assert a == b and hash(a) == hash(b)
    assert a != build_time_grid(5.0, 1e-3, 0.05)
