"""Quantitative checks of support convergence, contraction, tilted-mean gaps and tail decay."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .posterior import MixtureModel, ResolutionError, log_density, log_posterior_weight, summary_at_sigma, tilted_mean
from .samplers import Trajectory
from .schedule import sigma, sigma_tilde
from .score import score_and_guidance


def distance_series(traj: Trajectory, target) -> list[tuple[float, float, float]]:
    """(t_k, x-space distance, z-space distance) at every node."""
    dx = np.asarray(target.distance(traj.x_states), dtype=float)
    dz = np.asarray(target.distance(traj.z_states), dtype=float)
    return [(float(t), float(a), float(b)) for t, a, b in zip(traj.times, dx, dz)]


# ----------------------------------------------------------------- contraction


@dataclass
class ContractionStep:
    t: float
    dist: float
    ratio: float  # (dist_{k+1} - dist_k) / Delta_k
    bound: float  # -dist_k / (4 sigma^2_{T - t_k})
    passed: bool


@dataclass
class ContractionReport:
    steps: list[ContractionStep]
    onset: float
    epsilon: float
    slack: float

    @property
    def empty(self) -> bool:
        return not self.steps

    @property
    def pass_fraction(self) -> float:
        if self.empty:
            return float("nan")
        return sum(s.passed for s in self.steps) / len(self.steps)


def _contraction_steps(times, dists, T, epsilon, tau, slack):
    out = []
    for k in range(len(times) - 1):
        t, d = float(times[k]), float(dists[k])
        if t < tau or not d >= epsilon or not np.isfinite(dists[k + 1]):
            continue
        delta = float(times[k + 1] - times[k])
        bound = -d / (4.0 * sigma(T - t) ** 2)
        ratio = (float(dists[k + 1]) - d) / delta
        out.append(ContractionStep(t, d, ratio, bound, ratio <= bound * (1.0 - slack)))
    return out


def contraction_check(trajs, target, epsilon: float = 0.1, tau: float | None = None, slack: float = 0.5):
    """Per-step test of d/dt dist(z_t, K) <= -dist / (4 sigma^2) on z-space distances.

    Accepts one deterministic trajectory or a list, whose qualifying steps are pooled.
    Only steps with t_k >= tau and dist_k >= epsilon count; ``tau`` defaults to T - 1.
    An empty report (no qualifying steps) has ``pass_fraction`` NaN.
    """
    trajs = [trajs] if isinstance(trajs, Trajectory) else list(trajs)
    steps = []
    onset = None
    for tr in trajs:
        onset = tr.T - 1.0 if tau is None else tau
        dz = np.asarray(target.distance(tr.z_states), dtype=float)
        steps += _contraction_steps(tr.times, dz, tr.T, epsilon, onset, slack)
    return ContractionReport(steps, float(onset if onset is not None else np.nan), epsilon, slack)


def contraction_check_series(times, dists, T: float, epsilon=0.1, tau=None, slack=0.5) -> ContractionReport:
    """Same test on a bare distance series (for constructed inputs)."""
    tau = T - 1.0 if tau is None else tau
    return ContractionReport(_contraction_steps(np.asarray(times), np.asarray(dists), T, epsilon, tau, slack), tau, epsilon, slack)


# ----------------------------------------------------------------- tilted-mean gap


@dataclass
class CmGapPoint:
    sigma: float
    gap: float
    ratio: float  # gap / (sigma log(1/sigma))
    gap_vector: np.ndarray = field(repr=False, default=None)
    failed: bool = False


def cm_gap_curve(support, z, sigmas) -> list[CmGapPoint]:
    """Distance between the tilted mean and the projection of an exterior z, per bandwidth."""
    z = np.asarray(z, dtype=float)
    if support.contains(z):
        raise ValueError("z must lie outside the support")
    proj = support.project(z)
    out = []
    for s in sigmas:
        s = float(s)
        if not 0 < s < 0.5:
            raise ValueError("bandwidths must lie in (0, 1/2)")
        try:
            v = tilted_mean(support, z, s) - proj
        except ResolutionError:
            out.append(CmGapPoint(s, float("nan"), float("nan"), None, True))
            continue
        gap = float(np.hypot(*v))
        out.append(CmGapPoint(s, gap, gap / (s * math.log(1.0 / s)), v))
    return out


# ----------------------------------------------------------------- off-support tail


@dataclass
class TailCurve:
    sigmas: np.ndarray
    log_tails: np.ndarray
    underflow: np.ndarray
    slope: float
    intercept: float

    @property
    def tails(self) -> np.ndarray:
        return np.exp(self.log_tails)


def fit_log_slope(sigmas, log_tails):
    """Least-squares slope and intercept of log(tail) against 1/sigma^2, skipping underflowed points."""
    x = 1.0 / np.asarray(sigmas, dtype=float) ** 2
    y = np.asarray(log_tails, dtype=float)
    ok = np.isfinite(y)
    if ok.sum() < 2:
        return float("nan"), float("nan")
    slope, intercept = np.polyfit(x[ok], y[ok], 1)
    return float(slope), float(intercept)


def offsupport_tail_curve(model: MixtureModel, z, times, check_hypothesis: bool = True) -> TailCurve:
    """Posterior mass off the target, sum_{eta != target} zeta_eta(z), at forward times ``times``."""
    z = np.asarray(z, dtype=float)
    sig = np.asarray([sigma_tilde(t) for t in times], dtype=float)
    if model.n_components == 1:
        lt = np.full(sig.shape, -np.inf)
        return TailCurve(sig, lt, np.zeros(sig.shape, bool), float("nan"), float("nan"))
    if check_hypothesis:
        d0 = model.separation().d0
        if model.target_support.distance(z) > d0 / 3:
            raise ValueError("z must lie within d0/3 of the target support")
    others = [i for i in range(model.n_components) if i != model.target]
    lt = np.empty(sig.size)
    for i, s in enumerate(sig):
        summ = summary_at_sigma(model, z[None, :], s)
        # log-space sum, so tails far below machine epsilon stay resolvable
        lt[i] = logsumexp(summ.log_zeta[0, others])
    slope, icpt = fit_log_slope(sig, lt)
    return TailCurve(sig, lt, ~np.isfinite(lt), slope, icpt)


def times_for_sigmas(sigmas) -> np.ndarray:
    """Forward times t with sigma_tilde(t) equal to each entry."""
    s = np.asarray(sigmas, dtype=float)
    return 0.5 * np.log1p(s * s)


# ----------------------------------------------------------------- score finite differences


@dataclass
class FDReport:
    score_errors: np.ndarray
    guidance_errors: np.ndarray
    h: float

    @property
    def max_score_error(self) -> float:
        return float(self.score_errors.max())

    @property
    def max_guidance_error(self) -> float:
        return float(self.guidance_errors.max())

    @property
    def max_error(self) -> float:
        return max(self.max_score_error, self.max_guidance_error)


def _fd_grad(f, x, h):
    g = np.empty(2)
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def score_fd_check(model: MixtureModel, queries, h: float = 1e-4) -> FDReport:
    """Compare score and guidance with central differences of log p_t and log zeta_target.

    Error per query is |analytic - FD| / max(1, |analytic|): relative for large
    vectors, absolute near zero.
    """
    if not 1e-6 <= h <= 1e-3:
        raise ValueError("h must lie in [1e-6, 1e-3]")
    se, ge = [], []
    for x, t in queries:
        x = np.asarray(x, dtype=float)
        sc, gd = score_and_guidance(model, x, t)
        fs = _fd_grad(lambda y: log_density(model, y, t)[0], x, h)
        fg = _fd_grad(lambda y: log_posterior_weight(model, y, t)[0], x, h)
        se.append(np.linalg.norm(sc - fs) / max(1.0, np.linalg.norm(sc)))
        ge.append(np.linalg.norm(gd - fg) / max(1.0, np.linalg.norm(gd)))
    return FDReport(np.array(se), np.array(ge), h)


# ----------------------------------------------------------------- ensembles


def fraction_within(trajs, threshold: float) -> float:
    """Share of trajectories whose final x-space distance to their target is <= threshold."""
    d = np.array([t.final_dist for t in trajs])
    return float(np.mean(np.nan_to_num(d, nan=np.inf) <= threshold))
