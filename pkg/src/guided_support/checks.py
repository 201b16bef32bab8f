"""Named invariant suites shared by the ``verify`` command and the test-suite."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import diagnostics as dg
from .geometry import Ball, cap_volume_ratio, distance_laplacian_ball
from .posterior import mc_oracle_summary, summary_at_sigma
from .samplers import run_batch
from .scenarios import PRESET_NAMES, preset
from .schedule import build_time_grid, lam, sigma, validate_grid


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def to_dict(self):
        d = asdict(self)
        d["passed"] = bool(d["passed"])
        d["value"] = float(d["value"])
        d["threshold"] = float(d["threshold"])
        return d


def _le(name, value, threshold, detail=""):
    return Check(name, bool(value <= threshold), float(value), float(threshold), detail)


def _ge(name, value, threshold, detail=""):
    return Check(name, bool(value >= threshold), float(value), float(threshold), detail)


def suite_schedule():
    t = np.logspace(-6, math.log10(50), 1000)
    dev = np.max(np.abs(lam(t) ** 2 + sigma(t) ** 2 - 1))
    out = [_le("lambda^2 + sigma^2 = 1", dev, 1e-14)]
    rep = validate_grid(build_time_grid(5.0, 1e-3, 0.1, "paper-geometric"))
    out.append(_le("paper-geometric grid step condition", rep.worst_ratio, 0.1 + 1e-12))
    for kappa in (0.5, 0.25, 0.05):
        for rule in ("paper-geometric", "uniform-log"):
            r = validate_grid(build_time_grid(5.0, 1e-3, kappa, rule))
            out.append(_le(f"{rule} grid compliant at kappa={kappa}", r.worst_ratio, kappa + 1e-12))
    return out


def suite_geometry(seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for name in PRESET_NAMES:
        for i, s in enumerate(preset(name).model.supports):
            p = rng.uniform(-5, 5, (500, 2))
            q = s.project(p)
            idem = np.max(np.abs(s.project(q) - q))
            cons = np.max(np.abs(np.hypot(*(p - q).T) - s.distance(p)))
            out.append(_le(f"{name}[{i}] projection idempotent", idem, 1e-12))
            out.append(_le(f"{name}[{i}] |p - proj| = dist", cons, 1e-12))
    ball = Ball((0.0, 0.0), 1.0)
    th = 2 * np.pi * np.arange(32) / 32
    radii = [2.0**-k for k in range(8)]
    rho = min(cap_volume_ratio(ball, (math.cos(a), math.sin(a)), r) for a in th for r in radii)
    out.append(_ge("cap volume ratio lower bound", rho, 0.5))
    p = rng.uniform(-6, 6, (2000, 2))
    p = p[np.hypot(*p.T) > 1.0 + 1e-9]
    lap = max(distance_laplacian_ball(ball, x) for x in p)
    out.append(_le("distance Laplacian <= 2/R", lap, 2.0))
    return out


def suite_posterior(seed=0, n_queries=200, n_mc=100_000):
    rng = np.random.default_rng(seed)
    out = []
    for name in PRESET_NAMES:
        model = preset(name).model
        z = rng.uniform(-4, 4, (n_queries, 2))
        s = np.exp(rng.uniform(np.log(0.05), np.log(2.0), n_queries))
        worst_norm = 0.0
        worst_in = 0.0
        for i in range(n_queries):
            summ = summary_at_sigma(model, z[i : i + 1], s[i])
            worst_norm = max(worst_norm, abs(summ.zeta.sum() - 1))
            for k, sup in enumerate(model.supports):
                if sup.is_convex:
                    worst_in = max(worst_in, float(sup.distance(summ.m[0, k])))
        out.append(_le(f"{name} zeta sums to one", worst_norm, 1e-10))
        out.append(_le(f"{name} convex tilted means stay in support", worst_in, 1e-9))
        v = np.array([0.7, -1.3])
        a = summary_at_sigma(model, z[:20], 0.3)
        b = summary_at_sigma(model.translated(v), z[:20] + v, 0.3)
        out.append(_le(f"{name} translation: zeta", np.max(np.abs(a.zeta - b.zeta)), 1e-10))
        out.append(_le(f"{name} translation: m", np.max(np.abs(a.m + v - b.m)), 1e-8))
        worst = 0.0
        for j in range(3):
            t = 0.5 * math.log1p(s[j] ** 2)
            o = mc_oracle_summary(model, z[j], t, n_mc, rng)
            q = summary_at_sigma(model, z[j : j + 1], s[j])
            dz = np.abs(q.zeta[0] - o.summary.zeta) / np.maximum(o.zeta_se, 1e-300)
            worst = max(worst, float(np.max(np.where(o.zeta_se > 0, dz, 0))))
        out.append(_le(f"{name} zeta vs Monte Carlo (standard errors)", worst, 4.0))
    return out


def suite_score(seed=0, n_queries=20):
    rng = np.random.default_rng(seed)
    model = preset("convex3").model
    s = np.exp(rng.uniform(np.log(0.05), np.log(2.0), n_queries))
    t = 0.5 * np.log1p(s * s)
    x = rng.uniform(-3.5, 3.5, (n_queries, 2)) * lam(t)[:, None]
    rep = dg.score_fd_check(model, list(zip(x, t)), h=1e-4)
    return [_le("score vs FD of log p_t", rep.max_score_error, 1e-3), _le("guidance vs FD of log zeta", rep.max_guidance_error, 1e-3)]


def suite_contraction():
    sc = preset("convex3").with_overrides(gamma=2.0, sampler="ddim")
    trajs = run_batch(sc.run_config(), len(sc.init), inits=sc.init_points)
    rep = dg.contraction_check(trajs, sc.model.target_support, epsilon=0.1, tau=4.0, slack=0.5)
    frac = rep.pass_fraction if not rep.empty else 0.0
    worst = max(t.final_dist for t in trajs)
    return [
        _ge("contraction pass fraction", frac, 0.9, f"{len(rep.steps)} qualifying steps"),
        _le("final distance to target", worst, 0.05),
    ]


def suite_tail():
    model = preset("convex3").model
    d0 = model.separation().d0
    sig = np.linspace(0.05, 0.5, 10)
    curve = dg.offsupport_tail_curve(model, model.target_support.c, dg.times_for_sigmas(sig))
    return [_le("tail log-slope vs 1/sigma^2", curve.slope, -0.9 * d0**2 / 24)]


def suite_cmgap():
    ball = Ball((0.0, 0.0), 1.0)
    pts = dg.cm_gap_curve(ball, (3.0, 0.0), [0.2, 0.1, 0.05, 0.02, 0.01])
    ratios = [p.ratio for p in pts]
    return [_le("gap/(sigma log 1/sigma) bounded", max(ratios), 3 * ratios[0])]


SUITES = {
    "schedule": suite_schedule,
    "geometry": suite_geometry,
    "posterior": suite_posterior,
    "score": suite_score,
    "contraction": suite_contraction,
    "tail": suite_tail,
    "cmgap": suite_cmgap,
}
