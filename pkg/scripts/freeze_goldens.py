"""Compute oracle values used as frozen goldens in the tests.

Monte Carlo goldens use plain uniform sampling (independent of the quadrature);
high-resolution goldens rerun the quadrature with a much finer rule.  Writes
tests/data/goldens.json.  Takes a few minutes.
"""

import json
import math
from pathlib import Path

import mpmath
import numpy as np

import guided_support.posterior as post
from guided_support.geometry import Ball
from guided_support.posterior import MixtureModel, mc_oracle_summary
from guided_support.samplers import ddim_step, ddpm_step, trajectory_rng, zspace_ddim_step
from guided_support.scenarios import preset
from guided_support.schedule import lam, sigma
from guided_support.score import GuidedDriftSpec

N_MC = 10_000_000
OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "goldens.json"


def mc_chunked(model, z, t, rng, n=N_MC, chunks=10, sigma_tilde=None):
    """Pool independent chunks so memory stays bounded; SEs combine as 1/sqrt(chunks)."""
    res = [mc_oracle_summary(model, z, t, n // chunks, rng, sigma_tilde=sigma_tilde) for _ in range(chunks)]
    zeta = np.mean([r.summary.zeta for r in res], axis=0)
    m = np.mean([r.summary.m for r in res], axis=0)
    zse = np.sqrt(np.sum([r.zeta_se**2 for r in res], axis=0)) / chunks
    mse = np.sqrt(np.sum([r.m_se**2 for r in res], axis=0)) / chunks
    return zeta, m, zse, mse


def fine_rule():
    post.N_GAUSS = 40
    post.GRADE_RATIO = 1.3
    gx, gw = np.polynomial.legendre.leggauss(40)
    post._MAP_U = np.sin(0.5 * np.pi * gx)
    post._MAP_W = 0.5 * np.pi * np.cos(0.5 * np.pi * gx) * gw


def main():
    rng = np.random.default_rng(20241016)
    g = {}
    mpmath.mp.dps = 40
    g["sigma_tilde_0.001"] = float(mpmath.sqrt(mpmath.expm1(mpmath.mpf("0.002"))))

    two = MixtureModel((0.5, 0.5), (Ball((-2.0, 0.0), 1.0), Ball((2.0, 0.0), 1.0)), target=1)
    t = 0.5 * math.log1p(0.25)  # sigma_tilde = 0.5
    zeta, m, zse, mse = mc_chunked(two, np.array([1.0, 0.0]), t, rng)
    g["two_ball_z1"] = {"zeta": zeta.tolist(), "m": m.tolist(), "zeta_se": zse.tolist(), "m_se": mse.tolist()}

    ball = MixtureModel((1.0,), (Ball((0.0, 0.0), 1.0),), target=0)
    _, m, _, mse = mc_chunked(ball, np.array([3.0, 0.0]), None, rng, sigma_tilde=0.05)
    g["ball_tilted_mean_z3_s005"] = {"m": m[0].tolist(), "m_se": mse[0].tolist()}

    sc = preset("convex3")
    t1 = 1.0
    zeta, m, zse, mse = mc_chunked(sc.model, np.array([0.0, 0.0]), t1, rng)
    s2 = sigma(t1) ** 2
    F = m - 0.0
    gamma = 2.0
    drift = (gamma / s2) * F[1] - ((gamma - 1) / s2) * np.sum(zeta[:, None] * F, axis=0)
    g["convex3_z0_t1"] = {
        "zeta": zeta.tolist(), "m": m.tolist(), "zeta_se": zse.tolist(), "m_se": mse.tolist(),
        "z_drift_gamma2": drift.tolist(),
    }

    fine_rule()
    spec = GuidedDriftSpec(2.0, 1, "ddim")
    g["convex3_ddim_step_x0_t0_d01_g2"] = ddim_step(sc.model, np.zeros(2), 0.0, 0.1, spec, T=5.0).tolist()
    x = np.array([0.3, 0.4])
    z = x / lam(5.0 - 4.5)
    g["convex3_zspace_step_x03_04_t45_d005_g2"] = zspace_ddim_step(sc.model, z, 4.5, 0.05, spec, T=5.0).tolist()
    noise = trajectory_rng(7, 0).standard_normal(2)
    g["convex3_ddpm_step_seed7"] = ddpm_step(
        sc.model, np.array([0.5, -0.5]), 1.0, 0.1, GuidedDriftSpec(2.0, 1, "ddpm"), noise=noise, T=5.0
    ).tolist()

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(g, indent=2) + "\n")
    print(json.dumps(g, indent=2))


if __name__ == "__main__":
    main()
