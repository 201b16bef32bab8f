"""Desk-scale experiment runners that print the numbers behind the acceptance checks.

    python3 scripts/run_experiments.py refinement | tail | cmgap | contraction | single-ball | mc-spread
"""

import argparse
import math

import numpy as np

from guided_support import diagnostics as dg
from guided_support.geometry import Ball
from guided_support.posterior import MixtureModel, mc_oracle_summary, summary_at_sigma
from guided_support.samplers import GuidedRunConfig, run_batch, run_trajectory
from guided_support.scenarios import preset
from guided_support.schedule import NoiseSchedule, build_time_grid
from guided_support.score import GuidedDriftSpec


def refinement():
    prev = None
    for kappa in (0.1, 0.05, 0.025, 0.0125):
        sc = preset("convex3").with_overrides(gamma=2.0, kappa=kappa)
        finals = np.array([t.final_state for t in run_batch(sc.run_config(), len(sc.init), inits=sc.init_points)])
        inc = "" if prev is None else " ".join(f"{v:.2e}" for v in np.linalg.norm(finals - prev, axis=1))
        print(f"kappa={kappa:<7g} increments: {inc}")
        prev = finals


def tail():
    model = preset("convex3").model
    d0 = model.separation().d0
    sig = np.linspace(0.05, 0.5, 10)
    curve = dg.offsupport_tail_curve(model, model.target_support.c, dg.times_for_sigmas(sig))
    for s, lt in zip(curve.sigmas, curve.log_tails):
        print(f"sigma={s:.3f}  log tail={lt:.4f}")
    print(f"slope={curve.slope:.4f}  bound -0.9 d0^2/24 = {-0.9 * d0**2 / 24:.4f}  (d0={d0:.6f})")


def cmgap():
    for p in dg.cm_gap_curve(Ball((0, 0), 1), (3.0, 0.0), [0.4, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005]):
        print(f"sigma={p.sigma:<6g} gap={p.gap:.4e} ratio={p.ratio:.4f}")


def contraction():
    for g in (1.0, 2.0, 4.0):
        sc = preset("convex3").with_overrides(gamma=g)
        trajs = run_batch(sc.run_config(), len(sc.init), inits=sc.init_points)
        rep = dg.contraction_check(trajs, sc.model.target_support, epsilon=0.1, tau=4.0)
        print(f"gamma={g:g} qualifying steps={len(rep.steps)} pass fraction={rep.pass_fraction:.3f}")


def single_ball():
    # unguided flow from far away: endpoint distance tracks the end bandwidth
    model = MixtureModel((1.0,), (Ball((0.0, 0.0), 1.0),), target=0)
    for init in ((3.0, -2.0), (6.0, 0.0)):
        for delta in (1e-2, 1e-3, 1e-4, 1e-5):
            cfg = GuidedRunConfig(
                model, GuidedDriftSpec(1.0, 0), NoiseSchedule(5.0, delta), build_time_grid(5.0, delta, 0.1), 0, init
            )
            d = run_trajectory(cfg).final_dist
            s = math.sqrt(math.expm1(2 * delta))
            print(f"init={init} delta={delta:g} final dist={d:.4f} dist/sigma_end={d / s:.3f}")


def mc_spread():
    # spread of the 10^6-draw oracle across seeds at one query, in units of its own SE
    model = preset("density5").model
    z, s = np.array([3.451, 2.846]), 0.18
    t = 0.5 * math.log1p(s * s)
    q = summary_at_sigma(model, z[None], s)
    for seed in range(8):
        o = mc_oracle_summary(model, z, t, 10**6, np.random.default_rng(seed))
        dz = (q.zeta[0] - o.summary.zeta) / o.zeta_se
        dm = (q.m[0] - o.summary.m) / o.m_se
        print(f"seed={seed} zeta z-scores {np.round(dz, 2).tolist()} max |m z-score| {np.nanmax(np.abs(dm)):.2f}")


RUNNERS = {
    "refinement": refinement, "tail": tail, "cmgap": cmgap, "contraction": contraction,
    "single-ball": single_ball, "mc-spread": mc_spread,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("experiment", choices=RUNNERS)
    RUNNERS[ap.parse_args().experiment]()


if __name__ == "__main__":
    main()
