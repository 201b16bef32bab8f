"""Map final distance to the target over a grid of convex3 starting points.

Prints one character per start ('.' <= 0.02, 'o' <= 0.05, 'X' otherwise) for each
guidance strength, so the region where delta = 1e-3 early stopping leaves a
visible gap can be seen at a glance.

    python3 scripts/init_sensitivity.py [--gammas 1 2 4] [--half-width 3] [--points 13]
"""

import argparse

import numpy as np

from guided_support.samplers import run_batch
from guided_support.scenarios import preset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gammas", type=float, nargs="+", default=[1.0, 2.0, 4.0])
    ap.add_argument("--half-width", type=float, default=3.0)
    ap.add_argument("--points", type=int, default=13)
    ap.add_argument("--sampler", choices=("ddim", "ddpm"), default="ddim")
    args = ap.parse_args()

    xs = np.linspace(-args.half_width, args.half_width, args.points)
    starts = np.array([(a, b) for b in xs[::-1] for a in xs])
    for g in args.gammas:
        sc = preset("convex3").with_overrides(gamma=g, sampler=args.sampler)
        d = np.array([t.final_dist for t in run_batch(sc.run_config(), len(starts), inits=starts)])
        d = d.reshape(args.points, args.points)
        print(f"gamma = {g:g}   worst {d.max():.3f}   share > 0.05: {np.mean(d > 0.05):.3f}")
        for row, y in zip(d, xs[::-1]):
            marks = "".join("." if v <= 0.02 else "o" if v <= 0.05 else "X" for v in row)
            print(f"{y:6.2f} {marks}")
        print()


if __name__ == "__main__":
    main()
