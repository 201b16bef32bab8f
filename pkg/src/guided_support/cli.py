"""Command-line front end: ``guided-support trajectories|density|verify``.

Exit codes: 0 success, 1 failed verification, 2 usage or config error,
3 numerical failure (outputs written so far are kept).
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .checks import SUITES
from .posterior import AssumptionViolation
from .samplers import run_batch
from .scenarios import PRESET_NAMES, ScenarioError, dumps_scenario, load_scenario, preset, scenario_to_dict
from .svg import density_svg, trajectories_svg

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
SEED_ENV = "GUIDED_SUPPORT_SEED"
THRESHOLDS = (0.05, 0.1, 0.2)


class ConfigError(Exception):
    pass


def fmt(v) -> str:
    """17 significant digits: enough to round-trip any double."""
    return format(float(v), ".17g")


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\r\n")
        w.writerow(header)
        w.writerows(rows)


def _grid_hash(grid) -> str:
    return hashlib.sha256(np.ascontiguousarray(grid.nodes).tobytes()).hexdigest()


def _resolve_seed(arg, scenario_seed) -> int:
    if arg is not None:
        return int(arg)
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError as e:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from e
    return int(scenario_seed)


def _parse_points(text):
    try:
        pts = [tuple(float(c) for c in p.split(",")) for p in text.split(";") if p.strip()]
    except ValueError as e:
        raise ConfigError(f"--inits: could not parse {text!r}; expected 'x,y;x,y;...'") from e
    if not pts or any(len(p) != 2 for p in pts):
        raise ConfigError("--inits: expected 'x,y;x,y;...'")
    return pts


def load_from_args(args):
    try:
        if args.config:
            sc = load_scenario(args.config)
        else:
            sc = preset(args.scenario)
        over = dict(gamma=args.gamma, sampler=args.sampler, kappa=args.kappa)
        if getattr(args, "inits", None):
            over["init"] = _parse_points(args.inits)
        sc = sc.with_overrides(**over)
        sc = sc.with_overrides(seed=_resolve_seed(args.seed, sc.seed))
        sc.grid()  # surface grid errors as config errors
    except (ScenarioError, AssumptionViolation, OSError, ValueError) as e:
        raise ConfigError(str(e)) from e
    return sc


def _manifest(sc, command, outputs, statuses, started, elapsed, extra=None):
    grid = sc.grid()
    m = {
        "tool": "guided-support",
        "version": __version__,
        "command": command,
        "scenario": scenario_to_dict(sc),
        "scenario_toml": dumps_scenario(sc),
        "grid_rule": sc.grid_rule,
        "grid_nodes": int(grid.nodes.size),
        "grid_sha256": _grid_hash(grid),
        "seed": int(sc.seed),
        "rng": "numpy Philox, SeedSequence(seed, spawn_key=(trajectory index,))",
        "started": started,
        "wall_clock_seconds": round(elapsed, 3),
        "trajectory_status": statuses,
        "outputs": outputs,
    }
    if extra:
        m.update(extra)
    return m


def _now():
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def cmd_trajectories(args) -> int:
    sc = load_from_args(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started, t0 = _now(), time.perf_counter()
    cfg = sc.run_config()
    inits = sc.init_points
    n = len(inits) if inits is not None else (sc.n if args.n is None else args.n)
    if n < 1:
        raise ConfigError("--n must be >= 1")
    trajs = run_batch(cfg, n, inits=inits)
    rows = []
    for t in trajs:
        for k in range(t.times.size):
            rows.append(
                [t.index, k, fmt(t.times[k]), *map(fmt, t.x_states[k]), *map(fmt, t.z_states[k]),
                 fmt(t.dist_x[k]), fmt(t.dist_to_target[k])]
            )
    _write_csv(out / "trajectories.csv", ["run_id", "k", "t_k", "x1", "x2", "z1", "z2", "dist_x", "dist_z"], rows)
    title = f"{sc.name}: {sc.sampler}, gamma={sc.gamma:g}, kappa={sc.kappa:g}"
    (out / "trajectories.svg").write_text(trajectories_svg(sc.model, trajs, title), encoding="utf-8")
    statuses = [{"run_id": t.index, "status": t.status, "final_dist_x": t.final_dist} for t in trajs]
    files = ["trajectories.csv", "trajectories.svg", "manifest.json"]
    man = _manifest(sc, "trajectories", files, statuses, started, time.perf_counter() - t0)
    (out / "manifest.json").write_text(json.dumps(man, indent=2, default=float), encoding="utf-8")
    for t in trajs:
        print(f"run {t.index}: status={t.status} final dist_x={t.final_dist:.3e}")
    return EXIT_NUMERIC if any(t.status != "ok" for t in trajs) else EXIT_OK


def density_summary(trajs, n_components):
    d = np.array([t.final_dist for t in trajs])
    d = np.nan_to_num(d, nan=np.inf)
    return {
        "n": len(trajs),
        "on_support_fraction": {str(th): float(np.mean(d <= th)) for th in THRESHOLDS},
        "blowups": int(sum(t.status != "ok" for t in trajs)),
        "components": n_components,
    }


def cmd_density(args) -> int:
    sc = load_from_args(args)
    n = sc.n if args.n is None else args.n
    if n < 1:
        raise ConfigError("--n must be >= 1")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started, t0 = _now(), time.perf_counter()
    C = sc.model.n_components
    targets = np.arange(n) % C  # guided label cycles over components
    cfg = sc.run_config()
    trajs = run_batch(cfg, n, targets=targets) if isinstance(sc.init, str) else run_batch(
        cfg, n, inits=np.resize(sc.init_points, (n, 2)), targets=targets
    )
    rows = []
    for t in trajs:
        x = t.final_state
        dists = [float(s.distance(x)) if np.all(np.isfinite(x)) else float("nan") for s in sc.model.supports]
        rows.append([t.index, t.target, fmt(x[0]), fmt(x[1]), *map(fmt, dists)])
    _write_csv(out / "samples.csv", ["run_id", "target", "x1", "x2", *[f"dist_{k}" for k in range(C)]], rows)
    finals = np.array([t.final_state for t in trajs])
    title = f"{sc.name}: {sc.sampler}, gamma={sc.gamma:g}, n={n}"
    (out / "density.svg").write_text(density_svg(sc.model, finals, targets, title), encoding="utf-8")
    summary = density_summary(trajs, C)
    summary.update(scenario=sc.name, sampler=sc.sampler, gamma=sc.gamma, seed=sc.seed)
    (out / "summary.json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
    statuses = [{"run_id": t.index, "status": t.status} for t in trajs if t.status != "ok"]
    files = ["samples.csv", "density.svg", "summary.json", "manifest.json"]
    man = _manifest(sc, "density", files, statuses, started, time.perf_counter() - t0, {"n": n})
    (out / "manifest.json").write_text(json.dumps(man, indent=2), encoding="utf-8")
    print(json.dumps(summary["on_support_fraction"]))
    return EXIT_NUMERIC if summary["blowups"] else EXIT_OK


def run_suite(name, out: Path) -> int:
    try:
        checks = SUITES[name]()
    except (ArithmeticError, RuntimeError) as e:
        report = {"suite": name, "passed": False, "error": str(e), "checks": []}
        (out / f"verify_{name}.json").write_text(json.dumps(report, indent=2), encoding="utf-8")
        print(f"[{name}] numerical failure: {e}")
        return EXIT_NUMERIC
    ok = all(c.passed for c in checks)
    report = {"suite": name, "passed": ok, "checks": [c.to_dict() for c in checks]}
    (out / f"verify_{name}.json").write_text(json.dumps(report, indent=2), encoding="utf-8")
    for c in checks:
        print(f"[{name}] {'PASS' if c.passed else 'FAIL'} {c.name}: {c.value:.6g} (threshold {c.threshold:.6g})")
    if not ok:
        print(f"[{name}] failed: {', '.join(c.name for c in checks if not c.passed)}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names = list(SUITES) if args.suite == "all" else [args.suite]
    codes = {n: run_suite(n, out) for n in names}
    if args.suite == "all":
        agg = {"suite": "all", "exit_codes": codes, "passed": all(c == 0 for c in codes.values())}
        (out / "verify_all.json").write_text(json.dumps(agg, indent=2), encoding="utf-8")
    return max(codes.values())


def build_parser():
    p = argparse.ArgumentParser(prog="guided-support", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(q):
        src = q.add_mutually_exclusive_group()
        src.add_argument("--scenario", default="convex3", help=f"preset name ({', '.join(PRESET_NAMES)})")
        src.add_argument("--config", help="scenario TOML file")
        q.add_argument("--gamma", type=float)
        q.add_argument("--sampler", choices=("ddim", "ddpm"))
        q.add_argument("--kappa", type=float)
        q.add_argument("--seed", type=int, help=f"default: ${SEED_ENV}, else the scenario's seed")
        q.add_argument("--n", type=int)
        q.add_argument("--out", default="out")

    t = sub.add_parser("trajectories", help="run guided trajectories and plot them")
    common(t)
    t.add_argument("--inits", help="initial points 'x,y;x,y;...'")
    t.set_defaults(func=cmd_trajectories)
    d = sub.add_parser("density", help="sample many endpoints and summarize concentration")
    common(d)
    d.set_defaults(func=cmd_density)
    v = sub.add_parser("verify", help="run an invariant suite")
    v.add_argument("suite", choices=(*SUITES, "all"))
    v.add_argument("--out", default="out")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, RuntimeError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
