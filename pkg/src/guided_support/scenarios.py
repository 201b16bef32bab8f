"""Named experiment presets and their TOML file format.

A scenario file looks like::

    name = "convex3"
    target = 1
    gamma = 2.0
    sampler = "ddim"
    T = 5.0
    delta = 0.001
    kappa = 0.1
    grid_rule = "paper-geometric"
    init = [[0.0, 0.0], [-1.5, 0.5]]     # or "standard-gaussian"
    seed = 0

    [[components]]
    weight = 0.3333333333333333
    shape = { kind = "ball", center = [-1.5, 0.5], radius = 0.7 }

Optional keys: ``n`` (default sample count), ``provenance`` ("paper" or
"stand-in") and ``note``.  Any other key is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import tomli
import tomlkit

from .geometry import Ball, ConvexPolygon, Difference, Union, shape_from_dict
from .posterior import MixtureModel
from .samplers import GuidedRunConfig
from .schedule import GRID_RULES, NoiseSchedule, TimeGrid, build_time_grid
from .score import SAMPLER_KINDS, GuidedDriftSpec

GAUSSIAN_INIT = "standard-gaussian"
PROVENANCES = ("paper", "stand-in")


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    name: str
    model: MixtureModel
    gamma: float = 1.0
    sampler: str = "ddim"
    T: float = 5.0
    delta: float = 1e-3
    kappa: float = 0.1
    grid_rule: str = "paper-geometric"
    init: object = GAUSSIAN_INIT  # "standard-gaussian" or tuple of 2-tuples
    seed: int = 0
    n: int = 1
    provenance: str = "stand-in"
    note: str = ""

    def __post_init__(self):
        if self.sampler not in SAMPLER_KINDS:
            raise ScenarioError(f"sampler: expected one of {SAMPLER_KINDS}, got {self.sampler!r}")
        if self.grid_rule not in GRID_RULES:
            raise ScenarioError(f"grid_rule: expected one of {GRID_RULES}, got {self.grid_rule!r}")
        if self.provenance not in PROVENANCES:
            raise ScenarioError(f"provenance: expected one of {PROVENANCES}")
        if not self.gamma >= 0:
            raise ScenarioError("gamma: must be >= 0")
        if not 0 < self.delta < self.T:
            raise ScenarioError("delta: need 0 < delta < T")
        if not 0 < self.kappa < 1:
            raise ScenarioError("kappa: need 0 < kappa < 1")
        if self.n < 1:
            raise ScenarioError("n: must be >= 1")
        if isinstance(self.init, str):
            if self.init != GAUSSIAN_INIT:
                raise ScenarioError(f"init: expected {GAUSSIAN_INIT!r} or a list of points")
        else:
            pts = np.asarray(self.init, dtype=float)
            if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
                raise ScenarioError("init: points must be a non-empty list of [x, y]")
            object.__setattr__(self, "init", tuple(tuple(p) for p in pts.tolist()))

    @property
    def spec(self) -> GuidedDriftSpec:
        return GuidedDriftSpec(self.gamma, self.model.target, self.sampler)

    @property
    def schedule(self) -> NoiseSchedule:
        return NoiseSchedule(self.T, self.delta)

    def grid(self) -> TimeGrid:
        return build_time_grid(self.T, self.delta, self.kappa, self.grid_rule)

    @property
    def init_points(self):
        return None if isinstance(self.init, str) else np.array(self.init)

    def with_overrides(self, **kw) -> "Scenario":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)

    def run_config(self) -> GuidedRunConfig:
        init = GAUSSIAN_INIT if isinstance(self.init, str) else self.init[0]
        return GuidedRunConfig(self.model, self.spec, self.schedule, self.grid(), self.seed, init)


# ----------------------------------------------------------------- presets

_THIRD = 1.0 / 3.0


def _convex3():
    model = MixtureModel(
        (_THIRD, _THIRD, _THIRD),
        (Ball((-1.5, 0.5), 0.7), Ball((0.2, 3.0), 1.2), Ball((2.5, -0.5), 1.5)),
        target=1,
    )
    inits = ((0.0, 0.0), (-1.5, 0.5), (2.5, -0.5), (-2.0, -1.0), (2.0, 0.5), (1.0, -2.0))
    return Scenario(
        "convex3", model, gamma=2.0, init=inits, n=len(inits), provenance="paper",
        note="three-ball mixture guided toward the second component; initial points are implementer-chosen",
    )


def _rect(x0, x1, y0, y1):
    return ConvexPolygon(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))


def _nonconvex3():
    crescent = Difference(Ball((0.2, 2.8), 1.2), Ball((0.8, 3.1), 0.85))
    ell = Union((_rect(-3.2, -1.2, -1.6, -0.9), _rect(-3.2, -2.5, -1.6, 0.6)))
    twin = Union((Ball((2.2, -0.8), 0.8), Ball((3.0, 0.3), 0.7)))
    model = MixtureModel((_THIRD, _THIRD, _THIRD), (crescent, ell, twin), target=0)
    inits = ((0.0, 0.0), (-2.8, -1.2), (2.4, -0.6), (-1.0, 1.0), (1.5, 1.0), (0.5, -1.5))
    return Scenario(
        "nonconvex3", model, gamma=2.0, init=inits, n=len(inits), provenance="stand-in",
        note="crescent target, L-shape and overlapping two-ball union; shapes chosen by the implementer",
    )


def _density5():
    shapes = (
        Ball((-2.2, 1.6), 0.6),
        _rect(1.3, 2.5, 1.0, 2.2),
        ConvexPolygon(((-0.7, -2.6), (0.7, -2.6), (0.0, -1.4))),
        Difference(Ball((-2.1, -1.3), 0.8), Ball((-1.6, -1.0), 0.5)),
        Union((_rect(1.4, 2.8, -2.0, -1.5), _rect(2.3, 2.8, -2.0, -0.6))),
    )
    model = MixtureModel((0.2,) * 5, shapes, target=0)
    return Scenario(
        "density5", model, gamma=2.0, init=GAUSSIAN_INIT, n=10_000, provenance="stand-in",
        note="five shapes of mixed convexity; the guided label cycles over components by sample index",
    )


_PRESETS = {"convex3": _convex3, "nonconvex3": _nonconvex3, "density5": _density5}
PRESET_NAMES = tuple(_PRESETS)


def preset(name: str) -> Scenario:
    if name not in _PRESETS:
        raise ScenarioError(f"unknown scenario {name!r}; known presets: {', '.join(PRESET_NAMES)}")
    return _PRESETS[name]()


# ----------------------------------------------------------------- file format

_REQUIRED = ("name", "components", "target")
_OPTIONAL = ("gamma", "sampler", "T", "delta", "kappa", "grid_rule", "init", "seed", "n", "provenance", "note")


def scenario_from_dict(d: dict) -> Scenario:
    extra = sorted(set(d) - set(_REQUIRED) - set(_OPTIONAL))
    if extra:
        raise ScenarioError(f"unknown field(s): {extra}")
    missing = [k for k in _REQUIRED if k not in d]
    if missing:
        raise ScenarioError(f"missing field(s): {missing}")
    comps = d["components"]
    if not isinstance(comps, list) or not comps:
        raise ScenarioError("components: expected a non-empty array of tables")
    weights, shapes = [], []
    for i, c in enumerate(comps):
        if not isinstance(c, dict) or set(c) != {"weight", "shape"}:
            raise ScenarioError(f"components[{i}]: expected exactly the fields weight and shape")
        try:
            shapes.append(shape_from_dict(c["shape"]))
        except (ValueError, TypeError) as e:
            raise ScenarioError(f"components[{i}].shape: {e}") from e
        weights.append(float(c["weight"]))
    model = MixtureModel(tuple(weights), tuple(shapes), int(d["target"]))
    kw = {k: d[k] for k in _OPTIONAL if k in d}
    for k in ("gamma", "T", "delta", "kappa"):
        if k in kw:
            kw[k] = float(kw[k])
    for k in ("seed", "n"):
        if k in kw:
            kw[k] = int(kw[k])
    return Scenario(str(d["name"]), model, **kw)


def scenario_to_dict(sc: Scenario) -> dict:
    d = {"name": sc.name, "target": sc.model.target}
    d.update(
        gamma=sc.gamma, sampler=sc.sampler, T=sc.T, delta=sc.delta, kappa=sc.kappa, grid_rule=sc.grid_rule,
        init=sc.init if isinstance(sc.init, str) else [list(p) for p in sc.init],
        seed=sc.seed, n=sc.n, provenance=sc.provenance, note=sc.note,
    )
    d["components"] = [{"weight": w, "shape": s.to_dict()} for w, s in zip(sc.model.weights, sc.model.supports)]
    return d


def dumps_scenario(sc: Scenario) -> str:
    doc = tomlkit.document()
    d = scenario_to_dict(sc)
    comps = d.pop("components")
    for k, v in d.items():
        doc[k] = v
    aot = tomlkit.aot()
    for c in comps:
        t = tomlkit.table()
        t["weight"] = c["weight"]
        shape = tomlkit.inline_table()
        shape.update(c["shape"])
        t["shape"] = shape
        aot.append(t)
    doc["components"] = aot
    return tomlkit.dumps(doc)


def loads_scenario(text: str) -> Scenario:
    try:
        d = tomli.loads(text)
    except tomli.TOMLDecodeError as e:
        raise ScenarioError(f"parse error: {e}") from e
    return scenario_from_dict(d)


def save_scenario(sc: Scenario, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps_scenario(sc))


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as f:
        return loads_scenario(f.read())
