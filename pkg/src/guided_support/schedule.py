"""OU forward-noise schedule and reverse-time discretization grids.

Forward process: ``X_t = lam(t) X_0 + sigma(t) W`` with ``lam(t) = exp(-t)`` and
``sigma(t) = sqrt(1 - exp(-2t))``.  Samplers walk reverse time ``tau`` on a
grid ``0 = t_0 < ... < t_N <= T - delta`` and evaluate scores at ``T - tau``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

GRID_RULES = ("paper-geometric", "uniform-log", "paper-literal")

# slack on the step-size check; node values carry ~1 ulp of error each
COMPLIANCE_TOL = 1e-12


def _check_time(t, strict=False):
    t = np.asarray(t, dtype=float)
    bad = (t <= 0) if strict else (t < 0)
    if np.any(bad) or np.any(np.isnan(t)):
        raise ValueError(f"time must be {'> 0' if strict else '>= 0'}, got {t}")
    return t


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def lam(t):
    """Signal scale exp(-t)."""
    return _out(np.exp(-_check_time(t)))


def sigma(t):
    """Noise scale sqrt(1 - exp(-2t)), via expm1 so small t keeps full precision."""
    return _out(np.sqrt(-np.expm1(-2.0 * _check_time(t))))


def sigma_tilde(t):
    """Noise-to-signal ratio sigma(t)/lam(t) = sqrt(exp(2t) - 1)."""
    return _out(np.sqrt(np.expm1(2.0 * _check_time(t, strict=True))))


@dataclass(frozen=True)
class NoiseSchedule:
    horizon_T: float = 5.0
    early_stop_delta: float = 1e-3

    def __post_init__(self):
        if not self.horizon_T > self.early_stop_delta > 0:
            raise ValueError("need horizon_T > early_stop_delta > 0")

    def lam(self, t):
        return lam(t)

    def sigma(self, t):
        return sigma(t)

    def sigma_tilde(self, t):
        return sigma_tilde(t)


@dataclass(frozen=True)
class TimeGrid:
    """Reverse-time nodes; the drift at node k is evaluated at forward time T - nodes[k]."""

    nodes: np.ndarray
    T: float
    kappa: float
    rule: str = "custom"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 1:
            raise ValueError("grid needs at least one node")
        if nodes[0] != 0.0:
            raise ValueError("grid must start at t_0 = 0")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("grid nodes must be strictly increasing")
        if nodes[-1] >= self.T:
            raise ValueError("last node must be < T")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def n_steps(self) -> int:
        return self.nodes.size - 1

    def __eq__(self, other):
        if not isinstance(other, TimeGrid):
            return NotImplemented
        return (self.T, self.kappa, self.rule) == (other.T, other.kappa, other.rule) and np.array_equal(
            self.nodes, other.nodes
        )

    def __hash__(self):
        return hash((self.T, self.kappa, self.rule, self.nodes.tobytes()))


@dataclass
class GridReport:
    ratios: np.ndarray
    ok: np.ndarray
    kappa: float
    violations: list[int] = field(default_factory=list)

    @property
    def worst_ratio(self) -> float:
        return float(self.ratios.max()) if self.ratios.size else 0.0

    @property
    def compliant(self) -> bool:
        return not self.violations


def _nudge_down(t_prev, t_next, T, kappa):
    # keep Delta <= kappa * (T - t_next) exactly in floating point
    while t_next - t_prev > kappa * min(1.0, T - t_next):
        t_next = math.nextafter(t_next, -math.inf)
    return t_next


def _truncate(nodes, T, delta):
    end = T - delta
    kept = [t for t in nodes if t <= end]
    if kept[-1] != end:
        kept.append(end)
    return np.array(kept)


def _paper_geometric(T, delta, kappa):
    nodes = [0.0]
    k = 0
    # uniform phase: kappa steps that do not pass T - 1
    while (k + 1) * kappa <= T - 1 + 1e-12:
        k += 1
        nodes.append(k * kappa)
    end = T - delta
    while nodes[-1] < end:
        t = nodes[-1]
        nxt = t + kappa * (T - t) / (1.0 + kappa)
        nxt = _nudge_down(t, nxt, T, kappa)
        if nxt > end:
            break
        nodes.append(nxt)
    return _truncate(nodes, T, delta)


def _paper_literal(T, delta, kappa):
    M = math.floor((T - 1) / kappa) + 1
    nodes = [0.0]
    k = 0
    while True:
        t = nodes[-1]
        step = kappa if t <= T - 1 + 1e-12 else kappa / (1 + kappa) ** (k - M + 1)
        if t + step > T - delta:
            break
        nodes.append(t + step)
        k += 1
    return _truncate(nodes, T, delta)


def _uniform_log(T, delta, kappa, n_steps=None):
    def make(n):
        r = np.exp(np.linspace(np.log(T), np.log(delta), n + 1))
        nodes = T - r
        nodes[0], nodes[-1] = 0.0, T - delta
        return nodes

    if n_steps is not None:
        return make(n_steps)
    n = 1
    while True:
        nodes = make(n)
        if validate_grid(TimeGrid(nodes, T, kappa, "uniform-log"), kappa).compliant:
            return nodes
        n += 1


def build_time_grid(T: float, delta: float, kappa: float, rule: str = "paper-geometric", n_steps=None) -> TimeGrid:
    """Reverse-time grid on [0, T - delta].

    ``paper-geometric`` takes steps of ``kappa`` up to ``T - 1`` and then shrinks
    ``T - t`` by ``1/(1 + kappa)`` per step; ``uniform-log`` spaces ``log(T - t)``
    evenly, using the fewest steps that satisfy the step-size condition unless
    ``n_steps`` is given.  ``paper-literal`` is the unmodified closed-form rule,
    which overshoots the step-size condition near T.  All rules stop at the last
    node <= T - delta and then append T - delta.
    """
    if not 0 < delta < T:
        raise ValueError("need 0 < delta < T")
    if not 0 < kappa < 1:
        raise ValueError("need 0 < kappa < 1")
    if rule == "paper-geometric":
        nodes = _paper_geometric(T, delta, kappa)
    elif rule == "uniform-log":
        nodes = _uniform_log(T, delta, kappa, n_steps)
    elif rule == "paper-literal":
        nodes = _paper_literal(T, delta, kappa)
    else:
        raise ValueError(f"unknown grid rule {rule!r}; expected one of {GRID_RULES}")
    return TimeGrid(nodes, float(T), float(kappa), rule)


def validate_grid(grid: TimeGrid, kappa: float | None = None) -> GridReport:
    """Check Delta_k <= kappa * min(1, T - t_{k+1}) step by step."""
    kappa = grid.kappa if kappa is None else kappa
    nodes = grid.nodes
    steps = np.diff(nodes)
    ratios = steps / np.minimum(1.0, grid.T - nodes[1:])
    ok = ratios <= kappa + COMPLIANCE_TOL
    return GridReport(ratios=ratios, ok=ok, kappa=kappa, violations=np.flatnonzero(~ok).tolist())
