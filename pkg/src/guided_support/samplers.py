"""Guided DDIM / DDPM sampling with exponential-integrator steps.

One step from reverse time ``t_k`` with size ``Delta``:

    ddim:  x' = e^Delta x + (e^Delta - 1) (score + gamma * guidance)
    ddpm:  x' = e^Delta x + 2 (e^Delta - 1) (score + gamma * guidance) + sqrt(e^{2 Delta} - 1) Z

with score and guidance frozen at forward time ``T - t_k``.

Randomness: trajectory ``i`` of a run seeded with ``seed`` draws from
``Generator(Philox(SeedSequence(seed, spawn_key=(i,))))``.  A gaussian
initial point consumes the first two normals; step ``k`` then consumes the
next two.  Batches are integrated in lockstep but every row sees exactly the
arithmetic it would see alone, so batch and single runs agree bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .posterior import MixtureModel, summary_at_sigma
from .schedule import NoiseSchedule, TimeGrid, lam, sigma
from .score import GuidedDriftSpec, z_drift

BLOWUP_NORM = 1e6
DEFAULT_T = NoiseSchedule().horizon_T


class NumericalBlowupError(RuntimeError):
    def __init__(self, message, state=None, step=None):
        super().__init__(message)
        self.state = state
        self.step = step


@dataclass(frozen=True)
class GuidedRunConfig:
    """``init`` is a 2-vector or the string ``"standard-gaussian"``."""

    model: MixtureModel
    spec: GuidedDriftSpec
    schedule: NoiseSchedule
    grid: TimeGrid
    seed: int = 0
    init: object = "standard-gaussian"

    def __post_init__(self):
        if abs(self.grid.T - self.schedule.horizon_T) > 1e-12:
            raise ValueError("grid and schedule disagree on T")
        if self.grid.nodes[-1] > self.schedule.horizon_T - self.schedule.early_stop_delta + 1e-12:
            raise ValueError("grid runs past T - delta")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if isinstance(self.init, str):
            if self.init != "standard-gaussian":
                raise ValueError("init must be a 2-vector or 'standard-gaussian'")
        else:
            p = np.asarray(self.init, dtype=float)
            if p.shape != (2,) or not np.all(np.isfinite(p)):
                raise ValueError("init point must be a finite 2-vector")
            object.__setattr__(self, "init", tuple(p.tolist()))


@dataclass
class Trajectory:
    times: np.ndarray
    x_states: np.ndarray
    z_states: np.ndarray
    dist_to_target: np.ndarray  # z-space distance to the guided support
    dist_x: np.ndarray
    seed: int
    index: int = 0
    target: int = 0
    status: str = "ok"
    blowup_step: int | None = None
    T: float = DEFAULT_T

    @property
    def final_state(self) -> np.ndarray:
        return self.x_states[-1]

    @property
    def final_dist(self) -> float:
        """x-space distance at the last node."""
        return float(self.dist_x[-1])


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(index),))))


def _check_step(tau, delta, T):
    if not (0 <= tau and delta > 0 and tau + delta < T):
        raise ValueError("need 0 <= t_k, delta_k > 0 and t_k + delta_k < T")


def _drift_terms(model: MixtureModel, X, t, targets):
    """score + gamma-free guidance pieces for rows of X at forward time t; targets per row."""
    lt, st = lam(t), sigma(t)
    summ = summary_at_sigma(model, X / lt, st / lt, t)
    off = summ.m - summ.z[:, None, :]
    mix = np.sum(summ.zeta[..., None] * off, axis=1)
    c = lt / (st * st)
    return c * mix, c * (off[np.arange(X.shape[0]), targets] - mix)


def _step_many(model, X, tau, delta, spec, T, targets, noise=None, include_drift=True):
    eD = math.exp(delta)
    out = eD * X
    if include_drift:
        sc, gd = _drift_terms(model, X, T - tau, targets)
        drift = spec.drift_factor * (sc + spec.gamma * gd)
        out = out + (eD - 1.0) * drift
    if spec.sampler_kind == "ddpm":
        out = out + math.sqrt(math.expm1(2.0 * delta)) * noise
    return out


def ddim_step(model: MixtureModel, x, t_k: float, delta_k: float, spec: GuidedDriftSpec, T: float = DEFAULT_T):
    """Deterministic exponential-integrator step from reverse time t_k."""
    _check_step(t_k, delta_k, T)
    if spec.sampler_kind != "ddim":
        spec = GuidedDriftSpec(spec.gamma, spec.target_label, "ddim")
    x = np.asarray(x, dtype=float)
    out = _step_many(model, x.reshape(1, 2), t_k, delta_k, spec, T, np.array([spec.target_label]))[0]
    if not np.all(np.isfinite(out)):
        raise NumericalBlowupError("non-finite drift", state=x, step=None)
    return out


def ddpm_step(
    model: MixtureModel,
    x,
    t_k: float,
    delta_k: float,
    spec: GuidedDriftSpec,
    rng: np.random.Generator | None = None,
    T: float = DEFAULT_T,
    noise=None,
    include_drift: bool = True,
):
    """Stochastic step; pass ``noise`` to fix Z, or ``include_drift=False`` to isolate the noise term."""
    _check_step(t_k, delta_k, T)
    if spec.sampler_kind != "ddpm":
        spec = GuidedDriftSpec(spec.gamma, spec.target_label, "ddpm")
    x = np.asarray(x, dtype=float)
    if noise is None:
        if rng is None:
            raise ValueError("ddpm_step needs an rng or explicit noise")
        noise = rng.standard_normal(2)
    noise = np.asarray(noise, dtype=float).reshape(1, 2)
    out = _step_many(
        model, x.reshape(1, 2), t_k, delta_k, spec, T, np.array([spec.target_label]), noise, include_drift
    )[0]
    if not np.all(np.isfinite(out)):
        raise NumericalBlowupError("non-finite drift", state=x, step=None)
    return out


def zspace_ddim_step(model: MixtureModel, z, t_k: float, delta_k: float, spec: GuidedDriftSpec, T: float = DEFAULT_T):
    """DDIM step written in z = x / lam_{T - t} coordinates.

    Returns z at node k+1, i.e. ``z + (1 - e^{-Delta}) G(z)`` with G the z-space drift
    frozen at t_k; multiplying by ``lam(T - t_k - Delta)`` gives the x-space step.
    """
    _check_step(t_k, delta_k, T)
    if spec.sampler_kind != "ddim":
        spec = GuidedDriftSpec(spec.gamma, spec.target_label, "ddim")
    z = np.asarray(z, dtype=float)
    return z + (-math.expm1(-delta_k)) * z_drift(model, z, t_k, spec, T)


def _initial_states(config: GuidedRunConfig, gens, inits):
    n = len(gens)
    if inits is not None:
        X = np.array(inits, dtype=float).reshape(n, 2)
    elif isinstance(config.init, str):
        X = np.stack([g.standard_normal(2) for g in gens])
    else:
        X = np.tile(np.asarray(config.init, dtype=float), (n, 1))
    return X


def run_batch(config: GuidedRunConfig, n: int, inits=None, targets=None, first_index: int = 0) -> list[Trajectory]:
    """n trajectories with streams (seed, first_index + i); blowups are recorded per row, never raised.

    ``inits`` overrides the config's initial policy with one point per row; ``targets``
    assigns a guided label per row (defaults to the drift target).
    """
    if n < 1:
        raise ValueError("need n >= 1")
    model, spec, grid = config.model, config.spec, config.grid
    T = grid.T
    idx = np.arange(first_index, first_index + n)
    gens = [trajectory_rng(config.seed, i) for i in idx]
    tg = np.full(n, spec.target_label) if targets is None else np.asarray(targets, dtype=int).reshape(n)
    X = _initial_states(config, gens, inits)

    nodes = grid.nodes
    N = nodes.size
    xs = np.full((N, n, 2), np.nan)
    xs[0] = X
    alive = np.all(np.isfinite(X), axis=1)
    blow = np.full(n, -1)
    stochastic = spec.sampler_kind == "ddpm"
    for k in range(N - 1):
        tau, delta = nodes[k], nodes[k + 1] - nodes[k]
        # every row consumes its noise, alive or not, so streams stay aligned
        Z = np.stack([g.standard_normal(2) for g in gens]) if stochastic else None
        rows = np.flatnonzero(alive)
        if rows.size == 0:
            break
        with np.errstate(all="ignore"):
            new = _step_many(model, X[rows], tau, delta, spec, T, tg[rows], None if Z is None else Z[rows])
        bad = ~np.all(np.isfinite(new), axis=1) | (np.linalg.norm(new, axis=1) > BLOWUP_NORM)
        blow[rows[bad]] = k + 1
        alive[rows[bad]] = False
        good = rows[~bad]
        X[good] = new[~bad]
        xs[k + 1, good] = X[good]

    lams = np.exp(-(T - nodes))
    out = []
    for j in range(n):
        xj = xs[:, j]
        zj = xj / lams[:, None]
        sup = model.supports[tg[j]]
        finite = np.all(np.isfinite(xj), axis=1)
        dz = np.full(N, np.nan)
        dx = np.full(N, np.nan)
        if finite.any():
            dz[finite] = sup.distance(zj[finite])
            dx[finite] = sup.distance(xj[finite])
        out.append(
            Trajectory(
                times=nodes.copy(),
                x_states=xj,
                z_states=zj,
                dist_to_target=dz,
                dist_x=dx,
                seed=int(config.seed),
                index=int(idx[j]),
                target=int(tg[j]),
                status="ok" if blow[j] < 0 else "blowup",
                blowup_step=None if blow[j] < 0 else int(blow[j]),
                T=float(T),
            )
        )
    return out


def run_trajectory(config: GuidedRunConfig, index: int = 0) -> Trajectory:
    """Single trajectory on stream (seed, index); raises NumericalBlowupError on divergence."""
    traj = run_batch(config, 1, first_index=index)[0]
    if traj.status != "ok":
        k = traj.blowup_step
        raise NumericalBlowupError(
            f"trajectory diverged at step {k}", state=traj.x_states[k - 1], step=k
        )
    return traj
