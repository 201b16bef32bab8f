"""Exact scores, guidance terms and guided drifts from posterior weights and tilted means.

With ``z = x / lam_t`` and ``s = sigma_t / lam_t``,

    score(x)    = -x / sigma^2 + lam / sigma^2 * sum_eta zeta_eta m_eta
    guidance(x) =  lam / sigma^2 * (m_target - sum_eta zeta_eta m_eta)

Both are assembled from the offsets ``m - z`` so the large ``z`` terms cancel
analytically instead of in floating point.  Sampler-facing functions take
reverse time ``tau`` and evaluate at forward time ``T - tau``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .posterior import MixtureModel, shifted_moments, summary_at_sigma
from .schedule import lam, sigma

SAMPLER_KINDS = ("ddim", "ddpm")


@dataclass(frozen=True)
class GuidedDriftSpec:
    gamma: float
    target_label: int
    sampler_kind: str = "ddim"

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError("guidance strength must be >= 0")
        if self.sampler_kind not in SAMPLER_KINDS:
            raise ValueError(f"sampler_kind must be one of {SAMPLER_KINDS}")
        if self.gamma < 1:
            warnings.warn(f"gamma = {self.gamma} < 1 lies outside the support-robustness regime", stacklevel=3)

    @property
    def below_theory(self) -> bool:
        """True when gamma < 1, where the convergence guarantees do not apply."""
        return self.gamma < 1

    @property
    def drift_factor(self) -> float:
        return 2.0 if self.sampler_kind == "ddpm" else 1.0


def _forward_time(t):
    t = float(t)
    if not t > 0:
        raise ValueError(f"forward time must be > 0, got {t}")
    return t


def score_and_guidance(model: MixtureModel, x, t, target=None):
    """(score, guidance) at x-space point(s) x and forward time t, sharing one posterior evaluation."""
    t = _forward_time(t)
    target = model.target if target is None else target
    x = np.asarray(x, dtype=float)
    xs = np.atleast_2d(x)
    lt, st = lam(t), sigma(t)
    summ = summary_at_sigma(model, xs / lt, st / lt, t)
    off = summ.m - summ.z[:, None, :]
    mix = np.sum(summ.zeta[..., None] * off, axis=1)
    c = lt / (st * st)
    sc, gd = c * mix, c * (off[:, target] - mix)
    if x.ndim == 1:
        return sc[0], gd[0]
    return sc, gd


def score(model: MixtureModel, x, t):
    """Gradient of log p_t at x (forward time t)."""
    return score_and_guidance(model, x, t)[0]


def guidance(model: MixtureModel, x, t, target=None):
    """Gradient of log p_t(target | x)."""
    return score_and_guidance(model, x, t, target)[1]


def guided_drift(model: MixtureModel, x, tau, spec: GuidedDriftSpec, T: float):
    """Reverse-time drift at reverse time tau: x + c * (score + gamma * guidance), c = 1 (ddim) or 2 (ddpm)."""
    if not 0 <= tau < T:
        raise ValueError("need 0 <= tau < T")
    sc, gd = score_and_guidance(model, x, T - tau, spec.target_label)
    return np.asarray(x, dtype=float) + spec.drift_factor * (sc + spec.gamma * gd)


def force_field(support, z, t):
    """F(z) = m(z) - z for one support at forward time t."""
    t = _forward_time(t)
    z = np.asarray(z, dtype=float)
    s = sigma(t) / lam(t)
    _, _, off = shifted_moments(support, z.reshape(-1, 2), np.full(z.reshape(-1, 2).shape[0], s))
    return off.reshape(z.shape)


def z_drift(model: MixtureModel, z, tau, spec: GuidedDriftSpec, T: float):
    """z-space drift gamma/sigma^2 F_target - (gamma - 1)/sigma^2 sum zeta F, doubled for ddpm."""
    if not 0 <= tau < T:
        raise ValueError("need 0 <= tau < T")
    t = T - tau
    z = np.asarray(z, dtype=float)
    zs = np.atleast_2d(z)
    summ = summary_at_sigma(model, zs, sigma(t) / lam(t), t)
    F = summ.m - zs[:, None, :]
    s2 = sigma(t) ** 2
    mix = np.sum(summ.zeta[..., None] * F, axis=1)
    g = spec.gamma
    out = spec.drift_factor * ((g / s2) * F[:, spec.target_label] - ((g - 1.0) / s2) * mix)
    return out[0] if z.ndim == 1 else out
