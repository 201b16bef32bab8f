"""Gaussian-smoothed mixture quantities for uniform components on compact sets.

For a query ``z`` and bandwidth ``s`` (the noise-to-signal ratio at time t)
each component contributes

    M(z) = int_K exp(-|x - z|^2 / (2 s^2)) dx      (reported as log M + d^2/(2 s^2))
    m(z) = int_K x exp(...) dx / M(z)

with ``d = dist(z, K)``.  Posterior weights ``zeta`` and tilted means ``m``
follow from these.  Integration is exact along vertical chords (erf) and uses
Gauss-Legendre in x1 on intervals split at the shape's kinks and graded
geometrically around the projection of z, where the mass concentrates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf, log_ndtr, logsumexp

from .geometry import SupportSet, pair_gap, sample_uniform, set_separation
from .schedule import lam, sigma
from .schedule import sigma_tilde as _sigma_tilde

N_GAUSS = 16
GRADE_RATIO = 2.5
MAX_GRADE_LEVELS = 200
SIGMA_FLOOR = 1e-4
_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)
_SQRT_HALF = math.sqrt(0.5)

_gx, _gw = np.polynomial.legendre.leggauss(N_GAUSS)
# sine map clusters nodes at both ends so sqrt-type chord endpoints integrate spectrally
_MAP_U = np.sin(0.5 * np.pi * _gx)
_MAP_W = 0.5 * np.pi * np.cos(0.5 * np.pi * _gx) * _gw


class AssumptionViolation(ValueError):
    """Mixture does not satisfy the model assumptions."""


class ResolutionError(RuntimeError):
    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class DegenerateOracleError(RuntimeError):
    pass


# ----------------------------------------------------------------- model


@dataclass(frozen=True)
class MixtureModel:
    """Mixture of uniform densities on pairwise-disjoint compact sets."""

    weights: tuple
    supports: tuple
    target: int

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        supports = tuple(self.supports)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "supports", supports)
        if len(w) != len(supports) or not w:
            raise ValueError("need one weight per support")
        if any(x <= 0 for x in w):
            raise AssumptionViolation("Assumption 1: mixture weights must be positive")
        if abs(sum(w) - 1.0) > 1e-12:
            raise AssumptionViolation(f"Assumption 1: weights must satisfy Σ w_η = 1 (got {sum(w)!r})")
        if not 0 <= self.target < len(w):
            raise AssumptionViolation("Assumption 1.2: target label must index a component with w_η0 > 0")
        for i in range(len(supports)):
            for j in range(i + 1, len(supports)):
                if pair_gap(supports[i], supports[j]) <= 0:
                    raise AssumptionViolation(
                        f"Assumption 1.1: supports {i} and {j} intersect (K_η ∩ K_η' must be empty)"
                    )

    @property
    def n_components(self) -> int:
        return len(self.weights)

    @property
    def log_areas(self) -> np.ndarray:
        return np.log([s.area for s in self.supports])

    @property
    def target_support(self) -> SupportSet:
        return self.supports[self.target]

    def separation(self):
        return set_separation(list(self.supports))

    def translated(self, v):
        return MixtureModel(self.weights, tuple(s.translated(v) for s in self.supports), self.target)

    def with_target(self, target: int):
        return MixtureModel(self.weights, self.supports, target)


@dataclass
class PosteriorSummary:
    z: np.ndarray
    t: np.ndarray
    sigma_tilde: np.ndarray
    log_mass: np.ndarray  # shifted: log int_K exp(-(|x-z|^2 - d^2)/(2 s^2)) dx
    shift: np.ndarray  # d^2 = dist(z, K)^2 per component
    log_zeta: np.ndarray
    zeta: np.ndarray
    m: np.ndarray

    @property
    def force(self) -> np.ndarray:
        """m - z per component."""
        return self.m - self.z[..., None, :]


# ----------------------------------------------------------------- quadrature


def _log1mexp(x):
    # log(1 - exp(x)) for x <= 0
    return np.where(x > -math.log(2.0), np.log(-np.expm1(x)), np.log1p(-np.exp(x)))


def _log_ndtr_diff(a, b, width=None):
    """log(Phi(b) - Phi(a)) for a <= b, accurate in both tails.

    ``width`` may carry b - a computed without the cancellation that forming a
    and b from large offsets incurs.
    """
    out = np.full(a.shape, -np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = 0.5 * (a + b)
        h = 0.5 * (b - a) if width is None else 0.5 * width
        # narrow intervals: midpoint series in Hermite polynomials (erf differences would cancel)
        narrow = (h > 0) & (h * np.maximum(1.0, np.abs(c)) < 1e-3)
        # near the origin erf keeps relative precision, so use it whenever both ends are small
        mid = ~narrow & (((a <= 0) & (b >= 0)) | ((np.abs(a) <= 1) & (np.abs(b) <= 1)))
        up = ~narrow & ~mid & (a > 0)
        lo = ~narrow & ~mid & (b < 0)
        if narrow.any():
            cn, hn = c[narrow], h[narrow]
            c2, h2 = cn * cn, hn * hn
            corr = h2 * (c2 - 1.0) / 6.0 + h2 * h2 * (c2 * c2 - 6.0 * c2 + 3.0) / 120.0
            out[narrow] = np.log(2.0 * hn) - 0.5 * c2 - _LOG_SQRT_2PI + np.log1p(corr)
        if up.any():
            la, lb = log_ndtr(-a[up]), log_ndtr(-b[up])
            out[up] = la + _log1mexp(lb - la)
        if lo.any():
            la, lb = log_ndtr(a[lo]), log_ndtr(b[lo])
            out[lo] = lb + _log1mexp(la - lb)
        if mid.any():
            out[mid] = np.log(0.5 * (erf(b[mid] * _SQRT_HALF) - erf(a[mid] * _SQRT_HALF)))
    return out


def _breakpoints(support, p1, d, s, b1, e):
    """Kinks plus geometric grading around p1 (projection) and b1 (nearest boundary abscissa)."""
    box = support.bounding_box()
    q = p1.shape[0]
    eps = 0.25 * s * np.minimum(1.0, s / np.maximum(d, 1e-300))
    eps_b = 0.25 * s * np.minimum(1.0, s / np.maximum(e, 1e-300))
    # enough levels for the finest query; surplus levels clip onto the box edge and drop out
    width = box.xmax - box.xmin
    levels = int(np.ceil(np.log(width / min(eps.min(), eps_b.min())) / np.log(GRADE_RATIO))) + 1
    if levels > MAX_GRADE_LEVELS:
        raise ResolutionError("bandwidth too small for the graded mesh")
    ramp = GRADE_RATIO ** np.arange(max(levels, 1))
    grades, grades_b = eps[:, None] * ramp, eps_b[:, None] * ramp
    fixed = np.concatenate([[box.xmin, box.xmax], support.kinks()])
    graded = np.concatenate(
        [p1[:, None], p1[:, None] - grades, p1[:, None] + grades, b1[:, None], b1[:, None] - grades_b, b1[:, None] + grades_b],
        axis=1,
    )
    spacing = np.concatenate([eps[:, None], grades, grades, eps_b[:, None], grades_b, grades_b], axis=1)
    # a breakpoint just short of a kink leaves a near-singular interval end; move it onto the kink
    gap = np.abs(graded[:, :, None] - fixed)
    j = np.argmin(gap, axis=-1)
    near = np.take_along_axis(gap, j[..., None], axis=-1)[..., 0] < 0.5 * spacing
    graded = np.where(near, fixed[j], graded)
    pts = np.concatenate([np.broadcast_to(fixed, (q, fixed.size)), graded], axis=1)
    pts = np.sort(np.clip(pts, box.xmin, box.xmax), axis=1)
    covered = (p1 - grades[:, -1] <= box.xmin) & (p1 + grades[:, -1] >= box.xmax)
    return pts, covered


def shifted_moments(support: SupportSet, z, s):
    """Per-query (log M + d^2/(2 s^2), d^2, mean offset m - z) for one support.

    ``z`` has shape (Q, 2) and ``s`` shape (Q,).  Results for a query depend
    only on that query, bit for bit, whatever else is in the batch.
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    s = np.broadcast_to(np.asarray(s, dtype=float), z.shape[:1]).copy()
    if np.any(s <= 0):
        raise ValueError("sigma_tilde must be positive")
    d = np.asarray(support.distance(z), dtype=float)
    p = support.project(z)
    inside = d == 0
    # interior queries near the boundary need resolution there as well; exterior ones reuse p
    b = np.where(inside[:, None], support.boundary_project(z), p)
    e = np.where(inside, np.hypot(*(b - z).T), d)
    bps, covered = _breakpoints(support, p[:, 0], d, s, b[:, 0], e)

    a, b = bps[:, :-1], bps[:, 1:]
    valid = b > a
    qi = np.broadcast_to(np.arange(z.shape[0])[:, None], a.shape)[valid]
    a, b = a[valid], b[valid]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    x = (mid[:, None] + half[:, None] * _MAP_U).ravel()
    jac = (half[:, None] * _MAP_W).ravel()
    qn = np.repeat(qi, N_GAUSS)

    z1, z2, sn, d2 = z[qn, 0], z[qn, 1], s[qn], (d * d)[qn]
    lo, hi, sg = support.chords(x)
    live = hi > lo
    dx1 = x - z1
    inv2s2 = 0.5 / (sn * sn)
    e1 = (d2 - dx1 * dx1) * inv2s2
    alpha = (lo - z2[:, None]) / sn[:, None]
    beta = (hi - z2[:, None]) / sn[:, None]
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        width = np.where(live, (hi - lo) / sn[:, None], 0.0)
        log_inner = _log_ndtr_diff(np.where(live, alpha, 0.0), np.where(live, beta, 0.0), width)
        piece = np.where(live, np.exp(e1[:, None] + np.log(sn)[:, None] + _LOG_SQRT_2PI + log_inner), 0.0)
        eb = (d2[:, None] - dx1[:, None] ** 2 - (hi - z2[:, None]) ** 2) * inv2s2[:, None]
        # e^ea - e^eb with ea - eb formed directly, so huge bandwidths keep precision
        gap = (hi - lo) * (hi + lo - 2.0 * z2[:, None]) * inv2s2[:, None]
        diff = np.where(np.abs(gap) < 1.0, np.exp(eb) * np.expm1(gap), np.exp(eb + gap) - np.exp(eb))
        mom2 = np.where(live, (sn * sn)[:, None] * diff, 0.0)
    mass_node = np.sum(sg * piece, axis=-1) * jac
    mom2_node = np.sum(sg * mom2, axis=-1) * jac

    starts = np.flatnonzero(np.r_[True, qn[1:] != qn[:-1]])
    mass = np.add.reduceat(mass_node, starts)
    m1 = np.add.reduceat(mass_node * dx1, starts)
    m2 = np.add.reduceat(mom2_node, starts)

    offset = np.stack([m1, m2], axis=-1) / mass[:, None]
    with np.errstate(divide="ignore"):
        log_mass = np.log(mass)
    bad = ~np.isfinite(log_mass) | ~np.all(np.isfinite(offset), axis=-1) | (mass < 1e-300)
    if np.any(bad):
        tiny = bad & (s < SIGMA_FLOOR)
        if np.any(bad & ~tiny):
            raise ResolutionError("quadrature failed to resolve the smoothed mass", estimate=log_mass)
        # mean collapses onto the projection as the bandwidth vanishes
        offset[tiny] = p[tiny] - z[tiny]
    if not np.all(covered | (s < SIGMA_FLOOR)):
        raise ResolutionError("graded mesh does not span the support", estimate=log_mass)
    return log_mass, d * d, offset


def smoothed_log_mass(support: SupportSet, z, sigma_tilde: float):
    """(shifted log-mass, shift d^2) for a single query point."""
    lm, d2, _ = shifted_moments(support, np.asarray(z, dtype=float)[None, :], np.array([sigma_tilde]))
    return float(lm[0]), float(d2[0])


def tilted_mean(support: SupportSet, z, sigma_tilde: float) -> np.ndarray:
    """Mean of the uniform law on K tilted by exp(-|x - z|^2/(2 sigma_tilde^2))."""
    z = np.asarray(z, dtype=float)
    _, _, off = shifted_moments(support, z.reshape(-1, 2), np.full(z.reshape(-1, 2).shape[0], sigma_tilde))
    return (z.reshape(-1, 2) + off).reshape(z.shape)


def log_component_masses(model: MixtureModel, z, s):
    """Unnormalized log posterior weights log(w/area) + log M, plus shifted masses, shifts and offsets."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    s = np.broadcast_to(np.asarray(s, dtype=float), z.shape[:1])
    lms, d2s, offs = [], [], []
    for sup in model.supports:
        lm, d2, off = shifted_moments(sup, z, s)
        lms.append(lm)
        d2s.append(d2)
        offs.append(off)
    lm, d2, off = np.stack(lms, -1), np.stack(d2s, -1), np.stack(offs, -2)
    logw = np.log(model.weights) - model.log_areas + lm - d2 / (2.0 * s[:, None] ** 2)
    return logw, lm, d2, off


def summary_at_sigma(model: MixtureModel, z, s, t=None) -> PosteriorSummary:
    z = np.atleast_2d(np.asarray(z, dtype=float))
    s = np.broadcast_to(np.asarray(s, dtype=float), z.shape[:1]).copy()
    logw, lm, d2, off = log_component_masses(model, z, s)
    log_zeta = logw - logsumexp(logw, axis=-1, keepdims=True)
    t = np.full(s.shape, np.nan) if t is None else np.broadcast_to(np.asarray(t, dtype=float), s.shape)
    return PosteriorSummary(
        z=z, t=t, sigma_tilde=s, log_mass=lm, shift=d2, log_zeta=log_zeta, zeta=np.exp(log_zeta), m=z[:, None, :] + off
    )


def _squeeze(summary: PosteriorSummary) -> PosteriorSummary:
    return PosteriorSummary(**{k: v[0] for k, v in summary.__dict__.items()})


def posterior_summary(model: MixtureModel, z, t) -> PosteriorSummary:
    """Posterior weights and tilted means at z-space point(s) z and forward time t > 0."""
    z = np.asarray(z, dtype=float)
    single = z.ndim == 1
    s = _sigma_tilde(np.asarray(t, dtype=float))
    out = summary_at_sigma(model, z, s, t)
    return _squeeze(out) if single else out


def log_density(model: MixtureModel, x, t) -> np.ndarray:
    """log p_t(x) built from smoothed log-masses only (no tilted means)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    lt, st = lam(t), sigma(t)
    logw, *_ = log_component_masses(model, x / lt, st / lt)
    return logsumexp(logw, axis=-1) - math.log(2 * math.pi * st * st)


def log_posterior_weight(model: MixtureModel, x, t, label=None) -> np.ndarray:
    """log p_t(Y = label | X_t = x) from smoothed log-masses only."""
    label = model.target if label is None else label
    x = np.atleast_2d(np.asarray(x, dtype=float))
    lt, st = lam(t), sigma(t)
    logw, *_ = log_component_masses(model, x / lt, st / lt)
    return logw[:, label] - logsumexp(logw, axis=-1)


# ----------------------------------------------------------------- Monte Carlo oracle


@dataclass
class OracleSummary:
    summary: PosteriorSummary
    zeta_se: np.ndarray
    m_se: np.ndarray
    n_samples: int


def mc_oracle_summary(model: MixtureModel, z, t, n_samples: int, rng: np.random.Generator, sigma_tilde=None):
    """Plain Monte Carlo: uniform draws per component, self-normalized Gaussian weights."""
    if n_samples < 1000:
        raise ValueError("need n_samples >= 1000")
    z = np.asarray(z, dtype=float)
    s = float(_sigma_tilde(t) if sigma_tilde is None else sigma_tilde)
    C = model.n_components
    shifts = np.array([float(sup.distance(z)) ** 2 for sup in model.supports])
    g = shifts.min()
    a = np.empty(C)
    rel = np.empty(C)  # relative standard error of each unnormalized weight
    m = np.empty((C, 2))
    m_se = np.empty((C, 2))
    lm = np.empty(C)
    for k, (w, sup) in enumerate(zip(model.weights, model.supports)):
        x = sample_uniform(sup, rng, n_samples)
        dx, dy = x[:, 0] - z[0], x[:, 1] - z[1]
        wk = np.exp(-(dx * dx + dy * dy - shifts[k]) / (2 * s * s))
        if not np.any(wk > 0):
            raise DegenerateOracleError(f"all Monte Carlo weights vanished for component {k}")
        mean_w = wk.mean()
        lm[k] = math.log(sup.area * mean_w)
        scale = math.exp(-(shifts[k] - g) / (2 * s * s))
        a[k] = w * mean_w * scale
        rel[k] = wk.std(ddof=1) / (mean_w * math.sqrt(n_samples))
        sw = wk.sum()
        m[k] = wk @ x / sw
        m_se[k] = np.sqrt((wk * wk) @ (x - m[k]) ** 2) / sw
    S = a.sum()
    if S <= 0:
        raise DegenerateOracleError("posterior weights underflowed in every component")
    zeta = a / S
    # delta method with zeta_k factored out, so tiny weights do not underflow when squared
    # 1 - zeta_k and the cross sum are built from the other components, not by subtraction
    zr2 = (zeta * rel) ** 2
    rest = np.array([np.delete(zeta, k).sum() for k in range(C)])
    cross = np.array([np.delete(zr2, k).sum() for k in range(C)])
    zeta_se = zeta * np.sqrt(rest**2 * rel**2 + cross)
    with np.errstate(divide="ignore"):
        log_zeta = np.log(zeta)
    summary = PosteriorSummary(
        z=z, t=np.asarray(t, float), sigma_tilde=np.asarray(s), log_mass=lm, shift=shifts,
        log_zeta=log_zeta, zeta=zeta, m=m,
    )
    return OracleSummary(summary, zeta_se, m_se, n_samples)
