"""NV-centre ensemble coupled to a mechanical mode: per-phonon-number effective
couplings, Poisson-averaged observables and Xi^2 maps.

Energies are in MHz and times in microseconds. The effective spin Hamiltonian
for ``n`` phonons is

    eps_n Sz + chi Sz^2 + V (Sx^2 - Sy^2) - i gamma (Sz + S)

with ``eps_n = 2 (g1^2 - g2^2)(1 + 2n) / w_r``, ``chi = 2 (g1^2 + g2^2) / w_r`` and
``V = -4 g1 g2 / w_r``. The engine's ``eps (Sz + S)`` differs from this by a
global phase only.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from .engine import CouplingSet, NhModel, build_model, evolve_many, relative_couplings
from .errors import DomainError, PhononChannelError, SingularScalingError, SqueezeError
from .spin import coherent_state
from .squeezing import SqueezingReport, report_from_moments, spin_moments

MASS_TOL = 1e-10


@dataclass(frozen=True)
class NvConfig:
    omega_r: float
    g1: float
    g2: float
    gamma: float
    two_S: int
    n_ph: float = 0.0
    theta0: float = np.pi / 4
    phi0: float = 0.0
    delta: float = 0.0
    mass_tol: float = MASS_TOL

    def __post_init__(self):
        if not self.omega_r > 0:
            raise DomainError(f"omega_r must be positive, got {self.omega_r}")
        if self.g2 == 0:
            raise DomainError("g2 must be non-zero")
        if not self.gamma >= 0:
            raise DomainError(f"gamma must be non-negative, got {self.gamma}")
        if int(self.two_S) != self.two_S or self.two_S < 1:
            raise DomainError(f"two_S must be an integer >= 1, got {self.two_S}")
        if not self.n_ph >= 0:
            raise DomainError(f"n_ph must be non-negative, got {self.n_ph}")
        if self.delta != 0:
            raise DomainError("the effective model assumes zero detuning (delta = 0)")
        if not 0 < self.mass_tol < 1:
            raise DomainError(f"mass_tol must lie in (0, 1), got {self.mass_tol}")

    @property
    def S(self) -> float:
        return self.two_S / 2

    @property
    def ratio(self) -> float:
        return self.g1 / self.g2

    def phonon_fraction(self, n: float) -> float:
        """``m = (1 + 2n) / (2S)``."""
        return (1 + 2 * n) / self.two_S


def effective_couplings(cfg: NvConfig, n: float) -> CouplingSet:
    if not n >= 0:
        raise DomainError(f"phonon number must be non-negative, got {n}")
    g1, g2, w = cfg.g1, cfg.g2, cfg.omega_r
    return CouplingSet(
        chi=2 * (g1**2 + g2**2) / w,
        V=-4 * g1 * g2 / w,
        epsilon=2 * (g1**2 - g2**2) * (1 + 2 * n) / w,
        gamma=cfg.gamma,
    )


def xi2_first_principles(cfg: NvConfig, n: float) -> float:
    """``eta^2 + Gamma^2`` of the ``n``-phonon channel."""
    return relative_couplings(effective_couplings(cfg, n), cfg.S).Xi2


def xi2_linear_form(cfg: NvConfig, n: float) -> float:
    """Closed expression linear in ``g1/g2`` and ``gamma``; reported next to the quadratic value."""
    r, m = cfg.ratio, cfg.phonon_fraction(n)
    den = abs(r**2 * (1 - m) + (1 + m))
    if den == 0:
        raise SingularScalingError("singular scaling: epsilon - 2*S*chi = 0")
    return (2 * r + cfg.gamma / (4 * cfg.S * cfg.g2**2 / cfg.omega_r)) / den


def phonon_weights(n_ph: float, mass_tol: float = MASS_TOL) -> list[tuple[int, float]]:
    """Smallest contiguous Poisson window around the mode holding ``1 - mass_tol``.

    The window grows one step at a time towards the heavier neighbour; the
    returned weights are renormalized over it.
    """
    if not n_ph >= 0:
        raise DomainError(f"n_ph must be non-negative, got {n_ph}")
    if not 0 < mass_tol < 1:
        raise DomainError(f"mass_tol must lie in (0, 1), got {mass_tol}")
    if n_ph == 0:
        return [(0, 1.0)]

    def logp(n):
        return n * np.log(n_ph) - n_ph - gammaln(n + 1)

    lo = hi = int(np.floor(n_ph))
    mass = np.exp(logp(lo))
    p_lo = np.exp(logp(lo - 1)) if lo > 0 else 0.0
    p_hi = np.exp(logp(hi + 1))
    while mass < 1 - mass_tol:
        if p_lo >= p_hi and lo > 0:
            lo -= 1
            mass += p_lo
            p_lo = np.exp(logp(lo - 1)) if lo > 0 else 0.0
        else:
            hi += 1
            mass += p_hi
            p_hi = np.exp(logp(hi + 1))
    n = np.arange(lo, hi + 1)
    w = np.exp(logp(n))
    w /= w.sum()
    return [(int(k), float(x)) for k, x in zip(n, w)]


class ChannelMoments(NamedTuple):
    mean: np.ndarray
    second: np.ndarray
    imag_residue: float


def channel_model(cfg: NvConfig, n: int) -> NhModel:
    return build_model(cfg.two_S, effective_couplings(cfg, n))


def _channel_moments(cfg: NvConfig, n: int, times) -> tuple[list[ChannelMoments], dict]:
    try:
        model = channel_model(cfg, n)
        psi = coherent_state(model.basis, cfg.theta0, cfg.phi0)
        states = evolve_many(model.spectrum, psi, times, rescale=True)
        out = [ChannelMoments(*spin_moments(s, model.metric, model.ops)) for s in states]
    except SqueezeError as exc:
        raise PhononChannelError(n, exc) from exc
    return out, model.diagnostics()


@dataclass(frozen=True)
class NvMoments:
    times: np.ndarray
    mean: np.ndarray  # (len(times), 3)
    second: np.ndarray  # (len(times), 3, 3)
    weights: list[tuple[int, float]]
    diagnostics: dict


def nv_moments(cfg: NvConfig, times) -> NvMoments:
    """Poisson-averaged first and second spin moments at each time."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    weights = phonon_weights(cfg.n_ph, cfg.mass_tol)
    mean = np.zeros((len(times), 3))
    second = np.zeros((len(times), 3, 3))
    worst_residue, min_metric_eig, max_biorth = 0.0, np.inf, 0.0
    for n, w in weights:
        moms, diag = _channel_moments(cfg, n, times)
        for i, m in enumerate(moms):
            mean[i] += w * m.mean
            second[i] += w * m.second
            worst_residue = max(worst_residue, m.imag_residue)
        min_metric_eig = min(min_metric_eig, diag["metric_min_eigenvalue"])
        max_biorth = max(max_biorth, diag["biorthonormality"])
    diagnostics = {
        "phonon_window": [weights[0][0], weights[-1][0]],
        "imag_residue": worst_residue,
        "metric_min_eigenvalue": min_metric_eig,
        "biorthonormality": max_biorth,
    }
    return NvMoments(times, mean, second, weights, diagnostics)


def nv_observable(cfg: NvConfig, obs: str, t: float) -> float:
    """Phonon-averaged ``<S_i>`` (``obs`` in x, y, z) or ``<S_i S_j>_sym`` (e.g. ``"xy"``)."""
    axes = {"x": 0, "y": 1, "z": 2}
    if not t >= 0:
        raise DomainError(f"time must be non-negative, got {t}")
    if not obs or len(obs) > 2 or any(a not in axes for a in obs):
        raise DomainError(f"unknown observable {obs!r}")
    m = nv_moments(cfg, [t])
    if len(obs) == 1:
        return float(m.mean[0, axes[obs]])
    return float(m.second[0, axes[obs[0]], axes[obs[1]]])


def nv_squeezing(cfg: NvConfig, times) -> list[SqueezingReport]:
    """Squeezing reports from the averaged moments (one frame per time)."""
    m = nv_moments(cfg, times)
    return [report_from_moments(m.mean[i], m.second[i], cfg.S) for i in range(len(m.times))]


class ContourPoint(NamedTuple):
    ratio: float
    fraction: float
    xi2: float | None
    xi2_linear: float | None


def contour_grid(cfg_base: NvConfig, r_range, m_range, resolution: int) -> list[ContourPoint]:
    """Xi^2 over ``(g1/g2, (1+2n)/(2S))``; singular or unphysical points map to ``None``."""
    (r0, r1), (m0, m1) = r_range, m_range
    if not (r0 > 0 and r1 > r0 and m0 > 0 and m1 > m0):
        raise DomainError("contour ranges must be positive and increasing")
    if resolution < 2:
        raise DomainError("resolution must be at least 2")
    points = []
    for r in np.linspace(r0, r1, resolution):
        cfg = _with_ratio(cfg_base, float(r))
        for m in np.linspace(m0, m1, resolution):
            n = (m * cfg.two_S - 1) / 2
            try:
                fp = xi2_first_principles(cfg, n)
            except (SingularScalingError, DomainError):
                fp = None
            try:
                pf = xi2_linear_form(cfg, n) if n >= 0 else None
            except SingularScalingError:
                pf = None
            points.append(ContourPoint(float(r), float(m), fp, pf))
    return points


def _with_ratio(cfg: NvConfig, ratio: float) -> NvConfig:
    return replace(cfg, g1=ratio * cfg.g2)
