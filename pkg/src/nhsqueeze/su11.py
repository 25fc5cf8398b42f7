"""Leading-order boson (SU(1,1)) model of the non-Hermitian LMG dynamics.

After the linearized Holstein-Primakoff mapping the Hamiltonian becomes

    H_B = h0 + 2 alpha K0 + 2SV (K+ + K-),   alpha = epsilon - 2S chi - i gamma

with ``K+ = b^dag^2 / 2``, ``K0 = b^dag b / 2 + 1/4``. Its propagator factorizes
as ``exp(-i t h0) exp(b+ K+) exp(ln b0 K0) exp(b- K-)`` with ``b- = b+``.

Closed forms are written with ``q = exp(-2 i t beta)``, ``Im beta <= 0``, so
``|q| <= 1`` and nothing overflows at long times. This is algebraically the
same as the tanh form and is invariant under ``beta -> -beta``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np
import scipy.linalg as sla

from .engine import CouplingSet, RelativeCouplings
from .errors import DisentanglementSingularityError, DomainError

K_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
K_MINUS = np.array([[0, 0], [-1, 0]], dtype=complex)
K_ZERO = 0.5 * np.diag([1.0, -1.0]).astype(complex)

REGION_TOL = 1e-9
SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class BosonCouplings:
    alpha: complex
    twoSV: float
    h0: complex
    phi_V: float
    S: float

    @property
    def generator(self) -> np.ndarray:
        """2x2 image of ``2 alpha K0 + 2SV (K+ + K-)``."""
        return 2 * self.alpha * K_ZERO + self.twoSV * (K_PLUS + K_MINUS)


def boson_couplings(c: CouplingSet, S: float) -> BosonCouplings:
    if c.V == 0:
        raise DomainError("the boson model needs V != 0")
    alpha = complex(c.epsilon - 2 * S * c.chi, -c.gamma)
    return BosonCouplings(alpha, 2 * S * c.V, c.chi * S**2 - alpha / 2, 0.0 if c.V > 0 else np.pi, float(S))


def beta_root(alpha: complex, v: float) -> complex:
    """Root of ``alpha^2 - v^2`` with ``Im <= 0`` (ties: ``Re >= 0``)."""
    b = np.sqrt(complex(alpha) ** 2 - v**2)
    if b.imag > 0 or (b.imag == 0 and b.real < 0):
        b = -b
    return complex(b)


@dataclass(frozen=True)
class BosonEvolution:
    t: float
    beta_hat: complex
    b0: complex
    b_plus: complex
    R0: complex
    R_minus: complex
    zeta_mod: float
    phi: float
    tau: float
    rho: float
    phi_V: float
    log_norm_factor: float

    @property
    def b_minus(self) -> complex:
        return self.b_plus

    @property
    def norm_factor(self) -> float:
        return float(np.exp(self.log_norm_factor))


def _disentangle(alpha: complex, v: float, t: float, beta: complex) -> tuple[complex, complex, float]:
    """``(b0, b+, log|b0|)``; the log stays finite after ``b0`` underflows."""
    if beta == 0:
        den = 1 + 1j * alpha * t
        if abs(den) < SINGULAR_TOL:
            raise DisentanglementSingularityError(f"disentanglement singularity at t={t:g}")
        return 1 / den**2, -v * 1j * t / den, -2 * np.log(abs(den))
    one_minus_q = -np.expm1(-2j * t * beta)
    q = 1 - one_minus_q
    den = beta * (1 + q) + alpha * one_minus_q
    scale = abs(beta) * (1 + abs(q)) + abs(alpha) * abs(one_minus_q)
    if abs(den) <= SINGULAR_TOL * scale:
        raise DisentanglementSingularityError(f"disentanglement singularity at t={t:g}")
    log_b0 = np.log(4 * abs(beta) ** 2) + 2 * t * beta.imag - 2 * np.log(abs(den))
    return 4 * beta**2 * q / den**2, -v * one_minus_q / den, float(log_b0)


def boson_params(c: CouplingSet, S: float, t: float) -> BosonEvolution:
    """Normal-ordering parameters and derived squeezed-state data at time ``t``."""
    if t < 0:
        raise DomainError(f"time must be non-negative, got {t}")
    bc = boson_couplings(c, S)
    beta = beta_root(bc.alpha, bc.twoSV)
    b0, bp, log_b0 = _disentangle(bc.alpha, bc.twoSV, t, beta)
    rho = abs(bp)
    if not rho < 1:
        raise DomainError(f"|b+| = {rho:.6g} >= 1")
    R0 = b0 / (1 - rho**2)
    Rm = np.conj(bp) * R0 - bp
    phi = float(np.angle(bp * np.exp(-1j * bc.phi_V))) if rho > 0 else 0.0
    tau = float(np.angle(np.exp(1j * (phi + bc.phi_V + np.pi))))
    log_abs_R0 = log_b0 - np.log1p(-(rho**2))
    log_inv_n2 = c.gamma * t + 2 * S * (abs(R0) + Rm.real - 1) + 0.5 * log_abs_R0
    return BosonEvolution(
        float(t), beta, complex(b0), complex(bp), complex(R0), complex(Rm),
        float(np.arctanh(rho)), phi, tau, float(rho), bc.phi_V, float(-0.5 * log_inv_n2),
    )


class FaithfulProduct(NamedTuple):
    G: np.ndarray
    b0: complex
    b_plus: complex
    b_minus: complex
    w1: complex
    w2: complex
    su11_residual: float


def faithful_rep_product(c: CouplingSet, S: float, t: float) -> FaithfulProduct:
    """``G = expm(-i t M)`` in the 2x2 representation and its normal-order decoding.

    ``G = [[1, b+], [0, 1]] diag(sqrt b0, 1/sqrt b0) [[1, 0], [-b-, 1]]``. For
    real ``alpha`` the matrix is ``[[w1, w2], [conj w2, conj w1]]`` with
    ``|w1|^2 - |w2|^2 = 1``; ``su11_residual`` measures the departure from that
    form (non-zero once gamma > 0 takes G into SL(2, C)).
    """
    bc = boson_couplings(c, S)
    G = sla.expm(-1j * t * bc.generator)
    g22 = G[1, 1]
    w1, w2 = G[0, 0], G[0, 1]
    residual = max(abs(G[1, 0] - np.conj(w2)), abs(G[1, 1] - np.conj(w1)), abs(abs(w1) ** 2 - abs(w2) ** 2 - 1))
    return FaithfulProduct(G, 1 / g22**2, G[0, 1] / g22, -G[1, 0] / g22, complex(w1), complex(w2), float(residual))


def quadrature_variances(evo: BosonEvolution) -> tuple[float, float, float, float]:
    """``(Var x, Var p, Qx, Qp)`` of the evolved squeezed coherent state.

    With ``b+ = rho exp(i psi)``: ``Var x = (cosh 2r + cos(psi) sinh 2r) / 2`` and
    ``Var p`` with the opposite sign, ``rho = tanh r``.
    """
    rho = evo.rho
    if not rho < 1:
        raise DomainError(f"rho = {rho:.6g} >= 1")
    return _variances(evo.b_plus)


def _variances(bp: complex) -> tuple[float, float, float, float]:
    rho2 = abs(bp) ** 2
    vx = 0.5 * (1 + rho2 + 2 * bp.real) / (1 - rho2)
    vp = 0.5 * (1 + rho2 - 2 * bp.real) / (1 - rho2)
    return float(vx), float(vp), float(2 * vx), float(2 * vp)


Region = Literal["I", "II", "boundary"]


@dataclass(frozen=True)
class AsymptoticSteadyState:
    rho_L: float
    phi: float
    region: Region
    Qx: float
    Qp: float
    beta_plus: float
    beta_minus: float
    b_plus: complex
    phi_printed: float
    rho_L_printed: float
    b_plus_printed: complex


def classify_region(Xi2: float) -> Region:
    if abs(Xi2 - 1) <= REGION_TOL:
        return "boundary"
    return "I" if Xi2 < 1 else "II"


def asymptotic_state(rel: RelativeCouplings, phi_V: float = 0.0) -> AsymptoticSteadyState:
    """``t -> infinity`` limit of ``b+`` in scaled units ``|epsilon - 2S chi| = 1``.

    The limit itself comes from ``q -> 0``: ``b+ -> -exp(i phi_V) eta / (beta + alpha)``
    with ``alpha = sigma - i Gamma``. For ``Gamma = 0`` below threshold the root
    is the ``Gamma -> 0+`` continuation ``beta = sigma sqrt(1 - eta^2)``. The
    closed-form ``beta_+-`` expressions are stored next to it for comparison.
    """
    eta, Gam, sigma = rel.eta, rel.Gamma, rel.sigma
    if not eta > 0:
        raise DomainError(f"eta must be positive, got {eta}")
    alpha = complex(sigma, -Gam)
    if Gam == 0 and eta < 1:
        beta = complex(sigma * np.sqrt(1 - eta**2))
    else:
        beta = beta_root(alpha, eta)
    bp = -np.exp(1j * phi_V) * eta / (beta + alpha)
    rho = abs(bp)
    phi = float(np.angle(bp * np.exp(-1j * phi_V)))

    u = 1 - eta**2 - Gam**2
    root = np.hypot(u, 2 * Gam)
    beta_p = np.sqrt(max(0.5 * (root + u), 0.0))
    beta_m = np.sqrt(max(0.5 * (root - u), 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        phi_printed = float(-np.arctan((beta_m - Gam) / (beta_p - sigma)))
        rho_printed = float(eta / np.hypot(beta_p - sigma, beta_m - Gam))
        bp_printed = complex(
            np.exp(1j * phi_V) * eta / (np.sqrt(complex(1, -sigma * Gam) ** 2 - eta**2) - complex(sigma, Gam))
        )
    if rho < 1:
        _, _, Qx, Qp = _variances(complex(bp))
    else:
        Qx = Qp = np.nan
    return AsymptoticSteadyState(
        float(rho), phi, classify_region(rel.Xi2), Qx, Qp, float(beta_p), float(beta_m),
        complex(bp), phi_printed, rho_printed, bp_printed,
    )


def phi_leading_order(eta: float, Gamma: float, sigma: int) -> float:
    """Small-Gamma phase of the asymptotic ``b+``, piecewise in ``Xi``."""
    if Gamma < 0:
        raise DomainError(f"Gamma must be non-negative, got {Gamma}")
    Xi2 = eta**2 + Gamma**2
    if abs(Xi2 - 1) <= REGION_TOL:
        raise DomainError("leading-order phase undefined at Xi = 1")
    if Xi2 < 1:
        return float(np.arctan(Gamma / (np.sqrt(1 - eta**2) - sigma)))
    return float(np.arctan(sigma * (np.sqrt(eta**2 - 1) - Gamma)))


class BosonSample(NamedTuple):
    t: float
    Qx: float
    Qp: float
    product: float


def boson_trajectory(c: CouplingSet, S: float, t_grid) -> tuple[list[BosonSample], list[float]]:
    """Q parameters along ``t_grid``; returns the samples and the skipped singular times."""
    rows, skipped = [], []
    for t in np.asarray(t_grid, dtype=float):
        try:
            evo = boson_params(c, S, float(t))
        except DisentanglementSingularityError:
            skipped.append(float(t))
            continue
        _, _, qx, qp = quadrature_variances(evo)
        rows.append(BosonSample(float(t), qx, qp, qx * qp))
    return rows, skipped
