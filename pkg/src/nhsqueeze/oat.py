"""Closed-form moments of the dissipative one-axis-twisting Hamiltonian.

    H0 = chi Sz^2 + (epsilon - i gamma)(Sz + S)

is diagonal in the Dicke basis, so a coherent state stays of the form
``c_k ~ z~^k sqrt(C(2S,k))`` up to twisting phases with ``z~ = z exp(-gamma t)``.
All large powers are evaluated in the log domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import CouplingSet
from .errors import DomainError
from .spin import css_parameter


@dataclass(frozen=True)
class OatMoments:
    S: float
    sz: float
    sz2: float
    sp: complex
    sp2: complex
    anticomm_pm: float
    z_tilde: complex

    @property
    def sx(self) -> float:
        return float(self.sp.real)

    @property
    def sy(self) -> float:
        return float(self.sp.imag)

    @property
    def sx2(self) -> float:
        return 0.5 * self.sp2.real + 0.25 * self.anticomm_pm

    @property
    def sy2(self) -> float:
        return -0.5 * self.sp2.real + 0.25 * self.anticomm_pm

    @property
    def var_x(self) -> float:
        return self.sx2 - self.sx**2

    @property
    def var_y(self) -> float:
        return self.sy2 - self.sy**2

    @property
    def mean(self) -> np.ndarray:
        return np.array([self.sx, self.sy, self.sz])

    def casimir_residual(self) -> float:
        return abs(self.sx2 + self.sy2 + self.sz2 - self.S * (self.S + 1))


def _log_power(base: complex, n: int) -> complex:
    """Principal ``log(base**n)``; ``n`` is an integer so the branch is immaterial."""
    if base == 0:
        return -np.inf if n > 0 else (0.0 if n == 0 else np.inf)
    return n * np.log(complex(base))


def oat_moments(S: float, theta0: float, phi0: float, c: CouplingSet, t: float) -> OatMoments:
    """Moments of the coherent state ``(theta0, phi0)`` evolved under ``H0`` for a time ``t``."""
    if c.V != 0:
        raise DomainError("closed-form OAT moments require V = 0")
    two_S = int(round(2 * S))
    if two_S < 1 or abs(two_S - 2 * S) > 1e-12:
        raise DomainError(f"S must be a positive half-integer, got {S}")
    if t < 0:
        raise DomainError(f"time must be non-negative, got {t}")
    zt = css_parameter(theta0, phi0) * np.exp(-c.gamma * t)
    a = abs(zt) ** 2
    frac = a / (1 + a) ** 2
    sz = -S * (1 - a) / (1 + a)
    sz2 = S**2 - 2 * S * (two_S - 1) * frac
    anti = 2 * S + 4 * S * (two_S - 1) * frac
    log_norm = two_S * np.log1p(a)
    chi, eps = c.chi, c.epsilon
    base1 = np.exp(-1j * chi * t) + a * np.exp(1j * chi * t)
    sp = two_S * np.conj(zt) * np.exp(1j * eps * t) * np.exp(_log_power(base1, two_S - 1) - log_norm)
    if two_S == 1:
        sp2 = 0j  # S+^2 annihilates every spin-1/2 state
    else:
        base2 = np.exp(-2j * chi * t) + a * np.exp(2j * chi * t)
        sp2 = (
            two_S * (two_S - 1) * np.conj(zt) ** 2 * np.exp(2j * eps * t)
            * np.exp(_log_power(base2, two_S - 2) - log_norm)
        )
    return OatMoments(float(S), float(sz), float(sz2), complex(sp), complex(sp2), float(anti), complex(zt))


def oat_asymptote(S: float) -> OatMoments:
    """``t -> infinity`` limit for ``gamma > 0``: the lowest-weight state."""
    return OatMoments(float(S), -float(S), float(S) ** 2, 0j, 0j, 2.0 * S, 0j)
