"""Dicke basis, collective spin matrices and coherent spin states.

States are indexed by ``k = 0 .. 2S`` with ``|k> = |S, -S + k>``.  The total
spin is carried as the integer ``two_S`` so half-integer spins never appear
as floating-point labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import gammaln, xlogy

from .errors import DegenerateBasisError, DomainError


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpinBasis:
    two_S: int

    def __post_init__(self):
        if int(self.two_S) != self.two_S or self.two_S < 1:
            raise DegenerateBasisError(f"degenerate basis: two_S={self.two_S} (need integer >= 1)")
        object.__setattr__(self, "two_S", int(self.two_S))

    @property
    def S(self) -> float:
        return self.two_S / 2

    @property
    def dim(self) -> int:
        return self.two_S + 1

    @property
    def k_labels(self) -> np.ndarray:
        return np.arange(self.dim)

    @property
    def m_labels(self) -> np.ndarray:
        """Magnetic quantum numbers ``-S + k``."""
        return self.k_labels - self.S


@dataclass(frozen=True)
class SpinOperators:
    basis: SpinBasis
    sz: np.ndarray
    sp: np.ndarray
    sm: np.ndarray
    sx: np.ndarray
    sy: np.ndarray

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.basis.dim, dtype=complex)

    @property
    def cartesian(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.sx, self.sy, self.sz

    @cached_property
    def anticommutators(self) -> tuple[tuple[np.ndarray, ...], ...]:
        """The 3x3 table of symmetrized products ``(S_i S_j + S_j S_i) / 2``."""
        ops = self.cartesian
        table = [[None] * 3 for _ in range(3)]
        for i in range(3):
            for j in range(i, 3):
                a = 0.5 * (ops[i] @ ops[j] + ops[j] @ ops[i])
                table[i][j] = table[j][i] = _frozen(a)
        return tuple(tuple(row) for row in table)


@dataclass(frozen=True)
class StateVector:
    """Dicke-basis amplitudes; the physical vector is ``amplitudes * exp(log_scale)``."""

    amplitudes: np.ndarray
    basis: SpinBasis
    normalized: bool = field(default=False)
    log_scale: float = 0.0

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (self.basis.dim,):
            raise ValueError(f"state has shape {amp.shape}, basis dim is {self.basis.dim}")
        object.__setattr__(self, "amplitudes", _frozen(amp.copy()))

    @property
    def norm(self) -> float:
        """Euclidean norm of the physical vector (may underflow to 0)."""
        return float(np.linalg.norm(self.amplitudes) * np.exp(self.log_scale))


def build_basis(two_S: int) -> SpinBasis:
    return SpinBasis(two_S)


def spin_matrices(basis: SpinBasis) -> SpinOperators:
    """Dense matrices of S_z, S_+, S_-, S_x, S_y in the Dicke basis.

    Ladder elements are ``<k+1|S_+|k> = sqrt((k+1)(2S-k))``, real and positive.
    """
    d, two_S = basis.dim, basis.two_S
    k = np.arange(d - 1)
    sz = np.diag(basis.m_labels).astype(complex)
    sp = np.zeros((d, d), dtype=complex)
    sp[k + 1, k] = np.sqrt((k + 1.0) * (two_S - k))
    sm = sp.conj().T.copy()
    sx = 0.5 * (sp + sm)
    sy = (sp - sm) / 2j
    return SpinOperators(basis, *(_frozen(a) for a in (sz, sp, sm, sx, sy)))


def bloch_vector(theta: float, phi: float) -> np.ndarray:
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def css_parameter(theta0: float, phi0: float) -> complex:
    """Stereographic parameter z of the coherent state, ``c_k ~ z**k sqrt(C(2S,k))``.

    ``z = -exp(-i phi0) tan(theta0/2)``: with positive ladder elements this is the
    sign that makes ``(S . n0)|I> = -S|I>``.
    """
    return -np.exp(-1j * phi0) * np.tan(theta0 / 2)


def coherent_state(basis: SpinBasis, theta0: float, phi0: float) -> StateVector:
    """Coherent spin state with ``(S . n0)|I> = -S |I>``, ``n0 = n(theta0, phi0)``."""
    if not 0.0 <= theta0 <= np.pi:
        raise DomainError(f"theta0={theta0} outside [0, pi]")
    two_S = basis.two_S
    k = basis.k_labels
    if theta0 == np.pi:
        amp = np.zeros(basis.dim, dtype=complex)
        # limit of z**k / |z|**2S as |z| -> inf keeps the phase of z**2S
        amp[-1] = np.exp(-1j * phi0 * two_S) * (-1) ** two_S
        return StateVector(amp, basis, normalized=True)
    # log-domain magnitudes: binomials overflow long before dim ~ 1000
    half = theta0 / 2
    log_mag = 0.5 * (gammaln(two_S + 1) - gammaln(k + 1) - gammaln(two_S - k + 1))
    with np.errstate(divide="ignore"):
        log_mag = log_mag + xlogy(k, np.sin(half)) + xlogy(two_S - k, np.cos(half))
    phase = np.exp(1j * k * (np.pi - phi0))
    amp = np.where(np.isfinite(log_mag), np.exp(log_mag), 0.0) * phase
    amp /= np.linalg.norm(amp)
    return StateVector(amp, basis, normalized=True)


def dicke_state(basis: SpinBasis, k: int) -> StateVector:
    amp = np.zeros(basis.dim, dtype=complex)
    amp[k] = 1.0
    return StateVector(amp, basis, normalized=True)
