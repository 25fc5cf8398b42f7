"""Non-Hermitian OAT + Lipkin Hamiltonian: assembly, spectrum, metric, evolution.

The Hamiltonian is

    H = chi Sz^2 + V (Sx^2 - Sy^2) + (epsilon - i gamma) (Sz + S)

Right eigenvectors of ``H`` and their bi-orthonormal duals (eigenvectors of
``H^dagger``) give the spectral propagator; observables are weighted by a
positive metric operator built from the duals.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment

from .errors import (
    ConsistencyError,
    DomainError,
    EvolutionHorizonError,
    ExceptionalPointError,
    MetricConstructionError,
    PairingAmbiguityError,
    SingularScalingError,
)
from .spin import SpinBasis, SpinOperators, StateVector, build_basis, spin_matrices

log = logging.getLogger(__name__)

Pairing = Literal["quasi-hermitian", "general"]

EXP_LIMIT = 700.0
SCALE_FLOOR = 1e-12
COND_CEILING = 1e12


@dataclass(frozen=True)
class CouplingSet:
    chi: float
    V: float
    epsilon: float
    gamma: float

    def __post_init__(self):
        if not self.gamma >= 0:
            raise DomainError(f"gamma must be non-negative, got {self.gamma}")


@dataclass(frozen=True)
class RelativeCouplings:
    eta: float
    Gamma: float
    Xi2: float
    sigma: int


def relative_couplings(c: CouplingSet, S: float) -> RelativeCouplings:
    """``eta = |2SV| / |eps - 2S chi|``, ``Gamma = gamma / |eps - 2S chi|``."""
    denom = c.epsilon - 2 * S * c.chi
    if denom == 0.0:
        raise SingularScalingError("singular scaling: epsilon - 2*S*chi = 0")
    eta = abs(2 * S * c.V) / abs(denom)
    Gamma = c.gamma / abs(denom)
    return RelativeCouplings(eta, Gamma, eta * eta + Gamma * Gamma, int(np.sign(denom)))


def couplings_from_relative(
    two_S: int, eta: float, Gamma: float, sigma: int = -1, epsilon: float = 0.0, v_sign: int = 1
) -> CouplingSet:
    """Couplings in the scaled unit ``|epsilon - 2S chi| = 1``."""
    if sigma not in (-1, 1):
        raise DomainError(f"sigma must be +1 or -1, got {sigma}")
    if v_sign not in (-1, 1):
        raise DomainError(f"v_sign must be +1 or -1, got {v_sign}")
    return CouplingSet(
        chi=(epsilon - sigma) / two_S, V=v_sign * eta / two_S, epsilon=epsilon, gamma=Gamma
    )


def assemble_hamiltonian(ops: SpinOperators, c: CouplingSet) -> np.ndarray:
    S = ops.basis.S
    # Sx^2 - Sy^2 = (S+^2 + S-^2)/2 keeps the Lipkin term exactly real
    lipkin = 0.5 * (ops.sp @ ops.sp + ops.sm @ ops.sm)
    H = c.chi * (ops.sz @ ops.sz) + c.V * lipkin
    H = H + (c.epsilon - 1j * c.gamma) * (ops.sz + S * ops.identity)
    return H


@dataclass(frozen=True)
class NhSpectrum:
    """Eigen-data of H with bi-orthonormal duals.

    ``left_dual_vecs[:, a]`` is ``|psi_bar_a>`` with ``<psi_bar_a|phi_b> = delta_ab``.
    ``partner[a]`` is the index whose (shift-centred) eigenvalue is the
    conjugate of eigenvalue ``a``; it is only meaningful for the
    quasi-Hermitian pairing.
    """

    hamiltonian: np.ndarray
    eigvals: np.ndarray
    right_vecs: np.ndarray
    left_dual_vecs: np.ndarray
    pairing: Pairing
    condition_estimate: float
    imag_shift: float
    partner: np.ndarray | None
    tol_pair: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.eigvals)

    def biorthonormality_residual(self) -> float:
        G = self.left_dual_vecs.conj().T @ self.right_vecs
        return float(np.abs(G - np.eye(self.dim)).max())

    def reconstruction_residual(self) -> float:
        R, L = self.right_vecs, self.left_dual_vecs
        H_rec = (R * self.eigvals) @ L.conj().T
        scale = np.abs(self.hamiltonian).max() or 1.0
        return float(np.abs(self.hamiltonian - H_rec).max() / scale)


def _sort_order(w: np.ndarray) -> np.ndarray:
    return np.lexsort((w.imag, w.real))


def _match(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Permutation ``p`` minimizing ``sum |a[i] - b[p[i]]|``."""
    cost = np.abs(a[:, None] - b[None, :])
    _, cols = linear_sum_assignment(cost)
    return cols


def _conjugate_partner(w: np.ndarray, tol: float):
    """Match the centred spectrum to its conjugate; ``None`` if it is not closed."""
    shift = float(np.mean(w.imag))
    wc = w - 1j * shift
    if np.abs(wc.imag).max() <= tol:
        return shift, None  # real up to a uniform decay: no conjugate pairs
    p = _match(wc, wc.conj())
    if np.abs(wc - wc[p].conj()).max() > tol:
        return shift, None
    return shift, p


def diagonalize(H: np.ndarray, tol_pair: float | None = None) -> NhSpectrum:
    """Right eigenvectors of H and their bi-orthonormal duals from H^dagger.

    A spectrum that is closed under complex conjugation once its mean
    imaginary part is removed (the constant ``-i gamma S`` shift does not
    affect eigenvectors) is classified ``"quasi-hermitian"``; every other
    spectrum, including a real one, is ``"general"``.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"H must be square, got shape {H.shape}")
    d = H.shape[0]
    scale = np.abs(H).max() or 1.0
    diagnostics = {}

    if np.abs(H - H.conj().T).max() <= 1e-14 * scale:
        w, R = np.linalg.eigh(0.5 * (H + H.conj().T))
        w = w.astype(complex)
        order = _sort_order(w)
        w, R = w[order], R[:, order]
        L = R.copy()
        cond = 1.0
        diagnostics["dual_route"] = "hermitian"
    else:
        w, R = sla.eig(H)
        order = _sort_order(w)
        w, R = w[order], R[:, order]
        R = R / np.linalg.norm(R, axis=0)
        cond = float(np.linalg.cond(R))
        wl, Lraw = sla.eig(H.conj().T)
        p = _match(w.conj(), wl)
        wl, Lraw = wl[p], Lraw[:, p]
        diagnostics["adjoint_eig_mismatch"] = float(np.abs(wl - w.conj()).max())
        s = np.einsum("ia,ia->a", Lraw.conj(), R)
        a_bad = int(np.argmin(np.abs(s)))
        if cond > COND_CEILING or np.abs(s[a_bad]) < SCALE_FLOOR:
            gaps = np.abs(w - w[a_bad])
            gaps[a_bad] = np.inf
            b = int(np.argmin(gaps))
            raise ExceptionalPointError(
                f"exceptional-point proximity: eigenvalues {w[a_bad]:.6g}, {w[b]:.6g} "
                f"(scale {abs(s[a_bad]):.3g}, cond {cond:.3g})",
                pair=(complex(w[a_bad]), complex(w[b])),
            )
        L = Lraw / s.conj()
        G = L.conj().T @ R
        if np.abs(G - np.eye(d)).max() > 1e-10:
            # near-degenerate eigenvalues: independent duals lose cross-orthogonality
            L = np.linalg.inv(R).conj().T
            diagnostics["dual_route"] = "inverse"
        else:
            diagnostics["dual_route"] = "adjoint"

    if tol_pair is None:
        tol_pair = 1e-8 * max(float(np.abs(w).max()), 1e-300)
    shift, partner = _conjugate_partner(w, tol_pair)
    pairing: Pairing = "general" if partner is None else "quasi-hermitian"
    spec = NhSpectrum(H, w, R, L, pairing, cond, shift, partner, tol_pair, diagnostics)
    diagnostics["biorthonormality"] = spec.biorthonormality_residual()
    diagnostics["reconstruction"] = spec.reconstruction_residual()
    log.debug("diagonalize dim=%d pairing=%s cond=%.3g %s", d, pairing, cond, diagnostics)
    return spec


@dataclass(frozen=True)
class MetricOperator:
    matrix: np.ndarray
    construction: Literal["krein", "general"]
    min_eigenvalue: float
    symmetry: np.ndarray | None = None
    intertwining_residual: float | None = None

    def self_adjointness_residual(self) -> float:
        return float(np.abs(self.matrix - self.matrix.conj().T).max())


def krein_symmetry(spec: NhSpectrum, tol_pair: float | None = None) -> np.ndarray:
    """Indefinite symmetry operator pairing conjugate eigenvalues (all weights 1)."""
    tol = spec.tol_pair if tol_pair is None else tol_pair
    wc = spec.eigvals - 1j * spec.imag_shift
    L = spec.left_dual_vecs
    d = spec.dim
    SK = np.zeros((d, d), dtype=complex)
    for j in range(d):
        if abs(wc[j].imag) <= tol:
            # real (centred) eigenvalues pair with themselves even when a
            # near-degenerate parity partner sits inside the tolerance
            close = np.array([j])
        else:
            close = np.flatnonzero(np.abs(wc - wc[j].conj()) <= tol)
        if len(close) != 1:
            raise PairingAmbiguityError(
                f"pairing ambiguity: eigenvalue {spec.eigvals[j]:.6g} has {len(close)} "
                f"conjugate candidates within {tol:.3g}"
            )
        i = int(close[0])
        if i < j:
            continue
        if i == j:
            SK += np.outer(L[:, j], L[:, j].conj())
        else:
            SK += np.outer(L[:, j], L[:, i].conj()) + np.outer(L[:, i], L[:, j].conj())
    return SK


def build_metric(spec: NhSpectrum, tol_pair: float | None = None) -> MetricOperator:
    if spec.pairing == "general":
        L = spec.left_dual_vecs
        M = L @ L.conj().T
        M = 0.5 * (M + M.conj().T)
        symmetry, residual, construction = None, None, "general"
    else:
        SK = krein_symmetry(spec, tol_pair)
        SK = 0.5 * (SK + SK.conj().T)
        D, R = np.linalg.eigh(SK)
        M = (R * np.abs(D)) @ R.conj().T
        M = 0.5 * (M + M.conj().T)
        Hc = spec.hamiltonian - 1j * spec.imag_shift * np.eye(spec.dim)
        norm = np.abs(Hc).max() * np.abs(SK).max()
        residual = float(np.abs(SK @ Hc - Hc.conj().T @ SK).max() / norm)
        symmetry, construction = SK, "krein"
        if residual > 1e-6:
            raise MetricConstructionError(f"metric construction failed: intertwining residual {residual:.3g}")
    lam_min = float(np.linalg.eigvalsh(M)[0])
    if not lam_min > 0:
        raise MetricConstructionError(
            f"metric construction failed: min eigenvalue {lam_min:.3g}", min_eigenvalue=lam_min
        )
    return MetricOperator(M, construction, lam_min, symmetry, residual)


def _check_time(t: float):
    if not t >= 0:
        raise DomainError(f"time must be non-negative, got {t}")


def spectral_coefficients(spec: NhSpectrum, initial: StateVector) -> np.ndarray:
    return spec.left_dual_vecs.conj().T @ initial.amplitudes


def evolve(spec: NhSpectrum, initial: StateVector, t: float, rescale: bool = False) -> StateVector:
    """``|I(t)> = sum_a exp(-i E_a t) c_a |phi_a>`` with ``c_a = <psi_bar_a|I>``.

    The result carries the physical norm decay and is tagged not-normalized.
    With ``rescale=True`` the slowest-decaying exponent is moved into
    ``log_scale`` so arbitrarily long horizons stay representable.
    """
    return evolve_many(spec, initial, [t], rescale)[0]


def evolve_many(spec: NhSpectrum, initial: StateVector, times, rescale: bool = False) -> list[StateVector]:
    times = np.asarray(times, dtype=float)
    for t in times:
        _check_time(t)
    c = spectral_coefficients(spec, initial)
    live = np.abs(c) > 0
    growth = spec.eigvals.imag[live]
    out = []
    for t in times:
        if t == 0:
            out.append(initial)
            continue
        rates = growth * t
        top = float(rates.max()) if rates.size else 0.0
        if rescale:
            phase = np.exp(-1j * spec.eigvals * t - top)
            amp = spec.right_vecs @ (phase * c)
            out.append(StateVector(amp, initial.basis, False, initial.log_scale + top))
            continue
        # decaying components may underflow harmlessly; growth overflow or a
        # vanishing norm (|amp|^2 below the double range) is fatal
        if top > EXP_LIMIT or top < -EXP_LIMIT / 2:
            raise EvolutionHorizonError(f"evolution horizon exceeded at t={t:g}: exponent {top:.1f}")
        amp = spec.right_vecs @ (np.exp(-1j * spec.eigvals * t) * c)
        out.append(StateVector(amp, initial.basis, False, initial.log_scale))
    return out


def evolve_dense_oracle(H: np.ndarray, initial: StateVector, t: float) -> StateVector:
    """``expm(-iHt) psi`` by scaling and squaring, no eigendecomposition."""
    _check_time(t)
    H = np.asarray(H, dtype=complex)
    anti = (H - H.conj().T) / 2j
    if np.linalg.eigvalsh(anti)[-1] * t > EXP_LIMIT:
        raise EvolutionHorizonError(f"evolution horizon exceeded at t={t:g}")
    amp = sla.expm(-1j * t * H) @ initial.amplitudes
    return StateVector(amp, initial.basis, normalized=(t == 0 and initial.normalized))


def metric_norm(metric: MetricOperator, state: StateVector) -> float:
    """Physical ``<psi|S|psi>``; underflows to 0 for strongly decayed states."""
    psi = state.amplitudes
    return float(np.vdot(psi, metric.matrix @ psi).real * np.exp(2 * state.log_scale))


def expectation(metric: MetricOperator, state: StateVector, obs: np.ndarray) -> complex:
    """``<psi|S obs|psi> / <psi|S|psi>``."""
    psi = state.amplitudes
    u = metric.matrix @ psi
    den = np.vdot(psi, u).real
    if not den > 0:
        raise ConsistencyError(f"non-positive metric norm {den:.3g}")
    return complex(np.vdot(u, obs @ psi) / den)


@dataclass(frozen=True)
class NhModel:
    """Immutable bundle of basis, operators, Hamiltonian, spectrum and metric."""

    basis: SpinBasis
    ops: SpinOperators
    couplings: CouplingSet
    spectrum: NhSpectrum
    metric: MetricOperator

    @property
    def hamiltonian(self) -> np.ndarray:
        return self.spectrum.hamiltonian

    def diagnostics(self) -> dict:
        d = dict(self.spectrum.diagnostics)
        d.update(
            pairing=self.spectrum.pairing,
            condition_estimate=self.spectrum.condition_estimate,
            metric_construction=self.metric.construction,
            metric_min_eigenvalue=self.metric.min_eigenvalue,
            metric_self_adjointness=self.metric.self_adjointness_residual(),
        )
        if self.metric.intertwining_residual is not None:
            d["intertwining_residual"] = self.metric.intertwining_residual
        return d


def build_model(two_S: int, couplings: CouplingSet, tol_pair: float | None = None) -> NhModel:
    basis = build_basis(two_S)
    ops = spin_matrices(basis)
    H = assemble_hamiltonian(ops, couplings)
    spec = diagonalize(H, tol_pair)
    return NhModel(basis, ops, couplings, spec, build_metric(spec, tol_pair))
