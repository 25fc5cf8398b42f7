"""Mean-spin frame, squeezing parameters and intelligent-spin-state diagnostics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .engine import MetricOperator
from .errors import ConsistencyError, DomainError, FrameUndefinedError
from .spin import SpinOperators, StateVector

ISS_TOL_DB = 0.1
MEAN_FLOOR_REL = 1e-6


def to_dB(x):
    return 10.0 * np.log10(x)


class SpinMoments(NamedTuple):
    mean: np.ndarray
    second: np.ndarray
    imag_residue: float


@dataclass(frozen=True)
class SqueezingReport:
    mean_spin: np.ndarray
    theta_mean: float
    frame: tuple[np.ndarray, np.ndarray, np.ndarray]
    var_min: float
    var_max: float
    zeta2_x: float
    zeta2_y: float
    zeta2_x_dB: float
    zeta2_y_dB: float
    product_dB: float
    iss_flag: bool

    @property
    def mean_length(self) -> float:
        return float(np.linalg.norm(self.mean_spin))

    @property
    def heisenberg_excess(self) -> float:
        """``var_min * var_max - |<S>|^2 / 4``; non-negative for physical moments."""
        return self.var_min * self.var_max - 0.25 * self.mean_length**2


def spin_moments(state: StateVector, metric: MetricOperator, ops: SpinOperators) -> SpinMoments:
    """Metric-normalized ``<S_i>`` and ``<{S_i, S_j}>/2``.

    Only the real parts are kept; ``imag_residue`` is the largest discarded
    imaginary part relative to ``S`` (resp. ``S^2``) and vanishes whenever the
    components are self-adjoint in the metric.
    """
    psi = state.amplitudes
    u = metric.matrix @ psi
    den = np.vdot(psi, u).real
    if not den > 0:
        raise ConsistencyError(f"non-positive metric norm {den:.3g}")
    ket = [op @ psi for op in ops.cartesian]
    mean = np.array([np.vdot(u, k) for k in ket]) / den
    anti = ops.anticommutators
    second = np.empty((3, 3), dtype=complex)
    for i in range(3):
        for j in range(i, 3):
            second[i, j] = second[j, i] = np.vdot(u, anti[i][j] @ psi) / den
    S = ops.basis.S
    residue = max(np.abs(mean.imag).max() / S, np.abs(second.imag).max() / S**2)
    return SpinMoments(mean.real.copy(), second.real.copy(), float(residue))


def transverse_axes(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic Gram-Schmidt pair ``(e1, e2)`` with ``e1 x e2 = n``."""
    seed = np.array([1.0, 0.0, 0.0])
    if abs(n @ seed) > 1 - 1e-6:
        seed = np.array([0.0, 1.0, 0.0])
    e1 = seed - (seed @ n) * n
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(n, e1)


class Frame(NamedTuple):
    nx: np.ndarray
    ny: np.ndarray
    nz: np.ndarray
    var_min: float
    var_max: float


def optimal_frame(mean, second_moments, S: float, mean_floor: float | None = None) -> Frame:
    """Rotate the transverse plane onto the eigenaxes of the 2x2 covariance.

    ``nx`` is the direction of minimal variance; ties (isotropic covariance)
    resolve to the first Gram-Schmidt axis.
    """
    mean = np.asarray(mean, dtype=float)
    M = np.asarray(second_moments, dtype=float)
    floor = MEAN_FLOOR_REL * S if mean_floor is None else mean_floor
    length = np.linalg.norm(mean)
    if not length > floor:
        raise FrameUndefinedError(f"undefined squeezing frame: |<S>| = {length:.3g} <= {floor:.3g}")
    nz = mean / length
    e1, e2 = transverse_axes(nz)
    cov = lambda u, v: u @ M @ v - (u @ mean) * (v @ mean)
    a, b, c = cov(e1, e1), cov(e2, e2), cov(e1, e2)
    half_gap = np.hypot(0.5 * (a - b), c)
    lam_min, lam_max = 0.5 * (a + b) - half_gap, 0.5 * (a + b) + half_gap
    angle = 0.5 * np.arctan2(-2 * c, b - a)
    nx = np.cos(angle) * e1 + np.sin(angle) * e2
    return Frame(nx, np.cross(nz, nx), nz, float(lam_min), float(lam_max))


def theta_of_mean(mean) -> float:
    mean = np.asarray(mean, dtype=float)
    length = np.linalg.norm(mean)
    if not length > 0:
        raise DomainError("polar angle of a zero mean spin is undefined")
    return float(np.arccos(np.clip(mean[2] / length, -1.0, 1.0)))


def squeezing_parameters(mean, frame: Frame, iss_tol_dB: float = ISS_TOL_DB) -> SqueezingReport:
    mean = np.asarray(mean, dtype=float)
    length = np.linalg.norm(mean)
    zx = 2 * frame.var_min / length
    zy = 2 * frame.var_max / length
    if not (zx > 0 and zy > 0):
        raise ConsistencyError(f"non-positive transverse variance ({frame.var_min:.3g}, {frame.var_max:.3g})")
    zx_dB, zy_dB = float(to_dB(zx)), float(to_dB(zy))
    product_dB = zx_dB + zy_dB
    return SqueezingReport(
        mean_spin=mean,
        theta_mean=theta_of_mean(mean),
        frame=(frame.nx, frame.ny, frame.nz),
        var_min=frame.var_min,
        var_max=frame.var_max,
        zeta2_x=float(zx),
        zeta2_y=float(zy),
        zeta2_x_dB=zx_dB,
        zeta2_y_dB=zy_dB,
        product_dB=product_dB,
        iss_flag=bool(zx < 1 and abs(product_dB) <= iss_tol_dB),
    )


def report_from_moments(mean, second, S: float, iss_tol_dB: float = ISS_TOL_DB) -> SqueezingReport:
    return squeezing_parameters(mean, optimal_frame(mean, second, S), iss_tol_dB)


def squeezing_report(
    state: StateVector, metric: MetricOperator, ops: SpinOperators, iss_tol_dB: float = ISS_TOL_DB
) -> SqueezingReport:
    mean, second, _ = spin_moments(state, metric, ops)
    return report_from_moments(mean, second, ops.basis.S, iss_tol_dB)


def basis_weights(state: StateVector) -> np.ndarray:
    """``w(k) = |c_k|^2 / sum_j |c_j|^2``."""
    p = np.abs(state.amplitudes) ** 2
    total = p.sum()
    if not total > 0:
        raise DomainError("basis weights of a zero state are undefined")
    return p / total
