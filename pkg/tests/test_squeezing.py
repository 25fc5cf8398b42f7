import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nhsqueeze.engine import (
    CouplingSet,
    MetricOperator,
    build_model,
    couplings_from_relative,
    evolve_many,
)
from nhsqueeze.errors import DomainError, FrameUndefinedError
from nhsqueeze.spin import StateVector, bloch_vector, build_basis, coherent_state, dicke_state, spin_matrices
from nhsqueeze.squeezing import (
    basis_weights,
    optimal_frame,
    report_from_moments,
    spin_moments,
    squeezing_parameters,
    squeezing_report,
    theta_of_mean,
    to_dB,
    transverse_axes,
)

angles = st.floats(0, np.pi, allow_nan=False)
phases = st.floats(-np.pi, np.pi, allow_nan=False)


def identity_metric(basis):
    return MetricOperator(np.eye(basis.dim, dtype=complex), "general", 1.0)


def moments_with_transverse_cov(S, cov2, e1_rot=0.0):
    """Mean along -z with a prescribed 2x2 covariance in the Gram-Schmidt frame."""
    mean = np.array([0.0, 0.0, -S])
    e1, e2 = transverse_axes(mean / S)
    E = np.stack([e1, e2])
    second = np.outer(mean, mean) + E.T @ cov2 @ E
    second[2, 2] = S**2
    return mean, second, e1, e2


def test_lowest_weight_moments():
    basis = build_basis(10)
    ops = spin_matrices(basis)
    mean, second, res = spin_moments(dicke_state(basis, 0), identity_metric(basis), ops)
    np.testing.assert_allclose(mean, [0, 0, -5], atol=1e-14)
    assert second[0, 0] == pytest.approx(2.5) and second[1, 1] == pytest.approx(2.5)
    assert res == 0.0
    rep = squeezing_report(dicke_state(basis, 0), identity_metric(basis), ops)
    assert rep.zeta2_x == pytest.approx(1) and rep.zeta2_y == pytest.approx(1)


@given(st.lists(st.floats(-1, 1, allow_nan=False), min_size=4, max_size=4))
def test_spin_half_squares_are_quarter(v):
    a = np.array([v[0] + 1j * v[1], v[2] + 1j * v[3]])
    if np.linalg.norm(a) < 1e-3:
        return
    basis = build_basis(1)
    st_ = StateVector(a / np.linalg.norm(a), basis, normalized=True)
    _, second, _ = spin_moments(st_, identity_metric(basis), spin_matrices(basis))
    np.testing.assert_allclose(np.diag(second), 0.25, atol=1e-14)


@given(angles, phases, st.integers(1, 30))
def test_coherent_mean_identity_metric(theta, phi, two_S):
    basis = build_basis(two_S)
    st_ = coherent_state(basis, theta, phi)
    mean, second, _ = spin_moments(st_, identity_metric(basis), spin_matrices(basis))
    np.testing.assert_allclose(mean, -basis.S * bloch_vector(theta, phi), atol=1e-10 * basis.S)
    np.testing.assert_allclose(second, second.T, atol=0)


def test_coherent_mean_direct_summation():
    # independent oracle: amplitudes from the binomial form, moments by explicit sums
    two_S, theta, phi = 7, 1.1, 0.4
    basis = build_basis(two_S)
    S = two_S / 2
    from math import comb

    k = np.arange(two_S + 1)
    c = np.array([np.sqrt(comb(two_S, int(j))) for j in k]) * (np.tan(theta / 2) * np.exp(-1j * phi)) ** k
    c = c / np.linalg.norm(c)
    sz = np.sum(np.abs(c) ** 2 * (k - S))
    lad = np.sqrt((k[:-1] + 1) * (two_S - k[:-1]))
    sp = np.sum(np.conj(c[1:]) * lad * c[:-1])
    mean, _, _ = spin_moments(StateVector(c, basis, normalized=True), identity_metric(basis), spin_matrices(basis))
    np.testing.assert_allclose(mean, [sp.real, sp.imag, sz], atol=1e-12)
    assert mean[2] == pytest.approx(-S * np.cos(theta))


def test_isotropic_covariance_tie_break():
    S = 3.0
    mean, second, e1, _ = moments_with_transverse_cov(S, np.eye(2) * S / 2)
    f = optimal_frame(mean, second, S)
    assert f.var_min == pytest.approx(S / 2) and f.var_max == pytest.approx(S / 2)
    np.testing.assert_allclose(f.nx, e1, atol=1e-12)


def test_diagonal_covariance():
    S = 4.0
    mean, second, e1, _ = moments_with_transverse_cov(S, np.diag([0.7, 2.9]))
    f = optimal_frame(mean, second, S)
    assert f.var_min == pytest.approx(0.7, abs=1e-12) and f.var_max == pytest.approx(2.9, abs=1e-12)
    np.testing.assert_allclose(f.nx, e1, atol=1e-12)
    np.testing.assert_allclose(np.cross(f.nx, f.ny), f.nz, atol=1e-12)


@given(st.floats(0.01, 5), st.floats(0.01, 5), st.floats(-2, 2), st.floats(0.5, 20))
def test_random_covariance_matches_quadratic_formula(a, b, c, S):
    if a * b - c * c <= 0:
        return
    mean, second, _, _ = moments_with_transverse_cov(S, np.array([[a, c], [c, b]]))
    f = optimal_frame(mean, second, S)
    with mpmath.workdps(40):
        A, B, C = mpmath.mpf(a), mpmath.mpf(b), mpmath.mpf(c)
        tr, det = A + B, A * B - C * C
        disc = mpmath.sqrt(tr * tr / 4 - det)
        lo, hi = float(tr / 2 - disc), float(tr / 2 + disc)
    assert f.var_min == pytest.approx(lo, abs=1e-12 * max(1, a + b))
    assert f.var_max == pytest.approx(hi, abs=1e-12 * max(1, a + b))
    assert f.var_min <= f.var_max
    F = np.stack([f.nx, f.ny, f.nz])
    np.testing.assert_allclose(F @ F.T, np.eye(3), atol=1e-10)
    assert np.linalg.det(F) == pytest.approx(1, abs=1e-10)


@given(st.floats(0.01, 5), st.floats(0.01, 5), st.floats(-2, 2), st.floats(0, 2 * np.pi))
def test_rotation_about_mean_is_invariant(a, b, c, rot):
    if a * b - c * c <= 0:
        return
    S = 5.0
    cov = np.array([[a, c], [c, b]])
    R = np.array([[np.cos(rot), -np.sin(rot)], [np.sin(rot), np.cos(rot)]])
    f0 = optimal_frame(*moments_with_transverse_cov(S, cov)[:2], S)
    f1 = optimal_frame(*moments_with_transverse_cov(S, R @ cov @ R.T)[:2], S)
    assert f1.var_min == pytest.approx(f0.var_min, abs=1e-10)
    assert f1.var_max == pytest.approx(f0.var_max, abs=1e-10)


def test_frame_undefined_for_small_mean():
    with pytest.raises(FrameUndefinedError):
        optimal_frame(np.zeros(3), np.eye(3), 5.0)
    with pytest.raises(FrameUndefinedError):
        optimal_frame([0, 0, 1e-7], np.eye(3), 1.0)


def test_transverse_axes_seed_switch():
    e1, e2 = transverse_axes(np.array([1.0, 0, 0]))
    np.testing.assert_allclose(e1, [0, 1, 0], atol=1e-15)
    np.testing.assert_allclose(np.cross(e1, e2), [1, 0, 0], atol=1e-15)


@given(angles, phases, st.integers(2, 40))
def test_coherent_state_zero_dB_identity_metric(theta, phi, two_S):
    basis = build_basis(two_S)
    rep = squeezing_report(coherent_state(basis, theta, phi), identity_metric(basis), spin_matrices(basis))
    assert rep.zeta2_x == pytest.approx(1, abs=1e-9) and rep.zeta2_y == pytest.approx(1, abs=1e-9)
    assert abs(rep.product_dB) <= 1e-8


def test_iss_flag_logic():
    S = 10.0
    mean, second, _, _ = moments_with_transverse_cov(S, np.diag([2.5, 10.0]))
    rep = report_from_moments(mean, second, S)
    assert rep.zeta2_x_dB == pytest.approx(to_dB(0.5)) and rep.product_dB == pytest.approx(0, abs=1e-12)
    assert rep.iss_flag
    mean, second, _, _ = moments_with_transverse_cov(S, np.diag([2.5, 11.0]))
    assert not report_from_moments(mean, second, S).iss_flag
    assert report_from_moments(mean, second, S, iss_tol_dB=1.0).iss_flag
    assert rep.heisenberg_excess == pytest.approx(0, abs=1e-12)


def test_theta_of_mean_examples():
    assert theta_of_mean([0, 0, -3]) == pytest.approx(np.pi)
    assert theta_of_mean(-2 * bloch_vector(np.pi / 4, 0)) == pytest.approx(3 * np.pi / 4)
    with pytest.raises(DomainError):
        theta_of_mean([0, 0, 0])


def test_basis_weights_examples():
    basis = build_basis(5)
    np.testing.assert_array_equal(basis_weights(dicke_state(basis, 0)), [1, 0, 0, 0, 0, 0])
    np.testing.assert_allclose(basis_weights(coherent_state(build_basis(1), np.pi / 2, 0)), [0.5, 0.5])
    with pytest.raises(DomainError):
        basis_weights(StateVector(np.zeros(6, dtype=complex), basis, normalized=False))


@given(st.integers(1, 30), angles, phases)
def test_basis_weights_sum_to_one(two_S, theta, phi):
    w = basis_weights(coherent_state(build_basis(two_S), theta, phi))
    assert abs(w.sum() - 1) <= 1e-12 and np.all(w >= 0)


@pytest.fixture(scope="module")
def reference_steady():
    m = build_model(45, couplings_from_relative(45, 0.6, 2e-5))
    psi = coherent_state(m.basis, np.pi / 4, 0)
    (state,) = evolve_many(m.spectrum, psi, [1e6], rescale=True)
    return m, state


def test_reference_steady_state_is_intelligent(reference_steady):
    m, state = reference_steady
    rep = squeezing_report(state, m.metric, m.ops)
    assert rep.zeta2_x_dB < 0
    assert abs(rep.zeta2_x_dB + rep.zeta2_y_dB) <= 0.1
    assert rep.iss_flag
    assert rep.theta_mean == pytest.approx(np.pi, abs=1e-3)


def test_reference_steady_weights_peak_at_small_k(reference_steady):
    _, state = reference_steady
    w = basis_weights(state)
    assert int(np.argmax(w)) <= 2
    assert w[:5].sum() > 0.9


def test_oat_product_at_least_one():
    m = build_model(20, CouplingSet(0.05, 0.0, 0.3, 0.01))
    psi = coherent_state(m.basis, np.pi / 3, 0.2)
    for state in evolve_many(m.spectrum, psi, np.linspace(0, 40, 30)):
        rep = squeezing_report(state, m.metric, m.ops)
        assert rep.zeta2_x * rep.zeta2_y >= 1 - 1e-9


def test_heisenberg_bound_identity_metric_trajectory():
    basis = build_basis(30)
    ops = spin_matrices(basis)
    m = build_model(30, couplings_from_relative(30, 0.6, 0.01))
    metric = identity_metric(basis)
    for state in evolve_many(m.spectrum, coherent_state(basis, np.pi / 4, 0), np.geomspace(0.01, 1e3, 40), rescale=True):
        rep = squeezing_report(state, metric, ops)
        assert rep.heisenberg_excess >= -1e-9 * basis.S**4


def test_heisenberg_bound_physical_metric_trajectory():
    # Faithful check of the bound with the constructed metric along the reference run.
    m = build_model(45, couplings_from_relative(45, 0.6, 2e-5))
    psi = coherent_state(m.basis, np.pi / 4, 0)
    worst = min(
        squeezing_report(s, m.metric, m.ops).heisenberg_excess
        for s in evolve_many(m.spectrum, psi, np.geomspace(0.01, 1e6, 161), rescale=True)
    )
    assert worst >= -1e-9 * m.basis.S**4
