from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import poisson

from nhsqueeze.engine import evolve_many, expectation
from nhsqueeze.errors import DomainError, PhononChannelError, SingularScalingError
from nhsqueeze.nv import (
    NvConfig,
    channel_model,
    contour_grid,
    effective_couplings,
    nv_moments,
    nv_observable,
    nv_squeezing,
    phonon_weights,
    xi2_first_principles,
    xi2_linear_form,
)
from nhsqueeze.oat import oat_moments
from nhsqueeze.spin import coherent_state
from nhsqueeze.squeezing import spin_moments


def cfg(**kw):
    base = dict(omega_r=1.0, g1=0.25, g2=0.5, gamma=0.02, two_S=21)
    base.update(kw)
    return NvConfig(**base)


def hand_xi2(c, n):
    r, m = c.g1 / c.g2, (1 + 2 * n) / c.two_S
    den = abs(r * r * (1 - m) + (1 + m))
    eta = 2 * abs(r) / den
    Gam = c.gamma / (4 * c.S * c.g2**2 / c.omega_r) / den
    return eta * eta + Gam * Gam


def test_config_validation():
    for bad in (dict(omega_r=0), dict(g2=0.0), dict(gamma=-1), dict(two_S=0), dict(n_ph=-1), dict(delta=0.1)):
        with pytest.raises(DomainError):
            cfg(**bad)


def test_effective_coupling_examples():
    c = cfg(g1=0.25, g2=0.5)
    ec = effective_couplings(c, 0)
    assert ec.chi == pytest.approx(0.625, abs=1e-15)
    assert ec.V == pytest.approx(-0.5) and ec.epsilon == pytest.approx(2 * (0.0625 - 0.25))
    assert effective_couplings(cfg(g1=0.5), 7).epsilon == 0
    assert effective_couplings(cfg(g1=0.0), 3).V == 0
    with pytest.raises(DomainError):
        effective_couplings(c, -1)


@given(st.floats(0.01, 3), st.floats(0.1, 2), st.floats(0, 0.5), st.integers(1, 1001), st.integers(0, 400))
def test_xi2_matches_hand_reduction(r, g2, gamma, two_S, n):
    c = cfg(g1=r * g2, g2=g2, gamma=gamma, two_S=two_S)
    try:
        val = xi2_first_principles(c, n)
    except SingularScalingError:
        return
    ref = hand_xi2(c, n)
    assert val == pytest.approx(ref, rel=1e-12)


@given(st.floats(0.01, 3), st.floats(0.1, 2), st.floats(0, 0.5), st.integers(0, 50), st.floats(0.1, 10))
def test_xi2_invariant_under_joint_rescaling(r, g2, gamma, n, lam):
    # (g1, g2, w_r) -> lam (g1, g2, w_r) with gamma -> lam gamma keeps the scaled decay fixed
    c = cfg(g1=r * g2, g2=g2, gamma=gamma, two_S=101)
    c2 = cfg(g1=lam * r * g2, g2=lam * g2, gamma=lam * gamma, omega_r=lam, two_S=101)
    try:
        a, b = xi2_first_principles(c, n), xi2_first_principles(c2, n)
    except SingularScalingError:
        return
    assert b == pytest.approx(a, rel=1e-12)


def test_xi2_limits():
    c = cfg(g1=0.0)
    assert xi2_first_principles(c, 0) == pytest.approx((hand_xi2(c, 0)))
    assert xi2_first_principles(c, 0) == pytest.approx((0.02 / (4 * 10.5 * 0.25) / (1 + 1 / 21)) ** 2)
    big = cfg(two_S=1001)
    n = (0.1 * 1001 - 1) / 2
    assert xi2_first_principles(big, n) < 1


def test_linear_form_examples():
    c = cfg(gamma=0.0)
    r, m = 0.5, 1 / 21
    assert xi2_linear_form(c, 0) == pytest.approx(2 * r / abs(r * r * (1 - m) + (1 + m)))
    assert xi2_linear_form(c, 0) == pytest.approx(np.sqrt(xi2_first_principles(c, 0)))
    tiny = cfg(g1=1e-12)
    assert xi2_linear_form(tiny, 0) == pytest.approx(0.02 / (4 * 10.5 * 0.25) / (1 + 1 / 21), rel=1e-8)
    c1 = cfg(g1=0.5, two_S=1001)
    n = (0.5 * 1001 - 1) / 2
    # the two forms disagree away from gamma = 0 because one is linear in (eta, Gamma)
    assert xi2_linear_form(c1, n) != pytest.approx(xi2_first_principles(c1, n), rel=1e-6)


def test_phonon_window_examples():
    assert phonon_weights(0) == [(0, 1.0)]
    w6 = phonon_weights(6.0)
    ns = [n for n, _ in w6]
    assert ns[0] == 0 and 25 <= ns[-1] <= 32
    mass = poisson.cdf(ns[-1], 6.0) - poisson.cdf(ns[0] - 1, 6.0)
    assert mass >= 1 - 1e-10
    w250 = phonon_weights(250.0)
    ns = [n for n, _ in w250]
    mode = max(w250, key=lambda p: p[1])[0]
    assert mode in (249, 250)
    sigma = np.sqrt(250)
    assert 5.5 * sigma <= mode - ns[0] <= 7.5 * sigma
    assert 5.5 * sigma <= ns[-1] - mode <= 7.5 * sigma


@given(st.floats(0, 400), st.sampled_from([1e-4, 1e-8, 1e-10, 1e-12]))
def test_phonon_window_mass(n_ph, tol):
    w = phonon_weights(n_ph, tol)
    ns = [n for n, _ in w]
    assert ns == list(range(ns[0], ns[-1] + 1))
    assert sum(p for _, p in w) == pytest.approx(1, abs=1e-12)
    if n_ph > 0:
        raw = poisson.pmf(np.arange(ns[0], ns[-1] + 1), n_ph).sum()
        assert raw >= 1 - tol - 1e-12


def test_single_channel_is_bit_identical():
    c = cfg(n_ph=0.0, two_S=12)
    times = [0.0, 5.0, 50.0]
    m = channel_model(c, 0)
    states = evolve_many(m.spectrum, coherent_state(m.basis, c.theta0, c.phi0), times, rescale=True)
    direct = [spin_moments(s, m.metric, m.ops) for s in states]
    avg = nv_moments(c, times)
    for i, d in enumerate(direct):
        assert np.array_equal(avg.mean[i], d.mean)
        assert np.array_equal(avg.second[i], d.second)
    assert nv_observable(c, "z", 5.0) == direct[1].mean[2]
    assert nv_observable(c, "xy", 50.0) == direct[2].second[0, 1]


def test_observable_rejects_bad_input():
    with pytest.raises(DomainError):
        nv_observable(cfg(), "w", 1.0)
    with pytest.raises(DomainError):
        nv_observable(cfg(), "z", -1.0)


def test_pure_twisting_channels_relax_to_south_pole():
    c = cfg(g1=0.0, n_ph=2.0, two_S=16)
    t = 40 / c.gamma
    for n, _ in phonon_weights(2.0)[:3]:
        ec = effective_couplings(c, n)
        assert oat_moments(c.S, c.theta0, c.phi0, ec, t).sz == pytest.approx(-c.S, abs=1e-9)
    assert nv_observable(c, "z", t) == pytest.approx(-c.S, abs=1e-8)


def test_pure_twisting_channel_matches_closed_form():
    c = cfg(g1=0.0, two_S=16)
    ec = effective_couplings(c, 0)
    m = channel_model(c, 0)
    (s,) = evolve_many(m.spectrum, coherent_state(m.basis, c.theta0, c.phi0), [3.0], rescale=True)
    assert expectation(m.metric, s, m.ops.sz).real == pytest.approx(oat_moments(c.S, c.theta0, c.phi0, ec, 3.0).sz, abs=1e-9)


def test_channel_errors_carry_phonon_number():
    # a negative time is rejected inside the first channel
    c = cfg(n_ph=1.0)
    with pytest.raises(PhononChannelError) as ei:
        nv_moments(c, [-1.0])
    assert ei.value.n == phonon_weights(1.0)[0][0]


def test_averaged_moments_diagnostics():
    m = nv_moments(cfg(n_ph=1.0), [0.0, 10.0])
    d = m.diagnostics
    assert d["phonon_window"] == [m.weights[0][0], m.weights[-1][0]]
    assert d["metric_min_eigenvalue"] > 0 and d["biorthonormality"] < 1e-10


def test_squeezing_degrades_with_phonon_number():
    vals = [nv_squeezing(cfg(n_ph=n), [2000.0])[0].zeta2_x_dB for n in (0.0, 2.0, 6.0)]
    assert vals[0] < vals[1] < vals[2] < 0


def test_contour_r1_line_and_region():
    base = cfg(two_S=1001, gamma=0.02)
    grid = contour_grid(base, (0.02, 2.0), (0.01, 1.0), 50)
    assert len(grid) == 2500
    r_vals = sorted({p.ratio for p in grid})
    on_line = contour_grid(replace(base, g1=base.g2), (1.0, 1.0 + 1e-12), (0.01, 1.0), 2)
    assert all(abs(p.xi2 - 1) <= 1e-6 for p in on_line if p.xi2 is not None)
    small_r = [p for p in grid if p.ratio < 0.9 and p.fraction <= 0.5 and p.xi2 is not None]
    assert small_r and all(p.xi2 < 1 for p in small_r)
    near_zero = [p for p in grid if p.ratio == r_vals[0] and p.xi2 is not None]
    assert all(p.xi2 < 1e-2 for p in near_zero)
    low_m = contour_grid(base, (0.5, 1.0), (1e-4, 0.01), 5)
    assert any(p.xi2 is None and p.xi2_linear is None for p in low_m)  # m < 1/(2S) means n < 0


def test_contour_validation():
    with pytest.raises(DomainError):
        contour_grid(cfg(), (1.0, 0.5), (0.1, 1.0), 10)
    with pytest.raises(DomainError):
        contour_grid(cfg(), (0.1, 1.0), (0.1, 1.0), 1)
