import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from halfspec.monofun import Kappa, MonotoneFn, default_cutoff
from halfspec.spectral import AtomicSpectrum, convolve
from halfspec.weights import (ConvCertificate, WeightTriple, check_conv_conditions, cmap1, cmap2,
                              convolution_suite, hat_epsilon, random_triple, rho_norm_atomic, rho_norm_upper,
                              superlinearity_check)

ZERO = MonotoneFn.constant(0.0)


def ramp_triple(delta=1.0):
    return WeightTriple(ZERO, MonotoneFn.linear(1.0), Kappa.constant(1.0), delta)


def test_cmap1_of_zero():
    assert np.all(cmap1(ZERO, 0.5)(np.linspace(0, 10, 50)) == 0)


def test_cmap1_doubling_anchor():
    delta = 0.4
    mu0 = MonotoneFn.linear(1 / (4 * delta))
    assert cmap1(mu0, delta)(4 * delta) == pytest.approx(2.0, rel=1e-12)


def test_cmap1_identity_below_three_delta():
    delta = 0.5
    mu0 = MonotoneFn([0, 0.3, 1.0], [0, 0.1, 0.25], 0.2)
    mu1 = cmap1(mu0, delta)
    ls = np.linspace(0, 3 * delta, 31)
    assert np.allclose(mu1(ls), mu0(ls), rtol=1e-12)


@given(st.floats(0.1, 1.0), st.floats(0.0, 0.25, allow_subnormal=False), st.floats(0.0, 1.0, allow_subnormal=False))
def test_cmap1_properties(delta, v, tail):
    mu0 = MonotoneFn([0, 2 * delta], [0, v], tail)
    mu1 = cmap1(mu0, delta)
    ls = np.linspace(0, 20 * delta, 400)
    assert np.all(mu1(ls) >= mu0(ls) * (1 - 1e-12))
    big = ls[ls >= 4 * delta]
    assert np.all(2 * mu1(big - delta) <= mu1(big) * (1 + 1e-12))


def test_cmap1_rejects_class_violation():
    with pytest.raises(ValueError):
        cmap1(MonotoneFn.constant(0.1), 1.0)


def test_hat_epsilon_zero_weight():
    assert hat_epsilon(ZERO, Kappa.constant(1.0), 0.8, 3.0) == 0.4


def test_hat_epsilon_linear_weight():
    assert hat_epsilon(MonotoneFn.linear(1.0), Kappa.constant(1.0), 1.0, 2.0) == pytest.approx(1 / 20, rel=1e-12)


@given(st.floats(0.0, 5.0), st.floats(1.0, 4.0), st.floats(0.1, 1.0))
def test_hat_epsilon_monotone(l, factor, delta):
    kappa = Kappa.from_points([0, 1, 3], [1.0, 0.5, 0.2])
    nu = MonotoneFn([0, 1], [0, 0.3], 0.5)
    e1 = hat_epsilon(nu, kappa, delta, l)
    assert hat_epsilon(nu * factor, kappa, delta, l) <= e1
    assert hat_epsilon(nu, kappa, delta, l + 1.0) <= e1
    assert 0 < e1 <= delta / 2


def test_cmap2_of_zero_weight():
    cert = cmap2(WeightTriple(ZERO, ZERO, Kappa.constant(0.5), 1.0), 10.0)
    assert np.all(cert.nu1(np.linspace(0, 10, 50)) == 0)


def test_cmap2_initial_segment():
    cert = cmap2(ramp_triple(), 3.0)
    # nuhat(l) = l and eps_hat = 1/20 everywhere, so l0 = 2 eps_hat = 1/10
    assert cert.l0 == pytest.approx(0.1, rel=1e-10)
    ls = np.linspace(0, cert.l0, 20)
    assert np.allclose(cert.nu1(ls), ls, rtol=1e-12)


def test_cmap2_conditions_hold_on_ramp():
    cert = cmap2(ramp_triple(), 3.0)
    assert cert.verify().all_pass


def test_cmap2_rejects_short_horizon():
    with pytest.raises(ValueError):
        cmap2(ramp_triple(), 0.05)


@pytest.mark.parametrize("seed", range(5))
def test_cmap2_certificate_invariants(seed):
    rng = np.random.default_rng(seed)
    t = random_triple(rng)
    cert = cmap2(t, 8.0)
    assert cert.verify().all_pass
    ls = np.linspace(0, cert.horizon, 500)
    assert np.all(cert.mu1(ls) >= t.mu0(ls) * (1 - 1e-12))
    assert np.all(t.nu0(ls) <= cert.nu_tilde(ls) * (1 + 1e-12))
    assert cert.nu1(0.0) == 0.0
    assert np.all(np.diff(cert.nu1(ls)) >= 0)
    eps = cert.eps(ls)
    assert np.all(np.diff(eps) <= 1e-15)
    assert np.all(np.diff(cert.anchors) > 0)
    assert cert.continuous_at_l0
    # continuity at 3 delta
    x = 3 * t.delta
    if x < cert.horizon:
        assert abs(cert.nu1(x + 1e-9) - cert.nu1(x - 1e-9)) <= 1e-6 * max(1.0, cert.nu1(x))


def test_cmap2_map_is_monotone():
    rng = np.random.default_rng(11)
    t = random_triple(rng)
    bigger = WeightTriple(t.mu0, t.nu0 + MonotoneFn([0, 1], [0, 0.01], 0.0), t.kappa, t.delta)
    a = cmap2(t, 6.0)
    grid = a.nodes
    b = cmap2(bigger, 6.0, grid=grid)
    a = cmap2(t, 6.0, grid=np.union1d(grid, b.nodes))
    b = cmap2(bigger, 6.0, grid=np.union1d(grid, b.nodes))
    top = min(a.horizon, b.horizon)
    ls = a.nodes[a.nodes <= top]
    assert np.all(b.nu1(ls) >= a.nu1(ls) * (1 - 1e-12))


@pytest.mark.parametrize("b", [2.0, 5.0])
def test_superlinearity(b):
    t = random_triple(np.random.default_rng(3))
    rep = superlinearity_check(t, b, 6.0)
    assert rep["ok"], rep


def test_conditions_fail_for_constant_nu():
    nu = MonotoneFn.constant(1.0)
    rep = check_conv_conditions(ZERO, ZERO, nu, nu, 1.0, np.linspace(0.5, 10, 20))
    assert not rep.all_pass
    assert not any(r.cond2 for r in rep.rows)


def test_condition_one_trivial_for_zero_mu():
    rep = check_conv_conditions(ZERO, ZERO, None, None, 1.0, np.linspace(0.1, 10, 30))
    assert all(r.cond1 for r in rep.rows)


def test_rho_norm_single_atom():
    assert rho_norm_atomic(AtomicSpectrum({(1,): 1.0}), MonotoneFn.linear(1.0)) == 1.0


def test_rho_norm_empty():
    assert rho_norm_atomic(AtomicSpectrum({}), MonotoneFn.linear(1.0)) == 0.0


def test_rho_norm_two_atoms():
    F = AtomicSpectrum({(1,): 1.0, (2,): 1.0})
    assert rho_norm_atomic(F, MonotoneFn.linear(1.0)) == 1.0


def test_rho_norm_rejects_boundary_atom():
    with pytest.raises(ValueError):
        rho_norm_atomic(AtomicSpectrum({(0, 1): 1.0}), MonotoneFn.linear(1.0))


def test_rho_upper_flag():
    F = AtomicSpectrum({(1,): 1.0})
    assert rho_norm_upper(F, ZERO, MonotoneFn.linear(1.0)) == (1.0, False)
    assert rho_norm_upper(F, MonotoneFn.linear(1.0), MonotoneFn.linear(1.0))[1]


def test_convolution_inequality_small_suite():
    rng = np.random.default_rng(5)
    cert = cmap2(random_triple(rng), 8.0)
    assert convolution_suite(cert, 200, rng)["ok"]


def test_certificate_json_records_cutoff_version():
    cert = cmap2(ramp_triple(), 3.0)
    data = cert.to_json(cert.verify())
    assert data["chi_table_version"] == default_cutoff().version
    assert data["conditions"]["all_pass"]
    assert WeightTriple.from_json(data["inputs"]).delta == 1.0
