import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from halfspec.casebook import (A_STARSTAR_UPPER, burgers_astar, burgers_astar_zero, burgers_astarstar,
                               burgers_sandwich, burgers_tstar, burgers_un, burgers_un_exppoly, cascade_bounds,
                               colehopf_first_zero, cosine_zero_mode, stationary_residual, un_values)
from halfspec.equations import builtin
from halfspec.exact import I
from halfspec.exppoly import ExpPoly
from halfspec.solver import solve_lattice
from halfspec.spectral import AtomicSpectrum, FreqPoint


@pytest.fixture(scope="module")
def U60():
    return burgers_un(60)


def coeffs(p):
    return [Fraction(int(c.p), int(c.q)) for c in p.coeffs()]


def test_first_polynomials(U60):
    assert coeffs(U60[0]) == [1]
    assert coeffs(U60[1]) == [1, -1]
    assert coeffs(U60[2]) == [1, Fraction(-3, 2), 0, Fraction(1, 2)]


def test_un_matches_lattice_solver():
    # u_n(t) = -i a^n e^{-n t} U_n(t) for data -i a delta_1
    N = 8
    sym, H = builtin("burgers")
    sol = solve_lattice(sym, H, AtomicSpectrum({FreqPoint(1): (-I,)}, ncomp=1), N)
    for n, p in enumerate(burgers_un_exppoly(N), start=1):
        scaled = ExpPoly({(lam - n, m): c for lam, m, c in p.terms})
        assert sol.coefficient(FreqPoint(n)) == scaled * (-I)


def test_un_against_ode_integration():
    # u_n = -i e^{-nt} U_n solves the triangular Burgers system
    N = 6
    polys = burgers_un_exppoly(N)

    def rhs(t, y):
        u = y[:N] + 1j * y[N:]
        du = np.empty(N, dtype=complex)
        for n in range(1, N + 1):
            quad = sum(u[k - 1] * u[n - k - 1] for k in range(1, n))
            du[n - 1] = -n * n * u[n - 1] + 1j * n * quad
        return np.concatenate([du.real, du.imag])

    y0 = np.zeros(2 * N)
    y0[N] = -1.0
    ts = [0.3, 1.0, 2.5]
    out = solve_ivp(rhs, (0, 2.5), y0, t_eval=ts, rtol=1e-12, atol=1e-14, method="DOP853")
    for j, t in enumerate(ts):
        u = out.y[:N, j] + 1j * out.y[N:, j]
        for n in range(1, N + 1):
            expect = -1j * math.exp(-n * t) * polys[n - 1].eval(t)
            assert abs(u[n - 1] - expect) <= 1e-9


def test_u3_quadrature():
    # U_3 = 1 - (3/2) q + (1/2) q^3 with q = e^{-2t}
    for t in (0.1, 0.7, 2.0):
        q = math.exp(-2 * t)
        assert un_values(burgers_un(3), t)[2] == pytest.approx(1 - 1.5 * q + 0.5 * q ** 3, rel=1e-14)


def test_sandwich_certified(U60):
    rep = burgers_sandwich(U60, [Fraction(k, 20) for k in range(1, 101)])
    assert rep["ok"], rep["failures"][:5]
    assert rep["checked"] == 60 * 100 * 3


def test_sandwich_detects_violation():
    import flint

    bad = [flint.fmpq_poly([1]), flint.fmpq_poly([flint.fmpq(11, 10)])]
    rep = burgers_sandwich(bad, [Fraction(1, 2)])
    assert not rep["ok"]


@pytest.mark.parametrize("t", list(np.linspace(0.3, 3.0, 7)))
def test_astar_in_bracket(U60, t):
    r = burgers_astar(float(t), 60, U60)
    lo, hi = r["bracket"]
    assert lo == pytest.approx(math.exp(t))
    assert lo <= r["estimate"] <= hi


def test_astar_agrees_with_zero_oracle(U60):
    for t in (0.5, 1.0, 2.0):
        fit = burgers_astar(t, 60, U60)["estimate"]
        assert fit == pytest.approx(burgers_astar_zero(t), rel=1e-3)


def test_astarstar_bracket(U60):
    r = burgers_astarstar(N=60, U=U60)
    assert 1.0 <= r["estimate"] <= 2.598077
    assert A_STARSTAR_UPPER == pytest.approx(1.5 * math.sqrt(3))


def test_upper_curve_minimum():
    t = np.linspace(0.05, 3, 4000)
    curve = np.exp(t) / (1 - np.exp(-2 * t))
    assert curve.min() == pytest.approx(1.5 * math.sqrt(3), rel=1e-6)


@pytest.mark.parametrize("a", [3, 5, 10, 100])
def test_tstar_bound(U60, a):
    r = burgers_tstar(a, 60, U60)
    assert r["status"] == "blow-up"
    assert r["estimate"] <= math.log(a) + 1e-9
    assert r["within_bound"]


def test_tstar_small_amplitude(U60):
    assert burgers_tstar(1, 60, U60)["estimate"] == math.inf
    r = burgers_tstar(2, 60, U60)
    assert r["estimate"] == math.inf and "undecidable" in r["status"]


def test_tstar_complex_amplitude_uses_modulus(U60):
    assert burgers_tstar(5j, 60, U60)["estimate"] == burgers_tstar(5, 60, U60)["estimate"]


def test_colehopf_matches_series_time(U60):
    a = 5
    ts = burgers_tstar(a, 60, U60)["estimate"]
    ch = colehopf_first_zero(a)["T"]
    assert abs(ch - ts) / ts <= 0.02


def test_tstar_stable_under_truncation():
    a = 5
    t30 = burgers_tstar(a, 30)["estimate"]
    t60 = burgers_tstar(a, 60)["estimate"]
    assert abs(t30 - t60) / t60 <= 0.02


def test_colehopf_rejects_small():
    with pytest.raises(ValueError):
        colehopf_first_zero(0.5)


def test_cosine_values():
    r = cosine_zero_mode(200)
    c = r["coefficients"]
    assert c[0] == Fraction(1, 2)
    assert c[1] == Fraction(3, 8)
    assert c[2] == Fraction(5, 16)
    assert r["ratio_law"] and r["dominates_harmonic"] and r["first_is_half"]
    for k in (1, 50, 200):
        assert c[k - 1] == Fraction(math.comb(2 * k, k), 4 ** k)
    ps = r["partial_sums"][0.999]
    assert ps["termwise"] and ps["partial_sum"] > ps["harmonic"]


def test_cascade_first_term_and_sandwich():
    r = cascade_bounds(1, 2, Fraction(1, 2), 1, 12)
    assert r["ok"], r["failures"][:3]
    assert r["lower"][0] == ExpPoly.constant(1) == r["upper"][0]


def test_cascade_symmetric_collapse():
    r = cascade_bounds(1, 1, 1, 1, 10)
    assert r["ok"]
    for lo, hi in zip(r["lower"], r["upper"]):
        assert lo == hi


def test_cascade_second_term_closed_form():
    # f_2 = c * 2 * int_0^t e^{-2 b^2 (t-s)} ds = (c / b^2)(1 - e^{-2 b^2 t})
    r = cascade_bounds(1, 1, Fraction(1, 2), Fraction(1, 2), 2)
    assert r["lower"][1] == ExpPoly({(0, 0): Fraction(1, 2), (-2, 0): Fraction(-1, 2)})


def test_cascade_rejects_bad_params():
    with pytest.raises(ValueError):
        cascade_bounds(2, 1, 1, 1, 3)
    with pytest.raises(ValueError):
        cascade_bounds(1, 1, 2, 2, 3)


def test_stationary_kdv_best_fit():
    r = stationary_residual("kdv", 1)
    assert r["best_fit_constant"] == pytest.approx(2)
    assert r["residual_at_best_fit"] <= 1e-12


def test_stationary_clm_exact():
    r = stationary_residual("clm", Fraction(3, 2), {"eps": 2})
    assert r["quoted_constant"] == pytest.approx(12j)
    assert r["residual_at_quoted"] <= 1e-12


@pytest.mark.parametrize("alpha", [-1, Fraction(-1, 3)])
def test_stationary_nls_defocusing(alpha):
    r = stationary_residual("nls_star", 1, {"alpha": alpha})
    assert r["residual_at_quoted"] <= 1e-12
    assert r["best_fit_constant"] == pytest.approx(math.sqrt(-2 / float(alpha)))


def test_stationary_homogeneity_in_z():
    # the best-fit constant does not depend on the imaginary shift
    for z in (Fraction(1, 2), 2, 5):
        assert stationary_residual("kdv", z)["best_fit_constant"] == pytest.approx(2)


def test_stationary_unknown():
    with pytest.raises(ValueError):
        stationary_residual("burgers")
