import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from halfspec.equations import (BUILTIN_NAMES, NonlinearSeries, builtin, equation_from_config,
                                evaluate_nonlinearity, majorants, parse_symbol)
from halfspec.exact import GaussianRational, I
from halfspec.spectral import AtomicSpectrum, FreqPoint, convolve, truncate


def spectrum(atoms, ncomp=1):
    return AtomicSpectrum(atoms, ncomp=ncomp)


def test_ode_square_table():
    _, H = builtin("ode_square")
    assert H.terms == {(2,): (1,)}


def test_kdv_dispersion_symbol():
    sym, _ = builtin("kdv")
    xi = Fraction(3, 2)
    assert sym.L_hat(FreqPoint(xi)) == ((I * xi ** 3,),)


def test_burgers_routing():
    sym, H = builtin("burgers")
    xi = FreqPoint(Fraction(2))
    assert sym.L_hat(xi) == ((-4,),)
    assert sym.N_hat(xi) == ((2 * I,),)
    assert H.terms == {(2,): (1,)}


def test_nls_star_second_equation_conjugated():
    alpha = GaussianRational(2, 1)
    sym, H = builtin("nls_star", alpha=alpha)
    L = sym.L_hat(FreqPoint(Fraction(5, 2)))
    assert L[0][0] == -I * Fraction(25, 4)
    assert L[1][1] == L[0][0].conjugate()
    t = H.terms
    assert t[(2, 1)] == (-I * alpha, 0)
    assert t[(1, 2)] == (0, (-I * alpha).conjugate())


def test_nls_star_invariant_subspace():
    from halfspec.solver import solve_lattice

    sym, H = builtin("nls_star", alpha=Fraction(-1, 2))
    u0 = {FreqPoint(1): GaussianRational(1, 1), FreqPoint(Fraction(3, 2)): GaussianRational(0, -2)}
    data = spectrum({xi: (c, c.conjugate()) for xi, c in u0.items()}, ncomp=2)
    sol = solve_lattice(sym, H, data, 6)
    assert len(sol.spectrum) > 2
    for xi, (u, v) in sol.spectrum.items():
        assert v == u.conjugate()
        for t in (0.0, 0.4, 1.3):
            assert abs(v.eval(t) - u.eval(t).conjugate()) <= 1e-10 * (1 + abs(u.eval(t)))


def test_square_of_monochromatic_datum():
    _, H = builtin("ode_square")
    a, c = Fraction(5, 3), Fraction(1, 2)
    out = evaluate_nonlinearity(H, spectrum({(c,): a}), 10)
    assert dict(out.items()) == {FreqPoint(2 * c): (a * a,)}


def test_clm_bilinear_term():
    sym, H = builtin("clm", eps=1)
    v = spectrum({(1,): Fraction(2), (Fraction(3, 2),): GaussianRational(0, 1)})
    w = spectrum({xi: tuple(row[0] * vec[0] for row in sym.M_hat(xi)) for xi, vec in v.items()}, ncomp=2)
    out = evaluate_nonlinearity(H, w, 10)
    hv = spectrum({xi: vec[0] * sym.M_hat(xi)[1][0] for xi, vec in v.items()})
    expected = convolve(v, hv)
    assert dict(out.items()) == dict(expected.items())


def test_lacunary_powers():
    sym, H = builtin("lacunary")
    a, c, lam = Fraction(1, 3), Fraction(1, 4), Fraction(9, 2)
    out = evaluate_nonlinearity(H, spectrum({(c,): a}), lam)
    levels = sorted(xi.coords[0] / c for xi in out)
    powers = [2 ** n for n in range(1, 10) if 2 ** n <= lam / c]
    assert levels == powers
    for p in powers:
        assert out[FreqPoint(p * c)] == (a ** p,)


def _brute_force(H, v, lam, extra=2):
    dmin = min(xi.level() for xi in v)
    cap = int(lam / dmin) + extra
    total = {}
    for alpha, vec in H.terms_up_to(cap):
        prod = None
        for j, k in enumerate(alpha):
            for _ in range(k):
                comp = v.component(j)
                prod = comp if prod is None else convolve(prod, comp)
        for xi, (c,) in prod.items():
            cur = total.setdefault(xi, [0] * H.n3)
            for i, w in enumerate(vec):
                cur[i] = cur[i] + w * c
    return truncate(AtomicSpectrum({xi: tuple(c) for xi, c in total.items()}, ncomp=H.n3), lam)


small = st.fractions(min_value=Fraction(1, 4), max_value=2, max_denominator=4)


@given(st.lists(st.tuples(small, st.integers(-3, 3)), min_size=1, max_size=4), st.integers(3, 6))
def test_truncation_exactness(atoms, lam):
    H = NonlinearSeries(1, 1, 1, terms={(2,): (1,), (3,): (Fraction(-1, 2),), (5,): (I,)})
    v = AtomicSpectrum({(x,): Fraction(c) for x, c in atoms if c})
    if len(v) == 0:
        return
    assert dict(evaluate_nonlinearity(H, v, lam).items()) == dict(_brute_force(H, v, lam).items())


def test_square_equals_self_convolution():
    _, H = builtin("ode_square")
    v = AtomicSpectrum({(1,): 2, (Fraction(3, 2),): GaussianRational(1, -1), (Fraction(5, 2),): 3})
    assert dict(evaluate_nonlinearity(H, v, 100).items()) == dict(convolve(v, v).items())


def test_boundary_atom_rejected():
    _, H = builtin("ode_square")
    with pytest.raises(ValueError):
        evaluate_nonlinearity(H, AtomicSpectrum({(0,): 1}), 3)


def test_majorants_examples():
    _, sq = builtin("ode_square")
    m = majorants(sq, 0.7)
    assert (m.value, m.derivative) == (1.0, 2.0)
    cube = NonlinearSeries.power(3)
    assert majorants(cube, 0.7).value == pytest.approx(0.7)
    zero = NonlinearSeries(1, 1, 1, terms={})
    assert (majorants(zero, 0.3).value, majorants(zero, 0.3).derivative) == (0.0, 0.0)


def test_majorants_infinite_family():
    _, H = builtin("lacunary")
    r = 0.5
    m = majorants(H, r)
    exact = sum(r ** (2 ** n - 2) for n in range(1, 12))
    assert m.truncated and m.value == pytest.approx(exact, rel=1e-12)
    with pytest.raises(ValueError):
        majorants(H, 1.0)


def test_linear_terms_rejected():
    with pytest.raises(ValueError):
        NonlinearSeries(1, 1, 1, terms={(1,): (1,)})


def test_series_json_roundtrip():
    H = NonlinearSeries(2, 1, 1, terms={(1, 1): (GaussianRational(0, 1),), (0, 3): (Fraction(2, 3),)})
    assert NonlinearSeries.from_json(H.to_json()).terms == H.terms


def test_unknown_builtin():
    with pytest.raises(ValueError):
        builtin("navier")
    with pytest.raises(ValueError):
        builtin("kdv", bogus=1)


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_every_builtin_has_consistent_shapes(name):
    sym, H = builtin(name)
    xi = FreqPoint(*([Fraction(3, 2)] + [Fraction(1, 3)] * (sym.d - 1)))
    L, M, N = sym.L_hat(xi), sym.M_hat(xi), sym.N_hat(xi)
    assert len(L) == sym.n1 and len(M) == sym.n2 and len(N) == sym.n1
    assert H.n2 == sym.n2 and H.n3 == sym.n3
    coords = [np.array([0.5, 2.0])] + [np.array([0.1, -0.3])] * (sym.d - 1)
    assert sym.L_grid(coords).shape == (sym.n1, sym.n1, 2)


def test_parse_symbol_matches_builtin():
    sym, _ = builtin("kdv")
    xi = Fraction(7, 3)
    cfg = {"custom": {"d": 1, "L": "i*xi**3", "N": "-6*i*xi"}, "H": {"k0": 1, "terms": [{"alpha": [2], "coeff": "1/2"}]}}
    custom, H = equation_from_config(cfg)
    assert custom.L_hat(FreqPoint(xi)) == sym.L_hat(FreqPoint(xi))
    assert H.terms == {(2,): (Fraction(1, 2),)}


def test_parse_symbol_rejects_code():
    with pytest.raises((ValueError, SyntaxError)):
        parse_symbol("__import__('os').system('true')", 1)
    with pytest.raises((ValueError, SyntaxError)):
        parse_symbol("eta + 1", 1)


def test_decimal_literals_are_exact():
    sym, _ = equation_from_config({"custom": {"d": 1, "L": "-0.1*xi**2"}, "H": {"k0": 1, "terms": [{"alpha": [2], "coeff": 1}]}})
    assert sym.L_hat(FreqPoint(1)) == ((Fraction(-1, 10),),)


def test_config_claims():
    sym, _ = equation_from_config({"name": "complex_heat", "params": {"eps": 1, "k": 2},
                                   "claims": {"c0": 0.5, "C0": 2, "p": "xi"}})
    assert sym.claim.c0 == 0.5


def test_complex_heat_claim_spot_check():
    sym, _ = builtin("complex_heat", eps=1, k=2)
    rep = sym.check_claim([np.linspace(0.01, 20, 400)])
    assert rep["ok"]


def test_ns_symbol_projection_is_divergence_free():
    sym, _ = builtin("ns_incompressible", d=3)
    xi = FreqPoint(1, Fraction(1, 2), -2)
    N = sym.N_hat(xi)
    for col in range(len(N[0])):
        div = sum(xi.coords[j] * N[j][col] for j in range(3))
        assert div == 0


def test_fractional_heat_symbol_is_eps_times_power_of_modulus():
    sym, _ = builtin("fractional_heat", eps=Fraction(-1, 2), s=2)
    assert sym.L_hat(FreqPoint(3)) == ((Fraction(-9, 2),),)
    sym, _ = builtin("fractional_heat", eps=1, s=1, alphas=[(1, 0), (0, 0)])
    assert sym.L_hat(FreqPoint(3, 4)) == ((5,),)
    assert sym.M_hat(FreqPoint(3, 4)) == ((3 * I,), (1,))
