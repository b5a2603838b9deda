from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from halfspec.exact import GaussianRational
from halfspec.exppoly import ExpPoly
from halfspec.monofun import MonotoneFn
from halfspec.spectral import (AtomicSpectrum, ExpDensity, FreqPoint, SupportSpec, check_support, convolve,
                               expdensity_convolve, min_level, truncate)

pos_q = st.fractions(min_value=Fraction(1, 8), max_value=4, max_denominator=8)
coef = st.fractions(min_value=-3, max_value=3, max_denominator=5)


@st.composite
def spectra(draw, d=2, max_atoms=20):
    n = draw(st.integers(1, max_atoms))
    atoms = {}
    for _ in range(n):
        xi = (draw(pos_q),) + tuple(draw(coef) for _ in range(d - 1))
        atoms[xi] = draw(st.builds(GaussianRational, coef, coef).filter(lambda z: z != 0))
    return AtomicSpectrum(atoms)


def test_deltas_convolve_to_delta():
    a, b = FreqPoint(1, 2), FreqPoint(Fraction(1, 3), -1)
    out = convolve(AtomicSpectrum({a: 1}), AtomicSpectrum({b: 1}))
    assert dict(out.items()) == {a + b: (1,)}


def test_monochromatic_square():
    a = Fraction(3, 2)
    c = FreqPoint(Fraction(1, 5))
    F = AtomicSpectrum({c: a})
    assert dict(convolve(F, F).items()) == {c.scaled(2): (a * a,)}


def test_level_index_sum():
    levels = {FreqPoint(k): ExpPoly.exp(-k) for k in range(1, 5)}
    F = AtomicSpectrum(levels)
    out = convolve(F, F)
    assert out[FreqPoint(5)] == (sum((levels[FreqPoint(k)] * levels[FreqPoint(5 - k)] for k in range(1, 5)),
                                     ExpPoly.zero()),)


def test_boundary_atom_violates_halfspace():
    ok, bad = check_support(AtomicSpectrum({(0, 1): 1, (1, 0): 1}), SupportSpec())
    assert not ok and len(bad) == 1


def test_cone_violation():
    spec = SupportSpec("cone", R=MonotoneFn.linear(1.0))
    ok, bad = check_support(AtomicSpectrum({(1, 2): 1}), spec)
    assert not ok


def test_cone_rejects_non_superadditive_profile():
    with pytest.raises(ValueError):
        SupportSpec("cone", R=MonotoneFn([0, 1, 2], [0, 1, 1.2], 0.0))


def test_truncate_empty():
    assert len(truncate(AtomicSpectrum({}), 3)) == 0


def test_truncate_removes_high_levels():
    F = AtomicSpectrum({(1,): 1, (2,): 1, (Fraction(5, 2),): 1})
    assert [xi.coords[0] for xi in truncate(F, 2)] == [1, 2]


@given(spectra(), spectra())
def test_min_level_adds(F, G):
    FG = convolve(F, G)
    assert len(FG) == 0 or min_level(FG) >= min_level(F) + min_level(G)


@given(spectra(max_atoms=8), spectra(max_atoms=8), spectra(max_atoms=8))
def test_convolution_associative_and_commutative(F, G, K):
    assert dict(convolve(convolve(F, G), K).items()) == dict(convolve(F, convolve(G, K)).items())
    assert dict(convolve(F, G).items()) == dict(convolve(G, F).items())


@given(st.lists(st.tuples(pos_q, coef), min_size=1, max_size=6),
       st.lists(st.tuples(pos_q, coef), min_size=1, max_size=6))
def test_cone_support_closed_under_convolution(a, b):
    spec = SupportSpec("cone", R=MonotoneFn.linear(2.0))
    F = AtomicSpectrum({(x, y * x / 3): 1 for x, y in a})
    G = AtomicSpectrum({(x, y * x / 3): 1 for x, y in b})
    assert check_support(F, spec)[0] and check_support(G, spec)[0]
    assert check_support(convolve(F, G), spec)[0]


def test_spectrum_json_roundtrip():
    F = AtomicSpectrum({(1, Fraction(-1, 3)): (ExpPoly.monomial(2, GaussianRational(1, 2), -1), 3)})
    assert dict(AtomicSpectrum.from_json(F.to_json()).items()) == dict(F.items())


def _quad_conv(f, g, x):
    re = quad(lambda y: (f(y) * g(x - y)).real, 0, x, epsabs=1e-13, limit=200)[0]
    im = quad(lambda y: (f(y) * g(x - y)).imag, 0, x, epsabs=1e-13, limit=200)[0]
    return complex(re, im)


def test_exponential_self_convolution():
    z = GaussianRational(1, 2)
    e = ExpDensity([(0, z, 1)])
    assert expdensity_convolve(e, e).terms == ExpDensity([(1, z, 1)]).terms


def test_linear_exponential_self_convolution_beta():
    z = Fraction(3, 2)
    f = ExpDensity([(1, z, 1)])
    out = expdensity_convolve(f, f)
    assert out.terms == ExpDensity([(3, z, Fraction(1, 6))]).terms
    for x in (0.4, 1.3, 3.0):
        assert abs(out(x) - _quad_conv(f, f, x)) < 1e-11


def test_mixed_rate_convolution():
    z, w = GaussianRational(1, 1), Fraction(2)
    out = expdensity_convolve(ExpDensity([(0, z, 1)]), ExpDensity([(0, w, 1)]))
    expected = ExpDensity([(0, w, 1 / (z - w)), (0, z, -1 / (z - w))])
    assert (out - expected).is_zero()


@given(st.lists(st.tuples(st.integers(0, 3), st.floats(0.2, 3), st.floats(-2, 2)), min_size=1, max_size=3),
       st.lists(st.tuples(st.integers(0, 3), st.floats(0.2, 3), st.floats(-2, 2)), min_size=1, max_size=3))
def test_expdensity_convolution_matches_quadrature(a, b):
    f = ExpDensity([(k, complex(z, 0.3), c) for k, z, c in a])
    g = ExpDensity([(k, complex(z, -0.2), c) for k, z, c in b])
    out = expdensity_convolve(f, g)
    for x in (0.5, 2.0):
        ref = _quad_conv(f, g, x)
        assert abs(out(x) - ref) <= 1e-8 * (1 + abs(ref))


def test_vector_coefficients_share_index():
    F = AtomicSpectrum({(1,): (1, 2)})
    assert F.ncomp == 2 and F.component(1)[FreqPoint(1)] == (2,)
