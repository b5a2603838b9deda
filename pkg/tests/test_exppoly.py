import cmath
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from halfspec.exact import GaussianRational, I
from halfspec.exppoly import ExpPoly, duhamel

small_q = st.fractions(min_value=-3, max_value=3, max_denominator=6)
rates = st.one_of(small_q, st.builds(GaussianRational, small_q, small_q))
terms = st.lists(st.tuples(rates, st.integers(0, 3), small_q), max_size=4)
polys = terms.map(ExpPoly)


def test_product_of_exponentials_adds_rates():
    lam, mu = Fraction(2), GaussianRational(-1, 3)
    assert ExpPoly.exp(lam) * ExpPoly.exp(mu) == ExpPoly.exp(lam + mu)


def test_derivative_of_t_exp():
    lam = Fraction(-5, 2)
    p = ExpPoly.monomial(1, 1, lam)
    assert p.derivative() == ExpPoly.exp(lam) + ExpPoly.monomial(1, lam, lam)


@given(polys)
def test_additive_inverse(p):
    assert (p + (-p)).is_zero()


def test_resonant_duhamel():
    lam = GaussianRational(-1, 2)
    assert duhamel(lam, ExpPoly.exp(lam)) == ExpPoly.monomial(1, 1, lam)


def test_duhamel_of_constant_at_zero_rate():
    assert duhamel(0, ExpPoly.constant(1)) == ExpPoly.monomial(1)


def test_duhamel_produces_first_burgers_mode():
    assert duhamel(-2, ExpPoly.constant(2)) == ExpPoly.constant(1) - ExpPoly.exp(-2)


@given(polys, polys, polys)
def test_ring_axioms(p, q, r):
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert p * q == q * p


@given(rates, polys)
def test_duhamel_solves_its_ode(lam0, p):
    q = duhamel(lam0, p)
    assert q.derivative() == q * lam0 + p
    assert sum(c for _, m, c in q.terms if m == 0) == 0


@given(polys, polys)
def test_derivative_is_a_derivation(p, q):
    assert (p * q).derivative() == p.derivative() * q + p * q.derivative()


def test_duhamel_matches_quadrature():
    rng = random.Random(7)
    for _ in range(40):
        lam0 = complex(rng.uniform(-2, 0.5), rng.uniform(-2, 2))
        p = ExpPoly([(complex(rng.uniform(-2, 0.5), rng.uniform(-2, 2)), rng.randint(0, 2),
                      complex(rng.uniform(-1, 1), rng.uniform(-1, 1))) for _ in range(3)])
        q = duhamel(lam0, p)
        for t in (0.3, 1.7, 5.0):
            def f(s, part):
                v = p.eval(s) * cmath.exp(lam0 * (t - s))
                return v.real if part == 0 else v.imag
            re = quad(f, 0, t, args=(0,), epsabs=1e-13, epsrel=1e-13, limit=200)[0]
            im = quad(f, 0, t, args=(1,), epsabs=1e-13, epsrel=1e-13, limit=200)[0]
            assert abs(q.eval(t) - complex(re, im)) <= 1e-10


def test_json_roundtrip_exact_and_float():
    p = ExpPoly([(GaussianRational(-1, 2), 2, Fraction(3, 4)), (0, 0, I)])
    assert ExpPoly.from_json(p.to_json()) == p
    f = ExpPoly([(-1.5 + 2j, 1, 0.25 - 1j)])
    assert ExpPoly.from_json(f.to_json()) == f


def test_value_at_zero_sums_power_zero_terms():
    p = ExpPoly([(-1, 0, 2), (3, 0, Fraction(1, 2)), (-1, 4, 9)])
    assert p.eval(0) == Fraction(5, 2)


def test_negative_power_rejected():
    with pytest.raises(ValueError):
        ExpPoly([(0, -1, 1)])
