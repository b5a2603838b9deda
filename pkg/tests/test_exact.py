from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from halfspec.exact import GaussianRational, I, as_exact, conj, decode_number, encode_number, is_exact

rationals = st.fractions(min_value=-100, max_value=100, max_denominator=50)
gaussians = st.builds(GaussianRational, rationals, rationals)


def test_unit_squares_to_minus_one():
    assert I * I == -1


def test_floats_are_not_exact():
    assert not is_exact(0.5)
    with pytest.raises(TypeError):
        as_exact(0.5)


def test_conjugate_of_unit():
    assert conj(I) == -I


@given(gaussians, gaussians, gaussians)
def test_field_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    if b != 0:
        assert (a / b) * b == a


@given(gaussians)
def test_json_roundtrip(z):
    assert decode_number(encode_number(z)) == z


def test_fraction_roundtrip():
    assert decode_number(encode_number(Fraction(-3, 7))) == Fraction(-3, 7)


def test_complex_float_roundtrip():
    assert decode_number(encode_number(1.5 - 2j)) == 1.5 - 2j
