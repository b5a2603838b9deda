"""Exact complex-rational numbers and a JSON codec for scalars.

Spectral coefficients and exponential rates are mostly Gaussian rationals
(``p/q + i r/s``) when the equation symbols are polynomials in the frequency
with rational coefficients.  Keeping them exact makes resonance tests and the
residual checks of the lattice solver decidable.  :class:`GaussianRational`
interoperates with ``int`` and :class:`fractions.Fraction`; mixing it with a
Python float or complex falls back to floating point.
"""
from __future__ import annotations

import math
import numbers
import sys
from fractions import Fraction

__all__ = [
    "GaussianRational",
    "I",
    "as_exact",
    "is_exact",
    "conj",
    "to_complex",
    "encode_number",
    "decode_number",
    "rational_str",
]

_HASH_MOD = 2**64
_IMAG = sys.hash_info.imag


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


class GaussianRational:
    """Complex number with exact rational real and imaginary parts."""

    __slots__ = ("_re", "_im")

    def __init__(self, re=0, im=0):
        self._re = _frac(re)
        self._im = _frac(im)

    @property
    def real(self) -> Fraction:
        return self._re

    @property
    def imag(self) -> Fraction:
        return self._im

    def conjugate(self) -> GaussianRational:
        return GaussianRational(self._re, -self._im)

    # coercion -------------------------------------------------------------
    @staticmethod
    def _lift(other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction)):
            return GaussianRational(other, 0)
        return None

    def __complex__(self) -> complex:
        return complex(float(self._re), float(self._im))

    def __bool__(self) -> bool:
        return bool(self._re) or bool(self._im)

    def __abs__(self) -> float:
        return math.hypot(float(self._re), float(self._im))

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return complex(self) + other if isinstance(other, numbers.Number) else NotImplemented
        return GaussianRational(self._re + o._re, self._im + o._im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self._re, -self._im)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return complex(self) - other if isinstance(other, numbers.Number) else NotImplemented
        return GaussianRational(self._re - o._re, self._im - o._im)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return other - complex(self) if isinstance(other, numbers.Number) else NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return complex(self) * other if isinstance(other, numbers.Number) else NotImplemented
        a, b, c, d = self._re, self._im, o._re, o._im
        return GaussianRational(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return complex(self) / other if isinstance(other, numbers.Number) else NotImplemented
        c, d = o._re, o._im
        den = c * c + d * d
        if den == 0:
            raise ZeroDivisionError("division by exact zero")
        a, b = self._re, self._im
        return GaussianRational((a * c + b * d) / den, (b * c - a * d) / den)

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return other / complex(self) if isinstance(other, numbers.Number) else NotImplemented
        return o / self

    def __pow__(self, n):
        if not isinstance(n, int):
            return complex(self) ** n
        if n < 0:
            return 1 / (self**-n)
        result, base = GaussianRational(1), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # comparison / hashing -------------------------------------------------
    def __eq__(self, other):
        o = self._lift(other)
        if o is not None:
            return self._re == o._re and self._im == o._im
        if isinstance(other, numbers.Complex):
            return complex(self) == complex(other)
        return NotImplemented

    def __hash__(self):
        if self._im == 0:
            return hash(self._re)
        # same recipe CPython uses for complex, so equal values hash equally
        h = (hash(self._re) + _IMAG * hash(self._im)) % _HASH_MOD
        if h >= _HASH_MOD // 2:
            h -= _HASH_MOD
        return -2 if h == -1 else h

    def __repr__(self):
        return f"GaussianRational({rational_str(self._re)!r}, {rational_str(self._im)!r})"

    def __str__(self):
        if self._im == 0:
            return rational_str(self._re)
        sign = "+" if self._im >= 0 else "-"
        return f"{rational_str(self._re)}{sign}{rational_str(abs(self._im))}i"


I = GaussianRational(0, 1)


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, GaussianRational)) and not isinstance(x, bool)


def as_exact(x):
    """Normalise an exact scalar: purely real Gaussian rationals become Fractions."""
    if isinstance(x, GaussianRational):
        return x.real if x.imag == 0 else x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot represent {x!r} exactly")


def conj(x):
    if isinstance(x, (int, Fraction)):
        return x
    return x.conjugate()


def to_complex(x) -> complex:
    return complex(x)


def rational_str(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def encode_number(x):
    """JSON-friendly encoding.

    Exact rationals become ``"p/q"`` strings, Gaussian rationals a
    ``{"re": "p/q", "im": "p/q"}`` object, floats stay numbers and complex
    floats become ``{"re": x, "im": y}``.
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, (int, Fraction)):
        return rational_str(x)
    if isinstance(x, GaussianRational):
        if x.imag == 0:
            return rational_str(x.real)
        return {"re": rational_str(x.real), "im": rational_str(x.imag)}
    if isinstance(x, float):
        return x
    if isinstance(x, complex):
        if x.imag == 0:
            return x.real
        return {"re": x.real, "im": x.imag}
    if isinstance(x, numbers.Complex):
        return encode_number(complex(x))
    raise TypeError(f"cannot encode {x!r}")


def decode_number(obj):
    if isinstance(obj, bool):
        raise ValueError("booleans are not numbers here")
    if isinstance(obj, str):
        return Fraction(obj)
    if isinstance(obj, int):
        return Fraction(obj)
    if isinstance(obj, float):
        return obj
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        obj = {"re": obj[0], "im": obj[1]}
    if isinstance(obj, dict) and set(obj) == {"re", "im"}:
        re, im = obj["re"], obj["im"]
        if isinstance(re, str) and isinstance(im, str):
            return as_exact(GaussianRational(Fraction(re), Fraction(im)))
        return complex(float(re), float(im))
    raise ValueError(f"cannot decode number from {obj!r}")
