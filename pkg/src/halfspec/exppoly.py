"""Exponential polynomials ``sum_j c_j t**m_j * exp(lam_j * t)``.

This is the class in which every coefficient of a lattice-supported solution
lives: it is closed under sums, products, differentiation and the scalar
Duhamel integral ``q(t) = int_0^t exp(lam0 (t - s)) p(s) ds``.

Rates and coefficients may be exact (``int``, ``Fraction``,
:class:`~halfspec.exact.GaussianRational`) or floating ``complex``.  Exact
inputs give exact outputs.
"""
from __future__ import annotations

import math
import warnings
from fractions import Fraction
from typing import Iterable

import numpy as np

from .exact import GaussianRational, as_exact, conj, decode_number, encode_number, is_exact

__all__ = ["ExpPoly", "duhamel", "NearResonanceWarning"]


class NearResonanceWarning(UserWarning):
    """Two floating rates were merged because they agreed to the resonance threshold."""


def _norm_rate(lam):
    if is_exact(lam):
        return as_exact(lam)
    lam = complex(lam)
    return lam


def _norm_coeff(c):
    if is_exact(c):
        return as_exact(c)
    if isinstance(c, (float, complex, int)):
        return c
    return complex(c)


def _rate_key(lam):
    z = complex(lam)
    return (z.real, z.imag)


class ExpPoly:
    """Canonical exponential polynomial.

    Parameters
    ----------
    terms : iterable of ``(rate, power, coeff)`` or a mapping
        ``{(rate, power): coeff}``.  Duplicates are merged and exact zeros
        dropped.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Iterable | dict | None = None):
        acc: dict = {}
        if terms is None:
            items = ()
        elif isinstance(terms, dict):
            items = ((lam, m, c) for (lam, m), c in terms.items())
        else:
            items = terms
        for lam, m, c in items:
            if not isinstance(m, int) or m < 0:
                raise ValueError(f"power must be a nonnegative integer, got {m!r}")
            key = (_norm_rate(lam), m)
            acc[key] = acc.get(key, 0) + _norm_coeff(c)
        self._terms = {k: v for k, v in acc.items() if v != 0}

    # constructors ---------------------------------------------------------
    @classmethod
    def constant(cls, c) -> ExpPoly:
        return cls([(0, 0, c)])

    @classmethod
    def exp(cls, lam, c=1) -> ExpPoly:
        return cls([(lam, 0, c)])

    @classmethod
    def monomial(cls, m: int, c=1, lam=0) -> ExpPoly:
        return cls([(lam, m, c)])

    @classmethod
    def zero(cls) -> ExpPoly:
        return cls()

    # inspection -----------------------------------------------------------
    @property
    def terms(self) -> list[tuple]:
        """Sorted ``(rate, power, coeff)`` triples."""
        keys = sorted(self._terms, key=lambda k: (_rate_key(k[0]), k[1]))
        return [(lam, m, self._terms[(lam, m)]) for lam, m in keys]

    def as_dict(self) -> dict:
        return dict(self._terms)

    def coeff(self, lam, m: int = 0):
        return self._terms.get((_norm_rate(lam), m), 0)

    def is_zero(self) -> bool:
        return not self._terms

    def is_exact(self) -> bool:
        return all(is_exact(lam) and is_exact(c) for (lam, _), c in self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def max_abs_coeff(self) -> float:
        return max((abs(complex(c)) for c in self._terms.values()), default=0.0)

    def degree(self) -> int:
        return max((m for _, m in self._terms), default=-1)

    # algebra --------------------------------------------------------------
    @staticmethod
    def _coerce(other):
        if isinstance(other, ExpPoly):
            return other
        return ExpPoly.constant(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0) + c
        return ExpPoly._from_clean(out)

    __radd__ = __add__

    def __neg__(self):
        return ExpPoly._from_clean({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, ExpPoly):
            c = _norm_coeff(other)
            return ExpPoly._from_clean({k: v * c for k, v in self._terms.items()})
        out: dict = {}
        for (l1, m1), c1 in self._terms.items():
            for (l2, m2), c2 in other._terms.items():
                key = (_norm_rate(l1 + l2), m1 + m2)
                out[key] = out.get(key, 0) + c1 * c2
        return ExpPoly._from_clean(out)

    def __rmul__(self, other):
        return self * other

    def __truediv__(self, c):
        if isinstance(c, ExpPoly):
            raise TypeError("division by an exponential polynomial is not supported")
        if is_exact(c):
            c = as_exact(c)
            return self * (Fraction(1) / c if isinstance(c, Fraction) else GaussianRational(1) / c)
        return self * (1 / c)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers")
        result, base = ExpPoly.constant(1), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, ExpPoly):
            try:
                other = ExpPoly.constant(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self._terms == other._terms

    __hash__ = None

    @classmethod
    def _from_clean(cls, d: dict) -> ExpPoly:
        obj = cls.__new__(cls)
        obj._terms = {k: v for k, v in d.items() if v != 0}
        return obj

    # calculus -------------------------------------------------------------
    def derivative(self) -> ExpPoly:
        out: dict = {}
        for (lam, m), c in self._terms.items():
            out[(lam, m)] = out.get((lam, m), 0) + lam * c
            if m:
                out[(lam, m - 1)] = out.get((lam, m - 1), 0) + m * c
        return ExpPoly._from_clean(out)

    def duhamel(self, lambda0, resonance_tol: float | None = None) -> ExpPoly:
        return duhamel(lambda0, self, resonance_tol=resonance_tol)

    def conjugate(self) -> ExpPoly:
        """Complex conjugate for real ``t`` (rates and coefficients conjugated)."""
        return ExpPoly((conj(lam), m, conj(c)) for (lam, m), c in self._terms.items())

    def chop(self, tol: float) -> ExpPoly:
        """Drop terms with ``|c| <= tol`` (floating-point cleanup)."""
        return ExpPoly._from_clean({k: c for k, c in self._terms.items() if abs(complex(c)) > tol})

    def merge_rates(self, tol: float) -> ExpPoly:
        """Merge floating rates that agree to ``tol * max(1, max |rate|)``.

        Rates reached along different summation orders differ in the last
        bits; merging them keeps the number of terms from multiplying.  Each
        cluster is represented by its first rate in sorted order.  Exact
        polynomials are returned unchanged.
        """
        if tol <= 0 or not self._terms or self.is_exact():
            return self
        q = tol * max(1.0, max(abs(complex(lam)) for lam, _ in self._terms))
        buckets: dict = {}
        out: dict = {}
        for (lam, m), c in sorted(self._terms.items(), key=lambda kv: (_rate_key(kv[0][0]), kv[0][1])):
            z = complex(lam)
            key = (math.floor(z.real / q), math.floor(z.imag / q))
            rep = None
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    for r in buckets.get((key[0] + dx, key[1] + dy), ()):
                        if abs(z - r) <= q:
                            rep = r
                            break
                    if rep is not None:
                        break
                if rep is not None:
                    break
            if rep is None:
                buckets.setdefault(key, []).append(z)
                rep = z
            out[(rep, m)] = out.get((rep, m), 0) + c
        return ExpPoly._from_clean(out)

    # evaluation -----------------------------------------------------------
    def __call__(self, t):
        return self.eval(t)

    def _arrays(self):
        lam = np.array([complex(l) for l, _ in self._terms], dtype=complex)
        m = np.array([k for _, k in self._terms], dtype=float)
        c = np.array([complex(v) for v in self._terms.values()], dtype=complex)
        return lam, m, c

    def eval(self, t):
        """Evaluate at real ``t`` (scalar or array) term by term in complex floats."""
        scalar = np.ndim(t) == 0
        tt = np.asarray(t, dtype=float)
        if not self._terms:
            return 0j if scalar else np.zeros(tt.shape, dtype=complex)
        lam, m, c = self._arrays()
        x = tt.reshape(tt.shape + (1,))
        acc = np.sum(c * x ** m * np.exp(lam * x), axis=-1)
        return complex(acc) if scalar else acc

    def eval_abs(self, t):
        """``sum |c| t**m exp(Re(lam) t)``: the size of the summands at ``t``.

        Rounding errors in :meth:`eval` are of order machine epsilon times
        this value, which makes it the natural scale for float residuals.
        """
        scalar = np.ndim(t) == 0
        tt = np.asarray(t, dtype=float)
        if not self._terms:
            return 0.0 if scalar else np.zeros(tt.shape)
        lam, m, c = self._arrays()
        x = tt.reshape(tt.shape + (1,))
        acc = np.sum(np.abs(c) * x ** m * np.exp(lam.real * x), axis=-1)
        return float(acc) if scalar else acc

    def eval_precise(self, t, dps: int = 50):
        """Evaluate at one real ``t`` with ``mpmath`` at ``dps`` digits.

        Exact coefficients are converted without rounding, which makes this the
        safe choice when large alternating coefficients cancel.
        """
        import mpmath

        with mpmath.workdps(dps):
            tt = mpmath.mpf(t) if not isinstance(t, Fraction) else mpmath.mpf(t.numerator) / t.denominator
            acc = mpmath.mpc(0)
            for (lam, m), c in self._terms.items():
                acc += _to_mp(c) * tt**m * mpmath.exp(_to_mp(lam) * tt)
            return acc

    # serialization ----------------------------------------------------------
    def to_json(self) -> list[dict]:
        return [
            {"rate": encode_number(lam), "power": m, "coeff": encode_number(c)}
            for lam, m, c in self.terms
        ]

    @classmethod
    def from_json(cls, data: list[dict]) -> ExpPoly:
        return cls((decode_number(d["rate"]), int(d["power"]), decode_number(d["coeff"])) for d in data)

    def __repr__(self):
        if not self._terms:
            return "ExpPoly(0)"
        parts = []
        for lam, m, c in self.terms:
            s = f"({c})"
            if m:
                s += f"*t^{m}" if m > 1 else "*t"
            if lam != 0:
                s += f"*exp(({lam})t)"
            parts.append(s)
        return "ExpPoly(" + " + ".join(parts) + ")"


def _to_mp(x):
    import mpmath

    if isinstance(x, GaussianRational):
        return mpmath.mpc(_to_mp(x.real), _to_mp(x.imag))
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    if isinstance(x, int):
        return mpmath.mpf(x)
    return mpmath.mpc(x)


def _is_resonant(lam, lambda0, resonance_tol):
    if lam == lambda0:
        return True
    if resonance_tol is None:
        return False
    if is_exact(lam) and is_exact(lambda0):
        return False
    a, b = complex(lam), complex(lambda0)
    return abs(a - b) <= resonance_tol * max(1.0, abs(b))


def duhamel(lambda0, p: ExpPoly, resonance_tol: float | None = None) -> ExpPoly:
    """Return ``q(t) = int_0^t exp(lambda0 (t-s)) p(s) ds`` in closed form.

    ``q`` solves ``q' = lambda0 q + p`` with ``q(0) = 0``.  A term whose rate
    equals ``lambda0`` gains one power of ``t``; any other term produces terms
    in its own rate plus a multiple of ``exp(lambda0 t)``.

    ``resonance_tol`` merges floating rates with
    ``|lam - lambda0| <= tol * max(1, |lambda0|)`` into the resonant branch.
    Exact rates are only ever compared exactly.
    """
    lambda0 = _norm_rate(lambda0)
    out: dict = {}

    def put(lam, m, c):
        key = (_norm_rate(lam), m)
        out[key] = out.get(key, 0) + c

    for (lam, m), c in p._terms.items():
        if _is_resonant(lam, lambda0, resonance_tol):
            if lam != lambda0:
                warnings.warn(
                    f"rate {lam} treated as resonant with {lambda0}", NearResonanceWarning, stacklevel=2
                )
            put(lambda0, m + 1, c * Fraction(1, m + 1))
            continue
        mu = lam - lambda0
        if is_exact(mu):
            mu = as_exact(mu)
            inv_mu = Fraction(1) / mu if isinstance(mu, Fraction) else GaussianRational(1) / mu
        else:
            inv_mu = 1 / complex(mu)
        inv_pows = [1, inv_mu]
        for _ in range(m):
            inv_pows.append(inv_pows[-1] * inv_mu)
        fact_m = math.factorial(m)
        # int_0^t s^m e^{mu s} ds = e^{mu t} sum_j (-1)^(m-j) m!/(j! mu^(m-j+1)) t^j - (-1)^m m!/mu^(m+1)
        for j in range(m + 1):
            sign = -1 if (m - j) % 2 else 1
            put(lam, j, c * inv_pows[m - j + 1] * Fraction(sign * fact_m, math.factorial(j)))
        sign = -1 if m % 2 else 1
        put(lambda0, 0, c * inv_pows[m + 1] * (-sign * fact_m))
    return ExpPoly._from_clean(out)

