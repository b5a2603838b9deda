"""Evolution equations ``u_t = L(D) u + N(D) H(M(D) u)`` on the Fourier side.

An equation is a :class:`SymbolTable` (the multipliers ``L, M, N`` as
functions of the frequency) together with a :class:`NonlinearSeries` (the
Taylor table of the analytic nonlinearity ``H``).

Fourier convention: ``F(fg) = F f * F g``, so ``d/dx_k`` has symbol
``i xi_k`` and products become convolutions.  Symbols are written once and
evaluated either exactly (rational frequencies, Gaussian-rational results) or
on numpy arrays of frequencies (grid solver); see :class:`ExactContext` and
:class:`ArrayContext`.
"""
from __future__ import annotations

import ast
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .exact import I, GaussianRational, as_exact, decode_number, encode_number, is_exact
from .exppoly import ExpPoly
from .spectral import AtomicSpectrum, FreqPoint, SupportSpec, convolve

__all__ = [
    "ExactContext",
    "ArrayContext",
    "SymbolTable",
    "LMNClaim",
    "NonlinearSeries",
    "Majorants",
    "evaluate_nonlinearity",
    "majorants",
    "builtin",
    "BUILTIN_NAMES",
    "equation_from_config",
    "parse_symbol",
]


# ---------------------------------------------------------------------------
# evaluation contexts

class ExactContext:
    """Scalar arithmetic on rationals; the imaginary unit is exact."""

    i = I
    exact = True

    @staticmethod
    def sign(x):
        return (x > 0) - (x < 0)

    @staticmethod
    def sqrt(x):
        r = math.isqrt(x.numerator) if isinstance(x, Fraction) and x >= 0 else None
        if r is not None:
            s = math.isqrt(x.denominator)
            if r * r == x.numerator and s * s == x.denominator:
                return Fraction(r, s)
        return complex(x) ** 0.5 if complex(x).imag or float(x) < 0 else math.sqrt(float(x))

    @staticmethod
    def power(x, p):
        if isinstance(p, int) or (isinstance(p, Fraction) and p.denominator == 1):
            return x ** int(p)
        return complex(x) ** float(p) if complex(x).imag or float(x) < 0 else float(x) ** float(p)

    @staticmethod
    def zero(_like=None):
        return Fraction(0)

    @staticmethod
    def one(_like=None):
        return Fraction(1)


class ArrayContext:
    """Elementwise arithmetic on numpy arrays of frequencies."""

    i = 1j
    exact = False

    @staticmethod
    def sign(x):
        return np.sign(x)

    @staticmethod
    def sqrt(x):
        return np.sqrt(np.asarray(x, dtype=complex)) if np.iscomplexobj(x) or np.any(np.asarray(x) < 0) \
            else np.sqrt(x)

    @staticmethod
    def power(x, p):
        return np.power(np.asarray(x, dtype=complex if np.iscomplexobj(x) else float), float(p))

    @staticmethod
    def zero(like=None):
        return 0.0 if like is None else np.zeros_like(np.asarray(like, dtype=float))

    @staticmethod
    def one(like=None):
        return 1.0 if like is None else np.ones_like(np.asarray(like, dtype=float))


SymbolFn = Callable[[Sequence, type], list]


def _identity(n: int) -> SymbolFn:
    def f(x, ctx):
        z, o = ctx.zero(x[0]), ctx.one(x[0])
        return [[o if i == j else z for j in range(n)] for i in range(n)]
    return f


def _zeros(rows: int, cols: int) -> SymbolFn:
    def f(x, ctx):
        z = ctx.zero(x[0])
        return [[z] * cols for _ in range(rows)]
    return f


def _norm2(x):
    return sum(c * c for c in x)


@dataclass(frozen=True)
class LMNClaim:
    """User-asserted bound ``sigma_max((L + L*)/2) <= (1 - c0) p`` and ``|N| + |M| <= C0 <p>``.

    ``p`` maps coordinates (with a context) to the level profile.
    """

    p: Callable
    c0: float
    C0: float
    description: str = ""


@dataclass
class SymbolTable:
    """Fourier multipliers of an equation.

    Attributes
    ----------
    d, n1, n2, n3 : int
        Space dimension; sizes of ``u``, of the argument of ``H``, of its value.
    L, M, N : callable ``(coords, ctx) -> nested lists``
        Symbols of shape ``n1 x n1``, ``n2 x n1``, ``n1 x n3``.
    support : SupportSpec
        Admissible frequency region for data.
    semilinear_orthogonal : bool
        Whether the equation is asserted to be semilinear in the directions
        orthogonal to the level direction.
    claim : LMNClaim, optional
        Boundary-decay claim used by the grid solver.
    """

    name: str
    d: int
    n1: int
    n2: int
    n3: int
    L: SymbolFn
    M: SymbolFn
    N: SymbolFn
    support: SupportSpec = field(default_factory=SupportSpec)
    semilinear_orthogonal: bool = True
    claim: LMNClaim | None = None
    params: dict = field(default_factory=dict)

    # exact evaluation at one frequency -----------------------------------
    def _at(self, fn, xi: FreqPoint, rows: int, cols: int):
        if xi.dim != self.d:
            raise ValueError(f"{self.name} lives in dimension {self.d}, got a {xi.dim}-d frequency")
        mat = fn(xi.coords, ExactContext)
        if len(mat) != rows or any(len(r) != cols for r in mat):
            raise ValueError(f"symbol of {self.name} has the wrong shape")
        return tuple(tuple(as_exact(v) if is_exact(v) else complex(v) for v in r) for r in mat)

    def L_hat(self, xi: FreqPoint):
        return self._at(self.L, xi, self.n1, self.n1)

    def M_hat(self, xi: FreqPoint):
        return self._at(self.M, xi, self.n2, self.n1)

    def N_hat(self, xi: FreqPoint):
        return self._at(self.N, xi, self.n1, self.n3)

    # array evaluation ----------------------------------------------------
    def _grid(self, fn, coords: Sequence[np.ndarray], rows: int, cols: int) -> np.ndarray:
        mat = fn([np.asarray(c, dtype=float) for c in coords], ArrayContext)
        shape = np.broadcast(*coords).shape
        out = np.zeros((rows, cols) + shape, dtype=complex)
        for i in range(rows):
            for j in range(cols):
                out[i, j] = np.broadcast_to(np.asarray(mat[i][j], dtype=complex), shape)
        return out

    def L_grid(self, coords):
        return self._grid(self.L, coords, self.n1, self.n1)

    def M_grid(self, coords):
        return self._grid(self.M, coords, self.n2, self.n1)

    def N_grid(self, coords):
        return self._grid(self.N, coords, self.n1, self.n3)

    def L_is_diagonal_at(self, xi: FreqPoint) -> bool:
        L = self.L_hat(xi)
        return all(L[i][j] == 0 for i in range(self.n1) for j in range(self.n1) if i != j)

    def check_claim(self, coords: Sequence[np.ndarray]) -> dict:
        """Spot-check the boundary-decay claim on sampled frequencies.

        Returns the worst ratios ``sigma_max / ((1 - c0) p)`` and
        ``(|N| + |M|) / (C0 <p>)`` (each must be ``<= 1``; a nonpositive
        ``sigma_max`` where ``p = 0`` counts as satisfied).
        """
        if self.claim is None:
            raise ValueError(f"{self.name} carries no boundary-decay claim")
        c = self.claim
        coords = [np.ravel(np.asarray(x, dtype=float)) for x in coords]
        p = np.real(np.asarray(c.p(coords, ArrayContext), dtype=complex)) * np.ones_like(coords[0])
        L = np.moveaxis(self.L_grid(coords), -1, 0)
        M = np.moveaxis(self.M_grid(coords), -1, 0)
        N = np.moveaxis(self.N_grid(coords), -1, 0)
        herm = 0.5 * (L + np.conj(np.swapaxes(L, 1, 2)))
        smax = np.linalg.eigvalsh(herm)[:, -1]
        bound = (1 - c.c0) * p
        with np.errstate(divide="ignore", invalid="ignore"):
            r1 = np.where(bound > 0, smax / np.where(bound > 0, bound, 1), np.where(smax <= 1e-14, 0.0, np.inf))
        opn = np.linalg.norm(N, ord=2, axis=(1, 2)) + np.linalg.norm(M, ord=2, axis=(1, 2))
        r2 = opn / (c.C0 * np.sqrt(1 + p * p))
        return {"decay_ratio": float(np.max(r1)), "size_ratio": float(np.max(r2)),
                "ok": bool(np.max(r1) <= 1 + 1e-12 and np.max(r2) <= 1 + 1e-12), "samples": int(p.size)}


# ---------------------------------------------------------------------------
# nonlinearity

def _coeff_norm(vec) -> float:
    return math.sqrt(sum(abs(complex(c)) ** 2 for c in vec))


class NonlinearSeries:
    """Taylor table ``alpha -> H^(alpha)(0)/alpha!`` of an analytic map ``C^n2 -> C^n3``.

    Parameters
    ----------
    n2, n3 : int
        Input and output sizes.
    k0 : int
        Vanishing order: ``H(z) = O(|z|**(k0+1))``; entries with
        ``|alpha| <= k0`` are rejected.
    terms : mapping, optional
        Finite table ``{alpha: coefficient vector}``.
    generator : callable, optional
        For infinite families, a zero-argument callable returning an iterator
        of ``(alpha, vector)`` in nondecreasing ``|alpha|``.
    radius : float
        Radius of convergence of the majorant series.
    """

    def __init__(self, n2: int, n3: int, k0: int = 1, terms: Mapping | None = None,
                 generator: Callable[[], Iterator] | None = None, radius: float = math.inf,
                 description: str = ""):
        if k0 < 1:
            raise ValueError("k0 must be at least 1 (linear terms belong in L)")
        if (terms is None) == (generator is None):
            raise ValueError("give exactly one of terms or generator")
        self.n2, self.n3, self.k0 = n2, n3, k0
        self.radius = radius
        self.description = description
        self._generator = generator
        self._terms: dict = {}
        if terms is not None:
            for alpha, vec in terms.items():
                alpha = tuple(int(a) for a in alpha)
                vec = tuple(vec) if isinstance(vec, (list, tuple)) else (vec,)
                self._check(alpha, vec)
                vec = tuple(as_exact(v) if is_exact(v) else complex(v) for v in vec)
                if any(v != 0 for v in vec):
                    self._terms[alpha] = vec

    def _check(self, alpha, vec):
        if len(alpha) != self.n2 or any(a < 0 for a in alpha):
            raise ValueError(f"multi-index {alpha} does not match n2={self.n2}")
        if sum(alpha) <= self.k0:
            raise ValueError(f"term {alpha} has order {sum(alpha)} <= k0={self.k0}; fold linear parts into L")
        if len(vec) != self.n3:
            raise ValueError(f"coefficient vector must have length n3={self.n3}")

    @property
    def is_finite(self) -> bool:
        return self._generator is None

    @property
    def terms(self) -> dict:
        if not self.is_finite:
            raise ValueError("infinite family; use terms_up_to")
        return dict(self._terms)

    def terms_up_to(self, degree: int) -> list:
        """All nonzero terms with ``|alpha| <= degree`` in canonical order."""
        if self.is_finite:
            items = [(a, v) for a, v in self._terms.items() if sum(a) <= degree]
        else:
            items = []
            for alpha, vec in self._generator():
                alpha = tuple(alpha)
                if sum(alpha) > degree:
                    break
                vec = tuple(vec)
                self._check(alpha, vec)
                items.append((alpha, vec))
        return sorted(items, key=lambda t: (sum(t[0]), t[0]))

    @property
    def max_degree(self) -> float:
        return max((sum(a) for a in self._terms), default=0) if self.is_finite else math.inf

    @classmethod
    def power(cls, k: int, coeff=1) -> NonlinearSeries:
        return cls(1, 1, k0=k - 1, terms={(k,): (coeff,)}, description=f"{coeff} u^{k}")

    def __call__(self, z: Sequence[complex]) -> np.ndarray:
        """Pointwise value (finite tables only, or partial sums up to degree 64)."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(self.n3, dtype=complex)
        for alpha, vec in self.terms_up_to(64 if not self.is_finite else 10**9):
            out += np.asarray([complex(v) for v in vec]) * np.prod(z ** np.asarray(alpha))
        return out

    def to_json(self) -> dict:
        if not self.is_finite:
            raise ValueError("infinite families are named builtins, not serializable tables")
        return {"k0": self.k0, "n2": self.n2, "n3": self.n3,
                "terms": [{"alpha": list(a), "coeff": [encode_number(c) for c in v]}
                          for a, v in sorted(self._terms.items())]}

    @classmethod
    def from_json(cls, data: Mapping) -> NonlinearSeries:
        terms = {}
        for t in data["terms"]:
            coeff = t["coeff"]
            coeff = coeff if isinstance(coeff, list) else [coeff]
            terms[tuple(t["alpha"])] = tuple(decode_number(c) for c in coeff)
        n2 = int(data.get("n2", len(next(iter(terms))) if terms else 1))
        n3 = int(data.get("n3", len(next(iter(terms.values()))) if terms else 1))
        return cls(n2, n3, int(data.get("k0", 1)), terms=terms)

    def __repr__(self):
        return f"NonlinearSeries(n2={self.n2}, n3={self.n3}, k0={self.k0}, {self.description or len(self._terms)})"


def _conv_trunc(a: AtomicSpectrum, b: AtomicSpectrum, lam, direction) -> AtomicSpectrum:
    return convolve(a, b, max_level=lam, direction=direction)


def evaluate_nonlinearity(H: NonlinearSeries, v: AtomicSpectrum, max_level, direction=None) -> AtomicSpectrum:
    """Fourier transform of ``H(w)`` restricted to levels ``<= max_level``, where ``F w = v``.

    Every atom of ``v`` has level at least ``delta_min > 0``, so a monomial of
    degree ``|alpha|`` only produces levels ``>= |alpha| delta_min``; the sum
    is therefore cut exactly at ``|alpha| <= max_level / delta_min``.
    """
    if v.ncomp != H.n2:
        raise ValueError(f"nonlinearity expects {H.n2} components, spectrum has {v.ncomp}")
    lam = Fraction(max_level) if not isinstance(max_level, Fraction) else max_level
    dmin = v.min_level(direction)
    if dmin is None:
        return AtomicSpectrum({}, ncomp=H.n3)
    if dmin <= 0:
        bad = [xi for xi in v.frequencies() if xi.level(direction) <= 0]
        raise ValueError(f"spectrum has atoms at nonpositive level: {bad[:3]}")
    degree = int(lam // dmin)
    comps = [v.component(j) for j in range(H.n2)]
    powers: dict = {}

    def power(j: int, p: int) -> AtomicSpectrum:
        key = (j, p)
        if key not in powers:
            if p == 1:
                powers[key] = comps[j].truncate(lam, direction)
            else:
                powers[key] = _conv_trunc(power(j, p - 1), comps[j], lam, direction)
        return powers[key]

    acc: dict = {}
    for alpha, vec in H.terms_up_to(degree):
        prod = None
        for j, p in enumerate(alpha):
            if p == 0:
                continue
            f = power(j, p)
            prod = f if prod is None else _conv_trunc(prod, f, lam, direction)
            if len(prod) == 0:
                break
        if prod is None or len(prod) == 0:
            continue
        for xi, (c,) in prod.items():
            row = acc.setdefault(xi, [0] * H.n3)
            for k, hk in enumerate(vec):
                if hk != 0:
                    row[k] = row[k] + c * hk if not _is_zero(row[k]) else c * hk
    return AtomicSpectrum({xi: tuple(r) for xi, r in acc.items()}, ncomp=H.n3)


def _is_zero(c) -> bool:
    return c.is_zero() if isinstance(c, ExpPoly) else c == 0


@dataclass(frozen=True)
class Majorants:
    """``H~(r) = sum |c_alpha| r**(|alpha|-2)`` and ``H~1(r) = sum_j alpha_j |c_alpha| r**(|alpha|-2)``."""

    value: float
    derivative: float
    truncated: bool = False


def majorants(H: NonlinearSeries, r: float, tol: float = 1e-17) -> Majorants:
    """Majorant series of ``H`` at radius ``r``.

    The coefficient norm is Euclidean.  For infinite families the sum stops
    once the remaining terms are below ``tol`` relative to the partial sum
    (``truncated=True``), and radii at or beyond the radius of convergence are
    rejected.
    """
    if r < 0:
        raise ValueError("r must be nonnegative")
    if not H.is_finite and r >= H.radius:
        raise ValueError(f"r={r} is outside the radius of convergence {H.radius}")
    val = der = 0.0
    if H.is_finite:
        for alpha, vec in H.terms.items():
            nrm = _coeff_norm(vec)
            k = sum(alpha)
            w = r ** (k - 2) if k >= 2 else (math.inf if r == 0 else r ** (k - 2))
            val += nrm * w
            der += k * nrm * w
        return Majorants(val, der, False)
    degree = 2
    while True:
        items = H.terms_up_to(degree)
        val = sum(_coeff_norm(v) * r ** (sum(a) - 2) for a, v in items)
        der = sum(sum(a) * _coeff_norm(v) * r ** (sum(a) - 2) for a, v in items)
        # geometric tail bound beyond the current degree
        tail = degree * r ** (degree - 1) / max(1e-300, (1 - r)) ** 2
        if tail <= tol * max(der, 1e-300) or degree > 4096:
            return Majorants(val, der, True)
        degree *= 2


# ---------------------------------------------------------------------------
# catalogue

def _diag(entries: Callable) -> SymbolFn:
    def f(x, ctx):
        vals = entries(x, ctx)
        z = ctx.zero(x[0])
        n = len(vals)
        return [[vals[i] if i == j else z for j in range(n)] for i in range(n)]
    return f


def _scalar(expr: Callable) -> SymbolFn:
    return lambda x, ctx: [[expr(x, ctx)]]


def _q(x):
    if isinstance(x, (Fraction, GaussianRational)):
        return x
    if isinstance(x, int) and not isinstance(x, bool):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, complex):
        return x
    if isinstance(x, float):
        return Fraction(x) if x == int(x) else x
    raise TypeError(f"unsupported parameter {x!r}")


def _halfspace(d: int) -> SupportSpec:
    return SupportSpec("halfspace", direction=tuple([1] + [0] * (d - 1)))


def _level_profile(x, ctx):
    return x[0]


def _ode_square(d: int = 1):
    sym = SymbolTable("ode_square", d, 1, 1, 1, _zeros(1, 1), _identity(1), _identity(1), _halfspace(d),
                      params={"d": d})
    return sym, NonlinearSeries.power(2)


def _burgers():
    sym = SymbolTable("burgers", 1, 1, 1, 1,
                      _scalar(lambda x, c: -x[0] ** 2), _identity(1),
                      _scalar(lambda x, c: c.i * x[0]), _halfspace(1),
                      claim=LMNClaim(lambda x, c: x[0] + x[0] ** 2, 0.5, 2.0, "p = xi + xi^2"))
    return sym, NonlinearSeries.power(2)


def _complex_heat(eps=1, k: int = 2, d: int = 1):
    eps = _q(eps)
    if k < 2:
        raise ValueError("complex_heat needs k >= 2")
    sym = SymbolTable("complex_heat", d, 1, 1, 1,
                      _scalar(lambda x, c: -eps * _norm2(x)), _identity(1), _identity(1), _halfspace(d),
                      claim=LMNClaim(_level_profile, 0.5, 2.0, "p = xi_1"),
                      params={"eps": eps, "k": k, "d": d})
    return sym, NonlinearSeries.power(k)


def _clm(eps=1):
    eps = _q(eps)
    sym = SymbolTable("clm", 1, 1, 2, 1,
                      _scalar(lambda x, c: -eps * x[0] ** 2),
                      lambda x, c: [[c.one(x[0])], [c.i * c.sign(x[0])]],
                      _identity(1), _halfspace(1), params={"eps": eps})
    return sym, NonlinearSeries(2, 1, 1, terms={(1, 1): (1,)}, description="z1 z2")


def _kdv():
    sym = SymbolTable("kdv", 1, 1, 1, 1,
                      _scalar(lambda x, c: c.i * x[0] ** 3), _identity(1),
                      _scalar(lambda x, c: c.i * x[0]), _halfspace(1))
    return sym, NonlinearSeries.power(2, 3)


def _nls_star(alpha=1):
    alpha = _q(alpha)
    ia = I * alpha
    ia_bar = I * (alpha.conjugate() if hasattr(alpha, "conjugate") else alpha)
    sym = SymbolTable("nls_star", 1, 2, 2, 2,
                      _diag(lambda x, c: [-c.i * x[0] ** 2, c.i * x[0] ** 2]),
                      _identity(2), _identity(2), _halfspace(1), params={"alpha": alpha})
    H = NonlinearSeries(2, 2, 2, terms={(2, 1): (-ia, 0), (1, 2): (0, ia_bar)},
                        description="(-i a u^2 v, i conj(a) v^2 u)")
    return sym, H


def _ns_incompressible(d: int = 2, eps1=1, eps_perp=1):
    if d < 2:
        raise ValueError("incompressible flow needs d >= 2")
    e1, ep = _q(eps1), _q(eps_perp)

    def L(x, c):
        lam = -(e1 * x[0] ** 2 + ep * sum(xk * xk for xk in x[1:]))
        z = c.zero(x[0])
        return [[lam if i == j else z for j in range(d)] for i in range(d)]

    def N(x, c):
        n2 = _norm2(x)
        rows = []
        for j in range(d):
            row = []
            for m in range(d):
                proj = (c.one(x[0]) if j == m else c.zero(x[0])) - x[j] * x[m] / n2
                for k in range(d):
                    row.append(-proj * c.i * x[k])
            rows.append(row)
        return rows

    # u (x) u: output channel (m, k) is z_m z_k
    outs: dict = {}
    for m in range(d):
        for k in range(d):
            alpha = [0] * d
            alpha[m] += 1
            alpha[k] += 1
            outs.setdefault(tuple(alpha), [0] * (d * d))[m * d + k] = 1
    terms = {a: tuple(v) for a, v in outs.items()}
    sym = SymbolTable("ns_incompressible", d, d, d, d * d, L, _identity(d), N, _halfspace(d),
                      semilinear_orthogonal=True, params={"d": d, "eps1": e1, "eps_perp": ep})
    return sym, NonlinearSeries(d, d * d, 1, terms=terms, description="u (x) u")


def _nlkg(d: int = 1, c=1, power: int = 2):
    c2 = _q(c) ** 2
    n = d + 2

    def L(x, ctx):
        z, o = ctx.zero(x[0]), ctx.one(x[0])
        m = [[z] * n for _ in range(n)]
        m[0][n - 1] = o
        for k in range(1, d + 1):
            m[k][n - 1] = ctx.i * x[k - 1]
            m[n - 1][k] = ctx.i * x[k - 1]
        m[n - 1][0] = -c2 * o
        return m

    def N(x, ctx):
        z, o = ctx.zero(x[0]), ctx.one(x[0])
        return [[o if i == n - 1 else z] for i in range(n)]

    alpha = tuple([power] + [0] * (n - 1))
    sym = SymbolTable("nlkg", d, n, n, 1, L, _identity(n), N, _halfspace(d), params={"d": d, "c": c, "power": power})
    return sym, NonlinearSeries(n, 1, power - 1, terms={alpha: (1,)}, description=f"u^{power}")


def _heat_cascade(d: int = 1, L: Callable | None = None, power: int = 2):
    Lfn = (lambda x, c: -_norm2(x)) if L is None else L
    sym = SymbolTable("heat_cascade", d, 1, 1, 1, _scalar(Lfn), _identity(1), _identity(1), _halfspace(d),
                      claim=LMNClaim(_level_profile, 0.5, 2.0, "p = xi_1"), params={"d": d})
    return sym, NonlinearSeries.power(power)


def _lacunary(d: int = 1):
    def gen():
        n = 1
        while True:
            yield (2 ** n,), (Fraction(1),)
            n += 1

    sym = SymbolTable("lacunary", d, 1, 1, 1, _scalar(lambda x, c: c.one(x[0])), _identity(1), _identity(1),
                      _halfspace(d), params={"d": d})
    return sym, NonlinearSeries(1, 1, 1, generator=gen, radius=1.0, description="sum_{n>=1} u^(2^n)")


def _fractional_heat(eps=1, s=2, alphas: Sequence[Sequence[int]] = ((0,),), d: int | None = None,
                     H: NonlinearSeries | None = None):
    eps, s = _q(eps), _q(s)
    alphas = [tuple(int(a) for a in al) for al in alphas]
    if not alphas:
        raise ValueError("need at least one derivative channel")
    d = len(alphas[0]) if d is None else d
    if any(len(a) != d for a in alphas):
        raise ValueError("every derivative multi-index needs d entries")
    if complex(s).real < 0:
        raise ValueError("fractional heat needs Re s >= 0")
    m = len(alphas)

    def L(x, c):
        n2 = _norm2(x)
        half = s / 2 if isinstance(s, Fraction) else s / 2
        return [[eps * c.power(n2, half)]]

    def M(x, c):
        rows = []
        for al in alphas:
            v = c.one(x[0])
            for k, a in enumerate(al):
                for _ in range(a):
                    v = v * (c.i * x[k])
            rows.append([v])
        return rows

    if H is None:
        H = (NonlinearSeries(m, 1, m - 1, terms={tuple([1] * m): (1,)}, description="product of channels")
             if m >= 2 else NonlinearSeries.power(2))
    sym = SymbolTable("fractional_heat", d, 1, m, 1, L, M, _identity(1), _halfspace(d),
                      semilinear_orthogonal=all(sum(a[1:]) == 0 for a in alphas),
                      params={"eps": eps, "s": s, "alphas": alphas})
    return sym, H


def _burgers_nd(d: int = 2, eps=1):
    eps = _q(eps)

    def L(x, c):
        lam = -eps * _norm2(x)
        z = c.zero(x[0])
        return [[lam if i == j else z for j in range(d)] for i in range(d)]

    # (u . grad) u_j = sum_k d_k(u_k u_j) for gradient flows; stored in divergence form
    def N(x, c):
        rows = []
        for j in range(d):
            row = []
            for m in range(d):
                for k in range(d):
                    row.append(-c.i * x[k] if m == j else c.zero(x[0]))
            rows.append(row)
        return rows

    outs: dict = {}
    for m in range(d):
        for k in range(d):
            alpha = [0] * d
            alpha[m] += 1
            alpha[k] += 1
            outs.setdefault(tuple(alpha), [0] * (d * d))[m * d + k] = 1
    sym = SymbolTable("burgers_nd", d, d, d, d * d, L, _identity(d), N, _halfspace(d), params={"d": d, "eps": eps})
    return sym, NonlinearSeries(d, d * d, 1, terms={a: tuple(v) for a, v in outs.items()}, description="u (x) u")


_BUILTINS = {
    "ode_square": _ode_square,
    "burgers": _burgers,
    "complex_heat": _complex_heat,
    "clm": _clm,
    "kdv": _kdv,
    "nls_star": _nls_star,
    "ns_incompressible": _ns_incompressible,
    "nlkg": _nlkg,
    "heat_cascade": _heat_cascade,
    "lacunary": _lacunary,
    "fractional_heat": _fractional_heat,
    "burgers_nd": _burgers_nd,
}
BUILTIN_NAMES = tuple(_BUILTINS)


def builtin(name: str, **params) -> tuple[SymbolTable, NonlinearSeries]:
    """Catalogued equation by name.

    ==================  ==========================================================
    ``ode_square``      ``u_t = u^2`` (``d`` free)
    ``burgers``         ``u_t = u_xx + (u^2)_x``
    ``complex_heat``    ``u_t = eps Lap u + u^k``
    ``clm``             ``v_t = eps v_xx + v Hilbert(v)``
    ``kdv``             ``u_t + u_xxx = 6 u u_x``
    ``nls_star``        ``i u_t + u_xx = alpha u^2 u*`` with ``v = u*`` as second unknown
    ``ns_incompressible`` ``u_t = eps1 d_1^2 u + eps_perp Lap_perp u - P div(u (x) u)``
    ``nlkg``            ``u_tt + c^2 u - Lap u = u^power`` as a first-order system
    ``heat_cascade``    ``u_t = L u + u^2`` with ``L = Lap`` by default
    ``lacunary``        ``u_t = sum_{n>=0} u^(2^n)`` (the ``n = 0`` term in ``L``)
    ``fractional_heat`` ``u_t = eps |D|^s u + H(D^alpha1 u, ...)``
    ``burgers_nd``      ``u_t = eps Lap u - div(u (x) u)``
    ==================  ==========================================================
    """
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise ValueError(f"unknown equation {name!r}; choose from {', '.join(BUILTIN_NAMES)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {name}: {exc}") from None


# ---------------------------------------------------------------------------
# symbol expressions for configuration files

_ALLOWED_FUNCS = {"sign", "sqrt", "abs"}


def parse_symbol(expr: str, d: int) -> Callable:
    """Compile an arithmetic expression in ``xi``/``xi1..xid`` and ``i`` into a symbol entry.

    Supported: numbers (decimals are read exactly), ``+ - * / **``, unary
    minus and the functions ``sign``, ``sqrt``, ``abs``.
    """
    tree = ast.parse(expr, mode="eval")
    names = {"i"} | {f"xi{k + 1}" for k in range(d)} | ({"xi"} if d == 1 else set())

    def check(node):
        if isinstance(node, ast.Expression):
            return check(node.body)
        if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)):
            return check(node.left) and check(node.right)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            return check(node.operand)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return True
        if isinstance(node, ast.Name):
            if node.id not in names:
                raise ValueError(f"unknown name {node.id!r} in symbol {expr!r}")
            return True
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _ALLOWED_FUNCS \
                and len(node.args) == 1 and not node.keywords:
            return check(node.args[0])
        raise ValueError(f"unsupported syntax in symbol {expr!r}: {ast.dump(node)[:60]}")

    check(tree)

    def ev(node, x, ctx):
        if isinstance(node, ast.Expression):
            return ev(node.body, x, ctx)
        if isinstance(node, ast.Constant):
            v = node.value
            return Fraction(repr(v)) if isinstance(v, float) else Fraction(v)
        if isinstance(node, ast.Name):
            if node.id == "i":
                return ctx.i
            if node.id == "xi":
                return x[0]
            return x[int(node.id[2:]) - 1]
        if isinstance(node, ast.UnaryOp):
            v = ev(node.operand, x, ctx)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Call):
            v = ev(node.args[0], x, ctx)
            if node.func.id == "sign":
                return ctx.sign(v)
            if node.func.id == "sqrt":
                return ctx.sqrt(v)
            return abs(v) if ctx.exact else np.abs(v)
        a, b = ev(node.left, x, ctx), ev(node.right, x, ctx)
        op = node.op
        if isinstance(op, ast.Add):
            return a + b
        if isinstance(op, ast.Sub):
            return a - b
        if isinstance(op, ast.Mult):
            return a * b
        if isinstance(op, ast.Div):
            return a / b
        return ctx.power(a, b)

    def fn(x, ctx):
        v = ev(tree, x, ctx)
        if not ctx.exact and isinstance(v, (Fraction, int)):
            return float(v) * ctx.one(x[0])
        if not ctx.exact and isinstance(v, GaussianRational):
            return complex(v) * ctx.one(x[0])
        return v

    return fn


def _matrix_symbol(spec, d: int, rows: int, cols: int) -> SymbolFn:
    if isinstance(spec, str):
        spec = [[spec]]
    entries = [[parse_symbol(str(e), d) for e in row] for row in spec]
    if len(entries) != rows or any(len(r) != cols for r in entries):
        raise ValueError(f"symbol matrix must be {rows}x{cols}")
    return lambda x, ctx: [[f(x, ctx) for f in row] for row in entries]


def equation_from_config(cfg: Mapping) -> tuple[SymbolTable, NonlinearSeries]:
    """Build an equation from a JSON-style mapping.

    Either ``{"name": ..., "params": {...}}`` for a builtin or
    ``{"custom": {"d", "n1", "n2", "n3", "L", "M", "N"}, "H": {"k0", "terms"}}``
    with symbols written as expressions (see :func:`parse_symbol`).  Optional
    ``"support"`` (SupportSpec JSON) and ``"claims"`` (``{"c0", "C0", "p"}``).
    """
    if not isinstance(cfg, Mapping):
        raise ValueError("equation config must be an object")
    if "name" in cfg:
        params = dict(cfg.get("params", {}))
        sym, H = builtin(cfg["name"], **params)
    elif "custom" in cfg:
        c = cfg["custom"]
        try:
            d, n1 = int(c["d"]), int(c.get("n1", 1))
            n2, n3 = int(c.get("n2", n1)), int(c.get("n3", n1))
            L = _matrix_symbol(c["L"], d, n1, n1)
            M = _matrix_symbol(c["M"], d, n2, n1) if "M" in c else _identity(n1)
            N = _matrix_symbol(c["N"], d, n1, n3) if "N" in c else _identity(n1)
            H = NonlinearSeries.from_json({"n2": n2, "n3": n3, **cfg["H"]})
        except KeyError as exc:
            raise ValueError(f"custom equation lacks {exc}") from None
        sym = SymbolTable(c.get("label", "custom"), d, n1, n2, n3, L, M, N, _halfspace(d))
    else:
        raise ValueError("equation config needs 'name' or 'custom'")
    if "support" in cfg:
        sym.support = SupportSpec.from_json(cfg["support"])
    if "claims" in cfg:
        cl = cfg["claims"]
        p = parse_symbol(str(cl.get("p", "xi1" if sym.d > 1 else "xi")), sym.d)
        sym.claim = LMNClaim(p, float(cl["c0"]), float(cl["C0"]), "user-asserted")
    return sym, H
