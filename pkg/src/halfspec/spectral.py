"""Sparse atomic spectra on rational frequency lattices.

A solution whose Fourier transform is a finite sum of point masses is stored
as an :class:`AtomicSpectrum`: a map from exact frequency points to
coefficient vectors (numbers or :class:`~halfspec.exppoly.ExpPoly` time
profiles).  The *level* of a frequency is ``v . xi`` for a fixed direction
``v``; it adds under convolution, which is what makes the lattice solver
triangular.

:class:`ExpDensity` is the continuous counterpart used for stationary
profiles: finite sums ``c * xi**a * exp(-z xi)`` on the half line.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .exact import as_exact, decode_number, encode_number, is_exact, rational_str
from .exppoly import ExpPoly, duhamel
from .monofun import MonotoneFn, is_superadditive

__all__ = [
    "FreqPoint",
    "SupportSpec",
    "AtomicSpectrum",
    "ExpDensity",
    "convolve",
    "check_support",
    "truncate",
    "min_level",
    "expdensity_convolve",
]


def _q(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)) and not isinstance(x, bool):
        return Fraction(x)
    if isinstance(x, float):
        if not x.is_integer():
            raise TypeError(f"frequencies must be exact rationals; got float {x!r} (pass 'p/q' strings)")
        return Fraction(int(x))
    raise TypeError(f"cannot make a rational from {x!r}")


@dataclass(frozen=True, order=True)
class FreqPoint:
    """Frequency vector with exact rational coordinates."""

    coords: tuple[Fraction, ...]

    def __init__(self, *coords):
        if len(coords) == 1 and isinstance(coords[0], (tuple, list)):
            coords = tuple(coords[0])
        if not coords:
            raise ValueError("a frequency needs at least one coordinate")
        object.__setattr__(self, "coords", tuple(_q(c) for c in coords))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __add__(self, other: FreqPoint) -> FreqPoint:
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        return FreqPoint(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: FreqPoint) -> FreqPoint:
        return FreqPoint(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> FreqPoint:
        return FreqPoint(tuple(-a for a in self.coords))

    def scaled(self, k) -> FreqPoint:
        return FreqPoint(tuple(_q(k) * a for a in self.coords))

    def level(self, direction: Sequence | None = None) -> Fraction:
        """``v . xi``; the default direction is the first unit vector."""
        if direction is None:
            return self.coords[0]
        return sum((_q(v) * x for v, x in zip(direction, self.coords)), Fraction(0))

    def norm(self) -> float:
        return math.sqrt(float(sum(x * x for x in self.coords)))

    def as_floats(self) -> np.ndarray:
        return np.array([float(x) for x in self.coords])

    def to_json(self) -> list[str]:
        return [rational_str(x) for x in self.coords]

    @classmethod
    def from_json(cls, data) -> FreqPoint:
        return cls(tuple(Fraction(x) if isinstance(x, str) else _q(x) for x in data))

    def __repr__(self):
        return "FreqPoint(" + ", ".join(rational_str(x) for x in self.coords) + ")"


def _as_point(p) -> FreqPoint:
    if isinstance(p, FreqPoint):
        return p
    if isinstance(p, (tuple, list)):
        return FreqPoint(tuple(p))
    return FreqPoint(p)


def _is_zero_coeff(c) -> bool:
    if isinstance(c, ExpPoly):
        return c.is_zero()
    return c == 0


class SupportSpec:
    """Admissible frequency region.

    Parameters
    ----------
    kind : {"halfspace", "cone", "lattice"}
        ``halfspace``: level ``v . xi > 0``.  ``cone``: additionally
        ``|xi| <= R(v . xi)`` with ``R`` super-additive.  ``lattice``:
        ``xi`` is an integer combination of ``basis`` and its level is at
        least ``min_level > 0``.
    direction : sequence of rationals, optional
        The level direction ``v``; defaults to the first unit vector.
    """

    def __init__(self, kind: str = "halfspace", direction: Sequence | None = None, *,
                 R: MonotoneFn | None = None, basis: Sequence[Sequence] | None = None,
                 min_level=None, check_grid: Sequence[float] | None = None):
        if kind not in ("halfspace", "cone", "lattice"):
            raise ValueError(f"unknown support kind {kind!r}")
        self.kind = kind
        self.direction = None if direction is None else tuple(_q(v) for v in direction)
        self.R = R
        self.basis = None
        self.min_level = None
        if kind == "cone":
            if R is None:
                raise ValueError("a cone needs its radius profile R")
            grid = np.linspace(0, float(R.breakpoints[-1]) * 2 + 1, 200) if check_grid is None else check_grid
            ok, witness = is_superadditive(R, grid)
            if not ok:
                raise ValueError(f"cone profile is not super-additive (witness {witness})")
        if kind == "lattice":
            if basis is None or min_level is None:
                raise ValueError("a lattice support needs basis and min_level")
            self.basis = tuple(tuple(_q(c) for c in b) for b in basis)
            self.min_level = _q(min_level)
            if self.min_level <= 0:
                raise ValueError("lattice min_level must be positive")

    def level(self, xi: FreqPoint) -> Fraction:
        return xi.level(self.direction)

    def violation(self, xi: FreqPoint) -> str | None:
        """Reason the frequency is inadmissible, or ``None``."""
        lev = self.level(xi)
        if lev <= 0:
            return f"level {rational_str(lev)} is not positive"
        if self.kind == "cone":
            r = float(self.R(float(lev)))
            if xi.norm() > r * (1 + 1e-14):
                return f"|xi|={xi.norm():.6g} exceeds R(level)={r:.6g}"
        elif self.kind == "lattice":
            if _lattice_coords(self.basis, xi) is None:
                return "not an integer combination of the lattice basis"
            if lev < self.min_level:
                return f"level {rational_str(lev)} below min_level {rational_str(self.min_level)}"
        return None

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.direction is not None:
            out["direction"] = [rational_str(v) for v in self.direction]
        if self.R is not None:
            out["R"] = self.R.to_json()
        if self.basis is not None:
            out["basis"] = [[rational_str(c) for c in b] for b in self.basis]
            out["min_level"] = rational_str(self.min_level)
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> SupportSpec:
        R = MonotoneFn.from_json(data["R"]) if "R" in data else None
        return cls(data.get("kind", "halfspace"), data.get("direction"), R=R,
                   basis=data.get("basis"), min_level=data.get("min_level"))

    def __repr__(self):
        return f"SupportSpec({self.kind!r}, direction={self.direction})"


def _lattice_coords(basis, xi: FreqPoint):
    """Integer coordinates of ``xi`` in ``basis`` (exact elimination) or ``None``."""
    k, d = len(basis), xi.dim
    # augmented matrix columns = basis vectors
    rows = [[basis[j][i] for j in range(k)] + [xi.coords[i]] for i in range(d)]
    piv_cols = []
    r = 0
    for c in range(k):
        p = next((i for i in range(r, d) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        pv = rows[r][c]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(d):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        piv_cols.append(c)
        r += 1
    if any(all(x == 0 for x in rows[i][:k]) and rows[i][k] != 0 for i in range(d)):
        return None
    if len(piv_cols) < k:
        raise ValueError("lattice basis vectors are linearly dependent")
    sol = [rows[i][k] for i in range(len(piv_cols))]
    if any(s.denominator != 1 for s in sol):
        return None
    return sol


class AtomicSpectrum:
    """Finite sum of point masses with vector coefficients.

    Parameters
    ----------
    entries : mapping
        ``{frequency: coefficient vector}``; frequencies may be
        :class:`FreqPoint` or tuples of rationals, a scalar coefficient is a
        vector of length one.  Atoms whose coefficients all vanish are dropped.
    ncomp : int, optional
        Number of components; inferred from the entries when omitted.
    """

    __slots__ = ("_atoms", "ncomp")

    def __init__(self, entries: Mapping | Iterable = (), ncomp: int | None = None):
        atoms: dict[FreqPoint, tuple] = {}
        items = entries.items() if isinstance(entries, Mapping) else entries
        for xi, c in items:
            vec = tuple(c) if isinstance(c, (list, tuple)) else (c,)
            if ncomp is None:
                ncomp = len(vec)
            if len(vec) != ncomp:
                raise ValueError("all coefficient vectors must have the same length")
            if all(_is_zero_coeff(x) for x in vec):
                continue
            atoms[_as_point(xi)] = vec
        self._atoms = atoms
        self.ncomp = 1 if ncomp is None else ncomp

    # mapping protocol -------------------------------------------------------
    def __len__(self) -> int:
        return len(self._atoms)

    def __iter__(self) -> Iterator[FreqPoint]:
        return iter(sorted(self._atoms))

    def __contains__(self, xi) -> bool:
        return _as_point(xi) in self._atoms

    def __getitem__(self, xi) -> tuple:
        return self._atoms[_as_point(xi)]

    def get(self, xi, default=None):
        return self._atoms.get(_as_point(xi), default)

    def items(self):
        return ((xi, self._atoms[xi]) for xi in sorted(self._atoms))

    def frequencies(self) -> list[FreqPoint]:
        return sorted(self._atoms)

    @property
    def dim(self) -> int | None:
        return next(iter(self._atoms)).dim if self._atoms else None

    # construction helpers ---------------------------------------------------
    @classmethod
    def delta(cls, xi, coeff) -> AtomicSpectrum:
        return cls({_as_point(xi): coeff})

    def component(self, j: int) -> AtomicSpectrum:
        return AtomicSpectrum(((xi, (c[j],)) for xi, c in self._atoms.items()), ncomp=1)

    @classmethod
    def stack(cls, comps: Sequence[AtomicSpectrum], zero=0) -> AtomicSpectrum:
        """Combine scalar spectra into one vector spectrum."""
        keys = set()
        for s in comps:
            keys.update(s._atoms)
        return cls(((xi, tuple(s._atoms.get(xi, (zero,))[0] for s in comps)) for xi in keys),
                   ncomp=len(comps))

    def map(self, fn) -> AtomicSpectrum:
        """Apply ``fn`` to every coefficient."""
        return AtomicSpectrum(((xi, tuple(fn(x) for x in c)) for xi, c in self._atoms.items()), ncomp=self.ncomp)

    def snapshot(self, t: float) -> AtomicSpectrum:
        """Evaluate ExpPoly coefficients at time ``t``."""
        return self.map(lambda c: c.eval(t) if isinstance(c, ExpPoly) else c)

    def __add__(self, other: AtomicSpectrum) -> AtomicSpectrum:
        if self.ncomp != other.ncomp:
            raise ValueError("component counts differ")
        out = dict(self._atoms)
        for xi, c in other._atoms.items():
            out[xi] = tuple(a + b for a, b in zip(out[xi], c)) if xi in out else c
        return AtomicSpectrum(out, ncomp=self.ncomp)

    def scale(self, k) -> AtomicSpectrum:
        return self.map(lambda c: c * k)

    def __eq__(self, other):
        if not isinstance(other, AtomicSpectrum):
            return NotImplemented
        return self.ncomp == other.ncomp and self._atoms == other._atoms

    __hash__ = None

    # levels -----------------------------------------------------------------
    def levels(self, direction=None) -> list[Fraction]:
        return sorted({xi.level(direction) for xi in self._atoms})

    def min_level(self, direction=None) -> Fraction | None:
        return min((xi.level(direction) for xi in self._atoms), default=None)

    def truncate(self, max_level, direction=None) -> AtomicSpectrum:
        lam = _q(max_level)
        return AtomicSpectrum(((xi, c) for xi, c in self._atoms.items() if xi.level(direction) <= lam),
                              ncomp=self.ncomp)

    def restrict(self, keep) -> AtomicSpectrum:
        return AtomicSpectrum(((xi, c) for xi, c in self._atoms.items() if keep(xi)), ncomp=self.ncomp)

    def total_variation(self) -> float:
        return float(sum(sum(abs(complex(x)) for x in c) for c in self._atoms.values()))

    # serialization ----------------------------------------------------------
    def to_json(self) -> dict:
        def enc(c):
            return c.to_json() if isinstance(c, ExpPoly) else encode_number(c)

        return {"components": self.ncomp,
                "atoms": [{"xi": xi.to_json(), "coeff": [enc(x) for x in c]} for xi, c in self.items()]}

    @classmethod
    def from_json(cls, data: Mapping) -> AtomicSpectrum:
        def dec(x):
            if isinstance(x, list) and (not x or isinstance(x[0], dict)):
                return ExpPoly.from_json(x)
            return decode_number(x)

        return cls(((FreqPoint.from_json(a["xi"]), tuple(dec(x) for x in a["coeff"])) for a in data["atoms"]),
                   ncomp=int(data.get("components", 1)))

    def __repr__(self):
        return f"AtomicSpectrum({len(self)} atoms, ncomp={self.ncomp})"


def convolve(F: AtomicSpectrum, G: AtomicSpectrum, max_level=None, direction=None) -> AtomicSpectrum:
    """Convolution of scalar atomic spectra: atoms at ``xi + eta`` with product coefficients.

    With ``max_level`` the output is truncated on the fly (atoms above that
    level are never formed).
    """
    if F.ncomp != 1 or G.ncomp != 1:
        raise ValueError("convolve acts on scalar spectra; use .component(j)")
    lam = None if max_level is None else _q(max_level)
    out: dict = {}
    gitems = sorted(G._atoms.items())
    glev = [xi.level(direction) for xi, _ in gitems]
    for xi, (a,) in sorted(F._atoms.items()):
        lx = xi.level(direction)
        for (eta, (b,)), le in zip(gitems, glev):
            if lam is not None and lx + le > lam:
                continue
            key = xi + eta
            prod = a * b
            out[key] = out[key] + prod if key in out else prod
    return AtomicSpectrum(((k, (v,)) for k, v in out.items()), ncomp=1)


def check_support(F: AtomicSpectrum, spec: SupportSpec):
    """Return ``(ok, violations)`` with one ``(frequency, reason)`` per offending atom."""
    bad = [(xi, why) for xi in F.frequencies() if (why := spec.violation(xi)) is not None]
    return (not bad), bad


def truncate(F: AtomicSpectrum, max_level, direction=None) -> AtomicSpectrum:
    return F.truncate(max_level, direction)


def min_level(F: AtomicSpectrum, direction=None):
    return F.min_level(direction)


# ---------------------------------------------------------------------------
# half-line densities

class ExpDensity:
    """Density ``sum c * xi**a * exp(-z xi)`` on ``xi > 0``.

    Internally an :class:`ExpPoly` in the variable ``xi`` with rate ``-z``,
    so evaluation, differentiation and conjugation are inherited.
    """

    __slots__ = ("poly",)

    def __init__(self, terms: Iterable[tuple] = (), *, poly: ExpPoly | None = None):
        if poly is None:
            poly = ExpPoly(((-z if not is_exact(z) else -as_exact(z)), int(a), c) for a, z, c in terms)
        for lam, _, _ in poly.terms:
            if complex(lam).real > 0:
                raise ValueError("density rates need Re z >= 0")
        self.poly = poly

    @property
    def terms(self) -> list[tuple]:
        """``(a, z, c)`` triples in canonical order."""
        return [(m, -lam, c) for lam, m, c in self.poly.terms]

    def __call__(self, xi):
        return self.poly.eval(xi)

    def __add__(self, other: ExpDensity) -> ExpDensity:
        return ExpDensity(poly=self.poly + other.poly)

    def __sub__(self, other: ExpDensity) -> ExpDensity:
        return ExpDensity(poly=self.poly - other.poly)

    def __neg__(self) -> ExpDensity:
        return ExpDensity(poly=-self.poly)

    def __mul__(self, k) -> ExpDensity:
        if isinstance(k, ExpDensity):
            raise TypeError("pointwise products of densities are not needed; use expdensity_convolve")
        return ExpDensity(poly=self.poly * k)

    __rmul__ = __mul__

    def mul_poly(self, coeffs: Mapping[int, object]) -> ExpDensity:
        """Multiply by the polynomial ``sum_k coeffs[k] * xi**k``."""
        p = ExpPoly((0, k, c) for k, c in coeffs.items())
        return ExpDensity(poly=self.poly * p)

    def conjugate(self) -> ExpDensity:
        """Pointwise complex conjugate (``xi`` real)."""
        return ExpDensity(poly=self.poly.conjugate())

    def is_zero(self) -> bool:
        return self.poly.is_zero()

    def coefficient_vector(self, keys: Sequence[tuple]) -> np.ndarray:
        d = {(a, complex(z)): complex(c) for a, z, c in self.terms}
        return np.array([d.get((a, complex(z)), 0j) for a, z in keys])

    def __eq__(self, other):
        if not isinstance(other, ExpDensity):
            return NotImplemented
        return self.poly == other.poly

    __hash__ = None

    def to_json(self) -> list[dict]:
        return [{"power": a, "z": encode_number(z), "coeff": encode_number(c)} for a, z, c in self.terms]

    @classmethod
    def from_json(cls, data) -> ExpDensity:
        return cls((int(d["power"]), decode_number(d["z"]), decode_number(d["coeff"])) for d in data)

    def __repr__(self):
        inner = " + ".join(f"({c})*xi^{a}*exp(-({z})xi)" for a, z, c in self.terms) or "0"
        return f"ExpDensity({inner})"


def expdensity_convolve(f: ExpDensity, g: ExpDensity) -> ExpDensity:
    """Half-line convolution ``(f*g)(xi) = int_0^xi f(eta) g(xi - eta) d eta`` in closed form.

    Uses ``xi**b exp(lam xi) / b!`` as the ``(b+1)``-fold convolution power of
    ``exp(lam xi)``, and convolution with ``exp(lam xi)`` is the scalar
    Duhamel integral.
    """
    out = ExpPoly()
    for lam, b, c in g.poly.terms:
        acc = f.poly
        for _ in range(b + 1):
            acc = duhamel(lam, acc)
        out = out + acc * (c * math.factorial(b))
    return ExpDensity(poly=out)
