"""Solvers for ``u_hat(t) = e^{tL} u0_hat + int_0^t e^{(t-s)L} N H(M u_hat(s)) ds``.

* :func:`solve_lattice` handles data made of finitely many point masses with
  positive level.  Every monomial of degree ``>= 2`` strictly raises the
  level, so atoms can be computed in increasing level order, each one an
  explicit exponential polynomial in ``t``.
* :func:`solve_grid` is a Picard iteration for densities on a uniform cell
  grid, measured in the weighted ``L^1`` norms ``Z^{b,s}_p``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.signal import fftconvolve

from .equations import ArrayContext, NonlinearSeries, SymbolTable, evaluate_nonlinearity
from .exact import is_exact
from .exppoly import ExpPoly, NearResonanceWarning, duhamel
from .spectral import AtomicSpectrum, FreqPoint, check_support

__all__ = [
    "SolverError",
    "LatticeSolution",
    "solve_lattice",
    "picard_sequence",
    "ode_iteration_coefficients",
    "select_contraction_params",
    "contraction_kappa",
    "FreqGrid",
    "GridState",
    "WeightParams",
    "GridSolution",
    "weight_profile",
    "z_norm",
    "grid_convolve",
    "grid_nonlinearity",
    "solve_grid",
    "grid_self_convergence",
]

RESONANCE_TOL = 1e-9
FLOAT_RESIDUAL_TOL = 1e-10
RATE_MERGE_TOL = 1e-12


class SolverError(RuntimeError):
    """Raised when a solve cannot proceed; ``info`` carries diagnostics."""

    def __init__(self, message: str, info: dict | None = None):
        super().__init__(message)
        self.info = info or {}


# ---------------------------------------------------------------------------
# lattice solver

@dataclass
class LatticeSolution:
    """Atoms ``xi -> (u_1(t), ..., u_n1(t))`` with ExpPoly coefficients, exact up to ``max_level``."""

    spectrum: AtomicSpectrum
    max_level: Fraction
    mode: str
    residual: dict = field(default_factory=dict)

    def coefficient(self, xi, comp: int = 0) -> ExpPoly:
        vec = self.spectrum.get(xi)
        return ExpPoly.zero() if vec is None else vec[comp]

    def at(self, t: float) -> AtomicSpectrum:
        return self.spectrum.snapshot(t)

    def restricted(self, max_level, direction=None) -> AtomicSpectrum:
        return self.spectrum.truncate(max_level, direction)


def _reachable(atoms: Sequence[FreqPoint], lam: Fraction, direction) -> list[FreqPoint]:
    seen = set(a for a in atoms if a.level(direction) <= lam)
    frontier = list(seen)
    while frontier:
        nxt = []
        for xi in frontier:
            for a in atoms:
                eta = xi + a
                if eta.level(direction) <= lam and eta not in seen:
                    seen.add(eta)
                    nxt.append(eta)
        frontier = nxt
    return sorted(seen, key=lambda x: (x.level(direction), x))


class _Modes:
    """Per-frequency eigen-data of ``L``: ``L = V diag(D) V^{-1}``."""

    def __init__(self, L, exact: bool):
        n = len(L)
        diag = all(L[i][j] == 0 for i in range(n) for j in range(n) if i != j)
        if diag:
            self.rates = [L[i][i] if exact else complex(L[i][i]) for i in range(n)]
            self.V = self.Vinv = None
            return
        if exact:
            raise SolverError("exact mode needs a diagonal L; use mode='float'")
        A = np.array([[complex(x) for x in row] for row in L])
        w, V = np.linalg.eig(A)
        if np.linalg.cond(V) > 1e10:
            raise SolverError("L is not diagonalizable (or nearly defective) here", {"eigenvalues": w.tolist()})
        # roundoff-level parts of eigenvalues are set to zero so equal rates merge
        cut = 1e-13 * max(1.0, float(np.max(np.abs(w))))
        self.rates = [complex(x.real if abs(x.real) > cut else 0.0, x.imag if abs(x.imag) > cut else 0.0)
                      for x in w]
        self.V, self.Vinv = V, np.linalg.inv(V)

    def _mix(self, A, vec):
        return [sum((ExpPoly.zero() + vec[j]) * complex(A[i, j]) for j in range(len(vec)) if A[i, j] != 0)
                if any(A[i, j] != 0 for j in range(len(vec))) else ExpPoly.zero() for i in range(len(vec))]

    def flow(self, u0):
        if self.V is None:
            return [ExpPoly.exp(r, c) if c != 0 else ExpPoly.zero() for r, c in zip(self.rates, u0)]
        y = self.Vinv @ np.array([complex(c) for c in u0])
        return self._mix(self.V, [ExpPoly.exp(r, c) for r, c in zip(self.rates, y)])

    def duhamel(self, src, tol):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NearResonanceWarning)
            return self._duhamel(src, tol)

    def _duhamel(self, src, tol):
        if self.V is None:
            return [duhamel(r, s, resonance_tol=tol) for r, s in zip(self.rates, src)]
        y = self._mix(self.Vinv, src)
        return self._mix(self.V, [duhamel(r, s, resonance_tol=tol) for r, s in zip(self.rates, y)])


def _matvec(A, vec):
    out = []
    for row in A:
        acc = ExpPoly.zero()
        for a, v in zip(row, vec):
            if a != 0 and not v.is_zero():
                acc = acc + v * a
        out.append(acc)
    return out


def _prepare(sym: SymbolTable, H: NonlinearSeries, u0: AtomicSpectrum, direction):
    if u0.ncomp != sym.n1:
        raise SolverError(f"{sym.name} has {sym.n1} components, data has {u0.ncomp}")
    if H.n2 != sym.n2 or H.n3 != sym.n3:
        raise SolverError("nonlinearity and symbols disagree on n2/n3")
    if len(u0) == 0:
        raise SolverError("empty reachable set: the initial spectrum has no atoms")
    dmin = u0.min_level(direction)
    if dmin <= 0:
        bad = [str(xi) for xi in u0.frequencies() if xi.level(direction) <= 0]
        raise SolverError("initial atoms on or below the boundary", {"atoms": bad})
    ok, bad = check_support(u0, sym.support)
    if not ok:
        raise SolverError("initial data violate the support constraint",
                          {"violations": [(str(x), r) for x, r in bad]})
    return dmin


def _resolve_mode(sym, u0, reach, mode):
    exact_data = all(is_exact(c) for _, vec in u0.items() for c in vec)
    if mode == "auto":
        if not exact_data:
            return "float"
        for xi in reach:
            L = sym.L_hat(xi)
            if not all(is_exact(x) for row in L for x in row) or not sym.L_is_diagonal_at(xi):
                return "float"
        return "exact"
    if mode not in ("exact", "float"):
        raise ValueError("mode must be 'auto', 'exact' or 'float'")
    return mode


def solve_lattice(sym: SymbolTable, H: NonlinearSeries, u0: AtomicSpectrum, max_level, *,
                  mode: str = "auto", direction=None, check: bool = True) -> LatticeSolution:
    """Exact solution for atomic data, truncated to levels ``<= max_level``.

    Parameters
    ----------
    sym, H : equation
    u0 : AtomicSpectrum
        Numeric (not ExpPoly) coefficients of length ``sym.n1``.
    max_level : rational
    mode : {'auto', 'exact', 'float'}
        ``exact`` keeps Gaussian-rational arithmetic (diagonal ``L`` with exact
        entries); ``float`` allows numeric eigen-decomposition.
    check : bool
        Verify the differential equation at every atom (see ``residual``).
    """
    lam = Fraction(max_level)
    dmin = _prepare(sym, H, u0, direction)
    atoms = u0.frequencies()
    reach = _reachable(atoms, lam, direction)
    mode = _resolve_mode(sym, u0, reach, mode)
    exact = mode == "exact"
    tol = None if exact else RESONANCE_TOL
    degree = int(lam // dmin)
    terms = [(a, v) for a, v in H.terms_up_to(degree)]

    sol: dict[FreqPoint, list] = {}
    w: dict[FreqPoint, list] = {}        # M u at computed atoms
    mono: dict = {}

    def mono_at(alpha: tuple, xi: FreqPoint):
        """Coefficient of ``w**alpha`` at ``xi``; only strictly lower atoms are touched when |alpha| >= 2."""
        key = (alpha, xi)
        if key in mono:
            return mono[key]
        j = next(i for i, a in enumerate(alpha) if a)
        rest = alpha[:j] + (alpha[j] - 1,) + alpha[j + 1:]
        if sum(rest) == 0:
            val = w[xi][j] if xi in w else ExpPoly.zero()
        else:
            val = ExpPoly.zero()
            lvl = xi.level(direction)
            need = sum(rest) * dmin
            for eta, weta in w.items():
                if weta[j].is_zero():
                    continue
                if lvl - eta.level(direction) < need:
                    continue
                sub = mono_at(rest, xi - eta)
                if not sub.is_zero():
                    val = val + weta[j] * sub
            if not exact:
                val = val.merge_rates(RATE_MERGE_TOL)
        mono[key] = val
        return val

    for xi in reach:
        lvl = xi.level(direction)
        hval = [ExpPoly.zero() for _ in range(sym.n3)]
        for alpha, vec in terms:
            if sum(alpha) * dmin > lvl:
                break
            m = mono_at(alpha, xi)
            if m.is_zero():
                continue
            for k, c in enumerate(vec):
                if c != 0:
                    hval[k] = hval[k] + m * c
        modes = _Modes(sym.L_hat(xi), exact)
        src = _matvec(sym.N_hat(xi), hval)
        init = u0.get(xi)
        lin = modes.flow(init) if init is not None else [ExpPoly.zero()] * sym.n1
        duh = modes.duhamel(src, tol)
        u = [a + b for a, b in zip(lin, duh)]
        if not exact:
            u = [p.merge_rates(RATE_MERGE_TOL) for p in u]
        if all(p.is_zero() for p in u):
            continue
        sol[xi] = u
        w[xi] = _matvec(sym.M_hat(xi), u)

    spectrum = AtomicSpectrum({xi: tuple(v) for xi, v in sol.items()}, ncomp=sym.n1)
    out = LatticeSolution(spectrum, lam, mode)
    if check:
        out.residual = lattice_residual(sym, H, out, direction=direction)
        if not out.residual["ok"]:
            raise SolverError("residual check failed", out.residual)
    return out


def lattice_residual(sym: SymbolTable, H: NonlinearSeries, sol: LatticeSolution, direction=None,
                     sample_times=(0.0, 0.25, 0.5, 1.0)) -> dict:
    """Residual ``d/dt u - L u - N H(M u)`` at every atom, recomputed from scratch.

    In exact mode the residual must vanish as an ExpPoly identity.  In float
    mode the residual at ``sample_times`` is divided by ``1 +`` the summed
    magnitudes of the terms of ``u'``, ``L u`` and ``N H(M u)``
    (:meth:`ExpPoly.eval_abs`), the scale of the rounding error, and the worst
    value is compared with ``FLOAT_RESIDUAL_TOL``.  The residual relative to
    the values themselves is reported as ``max_residual_value_scaled``; it can
    be much larger when nearly resonant rates produce large cancelling terms.
    """
    spec = sol.spectrum
    w = AtomicSpectrum({xi: tuple(_matvec(sym.M_hat(xi), list(v))) for xi, v in spec.items()}, ncomp=sym.n2)
    hw = evaluate_nonlinearity(H, w, sol.max_level, direction) if len(w) else AtomicSpectrum({}, ncomp=sym.n3)
    worst, worst_xi, exact_zero, worst_plain = 0.0, None, True, 0.0
    for xi, u in spec.items():
        u = list(u)
        hv = list(hw.get(xi, tuple(ExpPoly.zero() for _ in range(sym.n3))))
        hv = [ExpPoly.zero() + h for h in hv]
        lu = _matvec(sym.L_hat(xi), u)
        src = _matvec(sym.N_hat(xi), hv)
        for i in range(sym.n1):
            r = u[i].derivative() - lu[i] - src[i]
            if sol.mode == "exact":
                if not r.is_zero():
                    exact_zero = False
                    worst, worst_xi = max(worst, r.max_abs_coeff()), xi
                continue
            du = u[i].derivative()
            rv = [abs(r.eval(t)) for t in sample_times]
            plain = max(rv) / (1.0 + max(abs(du.eval(t)) + abs(lu[i].eval(t)) + abs(src[i].eval(t))
                                         for t in sample_times))
            val = max(v / (1.0 + du.eval_abs(t) + lu[i].eval_abs(t) + src[i].eval_abs(t))
                      for v, t in zip(rv, sample_times))
            worst_plain = max(worst_plain, plain)
            if val > worst:
                worst, worst_xi = val, xi
    ok = exact_zero if sol.mode == "exact" else worst <= FLOAT_RESIDUAL_TOL
    return {"ok": bool(ok), "mode": sol.mode, "exact_zero": sol.mode == "exact" and exact_zero,
            "max_residual": float(worst), "max_residual_value_scaled": float(worst_plain),
            "worst_atom": None if worst_xi is None else str(worst_xi),
            "atoms": len(spec)}


def picard_sequence(sym: SymbolTable, H: NonlinearSeries, u0: AtomicSpectrum, max_level, n: int, *,
                    mode: str = "auto", direction=None) -> list[LatticeSolution]:
    """Iterates ``v_0 = e^{tL}u0`` and ``v_j = e^{tL}u0 + Duhamel(N H(M v_{j-1}))``, truncated at ``max_level``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    lam = Fraction(max_level)
    _prepare(sym, H, u0, direction)
    reach = _reachable(u0.frequencies(), lam, direction)
    mode = _resolve_mode(sym, u0, reach, mode)
    exact = mode == "exact"
    tol = None if exact else RESONANCE_TOL
    modes = {xi: _Modes(sym.L_hat(xi), exact) for xi in reach}
    lin = {xi: modes[xi].flow(u0[xi]) for xi in u0.frequencies() if xi in modes}

    def pack(d):
        return AtomicSpectrum({xi: tuple(v) for xi, v in d.items() if any(not p.is_zero() for p in v)},
                              ncomp=sym.n1)

    out = [LatticeSolution(pack(lin), lam, mode)]
    for _ in range(n):
        prev = out[-1].spectrum
        w = AtomicSpectrum({xi: tuple(_matvec(sym.M_hat(xi), list(v))) for xi, v in prev.items()}, ncomp=sym.n2)
        hw = evaluate_nonlinearity(H, w, lam, direction)
        nxt = {xi: list(v) for xi, v in lin.items()}
        for xi, hv in hw.items():
            src = _matvec(sym.N_hat(xi), [ExpPoly.zero() + h for h in hv])
            d = modes[xi].duhamel(src, tol)
            base = nxt.get(xi, [ExpPoly.zero()] * sym.n1)
            nxt[xi] = [a + b for a, b in zip(base, d)]
        out.append(LatticeSolution(pack(nxt), lam, mode))
    return out


def ode_iteration_coefficients(n: int) -> list[list[Fraction]]:
    """Coefficients ``c_{j,k}`` of ``v_j(t) = sum_k c_{j,k} t^k u0^{k+1}`` for ``v' = v^2``, ``j = 0..n``.

    ``v_0 = u0`` and ``v_j = u0 + int_0^t v_{j-1}^2``; computed with exact
    rational polynomials (``u0 = 1`` after scaling ``t -> t u0``).
    """
    import flint

    v = flint.fmpq_poly([1])
    rows = [[Fraction(1)]]
    for _ in range(n):
        v = 1 + (v * v).integral()
        rows.append([Fraction(int(c.p), int(c.q)) for c in v.coeffs()])
    return rows


# ---------------------------------------------------------------------------
# contraction parameters

def _jb(x: float) -> float:
    return math.sqrt(1.0 + x * x)


def contraction_kappa(theta: float, b: float, s: float, a: float, k0: int, k: int) -> float:
    """``theta**(1/k0 - 1/k) e^{-s theta} + <s> e^{(sigma - s) theta}`` with ``sigma = b theta**(a-1) s``."""
    sigma = b * theta ** (a - 1) * s
    return theta ** (1.0 / k0 - 1.0 / k) * math.exp(-s * theta) + _jb(s) * math.exp((sigma - s) * theta)


def select_contraction_params(s: float, c0: float, eps: float, a: float = 2.0, k0: int = 1) -> tuple[float, float]:
    """Pick ``(theta, b)`` making the convolution loss at most ``eps`` for every ``k >= k0 + 1``.

    ``theta`` is halved from 1 until the first term of the loss is at most
    ``eps / (2 <theta>)``; then ``b`` is the smallest value that makes the
    second term equally small, exceeds ``theta**(1-a)`` (so ``sigma - s < 0``
    dominates), lets the Duhamel prefactor ``1/(c0 b)`` absorb the ``k = k0``
    constant ``(2 e^{-s})**k0`` at size ``eps**k0``, and covers
    ``<theta>^2 <s> / (theta |s| c0)``.
    """
    if not (s < 0 < c0 < 1 and 0 < eps < 1 and a >= 2 and k0 >= 1):
        raise ValueError("need s < 0 < c0 < 1, 0 < eps < 1, a >= 2, k0 >= 1")
    theta = 1.0
    expo = 1.0 / (k0 * (k0 + 1))
    while theta ** expo * math.exp(-s * theta) > eps / (2 * _jb(theta)):
        theta /= 2
        if theta < 1e-300:
            raise ValueError("no admissible theta")
    base = theta ** (1 - a)
    need_tail = (1 + math.log(eps / (2 * _jb(s) * _jb(theta))) / (s * theta)) * base
    need_k0 = (2 * math.exp(-s)) ** k0 / (c0 * eps ** k0)
    need_low = _jb(theta) ** 2 * _jb(s) / (theta * abs(s) * c0)
    b = max(1.0, base, need_tail, need_k0, need_low)
    return theta, b


# ---------------------------------------------------------------------------
# grid solver

@dataclass(frozen=True)
class FreqGrid:
    """Uniform cells of width ``h``; axis ``k`` covers ``[origin_k, origin_k + shape_k h]``.

    The level axis is axis 0 with origin 0.  Other origins must be integer
    multiples of ``h`` so that sums of cells stay cell-aligned.
    """

    h: float
    shape: tuple
    origin: tuple | None = None

    def __post_init__(self):
        shape = tuple(int(n) for n in self.shape)
        origin = tuple(float(o) for o in (self.origin or (0.0,) * len(shape)))
        if len(origin) != len(shape):
            raise ValueError("origin and shape must have the same length")
        if origin[0] != 0.0:
            raise ValueError("the level axis must start at 0")
        offs = []
        for o in origin:
            m = o / self.h
            if abs(m - round(m)) > 1e-9:
                raise ValueError("grid origins must be multiples of h")
            offs.append(int(round(m)))
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "_offsets", tuple(offs))

    @property
    def d(self) -> int:
        return len(self.shape)

    @property
    def cell_volume(self) -> float:
        return self.h ** self.d

    def axes(self) -> list[np.ndarray]:
        return [o + self.h * (np.arange(n) + 0.5) for o, n in zip(self.origin, self.shape)]

    def centers(self) -> list[np.ndarray]:
        return list(np.meshgrid(*self.axes(), indexing="ij"))

    def refined(self, factor: int = 2) -> FreqGrid:
        return FreqGrid(self.h / factor, tuple(n * factor for n in self.shape), self.origin)


@dataclass
class GridState:
    """Cell averages of a vector density, shape ``(n1, *grid.shape)``."""

    grid: FreqGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape[1:] != self.grid.shape:
            raise ValueError("values do not match the grid")

    @classmethod
    def bump(cls, grid: FreqGrid, lo: float, hi: float, mass: complex = 1.0, ncomp: int = 1,
             comp: int = 0) -> GridState:
        """Indicator of ``[lo, hi]`` in the level direction (full transverse extent) with total mass ``mass``."""
        if not 0 <= lo < hi:
            raise ValueError("need 0 <= lo < hi")
        ax = grid.axes()[0]
        h = grid.h
        cover = np.clip(np.minimum(ax + h / 2, hi) - np.maximum(ax - h / 2, lo), 0, None) / h
        shape = (grid.shape[0],) + (1,) * (grid.d - 1)
        dens = np.broadcast_to(cover.reshape(shape), grid.shape).astype(complex)
        total = dens.sum() * grid.cell_volume
        vals = np.zeros((ncomp,) + grid.shape, dtype=complex)
        vals[comp] = dens * (mass / total)
        return cls(grid, vals)

    def restrict_to(self, coarse: FreqGrid) -> np.ndarray:
        """Average onto a coarser grid whose cells are unions of these cells."""
        f = coarse.h / self.grid.h
        k = int(round(f))
        if abs(f - k) > 1e-9 or tuple(n * k for n in coarse.shape) != self.grid.shape:
            raise ValueError("grids are not nested")
        v = self.values
        for ax in range(self.grid.d):
            shp = list(v.shape)
            shp[ax + 1:ax + 2] = [coarse.shape[ax], k]
            v = v.reshape(shp).mean(axis=ax + 2)
        return v


@dataclass(frozen=True)
class WeightParams:
    """Parameters of ``Z^{b,s}_p``.

    Parameters
    ----------
    s : float
        Negative exponent.
    a : float
        Power ``>= 2`` on the level profile in the time-zero weight.
    k0 : int
        Vanishing order of the nonlinearity.
    b : float
        Amplitude ``>= 1``.
    space : {'L1', 'anisotropic'}
        Maximal weighted ``L^1`` with weight ``W_{s,k0}(p)``, or the mixed
        ``L^r_{xbar} L^1_{xtilde}`` norm of ``(p**-sigma + 1) phi`` over the
        first ``d0`` axes.
    """

    s: float
    a: float = 2.0
    k0: int = 1
    b: float = 1.0
    space: str = "L1"
    d0: int = 1
    r: float = 1.0
    sigma: float = 0.0
    C: float = 1.0

    def __post_init__(self):
        if not self.s < 0:
            raise ValueError("s must be negative")
        if self.a < 2 or self.k0 < 1 or self.b < 1:
            raise ValueError("need a >= 2, k0 >= 1, b >= 1")
        if self.space not in ("L1", "anisotropic"):
            raise ValueError("space must be 'L1' or 'anisotropic'")


def weight_profile(rho: np.ndarray, s: float, k0: int) -> np.ndarray:
    """``W_{s,k0}(rho) = max(rho**(-1/k0), rho - 1/s) e^{s rho}`` (decreasing in ``rho > 0``)."""
    rho = np.asarray(rho, dtype=float)
    with np.errstate(divide="ignore"):
        lead = np.where(rho > 0, rho ** (-1.0 / k0), np.inf)
    return np.maximum(lead, rho - 1.0 / s) * np.exp(s * rho)


def z_norm(density: np.ndarray, p: np.ndarray, grid: FreqGrid, params: WeightParams) -> float:
    """Norm in ``Z`` of a density of shape ``(n1, *grid.shape)`` (Euclidean across components)."""
    mag = np.sqrt(np.sum(np.abs(density) ** 2, axis=0))
    if params.space == "L1":
        return float(np.sum(weight_profile(p, params.s, params.k0) * mag) * grid.cell_volume)
    with np.errstate(divide="ignore"):
        wt = np.where(p > 0, p ** (-params.sigma), np.inf) + 1.0
    f = wt * mag
    h = grid.h
    d0 = params.d0
    inner = np.sum(f, axis=tuple(range(d0, grid.d))) * h ** (grid.d - d0) if d0 < grid.d else f
    if math.isinf(params.r):
        outer = float(np.max(inner))
    else:
        outer = float((np.sum(inner ** params.r) * h ** d0) ** (1.0 / params.r))
    return outer / params.C


def _axis_shift(arr: np.ndarray, ax: int, size: int, offset: int) -> np.ndarray:
    """``out[k] = A[k - offset]`` where ``A[n] = arr[n] + arr[n-1]`` along ``ax``, for ``k < size``."""
    n = arr.shape[ax]
    pad = [(0, 0)] * arr.ndim
    pad[ax] = (1, 1)
    a = np.pad(arr, pad)
    summed = np.take(a, np.arange(1, n + 2), axis=ax) + np.take(a, np.arange(0, n + 1), axis=ax)
    idx = np.arange(size) - offset
    valid = (idx >= 0) & (idx < n + 1)
    out = np.take(summed, np.clip(idx, 0, n), axis=ax)
    mask_shape = [1] * arr.ndim
    mask_shape[ax] = size
    return out * valid.reshape(mask_shape)


def grid_convolve(f: np.ndarray, g: np.ndarray, grid: FreqGrid) -> np.ndarray:
    """Cell averages of ``f * g`` for piecewise-constant ``f, g`` (exact overlap integration), truncated to the grid."""
    full = fftconvolve(f, g) if f.ndim else f * g
    out = full * (grid.h / 2) ** grid.d
    for ax, (n, off) in enumerate(zip(grid.shape, grid._offsets)):
        out = _axis_shift(out, ax, n, off)
    return out


def grid_nonlinearity(H: NonlinearSeries, w: np.ndarray, grid: FreqGrid, max_degree: int = 32) -> np.ndarray:
    """Cell averages of ``H(w)`` for a vector density ``w`` of shape ``(n2, *grid.shape)``."""
    out = np.zeros((H.n3,) + grid.shape, dtype=complex)
    cache: dict = {}

    def mono(alpha):
        if alpha in cache:
            return cache[alpha]
        j = next(i for i, a in enumerate(alpha) if a)
        rest = alpha[:j] + (alpha[j] - 1,) + alpha[j + 1:]
        val = w[j] if sum(rest) == 0 else grid_convolve(mono(rest), w[j], grid)
        cache[alpha] = val
        return val

    for alpha, vec in H.terms_up_to(max_degree):
        m = mono(tuple(alpha))
        for k, c in enumerate(vec):
            if c != 0:
                out[k] += complex(c) * m
    return out


@dataclass
class GridSolution:
    times: np.ndarray
    states: np.ndarray
    grid: FreqGrid
    params: WeightParams
    level: np.ndarray
    norms: np.ndarray
    sup_norm: float
    initial_norm: float
    bound: float
    iterations: int
    converged: bool
    history: list

    @property
    def ball_ok(self) -> bool:
        return bool(self.sup_norm <= 2 * self.bound and np.all(self.norms <= 2 * self.bound))

    def norm_trace(self) -> list[tuple[float, float, float]]:
        return [(float(t), float(n), float(self.bound)) for t, n in zip(self.times, self.norms)]

    def state(self, i: int) -> GridState:
        return GridState(self.grid, self.states[i])


def _weights_in_time(p, times, params):
    return np.exp(params.b * (params.s * p[None] ** params.a - times.reshape((-1,) + (1,) * p.ndim) * p[None]))


def solve_grid(sym: SymbolTable, H: NonlinearSeries, u0: GridState, T: float, dt: float, *,
               params: WeightParams, bound: float | None = None, max_iters: int = 50, tol: float = 1e-10,
               max_degree: int = 32, check_claim: bool = True) -> GridSolution:
    """Picard iteration of the Duhamel map on a cell grid.

    The time integral uses the exponential trapezoid rule
    ``I_n = E I_{n-1} + dt/2 (E S_{n-1} + S_n)`` with ``E = e^{dt L}``.
    Iteration stops when the change in ``Z^{b,s}_p`` and the plain maximal
    ``L^1`` change both fall below ``tol`` (relative to the current size).

    Parameters
    ----------
    bound : float, optional
        Asserted bound ``B`` on ``|| e^{s p^a} u0_hat ||_Z``; defaults to the
        measured value.  Data exceeding an explicit bound are rejected.
    """
    grid = u0.grid
    if grid.d != sym.d or u0.values.shape[0] != sym.n1:
        raise SolverError("grid data do not match the equation")
    if sym.claim is None:
        raise SolverError(f"{sym.name} carries no boundary-decay claim; the grid solver needs one")
    centers = grid.centers()
    p = np.real(np.asarray(sym.claim.p(centers, ArrayContext), dtype=complex)) * np.ones(grid.shape)
    if check_claim:
        rep = sym.check_claim(centers)
        if not rep["ok"]:
            raise SolverError("boundary-decay claim violated on the grid", rep)
    Lg = sym.L_grid(centers)
    off = np.abs(Lg) * (1 - np.eye(sym.n1)).reshape((sym.n1, sym.n1) + (1,) * grid.d)
    if np.any(off > 0):
        raise SolverError("grid solver needs a diagonal L")
    Ldiag = np.stack([Lg[i, i] for i in range(sym.n1)])
    Mg, Ng = sym.M_grid(centers), sym.N_grid(centers)

    nsteps = int(round(T / dt))
    if nsteps < 1 or abs(nsteps * dt - T) > 1e-9 * max(1.0, T):
        raise ValueError("T must be a positive multiple of dt")
    times = dt * np.arange(nsteps + 1)
    E = np.exp(dt * Ldiag)
    lin = np.empty((nsteps + 1,) + u0.values.shape, dtype=complex)
    lin[0] = u0.values
    for n in range(1, nsteps + 1):
        lin[n] = E * lin[n - 1]

    init = z_norm(np.exp(params.s * p ** params.a)[None] * u0.values, p, grid, params)
    if bound is None:
        bound = init
    elif init > bound * (1 + 1e-12):
        raise SolverError("initial data lie outside the asserted ball", {"norm": init, "bound": bound})
    wt = _weights_in_time(p, times, params)

    def source(U):
        w = np.einsum("ij...,j...->i...", Mg, U)
        return np.einsum("ij...,j...->i...", Ng, grid_nonlinearity(H, w, grid, max_degree))

    U = lin.copy()
    history = []
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        S = np.stack([source(U[n]) for n in range(nsteps + 1)])
        new = np.empty_like(U)
        new[0] = lin[0]
        acc = np.zeros_like(U[0])
        for n in range(1, nsteps + 1):
            acc = E * acc + 0.5 * dt * (E * S[n - 1] + S[n])
            new[n] = lin[n] + acc
        diff = new - U
        wdiff = z_norm(np.max(np.abs(diff) * wt[:, None], axis=0), p, grid, params)
        wsize = z_norm(np.max(np.abs(new) * wt[:, None], axis=0), p, grid, params)
        pdiff = float(np.max(np.sum(np.abs(diff), axis=tuple(range(1, diff.ndim)))) * grid.cell_volume)
        psize = float(np.max(np.sum(np.abs(new), axis=tuple(range(1, new.ndim)))) * grid.cell_volume)
        history.append({"iteration": it, "weighted_change": wdiff, "plain_change": pdiff, "weighted_size": wsize})
        U = new
        if not np.all(np.isfinite(U)) or psize > 1e100:
            raise SolverError("Picard iteration diverged", {"history": history})
        if wdiff <= tol * max(1.0, wsize) and pdiff <= tol * max(1.0, psize):
            converged = True
            break
    norms = np.array([z_norm(wt[n][None] * U[n], p, grid, params) for n in range(nsteps + 1)])
    sup_norm = z_norm(np.max(np.abs(U) * wt[:, None], axis=0), p, grid, params)
    return GridSolution(times, U, grid, params, p, norms, sup_norm, init, bound, it, converged, history)


def grid_self_convergence(sym: SymbolTable, H: NonlinearSeries, make_data: Callable[[FreqGrid], GridState],
                          grid: FreqGrid, T: float, dt: float, params: WeightParams, levels: int = 3,
                          **kw) -> dict:
    """Refine ``h`` and ``dt`` together ``levels`` times and estimate the convergence order.

    Solutions at time ``T`` are averaged onto the coarsest grid; the order is
    ``log2(|u_1 - u_2| / |u_2 - u_3|)`` in the plain ``L^1`` norm.
    """
    if levels < 3:
        raise ValueError("need at least three resolutions")
    finals = []
    g, step = grid, dt
    for _ in range(levels):
        sol = solve_grid(sym, H, make_data(g), T, step, params=params, **kw)
        finals.append(GridState(g, sol.states[-1]).restrict_to(grid))
        g, step = g.refined(2), step / 2
    diffs = [float(np.sum(np.abs(finals[i] - finals[i + 1])) * grid.cell_volume) for i in range(levels - 1)]
    orders = [math.log2(diffs[i] / diffs[i + 1]) if diffs[i + 1] > 0 else math.inf for i in range(len(diffs) - 1)]
    return {"differences": diffs, "orders": orders, "order": min(orders)}
