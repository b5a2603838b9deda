"""Piecewise-linear monotone weight functions and the cutoff constants.

``MonotoneFn`` is the single representation used for every nondecreasing,
nonnegative profile on ``[0, inf)``: regularity weights, growth weights,
super-additive level functions.  It is an immutable value: a sorted list of
breakpoints, the values there, and a slope for linear extrapolation past the
last breakpoint.

The module also fixes the smooth cutoff used by the weight calculus.  The
transition ``chi`` equals 1 on ``t <= 1`` and 0 on ``t >= 2``; concretely
``chi(t) = Psi(2 - t)`` with ``Psi(x) = f(x) / (f(x) + f(1 - x))`` and
``f(x) = exp(-1/x)``.  Upper bounds for ``sup |chi^(k)|`` are tabulated once
(see :func:`compute_cutoff_table`) and shipped as a versioned data file.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "MonotoneFn",
    "Kappa",
    "CutoffProfile",
    "default_cutoff",
    "compute_cutoff_table",
    "mchi",
    "superadditive_envelope",
    "is_superadditive",
    "DEFAULT_RTOL",
]

DEFAULT_RTOL = 1e-12


class MonotoneFn:
    """Nondecreasing, nonnegative, continuous piecewise-linear function on ``[0, inf)``.

    Parameters
    ----------
    breakpoints : sequence of float
        Strictly increasing abscissas, the first one equal to 0.
    values : sequence of float
        Nondecreasing nonnegative ordinates at the breakpoints.
    tail_slope : float
        Slope used beyond the last breakpoint.
    """

    __slots__ = ("_x", "_y", "_tail")

    def __init__(self, breakpoints: Sequence[float], values: Sequence[float], tail_slope: float = 0.0):
        x = np.array(breakpoints, dtype=float)
        y = np.array(values, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or x.size == 0:
            raise ValueError("breakpoints and values must be nonempty 1-d sequences of equal length")
        if x[0] != 0.0:
            raise ValueError("the first breakpoint must be 0")
        if np.any(np.diff(x) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if not np.all(np.isfinite(y)) or not np.all(np.isfinite(x)):
            raise ValueError("breakpoints and values must be finite")
        if np.any(y < 0):
            raise ValueError("values must be nonnegative")
        if np.any(np.diff(y) < 0):
            raise ValueError("values must be nondecreasing")
        if not math.isfinite(tail_slope) or tail_slope < 0:
            raise ValueError("tail_slope must be finite and nonnegative")
        x.setflags(write=False)
        y.setflags(write=False)
        self._x, self._y, self._tail = x, y, float(tail_slope)

    # constructors ---------------------------------------------------------
    @classmethod
    def constant(cls, c: float) -> MonotoneFn:
        return cls([0.0], [c], 0.0)

    @classmethod
    def linear(cls, slope: float) -> MonotoneFn:
        return cls([0.0], [0.0], slope)

    @classmethod
    def from_function(cls, f: Callable[[np.ndarray], np.ndarray], grid: Sequence[float],
                      tail_slope: float | None = None) -> MonotoneFn:
        """Interpolate ``f`` on ``grid`` (0 is added if missing).

        Values are made monotone by a running maximum so that small floating
        noise in ``f`` does not break the invariants.
        """
        g = np.unique(np.concatenate([[0.0], np.asarray(grid, dtype=float)]))
        y = np.maximum.accumulate(np.maximum(np.asarray(f(g), dtype=float), 0.0))
        if tail_slope is None:
            tail_slope = max((y[-1] - y[-2]) / (g[-1] - g[-2]), 0.0) if g.size > 1 else 0.0
        return cls(g, y, tail_slope)

    # accessors ------------------------------------------------------------
    @property
    def breakpoints(self) -> np.ndarray:
        return self._x

    @property
    def values(self) -> np.ndarray:
        return self._y

    @property
    def tail_slope(self) -> float:
        return self._tail

    # evaluation -----------------------------------------------------------
    def __call__(self, l):
        return self.eval(l)

    def eval(self, l):
        """Value at ``l >= 0`` (scalar or array)."""
        arr = np.asarray(l, dtype=float)
        if np.any(arr < 0) or np.any(np.isnan(arr)):
            raise ValueError("MonotoneFn is defined on [0, inf) only")
        out = np.interp(arr, self._x, self._y)
        beyond = arr > self._x[-1]
        if np.any(beyond):
            out = np.where(beyond, self._y[-1] + self._tail * (arr - self._x[-1]), out)
        return float(out) if np.ndim(l) == 0 else out

    # class flags ------------------------------------------------------------
    @property
    def vanishes_at_zero(self) -> bool:
        return bool(self._y[0] == 0.0)

    def in_C_delta(self, delta: float) -> bool:
        return bool(self.vanishes_at_zero and self.eval(2.0 * delta) <= 0.5)

    # arithmetic -------------------------------------------------------------
    def _merged_grid(self, other: MonotoneFn) -> np.ndarray:
        return np.union1d(self._x, other._x)

    def __add__(self, other: MonotoneFn) -> MonotoneFn:
        g = self._merged_grid(other)
        return MonotoneFn(g, self.eval(g) + other.eval(g), self._tail + other._tail)

    def maximum(self, other: MonotoneFn) -> MonotoneFn:
        """Pointwise maximum; crossing points are inserted so the result stays exact."""
        g = self._merged_grid(other)
        a, b = self.eval(g), other.eval(g)
        extra = []
        d = a - b
        for i in range(g.size - 1):
            if d[i] * d[i + 1] < 0:
                extra.append(g[i] + (g[i + 1] - g[i]) * d[i] / (d[i] - d[i + 1]))
        # crossing in the tail
        end = g[-1]
        if (a[-1] - b[-1]) * (self._tail - other._tail) < 0:
            extra.append(end + (b[-1] - a[-1]) / (self._tail - other._tail))
        if extra:
            g = np.union1d(g, extra)
            a, b = self.eval(g), other.eval(g)
        return MonotoneFn(g, np.maximum(a, b), max(self._tail, other._tail))

    def scale(self, c: float) -> MonotoneFn:
        if c < 0:
            raise ValueError("scaling by a negative number breaks monotonicity")
        return MonotoneFn(self._x, c * self._y, c * self._tail)

    def __mul__(self, c: float) -> MonotoneFn:
        return self.scale(float(c))

    __rmul__ = __mul__

    def refine(self, points: Sequence[float]) -> MonotoneFn:
        """Same function with extra breakpoints inserted."""
        pts = np.asarray(points, dtype=float)
        g = np.union1d(self._x, pts[pts >= 0])
        return MonotoneFn(g, self.eval(g), self._tail)

    def dominates(self, other: MonotoneFn, rtol: float = DEFAULT_RTOL) -> bool:
        """``self >= other`` everywhere (exact for piecewise-linear inputs)."""
        g = self._merged_grid(other)
        ok = np.all(self.eval(g) >= other.eval(g) * (1 - rtol))
        return bool(ok and self._tail >= other._tail * (1 - rtol))

    # serialization ----------------------------------------------------------
    def to_json(self) -> dict:
        return {"points": [[float(a), float(b)] for a, b in zip(self._x, self._y)],
                "tail_slope": self._tail}

    @classmethod
    def from_json(cls, data: dict) -> MonotoneFn:
        pts = data["points"]
        return cls([p[0] for p in pts], [p[1] for p in pts], data.get("tail_slope", 0.0))

    def __eq__(self, other):
        if not isinstance(other, MonotoneFn):
            return NotImplemented
        return (np.array_equal(self._x, other._x) and np.array_equal(self._y, other._y)
                and self._tail == other._tail)

    __hash__ = None

    def __repr__(self):
        n = self._x.size
        return f"MonotoneFn({n} breakpoints, last=({self._x[-1]:g}, {self._y[-1]:g}), tail_slope={self._tail:g})"


class Kappa:
    """Nonincreasing profile with values in ``(0, 1]``.

    Stored through its deficit ``1 - kappa``, a bounded :class:`MonotoneFn`,
    so the monotone machinery applies unchanged.
    """

    __slots__ = ("deficit",)

    def __init__(self, deficit: MonotoneFn):
        if deficit.tail_slope != 0.0 or deficit.values[-1] >= 1.0:
            raise ValueError("kappa must stay strictly positive: need deficit < 1 and a flat tail")
        self.deficit = deficit

    @classmethod
    def constant(cls, c: float) -> Kappa:
        if not 0 < c <= 1:
            raise ValueError("kappa must lie in (0, 1]")
        return cls(MonotoneFn.constant(1.0 - c))

    @classmethod
    def from_points(cls, xs: Sequence[float], ks: Sequence[float]) -> Kappa:
        ks = np.asarray(ks, dtype=float)
        if np.any(ks <= 0) or np.any(ks > 1):
            raise ValueError("kappa values must lie in (0, 1]")
        return cls(MonotoneFn(xs, 1.0 - ks, 0.0))

    def __call__(self, l):
        return 1.0 - self.deficit.eval(l)

    eval = __call__

    @property
    def breakpoints(self) -> np.ndarray:
        return self.deficit.breakpoints

    def to_json(self) -> dict:
        return {"points": [[float(a), float(1.0 - b)] for a, b in zip(self.deficit.breakpoints, self.deficit.values)]}

    @classmethod
    def from_json(cls, data: dict) -> Kappa:
        pts = data["points"]
        return cls.from_points([p[0] for p in pts], [p[1] for p in pts])

    def __repr__(self):
        return f"Kappa(min={self(self.breakpoints[-1]):g})"


# ---------------------------------------------------------------------------
# cutoff derivative table

CUTOFF_TABLE_FILE = "cutoff_table_v1.json"


@dataclass(frozen=True)
class CutoffProfile:
    """Certified upper bounds ``sup_k[k] >= sup |chi^(k)|``."""

    sups: tuple[float, ...]
    version: str
    safety: float = 1.1
    description: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.sups or self.sups[0] != 1.0:
            raise ValueError("entry k=0 must equal 1")
        if any(not (math.isfinite(s) and s > 0) for s in self.sups):
            raise ValueError("entries must be finite and positive")

    @property
    def kmax(self) -> int:
        return len(self.sups) - 1

    def delta_sup(self, k: int, delta: float) -> float:
        """Bound on ``sup |d^k/dt^k (1 - chi(t/delta))|``."""
        if k == 0:
            return 1.0
        if k > self.kmax:
            raise ValueError(f"cutoff table only covers k <= {self.kmax}")
        return self.sups[k] * delta ** (-k)

    def to_json(self) -> dict:
        return {"version": self.version, "safety": self.safety, "description": self.description,
                "sups": list(self.sups)}


def _psi_jets(x: float, kmax: int, dps: int):
    """``|Psi^(k)(x)|`` for k <= kmax via power-series arithmetic in mpmath."""
    import mpmath

    with mpmath.workdps(dps):
        x = mpmath.mpf(x)
        y = 1 - x
        g = [-((-1) ** n) / x ** (n + 1) for n in range(kmax + 1)]
        gt = [-1 / y ** (n + 1) for n in range(kmax + 1)]

        def exp_series(c):
            e = [mpmath.exp(c[0])]
            for n in range(1, kmax + 1):
                e.append(mpmath.fsum(k * c[k] * e[n - k] for k in range(1, n + 1)) / n)
            return e

        num, other = exp_series(g), exp_series(gt)
        den = [a + b for a, b in zip(num, other)]
        quo = []
        for n in range(kmax + 1):
            quo.append((num[n] - mpmath.fsum(den[k] * quo[n - k] for k in range(1, n + 1))) / den[0])
        return [float(abs(quo[n]) * mpmath.factorial(n)) for n in range(kmax + 1)]


def compute_cutoff_table(kmax: int = 24, samples: int = 400, dps: int = 40, safety: float = 1.1) -> CutoffProfile:
    """Tabulate bounds on ``sup |chi^(k)|`` by dense sampling plus local refinement.

    Sampling is geometric towards both endpoints of the transition, where
    high derivatives peak.  Around the best sample the maximum is refined by a
    bounded scalar search before the safety factor is applied.
    """
    from scipy.optimize import minimize_scalar

    edge = np.geomspace(1e-3, 0.5, samples)
    xs = np.unique(np.concatenate([edge, 1.0 - edge, np.linspace(0, 1, 2 * samples + 1)[1:-1]]))
    jets = np.array([_psi_jets(x, kmax, dps) for x in xs])
    sups = [1.0]
    for k in range(1, kmax + 1):
        i = int(np.argmax(jets[:, k]))
        lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, xs.size - 1)]
        best = jets[i, k]
        if hi > lo:
            res = minimize_scalar(lambda x: -_psi_jets(x, k, dps)[k], bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-10 * max(lo, 1e-3)})
            best = max(best, -res.fun)
        sups.append(float(safety * best))
    return CutoffProfile(tuple(sups), version=f"chi-exp-transition-v1-k{kmax}", safety=safety,
                         description="chi(t)=Psi(2-t), Psi(x)=f(x)/(f(x)+f(1-x)), f(x)=exp(-1/x)")


@lru_cache(maxsize=1)
def default_cutoff() -> CutoffProfile:
    """The shipped cutoff table (loaded once)."""
    text = resources.files("halfspec").joinpath("data", CUTOFF_TABLE_FILE).read_text()
    data = json.loads(text)
    return CutoffProfile(tuple(data["sups"]), data["version"], data["safety"], data.get("description", ""))


def mchi(delta: float, m: float, profile: CutoffProfile | None = None) -> float:
    """Cutoff growth constant for regularity ``m`` at scale ``delta``.

    Equals ``1 + m`` for ``m <= 1/2``; for integer ``m`` it is
    ``sum_k binom(m, k) * sup|d^k chi_delta|``; linear in between.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if m < 0:
        raise ValueError("m must be nonnegative")
    profile = profile or default_cutoff()

    def at_int(n: int) -> float:
        return sum(math.comb(n, k) * profile.delta_sup(k, delta) for k in range(n + 1))

    if m <= 0.5:
        return 1.0 + m
    if m <= 1.0:
        w = (m - 0.5) / 0.5
        return (1 - w) * 1.5 + w * at_int(1)
    n = math.floor(m)
    if n == m:
        return at_int(n)
    w = m - n
    return (1 - w) * at_int(n) + w * at_int(n + 1)


# ---------------------------------------------------------------------------
# super-additivity

def superadditive_envelope(points, values=None) -> MonotoneFn:
    """Super-additive majorant of sampled data.

    Parameters
    ----------
    points : array_like
        Either sample locations (shape ``(n,)`` of norms or ``(n, d)`` of
        vectors) or a callable profile ``R0(r)``; in the latter case ``values``
        must be the radii at which to sample it.
    values : array_like
        Sample values ``R0`` (or radii for a callable).

    Returns
    -------
    MonotoneFn
        ``R(l) = int_l^{2l} R1(t) dt`` with ``R1(l) = max_{|y| <= l} R0(y)/|y|``.
        Since ``R1`` is a step function, ``R`` is exactly piecewise linear.
    """
    if callable(points):
        radii = np.asarray(values, dtype=float)
        vals = np.asarray(points(radii), dtype=float)
    else:
        pts = np.asarray(points, dtype=float)
        radii = np.linalg.norm(pts, axis=1) if pts.ndim == 2 else np.abs(pts)
        vals = np.asarray(values, dtype=float)
    if radii.shape != vals.shape:
        raise ValueError("one value per sample point is required")
    if np.any(vals < 0):
        raise ValueError("R0 must be nonnegative")
    zero = radii == 0
    if np.any(vals[zero] > 0):
        raise ValueError("R0(xi)/|xi| is unbounded near 0 on the sample")
    radii, vals = radii[~zero], vals[~zero]
    if radii.size == 0:
        return MonotoneFn.constant(0.0)
    order = np.argsort(radii, kind="stable")
    r, q = radii[order], vals[order] / radii[order]
    r_u, idx = np.unique(r, return_index=True)
    qmax = np.maximum.reduceat(q, idx)
    steps = np.maximum.accumulate(qmax)   # R1 = steps[j] on [r_u[j], r_u[j+1])

    def r1_integral(x):
        # int_0^x R1
        x = np.asarray(x, dtype=float)
        knots = np.concatenate([r_u, [np.inf]])
        total = np.zeros_like(x)
        for j in range(r_u.size):
            seg = np.clip(x, knots[j], knots[j + 1]) - knots[j]
            total += steps[j] * np.maximum(seg, 0.0)
        return total

    grid = np.unique(np.concatenate([[0.0], r_u, r_u / 2.0]))
    vals_r = r1_integral(2 * grid) - r1_integral(grid)
    vals_r[0] = 0.0
    return MonotoneFn(grid, np.maximum.accumulate(vals_r), float(steps[-1]))


def is_superadditive(f: Callable, grid: Sequence[float], rtol: float = DEFAULT_RTOL):
    """Check ``f(a) + f(b) <= f(a + b)`` on all grid pairs.

    Returns
    -------
    (bool, tuple or None)
        The verdict and the first violating pair ``(a, b)`` in grid order.
    """
    g = np.asarray(grid, dtype=float)
    fg = np.asarray(f(g), dtype=float)
    a, b = np.meshgrid(g, g, indexing="ij")
    fs = np.asarray(f((a + b).ravel()), dtype=float).reshape(a.shape)
    lhs = fg[:, None] + fg[None, :]
    bad = lhs > fs * (1 + rtol)
    if not bad.any():
        return True, None
    i, j = np.argwhere(bad)[0]
    return False, (float(g[i]), float(g[j]))
