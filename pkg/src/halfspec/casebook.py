"""Worked quantitative examples.

* Monochromatic Burgers data ``u0 = -i a e^{ix}``: the mode ``n`` equals
  ``-i a^n e^{-nt} U_n(t)`` where ``U_n`` is a polynomial in ``q = e^{-2t}``
  with rational coefficients.  From these: the divergence threshold
  ``a_*(t)``, its minimum ``a_**`` and the blow-up time ``T_*(a)``, plus an
  independent blow-up time from the Cole-Hopf representation.
* Cosine data for ``u_t = u^2``: the zero-mode coefficients.
* Heat-cascade comparison functions in general dimension.
* Residuals of explicit stationary solutions (NLS, KdV, CLM).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import flint
import numpy as np

from .exact import I, as_exact
from .exppoly import ExpPoly, duhamel
from .spectral import ExpDensity, expdensity_convolve

__all__ = [
    "A_STARSTAR_UPPER",
    "burgers_un",
    "burgers_un_exppoly",
    "un_values",
    "burgers_sandwich",
    "burgers_astar",
    "burgers_astar_zero",
    "burgers_astarstar",
    "burgers_tstar",
    "colehopf_first_zero",
    "BurgersAnalysis",
    "burgers_analysis",
    "cosine_zero_mode",
    "cascade_bounds",
    "stationary_parts",
    "stationary_residual",
]

A_STARSTAR_UPPER = 1.5 * math.sqrt(3.0)


def _fq(x: flint.fmpq) -> Fraction:
    return Fraction(int(x.p), int(x.q))


# ---------------------------------------------------------------------------
# Burgers

def burgers_un(N: int) -> list[flint.fmpq_poly]:
    """``[U_1, ..., U_N]`` as exact polynomials in ``q = e^{-2t}``.

    ``U_1 = 1`` and ``U_n = n int_0^t e^{-n(n-1)(t-s)} sum_k U_k U_{n-k} ds``.
    With ``D = n(n-1)/2`` a term ``q^m`` of the sum integrates to
    ``(q^m - q^D) / (2D - 2m)``; ``m < D`` always holds, so nothing resonates.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    U = [flint.fmpq_poly([1])]
    for n in range(2, N + 1):
        P = flint.fmpq_poly([0])
        for k in range(1, n // 2 + 1):
            term = U[k - 1] * U[n - k - 1]
            P += term if 2 * k == n else 2 * term
        D = n * (n - 1) // 2
        coeffs = [c * n / (2 * D - 2 * m) for m, c in enumerate(P.coeffs())]
        coeffs += [flint.fmpq(0)] * (D + 1 - len(coeffs))
        coeffs[D] = -sum(coeffs[:D], flint.fmpq(0))
        U.append(flint.fmpq_poly(coeffs))
    return U


def burgers_un_exppoly(N: int) -> list[ExpPoly]:
    """The same recursion carried out with :func:`duhamel` on exponential polynomials in ``t``."""
    U = [ExpPoly.constant(1)]
    for n in range(2, N + 1):
        src = ExpPoly.zero()
        for k in range(1, n):
            src = src + U[k - 1] * U[n - k - 1]
        U.append(duhamel(-n * (n - 1), src * n))
    return U


def _arb_q(t, prec: int):
    """Ball around ``e^{-2t}``; ``t`` is read exactly when given as a Fraction or a short decimal."""
    with _prec(prec):
        tq = Fraction(t) if not isinstance(t, float) else Fraction(repr(t))
        return (-2 * flint.arb(flint.fmpq(tq.numerator, tq.denominator))).exp()


class _prec:
    def __init__(self, bits: int):
        self.bits = bits

    def __enter__(self):
        self.old = flint.ctx.prec
        flint.ctx.prec = self.bits

    def __exit__(self, *exc):
        flint.ctx.prec = self.old


def _arb_eval(poly: flint.fmpq_poly, x) -> flint.arb:
    # coefficients are rounded to balls at the current precision
    return flint.arb_poly(poly)(x)


def un_values(U: Sequence[flint.fmpq_poly], t: float, rel: float = 1e-15) -> np.ndarray:
    """``U_n(t)`` for every polynomial in ``U``, each accurate to relative error ``rel``.

    Evaluation uses ball arithmetic and raises the working precision until
    the ball is tight enough, so cancellation among large coefficients is
    harmless.
    """
    out = np.empty(len(U))
    for i, p in enumerate(U):
        prec = 128
        while True:
            with _prec(prec):
                v = _arb_eval(p, _arb_q(t, prec))
                mid, rad = float(v.mid()), float(v.rad())
            if mid != 0 and rad <= rel * abs(mid) or prec > 1 << 15:
                out[i] = mid
                break
            prec *= 2
    return out


def burgers_sandwich(U: Sequence[flint.fmpq_poly], tgrid: Sequence) -> dict:
    """Rigorously check ``(1 - q)^{n-1} <= U_n <= 1`` at ``q = e^{-2t}``.

    Each side is an exact polynomial difference; it passes when it is
    identically zero or its ball value at ``t`` is certified ``>= 0``.
    Returns a report with the list of failures ``(n, t, side)``.
    """
    failures = []
    checked = 0
    one = flint.fmpq_poly([1])
    base = flint.fmpq_poly([1, -1])
    for n, p in enumerate(U, start=1):
        lower = p - base ** (n - 1)
        upper = one - p
        for t in tgrid:
            for side, diff in (("lower", lower), ("upper", upper), ("positive", p)):
                checked += 1
                if diff == 0:
                    if side == "positive":
                        failures.append((n, t, side))
                    continue
                prec = 128
                while True:
                    with _prec(prec):
                        v = _arb_eval(diff, _arb_q(t, prec))
                        ok = v > 0 if side == "positive" else v >= 0
                        bad = v < 0 if side != "positive" else v <= 0
                    if ok or bad or prec > 1 << 14:
                        break
                    prec *= 2
                if not ok:
                    failures.append((n, float(t), side))
    return {"ok": not failures, "checked": checked, "failures": failures}


def _bracket(t: float) -> tuple[float, float]:
    return math.exp(t), math.exp(t) / (-math.expm1(-2 * t))


def _fit_rate(U, t: float, N: int) -> tuple[float, str]:
    """``limsup U_n(t)^{1/n}`` from a least-squares line through ``log U_n`` over the top third of ``n``."""
    vals = un_values(U[:N], t)
    lo = max(1, (2 * N) // 3)
    n = np.arange(lo + 1, N + 1)
    y = np.log(vals[lo:N])
    slope = np.polyfit(n, y, 1)[0]
    return math.exp(slope), "loglinear"


def _richardson_rate(U, t: float, N: int) -> float:
    vals = un_values(U[:N], t)
    r_full = vals[N - 1] ** (1.0 / N)
    half = N // 2
    r_half = vals[half - 1] ** (1.0 / half)
    return 2 * r_full - r_half


def burgers_astar(t: float, N: int = 60, U: Sequence | None = None) -> dict:
    """Estimate of the divergence threshold ``a_*(t) = e^t / limsup U_n(t)^{1/n}``.

    Returns ``{"estimate", "bracket", "inside", "method", "flag"}``.  The
    bracket ``[e^t, e^t/(1 - e^{-2t})]`` follows from
    ``(1 - e^{-2t})^{n-1} <= U_n(t) <= 1`` and is always reported; if the
    line fit falls outside it, a Richardson combination of ``U_n^{1/n}`` is
    tried and the result is flagged.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if N < 20:
        raise ValueError("N must be at least 20")
    U = burgers_un(N) if U is None else U
    lo, hi = _bracket(t)
    rho, method = _fit_rate(U, t, N)
    est = math.exp(t) / rho
    flag = None
    if not lo <= est <= hi:
        flag = "line fit left the bracket"
        rho = _richardson_rate(U, t, N)
        est = math.exp(t) / rho if rho > 0 else math.inf
        method = "richardson"
        if not lo <= est <= hi:
            flag = "extrapolation failed; only the bracket is reliable"
    return {"t": t, "estimate": est, "bracket": (lo, hi), "inside": lo <= est <= hi, "method": method,
            "flag": flag, "N": N}


def _series_terms(t: float, nmax: int) -> np.ndarray:
    n = np.arange(nmax + 1)
    from scipy.special import gammaln

    return np.exp(-(n.astype(float) ** 2) * t - gammaln(n + 1))


def _heat_series(t: float, z: np.ndarray, nmax: int) -> np.ndarray:
    """``F_t(z) = sum_n z^n e^{-n^2 t} / n!`` by Horner's rule."""
    c = _series_terms(t, nmax)
    acc = np.zeros_like(z, dtype=complex)
    for cn in c[::-1]:
        acc = acc * z + cn
    return acc


def _nterms(t: float, r: float) -> int:
    """Number of terms after which ``r^n e^{-n^2 t}/n!`` is negligible and decreasing."""
    n = 1
    while True:
        logterm = n * math.log(max(r, 1e-300)) - n * n * t - math.lgamma(n + 1)
        if n > 2 * r + 5 and logterm < -60 and n * n * t > 0:
            return n + 5
        n += 1


def _winding(t: float, r: float, samples: int = 2048) -> tuple[int, float]:
    """Winding number of ``theta -> F_t(r e^{i theta})`` about 0 and ``min |F_t|`` on that circle.

    Intervals whose phase increment reaches ``pi/4`` are bisected locally, so
    a zero close to the circle costs a few extra points rather than a finer
    global grid.
    """
    nmax = _nterms(t, r)
    th = np.linspace(0.0, 2 * np.pi, samples + 1)
    vals = _heat_series(t, r * np.exp(1j * th), nmax)
    for _ in range(64):
        dphi = np.angle(vals[1:] / vals[:-1])
        bad = np.nonzero(np.abs(dphi) >= np.pi / 4)[0]
        if bad.size == 0 or np.min(th[bad + 1] - th[bad]) < 1e-15:
            break
        mid = 0.5 * (th[bad] + th[bad + 1])
        mv = _heat_series(t, r * np.exp(1j * mid), nmax)
        th = np.insert(th, bad + 1, mid)
        vals = np.insert(vals, bad + 1, mv)
    dphi = np.angle(vals[1:] / vals[:-1])
    return int(round(np.sum(dphi) / (2 * np.pi))), float(np.min(np.abs(vals)))


def _heat_series_prime(t: float, z, nmax: int):
    c = _series_terms(t, nmax)
    d = c[1:] * np.arange(1, nmax + 1)
    acc = 0j
    for cn in d[::-1]:
        acc = acc * z + cn
    return acc


def _polish_zero(t: float, r: float, nmax: int) -> complex:
    """Newton iteration for the zero of ``F_t`` nearest the circle of radius ``r``."""
    th = np.linspace(0.0, 2 * np.pi, 8192, endpoint=False)
    vals = _heat_series(t, r * np.exp(1j * th), nmax)
    z = r * np.exp(1j * th[int(np.argmin(np.abs(vals)))])
    for _ in range(50):
        f = complex(_heat_series(t, np.array([z]), nmax)[0])
        step = f / _heat_series_prime(t, z, nmax)
        z -= step
        if abs(step) <= 1e-15 * abs(z):
            break
    return complex(z)


def burgers_astar_zero(t: float) -> float:
    """``a_*(t)`` as the smallest zero modulus of ``F_t(z) = sum z^n e^{-n^2 t}/n!``.

    By the Cole-Hopf representation ``u = -d_x log F_t(a e^{ix})``, the
    Fourier series in ``a`` has radius equal to that modulus.  Found by
    bisection on the zero count inside circles, inside the bracket, then
    Newton's method on the zero itself.
    """
    lo, hi = _bracket(t)
    lo *= 1 - 1e-12
    hi *= 1 + 1e-9
    if _winding(t, lo)[0] != 0:
        raise RuntimeError("a zero inside the lower bracket: inconsistent")
    if _winding(t, hi)[0] == 0:
        raise RuntimeError("no zero inside the upper bracket: inconsistent")
    while hi - lo > 1e-6 * hi:
        mid = 0.5 * (lo + hi)
        if _winding(t, mid)[0] == 0:
            lo = mid
        else:
            hi = mid
    z = _polish_zero(t, hi, _nterms(t, hi))
    r = abs(z)
    # the polished zero must be the innermost one
    if not lo * (1 - 1e-6) <= r <= hi * (1 + 1e-6) or _winding(t, r * (1 - 1e-8))[0] != 0:
        return 0.5 * (lo + hi)
    return r


def burgers_astarstar(tgrid: Sequence[float] | None = None, N: int = 60, U: Sequence | None = None) -> dict:
    """Minimum of :func:`burgers_astar` over ``tgrid``; the bracket is ``[1, (3/2) sqrt 3]``."""
    tgrid = np.linspace(0.2, 1.5, 27) if tgrid is None else np.asarray(tgrid, dtype=float)
    U = burgers_un(N) if U is None else U
    rows = [burgers_astar(float(t), N, U) for t in tgrid]
    best = min(rows, key=lambda r: r["estimate"])
    est = best["estimate"]
    return {"estimate": est, "argmin": best["t"], "bracket": (1.0, A_STARSTAR_UPPER),
            "inside": 1.0 <= est <= A_STARSTAR_UPPER, "N": N, "curve": rows}


def _upper_curve_root(a: float) -> float | None:
    """First root of ``e^T / (1 - e^{-2T}) = a`` (the decreasing branch), or None below the minimum."""
    from scipy.optimize import brentq

    tm = 0.5 * math.log(3.0)
    g = lambda T: math.exp(T) / (-math.expm1(-2 * T)) - a  # noqa: E731
    if g(tm) > 0:
        return None
    return brentq(g, 1e-12, tm, xtol=1e-15)


def _first_crossing(pred, t_lo: float, t_hi: float, samples: int, tol: float) -> float | None:
    """First ``t`` in ``[t_lo, t_hi]`` where ``pred`` turns true, by a geometric scan then bisection."""
    ts = np.geomspace(t_lo, t_hi, samples)
    prev = ts[0]
    if pred(prev):
        return float(prev)
    for t in ts[1:]:
        if pred(t):
            lo, hi = prev, t
            while hi - lo > tol * hi:
                mid = 0.5 * (lo + hi)
                if pred(mid):
                    hi = mid
                else:
                    lo = mid
            return float(hi)
        prev = t
    return None


def burgers_tstar(a: complex, N: int = 60, U: Sequence | None = None, samples: int = 200) -> dict:
    """Blow-up time ``T_*(a)``: first ``t`` at which ``sum |a e^{-t}|^n U_n(t)`` diverges.

    Divergence is judged by the root test with the extrapolated rate of
    :func:`burgers_astar`.  The bracket collects what the two sides of
    ``e^{T} <= |a| <= e^{T}/(1 - e^{-2T})`` imply: ``T_* <= log |a|`` and
    ``T_*`` no later than the first root of the right-hand curve.
    """
    amp = abs(a)
    U = burgers_un(N) if U is None else U
    upper = math.log(amp) if amp > 1 else 0.0
    root = _upper_curve_root(amp)
    if root is not None:
        upper = min(upper, root)
    out = {"a": amp, "bracket": (0.0, upper), "N": N}
    if amp <= 1.0:
        out.update(estimate=math.inf, status="no blow-up (|a| <= 1 <= a_**)")
        return out

    def diverges(t):
        rho, _ = _fit_rate(U, float(t), N)
        return amp * math.exp(-t) * rho > 1.0

    t_end = math.log(amp)
    est = _first_crossing(diverges, min(1e-4, t_end / 10), t_end, samples, 1e-10)
    if est is None:
        status = "no blow-up detected" if amp > A_STARSTAR_UPPER else "inside bracket, undecidable"
        out.update(estimate=math.inf, status=status)
        return out
    out.update(estimate=est, status="blow-up", within_bound=est <= math.log(amp) + 1e-9)
    return out


def colehopf_first_zero(a: float, xsamples: int = 4096, tsearch: tuple[float, float] | None = None,
                        samples: int = 200, tol: float = 1e-10) -> dict:
    """First time a zero of ``v(t, x) = sum a^n e^{inx - n^2 t}/n!`` reaches the real ``x`` axis.

    For ``t`` small all zeros of ``x -> v(t, x)`` have negative imaginary part
    (``v`` has no zero inside ``|z| < |a|`` with ``z = a e^{ix}``); the first
    crossing is located by the winding number of ``v(t, .)`` over
    ``[0, 2 pi]`` (adaptively refined), bisected in ``t``.  The minimum of
    ``|v|`` along the real axis at the returned time is reported as well.
    """
    amp = abs(a)
    if amp <= 1:
        raise ValueError("no zero crossing for |a| <= 1")
    lo, hi = tsearch if tsearch is not None else (1e-4, math.log(amp))
    found = _first_crossing(lambda t: _winding(float(t), amp, xsamples)[0] > 0, lo, hi, samples, tol)
    if found is None:
        raise RuntimeError(f"no zero of v crossed the real axis for t in [{lo}, {hi}]")
    return {"a": amp, "T": found, "min_abs_v": _winding(found, amp, xsamples)[1]}


@dataclass
class BurgersAnalysis:
    a: complex
    N: int
    Un: list
    astar_curve: list = field(default_factory=list)
    Tstar: dict = field(default_factory=dict)


def burgers_analysis(a: complex, N: int = 60, tgrid: Sequence[float] | None = None) -> BurgersAnalysis:
    U = burgers_un(N)
    tgrid = np.linspace(0.3, 3.0, 20) if tgrid is None else tgrid
    curve = [burgers_astar(float(t), N, U) for t in tgrid]
    return BurgersAnalysis(a, N, U, curve, burgers_tstar(a, N, U))


# ---------------------------------------------------------------------------
# cosine data

def cosine_zero_mode(K: int, tvals: Sequence[float] = (0.9, 0.99, 0.999)) -> dict:
    """Zero-mode coefficients ``a_{0,2k-1} = binom(2k, k) / 4^k`` for ``k = 1..K``.

    Also checks ``a_{0,1} = 1/2``, the ratio law
    ``a_{0,2k+1} / a_{0,2k-1} = (2k+1)/(2k+2)``, the termwise comparison with
    ``t^{2k-1}/(2k)`` and reports partial sums at ``tvals``.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    coeffs = [Fraction(math.comb(2 * k, k), 4 ** k) for k in range(1, K + 1)]
    ratio_ok = all(coeffs[k] / coeffs[k - 1] == Fraction(2 * k + 1, 2 * k + 2) for k in range(1, K))
    dominance = all(c >= Fraction(1, 2 * k) for k, c in enumerate(coeffs, start=1))
    sums = {}
    for t in tvals:
        tq = Fraction(repr(t)) if isinstance(t, float) else Fraction(t)
        powers = [tq ** (2 * k - 1) for k in range(1, K + 1)]
        series = sum(float(c) * float(p) for c, p in zip(coeffs, powers))
        harmonic = sum(float(p) / (2 * k) for k, p in enumerate(powers, start=1))
        sums[float(t)] = {"partial_sum": series, "harmonic": harmonic,
                          "termwise": all(c * p >= p / (2 * k) for k, (c, p) in enumerate(zip(coeffs, powers), 1))}
    return {"coefficients": coeffs, "first_is_half": coeffs[0] == Fraction(1, 2), "ratio_law": ratio_ok,
            "dominates_harmonic": dominance, "partial_sums": sums}


# ---------------------------------------------------------------------------
# heat cascade

def cascade_bounds(bl, bu, cl, cu, N: int, tgrid: Sequence[float] | None = None, tol: float = 1e-10) -> dict:
    """Comparison functions for the cascade ``u_t = Lap u + 2 u . grad u`` with measure data.

    ``f_lo`` uses ``(c_lo, b_hi)`` and ``f_hi`` uses ``(c_hi, b_lo)`` in
    ``f_n = c int_0^t n e^{-b^2 n(n-1)(t-s)} sum f_k f_{n-k} ds`` with
    ``f_1 = 1``.  The sandwich
    ``(c_lo (1 - e^{-2 b_hi^2 t}) / b_hi^2)^{n-1} <= f_lo <= f_hi <= (c_hi / b_lo^2)^{n-1}``
    is checked on ``tgrid`` to relative tolerance ``tol``.
    """
    bl, bu, cl, cu = (as_exact(x) if not isinstance(x, float) else Fraction(repr(x)) for x in (bl, bu, cl, cu))
    if not (0 < bl <= bu and 0 < cl <= cu):
        raise ValueError("need 0 < b_lo <= b_hi and 0 < c_lo <= c_hi")
    if cl > bl * bl or cu > bu * bu:
        raise ValueError("inner products cannot exceed squared radii: need c_lo <= b_lo^2, c_hi <= b_hi^2")
    tgrid = np.round(np.arange(1, 21) * 0.1, 10) if tgrid is None else np.asarray(tgrid, dtype=float)

    def recursion(c, b):
        f = [ExpPoly.constant(1)]
        for n in range(2, N + 1):
            src = ExpPoly.zero()
            for k in range(1, n):
                src = src + f[k - 1] * f[n - k - 1]
            f.append(duhamel(-b * b * n * (n - 1), src * (c * n)))
        return f

    lo, hi = recursion(cl, bu), recursion(cu, bl)
    failures = []
    for n in range(1, N + 1):
        for t in tgrid:
            a_lo = (float(cl / (bu * bu)) * -math.expm1(-2 * float(bu * bu) * t)) ** (n - 1)
            a_hi = float(cu / (bl * bl)) ** (n - 1)
            vlo = lo[n - 1].eval_precise(t, dps=40).real
            vhi = hi[n - 1].eval_precise(t, dps=40).real
            vlo, vhi = float(vlo), float(vhi)
            chain = [a_lo, vlo, vhi, a_hi]
            for (x, y), name in zip(zip(chain, chain[1:]), ("lower", "middle", "upper")):
                if x > y + tol * max(1.0, abs(y)):
                    failures.append((n, float(t), name, x, y))
    return {"lower": lo, "upper": hi, "ok": not failures, "failures": failures, "N": N,
            "params": {"b_lo": bl, "b_hi": bu, "c_lo": cl, "c_hi": cu}}


# ---------------------------------------------------------------------------
# stationary solutions

def _num(x):
    return x if isinstance(x, (float, complex)) else as_exact(x)


_QUOTED_CONSTANTS = {
    "kdv": lambda p: 1,
    "clm": lambda p: 6 * I * _num(p.get("eps", 1)),
    "nls_star": lambda p: cmath.sqrt(complex(2 / _num(p.get("alpha", 1)))),
}


def _profile(z):
    """``xi e^{-z xi}`` and ``e^{-z xi}`` on the half line."""
    return ExpDensity([(1, z, 1)]), ExpDensity([(0, z, 1)])


def stationary_parts(name: str, z, amplitude=1, params: dict | None = None) -> dict:
    """Linear and nonlinear parts of ``L u + N H(M u)`` for a candidate stationary profile.

    ``kdv``: ``u_hat = -A xi e^{-z xi}`` (the transform of ``A/(x + iz)^2``).
    ``clm``: ``v_hat = -c xi e^{-z xi}``.
    ``nls_star``: ``u_hat = -i c e^{-z xi}`` (the transform of ``c/(x+iz)``)
    with ``v_hat = conj(u_hat)``.  Returns lists of ExpDensity per component.
    """
    params = dict(params or {})
    z = _num(z)
    A = amplitude
    xe, e = _profile(z)
    if name == "kdv":
        u = xe * (-A)
        lin = u.mul_poly({3: I})
        quad = expdensity_convolve(u, u).mul_poly({1: 3 * I})
        return {"linear": [lin], "nonlinear": [quad], "profile": [u]}
    if name == "clm":
        eps = _num(params.get("eps", 1))
        v = xe * (-A)
        lin = v.mul_poly({2: -eps})
        quad = expdensity_convolve(v, v * I)
        return {"linear": [lin], "nonlinear": [quad], "profile": [v]}
    if name == "nls_star":
        alpha = _num(params.get("alpha", 1))
        u = e * (-I * A)
        v = u.conjugate()
        lin_u = u.mul_poly({2: -I})
        lin_v = v.mul_poly({2: I})
        uu = expdensity_convolve(u, u)
        vv = expdensity_convolve(v, v)
        abar = alpha.conjugate() if hasattr(alpha, "conjugate") else alpha
        q_u = expdensity_convolve(uu, v) * (-I * alpha)
        q_v = expdensity_convolve(vv, u) * (I * abar)
        return {"linear": [lin_u, lin_v], "nonlinear": [q_u, q_v], "profile": [u, v]}
    raise ValueError(f"no stationary candidate for {name!r}; choose kdv, clm or nls_star")


def _vec(dens: list[ExpDensity], keys) -> np.ndarray:
    return np.concatenate([d.coefficient_vector(keys) for d in dens])


def stationary_residual(name: str, z=1, params: dict | None = None) -> dict:
    """Residual of the candidate stationary solution and the best-fit amplitude.

    With unit amplitude the residual is ``A r1 + A^p r2`` (``p = 2`` for KdV
    and CLM; for NLS the cubic part scales with ``|c|^2 c``).  The best-fit
    constant minimises ``|r1 + A^{p-1} r2|`` over the coefficient vector and
    is reported next to the constant quoted with the formula.
    """
    params = dict(params or {})
    parts = stationary_parts(name, z, 1, params)
    lin, quad = parts["linear"], parts["nonlinear"]
    keys = sorted({(a, complex(zz)) for d in lin + quad for a, zz, _ in d.terms},
                  key=lambda k: (k[0], k[1].real, k[1].imag))
    r1, r2 = _vec(lin, keys), _vec(quad, keys)
    denom = np.vdot(r2, r2)
    fit = -np.vdot(r2, r1) / denom if denom != 0 else complex("nan")
    quoted = _QUOTED_CONSTANTS[name](params)
    out = {"name": name, "z": str(z), "quoted_constant": None if quoted is None else complex(quoted),
           "keys": [(a, str(k)) for a, k in keys]}
    if name == "nls_star":
        # fit is |c|^2; the candidate amplitude is its square root when positive
        out["best_fit_abs_c_squared"] = complex(fit)
        best = math.sqrt(fit.real) if abs(fit.imag) < 1e-12 and fit.real > 0 else None
        out["best_fit_constant"] = best

        def resid(c):
            return r1 * c + r2 * (abs(c) ** 2 * c)
    else:
        out["best_fit_constant"] = complex(fit)
        best = complex(fit)

        def resid(c):
            return r1 * c + r2 * c * c
    out["residual_unit"] = float(np.linalg.norm(resid(1.0)))
    out["residual_at_quoted"] = None if quoted is None else float(np.linalg.norm(resid(complex(quoted))))
    out["residual_at_best_fit"] = None if best is None else float(np.linalg.norm(resid(best)))
    if quoted is not None:
        par = stationary_parts(name, z, quoted, params)
        out["residual_density"] = [a + b for a, b in zip(par["linear"], par["nonlinear"])]
    return out
