"""Weight construction for convolution estimates on the half space.

Given a regularity profile ``mu0``, a boundary-decay profile ``nu0``, a gain
factor ``kappa`` (nonincreasing, values in ``(0, 1]``) and a scale ``delta``,
the maps here build weights ``(mu1, nu1)`` under which convolution of
distributions supported in ``{level > 0}`` gains the factor ``kappa``:

    rho_l^{mu1, kappa*nu1}(F*G) <= rho_l^{mu1, nu1}(F) * rho_l^{mu1, nu1}(G).

The exact construction is an infinite recursion on closed-form curves.  Here
every curve is piecewise linear, and the recursion is carried out on a node
grid with a look-ahead rule so the sufficient conditions
(:func:`check_conv_conditions`) hold exactly on the materialized range
``[0, horizon]``, not just at sample points.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .monofun import DEFAULT_RTOL, CutoffProfile, Kappa, MonotoneFn, default_cutoff, mchi
from .spectral import AtomicSpectrum

__all__ = [
    "WeightTriple",
    "ConvCertificate",
    "ConditionRow",
    "ConvReport",
    "cmap1",
    "cmap2",
    "hat_epsilon",
    "threshold_l0",
    "check_conv_conditions",
    "rho_norm_atomic",
    "rho_norm_upper",
    "random_triple",
    "random_atomic_measure",
    "convolution_suite",
    "superlinearity_check",
]

#: values above this are treated as overflow and end the materialized range
OVERFLOW = 1e100
_BISECT_STEPS = 64


def _as_kappa_fn(kappa) -> Callable:
    if isinstance(kappa, (int, float)):
        c = float(kappa)
        return lambda l: np.full(np.shape(l), c) if np.ndim(l) else c
    return kappa


@dataclass(frozen=True)
class WeightTriple:
    """Inputs of the weight construction.

    ``mu0`` must vanish at 0 with ``mu0(2 delta) <= 1/2``; ``nu0`` must vanish
    at 0; ``delta`` lies in ``(0, 1]``.
    """

    mu0: MonotoneFn
    nu0: MonotoneFn
    kappa: Kappa
    delta: float

    def __post_init__(self):
        if not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        if not self.mu0.in_C_delta(self.delta):
            raise ValueError("mu0 must vanish at 0 and satisfy mu0(2*delta) <= 1/2")
        if not self.nu0.vanishes_at_zero:
            raise ValueError("nu0 must vanish at 0")
        if not isinstance(self.kappa, Kappa):
            raise TypeError("kappa must be a Kappa profile")

    def scaled_nu(self, b: float) -> WeightTriple:
        return WeightTriple(self.mu0, self.nu0 * b, self.kappa, self.delta)

    def to_json(self) -> dict:
        return {"mu0": self.mu0.to_json(), "nu0": self.nu0.to_json(),
                "kappa": self.kappa.to_json(), "delta": self.delta}

    @classmethod
    def from_json(cls, data: dict) -> WeightTriple:
        return cls(MonotoneFn.from_json(data["mu0"]), MonotoneFn.from_json(data["nu0"]),
                   Kappa.from_json(data["kappa"]), float(data["delta"]))


# ---------------------------------------------------------------------------
# regularity weight

def cmap1(mu0: MonotoneFn, delta: float, horizon: float | None = None, resolution: int = 8) -> MonotoneFn:
    """Regularity weight ``mu1(l) = 2**max(l/delta - 3, 0) * mu0(l)`` as a piecewise-linear function.

    Nodes are the breakpoints of ``mu0`` together with all their shifts by
    multiples of ``delta`` and a uniform grid of step ``delta/resolution``, so
    the node set is invariant under ``+delta`` beyond ``3 delta``.  Both
    ``mu0 <= mu1`` and ``2 mu1(l - delta) <= mu1(l)`` (``l >= 4 delta``) then
    hold between nodes as well as at them, up to ``horizon``.

    Parameters
    ----------
    horizon : float, optional
        Right end of the materialized range; defaults to ``20 * delta``.
    """
    if not mu0.in_C_delta(delta):
        raise ValueError("mu0 must vanish at 0 and satisfy mu0(2*delta) <= 1/2")
    H = 20 * delta if horizon is None else float(horizon)
    if H <= 0:
        raise ValueError("horizon must be positive")
    # node offsets within one period [0, delta)
    bps = mu0.breakpoints[mu0.breakpoints <= H]
    offsets = np.unique(np.concatenate([np.mod(bps, delta), np.arange(resolution) * (delta / resolution)]))
    kmax = int(math.ceil(H / delta)) + 1
    nodes = (np.arange(kmax)[:, None] * delta + offsets[None, :]).ravel()
    nodes = np.unique(nodes[nodes <= H])
    expo = np.maximum(nodes / delta - 3.0, 0.0)
    vals = np.exp2(expo) * mu0(nodes)
    vals = np.maximum.accumulate(vals)
    tail = (vals[-1] - vals[-2]) / (nodes[-1] - nodes[-2]) if nodes.size > 1 else 0.0
    return MonotoneFn(nodes, vals, max(float(tail), mu0.tail_slope))


# ---------------------------------------------------------------------------
# boundary weight

def _nuhat_pl(nu0: MonotoneFn, kappa: Kappa) -> MonotoneFn:
    """Chordal interpolation of ``nu0/kappa`` at the breakpoints of both.

    On each cell ``nu0/kappa`` is a convex Moebius function, so the chord lies
    above it; the construction uses this majorant throughout.
    """
    g = np.union1d(nu0.breakpoints, kappa.breakpoints)
    vals = nu0(g) / kappa(g)
    tail = nu0.tail_slope / kappa(g[-1])
    return MonotoneFn(g, np.maximum.accumulate(vals), tail)


def hat_epsilon(nuhat, kappa, delta: float, l):
    """Largest admissible ``eps`` in ``9 nuhat(2 eps) <= kappa(l) (1 - 2 eps/delta)``.

    Bisection over ``[0, delta/2]`` with a fixed number of halvings; the
    returned value is always on the admissible side (relative accuracy far
    below 1e-12), and it is nonincreasing in ``l``.  Vectorized over ``l``.
    """
    kfn = _as_kappa_fn(kappa)
    scalar = np.ndim(l) == 0
    k = np.atleast_1d(np.asarray(kfn(np.atleast_1d(np.asarray(l, dtype=float))), dtype=float))
    lo = np.zeros_like(k)
    hi = np.full_like(k, delta / 2)

    def ok(e):
        return 9.0 * np.asarray(nuhat(2.0 * e), dtype=float) <= k * (1.0 - 2.0 * e / delta)

    top = ok(hi)
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        good = ok(mid)
        lo = np.where(good, mid, lo)
        hi = np.where(good, hi, mid)
    out = np.where(top, delta / 2, lo)
    return float(out[0]) if scalar else out


def threshold_l0(nuhat, kappa, delta: float) -> float:
    """``sup{l : l <= 2 eps_hat(l)}`` by bisection on ``[0, delta]`` (admissible side)."""
    def ok(l):
        return l <= 2.0 * hat_epsilon(nuhat, kappa, delta, l)

    if ok(delta):
        return float(delta)
    lo, hi = 0.0, float(delta)
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class ConvCertificate:
    """Output of :func:`cmap2`.

    Attributes
    ----------
    mu1, nu1 : MonotoneFn
        Regularity and boundary weights; valid on ``[0, horizon]``.
    nuhat : MonotoneFn
        The piecewise-linear majorant of ``nu0/kappa`` used by the recursion.
    l0 : float
        End of the initial segment on which ``nu1 = nuhat``.
    anchors : list of float
        Recursion anchors ``l0 < l1 < ...`` with ``l_n - eps_hat(l_n) = l_{n-1}``.
    horizon : float
        Right end of the range on which the conditions are guaranteed.
    truncated : str or None
        Why the horizon is smaller than requested (overflow of the
        doubly-exponential recursion), if it is.
    """

    triple: WeightTriple
    mu1: MonotoneFn
    nu1: MonotoneFn
    nuhat: MonotoneFn
    l0: float
    anchors: list
    horizon: float
    requested_horizon: float
    truncated: str | None
    chi_version: str
    nodes: np.ndarray = field(repr=False)
    node_eps: np.ndarray = field(repr=False)
    continuous_at_l0: bool = True

    def nu_tilde(self, l):
        """The contracted weight ``kappa * nu1``."""
        return self.triple.kappa(l) * self.nu1(l)

    def eps(self, l):
        """``eps_hat`` clipped at ``l0/2``, the step used by the recursion."""
        return np.minimum(self.l0 / 2, hat_epsilon(self.nuhat, self.triple.kappa, self.triple.delta, l))

    def eps_witness(self, l: float) -> float:
        """The splitting parameter the construction guarantees at ``l``."""
        if l <= self.l0:
            return float(self.eps(l))
        i = min(bisect.bisect_left(self.nodes.tolist(), l), self.nodes.size - 1)
        return float(self.node_eps[i])

    def gamma(self, l):
        return np.asarray(l, dtype=float) - self.eps(l)

    def verify(self, lgrid: Sequence[float] | None = None, n: int = 200, rtol: float = DEFAULT_RTOL) -> ConvReport:
        """Run the convolution conditions on ``lgrid`` (default: ``n`` points in ``(0, horizon]``).

        Condition (1) is checked for ``mu0 -> mu1`` and for ``mu1 -> mu1``;
        conditions (2)-(3) for ``nu1 -> kappa*nu1`` with regularity ``mu0``.
        """
        lg = np.linspace(self.horizon / n, self.horizon, n) if lgrid is None else np.asarray(lgrid, dtype=float)
        t = self.triple
        rep = check_conv_conditions(t.mu0, self.mu1, self.nu1, self.nu_tilde, t.delta, lg,
                                    eps_hint=self.eps_witness, rtol=rtol)
        self_rep = check_conv_conditions(self.mu1, self.mu1, None, None, t.delta, lg, rtol=rtol)
        rows = [
            ConditionRow(a.l, a.cond1 and b.cond1, a.cond2, a.cond3, a.eps, a.detail or b.detail)
            for a, b in zip(rep.rows, self_rep.rows)
        ]
        return ConvReport(rows, self.chi_version)

    def to_json(self, report: ConvReport | None = None) -> dict:
        out = {
            "inputs": self.triple.to_json(),
            "mu1": self.mu1.to_json(),
            "nu1": self.nu1.to_json(),
            "l0": self.l0,
            "anchors": list(map(float, self.anchors)),
            "horizon": self.horizon,
            "requested_horizon": self.requested_horizon,
            "truncated": self.truncated,
            "continuous_at_l0": self.continuous_at_l0,
            "chi_table_version": self.chi_version,
        }
        if report is not None:
            out["conditions"] = report.to_json()
        return out


def cmap2(triple: WeightTriple, horizon: float, *, grid: Sequence[float] | None = None,
          h_max: float | None = None, max_nodes: int = 400_000,
          profile: CutoffProfile | None = None) -> ConvCertificate:
    """Boundary weight ``nu1`` for which convolution gains the factor ``kappa``.

    On ``[0, l0]`` the weight equals ``nuhat``, the chordal majorant of
    ``nu0/kappa``.  Beyond ``l0`` the nodal values follow the recursion

        nu1 >= m(nuhat, max(nu_L, nu_H)),   m(a, b) = max(a, b, a*b),
        nu_L(l) = 9 nu1(l - eps(l))**2 / kappa(l),
        nu_H(l) = [l > 3 delta] * 3 (M(delta, mu0(l - delta)) nu1(l - delta))**2 / kappa(l),

    where each cell takes the requirement of its right endpoint (all pieces are
    nondecreasing), which makes the inequalities hold on whole cells.

    Parameters
    ----------
    triple : WeightTriple
    horizon : float
        Requested right end; must exceed ``l0``.  The range is cut short (and
        ``truncated`` set) when values exceed ``1e100`` or the cutoff table runs
        out of derivative orders.
    grid : sequence of float, optional
        Extra nodes.  Two runs on a common node set compare exactly, which is
        how the superlinearity in ``nu0`` is tested.
    h_max : float, optional
        Upper bound on the node spacing beyond ``l0`` (default ``delta/16``).
    """
    profile = profile or default_cutoff()
    delta = triple.delta
    kappa = triple.kappa
    H = float(horizon)
    nuhat = _nuhat_pl(triple.nu0, kappa)
    l0 = threshold_l0(nuhat, kappa, delta)
    if H <= l0:
        raise ValueError(f"horizon {H} must exceed l0 = {l0}")
    mu1 = cmap1(triple.mu0, delta, horizon=H)

    def eps_of(x):
        return np.minimum(l0 / 2, hat_epsilon(nuhat, kappa, delta, x))

    eps_H = float(eps_of(H))
    # spacing strictly below eps/2 keeps g - eps(g) two nodes back despite rounding
    h = min(delta / 16 if h_max is None else h_max, 0.45 * eps_H)
    if (H - l0) / h > max_nodes:
        raise ValueError(f"node budget exceeded: spacing {h:.3g} over [{l0:.3g}, {H:.3g}]")
    base = np.linspace(l0, H, int(math.ceil((H - l0) / h)) + 1)

    # anchors from the base-grid inverse of gamma(l) = l - eps(l)
    base_eps = eps_of(base)
    gam = base - base_eps
    anchors = [l0]
    while True:
        nxt = float(np.interp(anchors[-1], gam, base, right=np.inf))
        if not math.isfinite(nxt) or nxt > H or nxt <= anchors[-1]:
            break
        anchors.append(nxt)

    low = np.concatenate([nuhat.breakpoints[nuhat.breakpoints < l0], [l0]])
    extra = np.asarray([] if grid is None else grid, dtype=float)
    high = nuhat.breakpoints[(nuhat.breakpoints > l0) & (nuhat.breakpoints <= H)]
    nodes = np.unique(np.concatenate([[0.0], low, base, high, anchors, extra[(extra >= 0) & (extra <= H)]]))
    i0 = int(np.searchsorted(nodes, l0))

    # refine the first cell past l0 until the recursion starts below nuhat(l0)
    nuhat_l0 = float(nuhat(l0))
    mu0 = triple.mu0

    def requirement(g, e, kg, nuh, known):
        a = known(g - e)
        q = 9.0 * a * a / kg
        if g > 3 * delta:
            b = mchi(delta, float(mu0(g - delta)), profile) * known(g - delta)
            q = max(q, 3.0 * b * b / kg)
        return max(q, nuh * q)

    continuous = True
    if i0 + 1 < nodes.size:
        g1 = float(nodes[i0 + 1])
        for _ in range(60):
            need = requirement(g1, float(eps_of(g1)), float(kappa(g1)), float(nuhat(g1)),
                               lambda x: float(nuhat(x)))
            if need <= nuhat_l0:
                break
            g1 = 0.5 * (l0 + g1)
        else:
            continuous = False
        nodes = np.union1d(nodes, [g1])

    nodes_l = nodes.tolist()
    n = len(nodes_l)
    nh = nuhat(nodes).tolist()
    kap = kappa(nodes).tolist()
    node_eps = eps_of(nodes)
    eps_l = node_eps.tolist()
    N = [math.nan] * n
    N[: i0 + 1] = nh[: i0 + 1]
    known_upto = i0

    def known(x: float) -> float:
        if x <= 0:
            return 0.0
        j = bisect.bisect_right(nodes_l, x) - 1
        if nodes_l[j] == x and j <= known_upto:
            return N[j]
        if j + 1 > known_upto:
            raise RuntimeError("recursion looked ahead of the materialized range")
        w = (x - nodes_l[j]) / (nodes_l[j + 1] - nodes_l[j])
        return N[j] + w * (N[j + 1] - N[j])

    truncated = None
    V = 0.0
    end = n - 1
    for i in range(i0, n - 1):
        known_upto = max(i0, i - 1)
        g = nodes_l[i + 1]
        try:
            need = requirement(g, eps_l[i + 1], kap[i + 1], nh[i + 1], known)
        except ValueError as exc:          # cutoff table exhausted
            need, why = math.inf, f"cutoff table exhausted ({exc})"
        else:
            why = f"weights exceed {OVERFLOW:g}"
        if not need <= OVERFLOW:
            truncated = f"{why} beyond l={nodes_l[i]:.6g}"
            end = i
            break
        V = max(V, need)
        N[i] = max(N[i], V) if i == i0 else max(nh[i], V)
    if truncated is None:
        N[n - 1] = max(nh[n - 1], V)
    elif end > i0:
        N[end] = max(nh[end], V)
    nodes_arr = nodes[: end + 1]
    vals = np.maximum.accumulate(np.asarray(N[: end + 1]))
    horizon_eff = float(nodes_arr[-1])
    tail = (vals[-1] - vals[-2]) / (nodes_arr[-1] - nodes_arr[-2]) if nodes_arr.size > 1 else 0.0
    nu1 = MonotoneFn(nodes_arr, vals, float(tail))
    return ConvCertificate(
        triple=triple, mu1=mu1, nu1=nu1, nuhat=nuhat, l0=l0,
        anchors=[a for a in anchors if a <= horizon_eff], horizon=horizon_eff, requested_horizon=H,
        truncated=truncated, chi_version=profile.version, nodes=nodes_arr,
        node_eps=node_eps[: end + 1], continuous_at_l0=continuous,
    )


# ---------------------------------------------------------------------------
# sufficient conditions

@dataclass(frozen=True)
class ConditionRow:
    l: float
    cond1: bool
    cond2: bool
    cond3: bool
    eps: float | None
    detail: str | None = None

    @property
    def ok(self) -> bool:
        return self.cond1 and self.cond2 and self.cond3


@dataclass
class ConvReport:
    rows: list
    chi_version: str

    @property
    def all_pass(self) -> bool:
        return all(r.ok for r in self.rows)

    def failures(self) -> list:
        return [r for r in self.rows if not r.ok]

    def to_json(self) -> dict:
        return {"chi_table_version": self.chi_version, "all_pass": self.all_pass,
                "rows": [{"l": r.l, "cond1": r.cond1, "cond2": r.cond2, "cond3": r.cond3,
                          "eps": r.eps, "detail": r.detail} for r in self.rows]}


def _sup_eps(nu, nut_l: float, nu_l: float, delta: float) -> float:
    """Largest ``eps <= delta/2`` with ``9 nu(2 eps) nu(l) <= nutilde(l)`` (admissible side)."""
    def ok(e):
        return 9.0 * float(nu(2 * e)) * nu_l <= nut_l

    if ok(delta / 2):
        return delta / 2
    lo, hi = 0.0, delta / 2
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def check_conv_conditions(mu, mutilde, nu, nutilde, delta: float, lgrid: Sequence[float], *,
                          eps_hint: Callable[[float], float] | None = None,
                          rtol: float = DEFAULT_RTOL, profile: CutoffProfile | None = None) -> ConvReport:
    """Check the three sufficient conditions for a gain-``nutilde/nu`` convolution estimate.

    For every ``l`` in ``lgrid``:

    1. ``mu(l) <= mutilde(l)`` and ``2 mu(l - delta) <= mutilde(l)`` when ``l > 4 delta``;
    2. some ``eps`` in ``(0, delta/2]`` has ``9 nu(2 eps) nu(l) <= nutilde(l)`` and,
       if ``2 eps < l``, ``9 nu(l - eps)**2 <= nutilde(l)``;
    3. ``3 (M(delta, mu(l - delta)) nu(l - delta))**2 <= nutilde(l)`` when ``l > 4 delta``.

    For condition 2 the largest ``eps`` passing the first inequality is also
    the best choice for the second, so computing it by bisection decides the
    condition; ``eps_hint`` adds further candidates.  ``nu``/``nutilde`` may be
    ``None`` to check condition 1 alone.  Inequalities allow relative slack
    ``rtol``.
    """
    profile = profile or default_cutoff()
    rows = []
    slack = 1.0 + rtol
    for l in map(float, lgrid):
        detail = []
        c1 = float(mu(l)) <= float(mutilde(l)) * slack
        if c1 and l > 4 * delta:
            c1 = 2.0 * float(mu(l - delta)) <= float(mutilde(l)) * slack
        if not c1:
            detail.append("mu growth")
        c2 = c3 = True
        eps_used = None
        if nu is not None:
            nu_l = float(nu(l))
            nut_l = float(nutilde(l))
            cands = [_sup_eps(nu, nut_l * slack, nu_l, delta)]
            if eps_hint is not None:
                cands.append(float(eps_hint(l)))
            c2 = False
            for e in cands:
                if not 0 < e <= delta / 2:
                    continue
                if 9.0 * float(nu(2 * e)) * nu_l > nut_l * slack:
                    continue
                if 2 * e < l and 9.0 * float(nu(l - e)) ** 2 > nut_l * slack:
                    continue
                c2, eps_used = True, e
                break
            if not c2:
                detail.append("splitting")
            if l > 4 * delta:
                try:
                    m = mchi(delta, float(mu(l - delta)), profile)
                    c3 = 3.0 * (m * float(nu(l - delta))) ** 2 <= nut_l * slack
                except ValueError:
                    c3 = False
                if not c3:
                    detail.append("far interaction")
        rows.append(ConditionRow(l, c1, c2, c3, eps_used, ", ".join(detail) or None))
    return ConvReport(rows, profile.version)


# ---------------------------------------------------------------------------
# norms of atomic measures

def _level_masses(F: AtomicSpectrum, direction=None):
    masses: dict = {}
    for xi, c in F.items():
        lev = xi.level(direction)
        if lev <= 0:
            raise ValueError(f"atom {xi} has level {lev} <= 0; spectra must live in the open half space")
        w = 0.0
        for x in c:
            if hasattr(x, "eval"):
                raise TypeError("evaluate time-dependent coefficients first (AtomicSpectrum.snapshot)")
            w += abs(complex(x))
        masses[lev] = masses.get(lev, 0.0) + w
    return sorted(masses.items())


def rho_norm_atomic(F: AtomicSpectrum, nu, direction=None) -> float:
    """Weighted total-variation norm ``sup_l |F|(level < l) / nu(l)`` of an atomic measure.

    The supremum over ``l`` is attained just above an atom level, so it is the
    maximum over atom levels ``lam`` of (mass at levels ``<= lam``)/``nu(lam)``
    for continuous ``nu``.  Coefficient vectors contribute the sum of moduli.
    """
    best = 0.0
    acc = 0.0
    for lev, w in _level_masses(F, direction):
        acc += w
        if acc == 0:
            continue
        d = float(nu(float(lev)))
        if d <= 0:
            return math.inf
        best = max(best, acc / d)
    return best


def rho_norm_upper(F: AtomicSpectrum, mu, nu, direction=None) -> tuple[float, bool]:
    """Norm with regularity weight ``mu``.

    Returns ``(value, upper_bound_only)``; for ``mu`` identically zero the
    value is exact, otherwise it is the total-variation upper bound.
    """
    value = rho_norm_atomic(F, nu, direction)
    levels = [float(l) for l, _ in _level_masses(F, direction)]
    upper_only = bool(levels) and any(float(mu(l)) > 0 for l in levels + [max(levels)])
    return value, upper_only


# ---------------------------------------------------------------------------
# randomized checks

def random_triple(rng: np.random.Generator) -> WeightTriple:
    """A random admissible triple with piecewise-linear profiles (used by the property suites)."""
    delta = float(rng.uniform(0.2, 1.0))
    mu0 = MonotoneFn([0.0, 2 * delta], [0.0, float(rng.uniform(0, 0.5))], float(rng.uniform(0, 0.3)))
    nu0 = MonotoneFn([0.0, float(rng.uniform(0.1, 2))], [0.0, float(rng.uniform(1e-4, 0.05))],
                     float(rng.uniform(0, 0.05)))
    kappa = Kappa.from_points([0.0, float(rng.uniform(0.1, 3))], [1.0, float(rng.uniform(0.05, 1))])
    return WeightTriple(mu0, nu0, kappa, delta)


def random_atomic_measure(rng: np.random.Generator, max_level: float, max_atoms: int = 5) -> AtomicSpectrum:
    """Nonnegative atoms at rational levels in ``(0, max_level)``."""
    from fractions import Fraction

    n = int(rng.integers(1, max_atoms + 1))
    lo = min(1e-3, max_level / 10)
    atoms = {}
    for _ in range(n):
        lev = Fraction(float(rng.uniform(lo, max_level))).limit_denominator(10 ** 6)
        atoms[(lev,)] = float(rng.uniform(0, 1))
    return AtomicSpectrum(atoms)


def convolution_suite(cert: ConvCertificate, pairs: int, rng: np.random.Generator,
                      rtol: float = DEFAULT_RTOL) -> dict:
    """Test ``rho^{0, kappa nu1}(F*G) <= rho^{0, nu1}(F) rho^{0, nu1}(G)`` on random nonnegative pairs.

    Atoms are drawn below half the materialized horizon so every convolution
    stays inside it.
    """
    from .spectral import convolve

    top = cert.horizon / 2
    violations = []
    for i in range(pairs):
        F = random_atomic_measure(rng, top)
        G = random_atomic_measure(rng, top)
        lhs = rho_norm_atomic(convolve(F, G), cert.nu_tilde)
        rhs = rho_norm_atomic(F, cert.nu1) * rho_norm_atomic(G, cert.nu1)
        if lhs > rhs * (1 + rtol):
            violations.append({"pair": i, "lhs": lhs, "rhs": rhs,
                               "F": F.to_json(), "G": G.to_json()})
    return {"pairs": pairs, "violations": violations, "ok": not violations}


def superlinearity_check(triple: WeightTriple, b: float, horizon: float, rtol: float = DEFAULT_RTOL) -> dict:
    """Compare ``cmap2`` for ``b nu0`` with ``b`` times ``cmap2`` for ``nu0`` on a common node grid.

    Both certificates are rebuilt on the union of their nodes so the
    comparison is made at identical points, up to the shorter materialized
    horizon.
    """
    base = cmap2(triple, horizon)
    scaled = cmap2(triple.scaled_nu(b), horizon)
    grid = np.union1d(base.nodes, scaled.nodes)
    base = cmap2(triple, horizon, grid=grid)
    scaled = cmap2(triple.scaled_nu(b), horizon, grid=grid)
    top = min(base.horizon, scaled.horizon)
    pts = grid[grid <= top]
    lhs, rhs = scaled.nu1(pts), b * base.nu1(pts)
    bad = np.nonzero(lhs < rhs * (1 - rtol))[0]
    pos = rhs > 0
    return {"b": b, "points": int(pts.size), "horizon": float(top), "ok": bad.size == 0,
            "worst_ratio": float(np.min(lhs[pos] / rhs[pos])) if pos.any() else 1.0,
            "violations": [float(pts[i]) for i in bad[:10]]}
