"""Command-line batch runner.

Every subcommand reads an optional JSON config (``--config``), applies flag
overrides, writes its tables into ``--out`` and returns an exit code:
0 success, 1 malformed configuration, 2 solver error, 3 a checked property
failed (details in ``failures.json``).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__
from .monofun import default_cutoff

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_PROPERTY = 0, 1, 2, 3


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


class PropertyFailure(RuntimeError):
    def __init__(self, message: str, report: Any):
        super().__init__(message)
        self.report = report


# ---------------------------------------------------------------------------
# output helpers

def _metadata_line() -> str:
    return f"# halfspec {__version__}; cutoff table {default_cutoff().version}"


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    return str(x)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", text=True)
    with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """RFC 4180 CSV with a leading metadata comment and a header row."""
    buf = io.StringIO()
    buf.write(_metadata_line() + "\r\n")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    _atomic_write(path, buf.getvalue())
    return path


def _json_default(o):
    if isinstance(o, Fraction):
        return _fmt(o)
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if hasattr(o, "to_json"):
        return o.to_json()
    return str(o)


def write_json(path: Path, obj) -> Path:
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh.read().splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    if not rows:
        raise ConfigError(f"{path} has no header")
    return rows[0], rows[1:]


# ---------------------------------------------------------------------------
# config access

def _section(cfg: dict, key: str) -> dict:
    sec = cfg.get(key, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"'{key}' must be an object")
    return sec


def _get(sec: dict, key: str, default, kind=float):
    val = sec.get(key, default)
    try:
        if kind is Fraction:
            return Fraction(str(val))
        return kind(val)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for '{key}': {val!r}") from exc


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _pmap(fn, items, threads: int):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# subcommands

def cmd_solve(args, cfg: dict, out: Path) -> dict:
    from .equations import equation_from_config
    from .solver import FreqGrid, GridState, WeightParams, select_contraction_params, solve_grid, solve_lattice
    from .spectral import AtomicSpectrum

    scfg = _section(cfg, "solver")
    kind = args.kind or scfg.get("kind", "lattice")
    default_eq = {"name": "ode_square"} if kind == "lattice" else {"name": "complex_heat"}
    eq_cfg = cfg.get("equation", default_eq)
    try:
        sym, H = equation_from_config(eq_cfg)
    except (ValueError, TypeError, SyntaxError) as exc:
        raise ConfigError(f"equation: {exc}") from exc
    data = _section(cfg, "data")
    if kind == "lattice":
        try:
            u0 = AtomicSpectrum.from_json(data) if data else AtomicSpectrum({(1,) * 1 + (0,) * (sym.d - 1): (1,) * sym.n1})
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"data: {exc}") from exc
        lam = Fraction(args.max_level) if args.max_level else _get(scfg, "max_level", "6", Fraction)
        sol = solve_lattice(sym, H, u0, lam, mode=scfg.get("mode", "auto"))
        times = [float(t) for t in scfg.get("times", [0.0, 0.5, 1.0])]
        rows = []
        for t in times:
            snap = sol.at(t)
            for xi, vec in snap.items():
                for j, c in enumerate(vec):
                    c = complex(c)
                    rows.append([t, *[float(x) for x in xi.coords], j, c.real, c.imag])
        write_json(out / "spectrum.json", sol.spectrum.to_json())
        write_csv(out / "samples.csv", ["t", *[f"xi{k + 1}" for k in range(sym.d)], "component", "re", "im"], rows)
        summary = {"kind": "lattice", "equation": sym.name, "atoms": len(sol.spectrum), "mode": sol.mode,
                   "max_level": sol.max_level, "residual": sol.residual}
        write_json(out / "summary.json", summary)
        return summary
    if kind != "grid":
        raise ConfigError("solver.kind must be 'lattice' or 'grid'")
    h = _get(scfg, "h", 1 / 16)
    extent = _get(scfg, "extent", 16.0)
    T = args.T if args.T is not None else _get(scfg, "T", 5.0)
    dt = args.dt if args.dt is not None else _get(scfg, "dt", 0.05)
    n = int(round(extent / h))
    grid = FreqGrid(h, (n,) + tuple(int(round(2 * extent / h)) for _ in range(sym.d - 1)),
                    (0.0,) + tuple(-extent for _ in range(sym.d - 1)))
    bump = data.get("bump", {"lo": 1.0, "hi": 2.0, "mass": 1.0})
    try:
        u0 = GridState.bump(grid, float(bump["lo"]), float(bump["hi"]), complex(bump.get("mass", 1.0)), sym.n1)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"data.bump: {exc}") from exc
    s = _get(scfg, "s", -1.0)
    a = _get(scfg, "a", 2.0)
    k0 = int(_get(scfg, "k0", H.k0, int))
    if "b" in scfg:
        b, theta = _get(scfg, "b", 1.0), None
    else:
        c0 = sym.claim.c0 if sym.claim else 0.5
        theta, b = select_contraction_params(s, c0, _get(scfg, "eps", 0.1), a, k0)
    params = WeightParams(s=s, a=a, k0=k0, b=b)
    bound = scfg.get("B")
    sol = solve_grid(sym, H, u0, T, dt, params=params, bound=None if bound is None else float(bound),
                     max_iters=int(_get(scfg, "max_iters", 50, int)), tol=_get(scfg, "tol", 1e-10))
    write_csv(out / "norm_trace.csv", ["t", "z_norm", "ball_bound"], sol.norm_trace())
    axis = grid.axes()[0]
    rows = []
    stride = max(1, len(sol.times) // 10)
    for i in range(0, len(sol.times), stride):
        vals = sol.states[i].reshape(sym.n1, grid.shape[0], -1)[:, :, 0]
        for j in range(sym.n1):
            for x, c in zip(axis, vals[j]):
                rows.append([sol.times[i], x, j, c.real, c.imag])
    write_csv(out / "samples.csv", ["t", "xi1", "component", "re", "im"], rows)
    summary = {"kind": "grid", "equation": sym.name, "theta": theta, "b": b, "B": sol.bound,
               "sup_norm": sol.sup_norm, "ball_ok": sol.ball_ok, "iterations": sol.iterations,
               "converged": sol.converged}
    write_json(out / "summary.json", summary)
    if not sol.converged:
        raise PropertyFailure("Picard iteration did not reach the tolerance", {"history": sol.history})
    if not sol.ball_ok:
        raise PropertyFailure("weighted norm left the ball of radius 2B", summary)
    return summary


def cmd_burgers(args, cfg: dict, out: Path) -> dict:
    from .casebook import (burgers_astar, burgers_astarstar, burgers_sandwich, burgers_tstar, burgers_un,
                           colehopf_first_zero, un_values)

    sec = _section(cfg, "burgers")
    N = args.N or int(_get(sec, "N", 60, int))
    amps = args.a or [float(x) for x in sec.get("a", [3.0, 5.0, 10.0])]
    tgrid = [round(float(t), 12) for t in np.linspace(0.3, 3.0, int(_get(sec, "points", 20, int)))]
    U = burgers_un(N)
    sample_t = [0.05 * j for j in range(1, 101)]
    rows = []
    for t in sample_t[::10]:
        for n, v in enumerate(un_values(U, t), start=1):
            rows.append([t, n, v])
    write_csv(out / "un.csv", ["t", "n", "U_n"], rows)
    sandwich = burgers_sandwich(U, sample_t)
    curve = _pmap(lambda t: burgers_astar(t, N, U), tgrid, args.threads)
    write_csv(out / "astar.csv", ["t", "estimate", "bracket_lo", "bracket_hi", "inside", "method"],
              [[r["t"], r["estimate"], *r["bracket"], r["inside"], r["method"]] for r in curve])
    star2 = burgers_astarstar(None, N, U)

    def one(a):
        ts = burgers_tstar(a, N, U)
        try:
            ch = colehopf_first_zero(a)["T"] if math.isfinite(ts["estimate"]) else None
        except RuntimeError:
            ch = None
        rel = abs(ch - ts["estimate"]) / ts["estimate"] if ch is not None else None
        return ts, ch, rel

    res = _pmap(one, amps, args.threads)
    write_csv(out / "tstar.csv", ["a", "estimate", "bracket_hi", "log_a", "colehopf", "rel_diff", "status"],
              [[ts["a"], ts["estimate"], ts["bracket"][1], math.log(ts["a"]), ch, rel, ts["status"]]
               for ts, ch, rel in res])
    failures = []
    if not sandwich["ok"]:
        failures.append({"check": "sandwich", "failures": sandwich["failures"][:20]})
    failures += [{"check": "astar bracket", "t": r["t"], "estimate": r["estimate"]} for r in curve if not r["inside"]]
    if not star2["inside"]:
        failures.append({"check": "astarstar bracket", "estimate": star2["estimate"]})
    for ts, ch, rel in res:
        if math.isfinite(ts["estimate"]) and ts["estimate"] > math.log(ts["a"]) + 1e-9:
            failures.append({"check": "T* <= log|a|", "a": ts["a"], "estimate": ts["estimate"]})
    summary = {"N": N, "sandwich_ok": sandwich["ok"], "astarstar": star2["estimate"],
               "astarstar_argmin": star2["argmin"],
               "tstar": {str(ts["a"]): {"estimate": ts["estimate"], "colehopf": ch} for ts, ch, _ in res}}
    write_json(out / "summary.json", summary)
    if failures:
        raise PropertyFailure("Burgers checks failed", failures)
    return summary


def _triple_from(cfg_sec: dict, rng):
    from .weights import WeightTriple, random_triple

    if "triple" in cfg_sec:
        try:
            return WeightTriple.from_json(cfg_sec["triple"])
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"weights.triple: {exc}") from exc
    return random_triple(rng)


def cmd_weights(args, cfg: dict, out: Path) -> dict:
    from .weights import cmap2, convolution_suite, superlinearity_check

    sec = _section(cfg, "weights")
    rng = np.random.default_rng(args.seed)
    horizon = _get(sec, "horizon", 8.0)
    trials = args.trials or int(_get(sec, "trials", 1 if "triple" in sec else 5, int))
    pairs = int(_get(sec, "pairs", 1000, int))
    failures, rows, certs = [], [], []
    for i in range(trials):
        triple = _triple_from(sec, rng)
        cert = cmap2(triple, horizon)
        rep = cert.verify()
        certs.append(cert.to_json(rep))
        for r in rep.rows:
            rows.append([i, r.l, r.cond1, r.cond2, r.cond3, r.eps])
        if not rep.all_pass:
            failures.append({"trial": i, "conditions": [r.l for r in rep.failures()][:20]})
        suite = convolution_suite(cert, pairs, rng)
        if not suite["ok"]:
            failures.append({"trial": i, "convolution": suite["violations"][:5]})
        for b in (2.0, 5.0, 10.0):
            sl = superlinearity_check(triple, b, horizon)
            if not sl["ok"]:
                failures.append({"trial": i, "superlinearity": sl})
    write_json(out / "certificates.json", certs)
    write_csv(out / "conditions.csv", ["trial", "l", "cond1", "cond2", "cond3", "eps"], rows)
    summary = {"trials": trials, "pairs": pairs, "failures": len(failures), "seed": args.seed}
    write_json(out / "summary.json", summary)
    if failures:
        raise PropertyFailure("weight checks failed", failures)
    return summary


def cmd_cascade(args, cfg: dict, out: Path) -> dict:
    from .casebook import cascade_bounds

    sec = _section(cfg, "cascade")
    vals = {k: getattr(args, k) if getattr(args, k) is not None else _get(sec, k, d, Fraction)
            for k, d in (("bl", "1"), ("bu", "3/2"), ("cl", "1/2"), ("cu", "9/10"))}
    N = args.N or int(_get(sec, "N", 30, int))
    try:
        rep = cascade_bounds(Fraction(vals["bl"]), Fraction(vals["bu"]), Fraction(vals["cl"]),
                             Fraction(vals["cu"]), N)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    bl, bu, cl, cu = (float(Fraction(vals[k])) for k in ("bl", "bu", "cl", "cu"))
    rows = []
    for n in range(1, N + 1):
        for t in np.round(np.arange(1, 21) * 0.1, 10):
            lo = (cl / bu ** 2 * -math.expm1(-2 * bu ** 2 * t)) ** (n - 1)
            rows.append([n, float(t), lo, rep["lower"][n - 1].eval(t).real, rep["upper"][n - 1].eval(t).real,
                         (cu / bl ** 2) ** (n - 1)])
    write_csv(out / "cascade.csv", ["n", "t", "lower_bound", "f_lower", "f_upper", "upper_bound"], rows)
    summary = {"N": N, "ok": rep["ok"], "params": {k: str(v) for k, v in vals.items()}}
    write_json(out / "summary.json", summary)
    if not rep["ok"]:
        raise PropertyFailure("cascade sandwich failed", rep["failures"][:50])
    return summary


def cmd_residual(args, cfg: dict, out: Path) -> dict:
    from .casebook import stationary_residual

    sec = _section(cfg, "residual")
    names = [args.name] if args.name else sec.get("names", ["kdv", "clm", "nls_star"])
    z = Fraction(args.z) if args.z else _get(sec, "z", "1", Fraction)
    params = sec.get("params", {})
    reports, rows = {}, []
    for name in names:
        try:
            r = stationary_residual(name, z, params.get(name, {}))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        reports[name] = {k: v for k, v in r.items() if k != "residual_density"}
        reports[name]["residual_density"] = [d.to_json() for d in r.get("residual_density", [])]
        rows.append([name, str(z), r["quoted_constant"], r["best_fit_constant"], r["residual_at_quoted"],
                     r["residual_at_best_fit"]])
    write_csv(out / "residual.csv", ["equation", "z", "quoted_constant", "best_fit_constant", "residual_at_quoted",
                                     "residual_at_best_fit"], rows)
    write_json(out / "residual.json", reports)
    return {"equations": names}


def cmd_oracle(args, cfg: dict, out: Path) -> dict:
    from .casebook import cosine_zero_mode
    from .equations import builtin
    from .exppoly import ExpPoly
    from .solver import ode_iteration_coefficients, solve_lattice
    from .spectral import AtomicSpectrum, FreqPoint

    sec = _section(cfg, "oracle")
    n = args.n or int(_get(sec, "n", 12, int))
    K = args.K or int(_get(sec, "K", 200, int))
    failures = []
    table = ode_iteration_coefficients(n)
    rows = []
    for j, row in enumerate(table):
        for k, c in enumerate(row):
            if k < 64:
                rows.append([j, k, c, float(c)])
            expect_one = k <= j
            if (expect_one and c != 1) or (not expect_one and not 0 < c < 1):
                failures.append({"check": "iteration coefficients", "n": j, "k": k, "c": str(c)})
    write_csv(out / "picard.csv", ["n", "k", "c_nk", "c_nk_float"], rows)
    amp, c = Fraction(3, 2), Fraction(1, 3)
    sym, H = builtin("ode_square")
    sol = solve_lattice(sym, H, AtomicSpectrum({FreqPoint(c): (amp,)}), 30 * c)
    for m in range(30):
        if sol.coefficient(FreqPoint((m + 1) * c)) != ExpPoly.monomial(m, amp ** (m + 1)):
            failures.append({"check": "ODE formula", "power": m})
    cos = cosine_zero_mode(K)
    write_csv(out / "cosine.csv", ["k", "coefficient", "coefficient_float"],
              [[k, a, float(a)] for k, a in enumerate(cos["coefficients"], start=1)])
    for key in ("first_is_half", "ratio_law", "dominates_harmonic"):
        if not cos[key]:
            failures.append({"check": f"cosine {key}"})
    summary = {"n": n, "K": K, "ode_atoms": len(sol.spectrum), "failures": len(failures),
               "cosine_partial_sums": cos["partial_sums"]}
    write_json(out / "summary.json", summary)
    if failures:
        raise PropertyFailure("oracle checks failed", failures)
    return summary


_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def render_svg(series: dict[str, tuple[list[float], list[float]]], xlabel: str, ylabel: str,
               width: int = 640, height: int = 420, logy: bool = False) -> str:
    """Static SVG line chart."""
    pts = [(x, y) for xs, ys in series.values() for x, y in zip(xs, ys)
           if math.isfinite(x) and math.isfinite(y) and (not logy or y > 0)]
    if not pts:
        raise ConfigError("nothing to plot")
    tr = (lambda y: math.log10(y)) if logy else (lambda y: y)  # noqa: E731
    xs = [p[0] for p in pts]
    ys = [tr(p[1]) for p in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    L, R, T, B = 70, 20, 20, 50

    def px(x):
        return L + (x - x0) / (x1 - x0) * (width - L - R)

    def py(y):
        return height - B - (tr(y) - y0) / (y1 - y0) * (height - T - B)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<line x1="{L}" y1="{height - B}" x2="{width - R}" y2="{height - B}" stroke="black"/>',
             f'<line x1="{L}" y1="{T}" x2="{L}" y2="{height - B}" stroke="black"/>']
    for i in range(5):
        xv = x0 + i * (x1 - x0) / 4
        yv = y0 + i * (y1 - y0) / 4
        parts.append(f'<text x="{px(xv):.1f}" y="{height - B + 16}" text-anchor="middle">{xv:.3g}</text>')
        lab = f"1e{yv:.2g}" if logy else f"{yv:.3g}"
        ypix = height - B - i * (height - T - B) / 4
        parts.append(f'<text x="{L - 6}" y="{ypix + 4:.1f}" text-anchor="end">{lab}</text>')
    parts.append(f'<text x="{(L + width - R) / 2}" y="{height - 10}" text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="16" y="{(T + height - B) / 2}" transform="rotate(-90 16 {(T + height - B) / 2})" '
                 f'text-anchor="middle">{ylabel}</text>')
    for i, (name, (sx, sy)) in enumerate(series.items()):
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(sx, sy)
                          if math.isfinite(x) and math.isfinite(y) and (not logy or y > 0))
        color = _PALETTE[i % len(_PALETTE)]
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        parts.append(f'<text x="{width - R - 4}" y="{T + 14 * (i + 1)}" text-anchor="end" fill="{color}">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_plot(args, cfg: dict, out: Path) -> dict:
    sec = _section(cfg, "plot")
    path = args.csv or sec.get("csv")
    if not path:
        raise ConfigError("plot needs --csv")
    header, rows = read_csv(Path(path))
    xcol = args.x or sec.get("x", header[0])
    ycols = args.y or sec.get("y", header[1:2])
    group = args.group or sec.get("group")
    for c in [xcol, *ycols] + ([group] if group else []):
        if c not in header:
            raise ConfigError(f"column {c!r} not in {header}")
    ix = header.index(xcol)
    series: dict = {}

    def num(s):
        try:
            return float(s)
        except ValueError:
            return math.nan

    for yc in ycols:
        iy = header.index(yc)
        for r in rows:
            key = yc if not group else f"{yc} {group}={r[header.index(group)]}"
            xs, ys = series.setdefault(key, ([], []))
            xs.append(num(r[ix]))
            ys.append(num(r[iy]))
    svg = render_svg(series, xcol, ", ".join(ycols), logy=args.logy)
    target = out / (args.name or (Path(path).stem + ".svg"))
    _atomic_write(target, svg)
    return {"svg": str(target), "series": len(series)}


# ---------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", default="halfspec-out", help="output directory")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
    common.add_argument("--threads", type=int, default=1, help="worker threads for parameter sweeps")

    p = argparse.ArgumentParser(prog="halfspec", description=__doc__.splitlines()[0], parents=[common])
    p.add_argument("--version", action="version", version=f"halfspec {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="lattice or grid solve")
    s.add_argument("--kind", choices=["lattice", "grid"])
    s.add_argument("--max-level", dest="max_level")
    s.add_argument("--T", type=float)
    s.add_argument("--dt", type=float)

    s = sub.add_parser("burgers", parents=[common], help="Burgers blow-up analytics")
    s.add_argument("--a", type=float, action="append")
    s.add_argument("--N", type=int)

    s = sub.add_parser("weights", parents=[common], help="weight certificates and inequality suites")
    s.add_argument("--trials", type=int)

    s = sub.add_parser("cascade", parents=[common], help="heat-cascade comparison functions")
    for k in ("bl", "bu", "cl", "cu"):
        s.add_argument(f"--{k}")
    s.add_argument("--N", type=int)

    s = sub.add_parser("residual", parents=[common], help="stationary-solution residuals")
    s.add_argument("--name", choices=["kdv", "clm", "nls_star"])
    s.add_argument("--z")

    s = sub.add_parser("oracle", parents=[common], help="ODE and cosine-data checks")
    s.add_argument("--n", type=int)
    s.add_argument("--K", type=int)

    s = sub.add_parser("plot", parents=[common], help="SVG line chart from a CSV table")
    s.add_argument("--csv")
    s.add_argument("--x")
    s.add_argument("--y", action="append")
    s.add_argument("--group")
    s.add_argument("--logy", action="store_true")
    s.add_argument("--name")
    return p


COMMANDS = {
    "solve": cmd_solve,
    "burgers": cmd_burgers,
    "weights": cmd_weights,
    "cascade": cmd_cascade,
    "residual": cmd_residual,
    "oracle": cmd_oracle,
    "plot": cmd_plot,
}


def main(argv: Sequence[str] | None = None) -> int:
    from .solver import SolverError

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    out = Path(args.out)
    try:
        cfg = load_config(args.config)
        summary = COMMANDS[args.command](args, cfg, out)
    except ConfigError as exc:
        print(f"halfspec: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"halfspec: solver error: {exc}", file=sys.stderr)
        write_json(out / "error.json", {"error": str(exc), "info": exc.info})
        return EXIT_SOLVER
    except PropertyFailure as exc:
        print(f"halfspec: property check failed: {exc}", file=sys.stderr)
        write_json(out / "failures.json", {"error": str(exc), "report": exc.report})
        return EXIT_PROPERTY
    print(json.dumps(summary, sort_keys=True, default=_json_default))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
