"""Exact solutions for point-mass data.

Solves the quadratic ODE and viscous Burgers with a single atom, prints the
first few coefficients as exponential polynomials, then runs the residual
check on a two-dimensional Navier-Stokes example.
"""
from fractions import Fraction

from halfspec import AtomicSpectrum, FreqPoint, builtin, solve_lattice
from halfspec.exact import I

sym, H = builtin("ode_square")
sol = solve_lattice(sym, H, AtomicSpectrum({FreqPoint(1): (Fraction(2),)}), 6)
print("u' = u^2 with u0 = 2 delta_1")
for xi, (u,) in sol.spectrum.items():
    print(f"  xi = {xi.coords[0]}: {u}")

sym, H = builtin("burgers")
sol = solve_lattice(sym, H, AtomicSpectrum({FreqPoint(1): (-3 * I,)}), 4)
print("\nBurgers with u0 = -3i delta_1")
for xi, (u,) in sol.spectrum.items():
    print(f"  xi = {xi.coords[0]}: {u}")
    print(f"     value at t = 1: {complex(u.eval(1.0)):.6g}")

sym, H = builtin("ns_incompressible")
u0 = AtomicSpectrum({FreqPoint(1, 1): (Fraction(1), Fraction(-1)),
                     FreqPoint(Fraction(1, 2), -1): (Fraction(2), Fraction(1))}, ncomp=2)
sol = solve_lattice(sym, H, u0, 3)
print(f"\nNavier-Stokes, two atoms: {len(sol.spectrum)} atoms up to level 3, residual {sol.residual}")
