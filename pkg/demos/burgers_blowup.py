"""Blow-up of Burgers' equation with data a e^{ix}.

Computes the polynomials U_n, certifies the sandwich bounds, estimates the
divergence threshold a_*(t) and compares the series blow-up time with the
first real zero of the Cole-Hopf heat solution.
"""
import math
from fractions import Fraction

import numpy as np

from halfspec.casebook import (burgers_astar, burgers_astarstar, burgers_sandwich, burgers_tstar, burgers_un,
                               colehopf_first_zero)

U = burgers_un(60)
print("U_1..U_4 in q = e^{-2t}:")
for n in range(4):
    print(f"  U_{n + 1} = {U[n]}")

rep = burgers_sandwich(U, [Fraction(k, 10) for k in range(1, 31)])
print(f"\nsandwich (1-q)^(n-1) <= U_n <= 1: {rep['checked']} checks, ok = {rep['ok']}")

print("\n   t     e^t      a_*(t)   e^t/(1-e^-2t)")
for t in np.linspace(0.3, 3.0, 6):
    r = burgers_astar(float(t), 60, U)
    lo, hi = r["bracket"]
    print(f"  {t:4.2f}  {lo:8.4f}  {r['estimate']:8.4f}  {hi:8.4f}")
print(f"\nsmallest threshold a_** ~ {burgers_astarstar(N=60, U=U)['estimate']:.4f}")

print("\n   a    T_* (series)   T (Cole-Hopf)   log a")
for a in (3, 5, 10):
    ts = burgers_tstar(a, 60, U)["estimate"]
    ch = colehopf_first_zero(a)["T"]
    print(f"  {a:3d}   {ts:.8f}     {ch:.8f}     {math.log(a):.4f}")
