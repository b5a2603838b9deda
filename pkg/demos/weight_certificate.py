"""Build a convolution weight certificate and test it on random measures."""
import numpy as np

from halfspec.monofun import Kappa, MonotoneFn
from halfspec.weights import WeightTriple, cmap2, convolution_suite, superlinearity_check

delta = 0.5
triple = WeightTriple(mu0=MonotoneFn([0.0, 1.0], [0.0, 0.3], 0.1),
                      nu0=MonotoneFn([0.0, 1.0], [0.0, 0.02], 0.01),
                      kappa=Kappa.from_points([0.0, 2.0], [1.0, 0.5]),
                      delta=delta)
cert = cmap2(triple, horizon=8.0)
print(f"l0 = {cert.l0:.4f}, horizon = {cert.horizon:.2f}, {len(cert.anchors)} recursion anchors")
print(f"requested horizon 8, materialized {cert.horizon:.2f}: {cert.truncated}")
for l in np.linspace(cert.horizon / 8, cert.horizon, 5):
    print(f"  l = {l:4.2f}: mu1 = {float(cert.mu1(l)):.4g}, nu1 = {float(cert.nu1(l)):.4g}")

report = cert.verify()
print(f"\nconditions on 200 levels: all pass = {report.all_pass}")
suite = convolution_suite(cert, 500, np.random.default_rng(1))
print(f"convolution inequality on 500 random pairs: {len(suite['violations'])} violations")
for b in (2.0, 5.0, 10.0):
    r = superlinearity_check(triple, b, 8.0)
    print(f"superlinearity with b = {b:4.1f}: ok = {r['ok']}, worst ratio {r['worst_ratio']:.4f}")
