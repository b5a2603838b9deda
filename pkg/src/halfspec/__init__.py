"""Fourier-side solvers, weight certificates and blow-up analytics for
analytic evolution equations whose data have half-space frequency support."""

__version__ = "0.1.0"

from .exppoly import ExpPoly, duhamel
from .monofun import MonotoneFn, Kappa, mchi, default_cutoff
from .spectral import FreqPoint, AtomicSpectrum, SupportSpec, ExpDensity
from .equations import builtin, equation_from_config
from .solver import solve_lattice, solve_grid, picard_sequence

__all__ = [
    "__version__",
    "ExpPoly",
    "duhamel",
    "MonotoneFn",
    "Kappa",
    "mchi",
    "default_cutoff",
    "FreqPoint",
    "AtomicSpectrum",
    "SupportSpec",
    "ExpDensity",
    "builtin",
    "equation_from_config",
    "solve_lattice",
    "solve_grid",
    "picard_sequence",
]
