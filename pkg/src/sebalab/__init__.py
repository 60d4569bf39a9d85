"""Numerical laboratory for the arithmetic Seba billiard on the square torus.

Five layers, one per concern: integer arithmetic of sums of two squares
(`arithmetic`), secular-equation spectra in weak and strong coupling
(`spectrum`), spectral-zeta moment profiles and fractal-exponent estimators
(`multifractal`), Epstein zeta functions of rectangular forms with analytic
continuation (`epstein`), and a command line front end (`cli`).
"""

from .arithmetic import ArithmeticTable, build_table
from .epstein import RectangularForm
from .multifractal import (ExponentReport, FilterConfig, MomentProfile,
                           density_filter, exponent_chain, fractal_estimates,
                           mean_tail, moment_profile, tail_tau, zeta_lambda)
from .spectrum import CouplingConfig, CutoffPolicy, SebaSpectrum, solve_range

__version__ = "0.1.0"

__all__ = [
    "ArithmeticTable",
    "CouplingConfig",
    "CutoffPolicy",
    "ExponentReport",
    "FilterConfig",
    "MomentProfile",
    "RectangularForm",
    "SebaSpectrum",
    "build_table",
    "density_filter",
    "exponent_chain",
    "fractal_estimates",
    "mean_tail",
    "moment_profile",
    "solve_range",
    "tail_tau",
    "zeta_lambda",
    "__version__",
]
