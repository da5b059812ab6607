"""Euler-Maclaurin regularization of divergent electromagnetic mode sums.

Submodules
----------
special_fn
    Bernoulli numbers, periodic Bernoulli functions, zeta values and the
    small-argument series of ``Y1 - H1``.
calculus
    Adaptive Gauss-Kronrod quadrature and high-order differentiation.
em_core
    The Euler-Maclaurin engine: ``S_m``, ``Gamma``, shifted ``Gamma`` and the
    remainder bound ``epsilon``.
spectra
    Spectra, mode functions and normalization constants for the cuboid
    cavity and the sech^2 (ENZ) waveguide.
summands
    Regulated summand families for energy and stress.
extractor
    Laurent-log fitting and extraction of the finite part ``beta``.
dos
    Mode counting and density of states.
cli
    Command line front end.
"""

__version__ = "0.1.0"

__all__ = [
    "special_fn",
    "calculus",
    "em_core",
    "spectra",
    "summands",
    "extractor",
    "dos",
]
