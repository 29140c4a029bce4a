"""Computational companion to the Riemann-Hilbert picture of Painleve IV."""

from .rank2_moduli import ThetaParams

__version__ = "0.1.0"
__all__ = ["ThetaParams", "__version__"]
