"""Exact Gerstenhaber and BV calculus on exterior algebras."""

from .exterior import ExteriorSpace, Multivector, wedge
from .poly import QQ, Poly, PolynomialRing

__all__ = ["ExteriorSpace", "Multivector", "wedge", "QQ", "Poly", "PolynomialRing"]
