"""Exact finite-precision arithmetic for mixed-characteristic binomial rings,
Iwasawa algebras and h-analytic distribution algebras."""

from mixchar.kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
