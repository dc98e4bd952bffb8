"""Numerical experiments on singular values of operator differences ``f(A) - f(B)``.

The package builds moduli of continuity and their transforms, the
Littlewood-Paley splitting of trigonometric polynomials, functional calculus
for several operator classes, randomized bound harnesses and explicit
extremal constructions.
"""

from .modulus import Modulus, omega_sharp, omega_star, lambda_seminorm
from .trig import TrigPolynomial, periodize_line, sup_norm

__version__ = "0.1.0"

__all__ = [
    "Modulus",
    "omega_star",
    "omega_sharp",
    "lambda_seminorm",
    "TrigPolynomial",
    "periodize_line",
    "sup_norm",
    "__version__",
]
