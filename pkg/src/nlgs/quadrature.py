"""Gauss-Legendre rules on the reference interval [-1, 1].

Default orders used across the solver: 4 points for operator assembly,
3 points for the cubic reaction load (exact for the degree-4 integrand),
5 points for error norms, 8 points per panel for strong-form kernel
applications.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray   # abscissas in [-1, 1]
    weights: np.ndarray  # positive, sum to 2
    order: int           # highest polynomial degree integrated exactly


def gauss_legendre(n: int) -> QuadratureRule:
    if n < 1:
        raise ValueError("need at least one quadrature point")
    pts, wts = np.polynomial.legendre.leggauss(n)
    return QuadratureRule(points=pts, weights=wts, order=2 * n - 1)


ASSEMBLY_RULE = gauss_legendre(4)
REACTION_RULE = gauss_legendre(3)
ERROR_RULE = gauss_legendre(5)
STRONG_FORM_RULE = gauss_legendre(8)
