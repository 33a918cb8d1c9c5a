"""Closed forms for the limiting concentration profile.

The rescaled limit of blow-up sequences is the radial profile

    phi0(r) = -(1/(4 pi (1-beta))) log(1 + a r^(2-2 beta)),   a = pi/(1-beta),

which solves the singular Liouville equation.  This module collects its
weighted exponential mass, its truncated Dirichlet energy, the large-radius
energy expansion, and the total mass of the explicit entire Liouville
solution -- all as explicit formulas, used as references by the mesh-based
machinery elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BubbleProfile",
    "phi0",
    "bubble_mass",
    "bubble_energy",
    "bubble_energy_asymptotic",
    "liouville_mass",
    "liouville_solution",
]


def _check_beta(beta: float) -> None:
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")


def phi0(r, beta: float):
    """Profile value at radius r >= 0; vectorized, phi0(0) = 0."""
    _check_beta(beta)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be nonnegative")
    a = math.pi / (1.0 - beta)
    out = -np.log1p(a * r ** (2.0 - 2.0 * beta)) / (4.0 * math.pi * (1.0 - beta))
    return out if out.ndim else float(out)


def bubble_mass(R: float, beta: float) -> float:
    """int_{B_R} |y|^(-2b) e^(8 pi (1-b) phi0) dy = 1 - 1/(1 + a R^(2-2b)).

    R may be inf, giving total mass exactly 1.
    """
    _check_beta(beta)
    if R < 0:
        raise ValueError("radius must be nonnegative")
    if math.isinf(R):
        return 1.0
    t = (math.pi / (1.0 - beta)) * R ** (2.0 - 2.0 * beta)
    return t / (1.0 + t)


def bubble_energy(R: float, beta: float) -> float:
    """Dirichlet energy of phi0 over B_R, in closed form."""
    _check_beta(beta)
    if not R > 0:
        raise ValueError("radius must be positive")
    t = (math.pi / (1.0 - beta)) * R ** (2.0 - 2.0 * beta)
    return (math.log1p(t) - t / (1.0 + t)) / (4.0 * math.pi * (1.0 - beta))


def bubble_energy_asymptotic(R: float, beta: float) -> float:
    """Large-R expansion of bubble_energy, dropping the O(R^-(2-2b)) tail:

    (1/(2 pi)) log R + (1/(4 pi (1-b))) log(pi/(1-b)) - 1/(4 pi (1-b)).
    """
    _check_beta(beta)
    c = 1.0 / (4.0 * math.pi * (1.0 - beta))
    return math.log(R) / (2.0 * math.pi) + c * math.log(math.pi / (1.0 - beta)) - c


def liouville_mass(beta: float) -> float:
    """Total mass int_R2 e^(8 pi (1-b) v) dx of the entire Liouville solution.

    Equals 1/(1-beta), strictly greater than 1 for every beta in (0, 1) --
    the scalar fact behind ruling out the slow-concentration case.
    """
    _check_beta(beta)
    return 1.0 / (1.0 - beta)


def liouville_solution(x, beta: float, mu: float = 1.0):
    """The explicit entire solution v of -Delta v = e^(8 pi (1-b) v).

    v(x) = (1/(8 pi (1-b))) log( 8 mu^2 / (8 pi (1-b) (1 + mu^2 |x|^2)^2) ).
    Accepts an (n, 2) point array or a radius array.
    """
    _check_beta(beta)
    x = np.asarray(x, dtype=float)
    r2 = (x**2).sum(axis=-1) if x.ndim > 1 else x**2
    c = 8.0 * math.pi * (1.0 - beta)
    return np.log(8.0 * mu**2 / (c * (1.0 + mu**2 * r2) ** 2)) / c


@dataclass(frozen=True)
class BubbleProfile:
    """The limit profile for one beta; carries a = pi/(1-beta) > pi * beta>0."""

    beta: float
    a: float = field(init=False)

    def __post_init__(self):
        _check_beta(self.beta)
        object.__setattr__(self, "a", math.pi / (1.0 - self.beta))

    def value(self, r):
        return phi0(r, self.beta)

    def mass(self, R: float) -> float:
        return bubble_mass(R, self.beta)

    def energy(self, R: float) -> float:
        return bubble_energy(R, self.beta)
