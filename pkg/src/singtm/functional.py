"""The singular Trudinger-Moser functional and its discrete Euler-Lagrange data.

For parameters p = (beta, alpha, eps) the functional is

    TM(u) = int_Omega |x|^(-2 beta) exp(gamma u^2) dx,   gamma = 4 pi (1 - beta - eps),

evaluated on P1 fields by interpolating u at the singular quadrature points and
exponentiating there.  With that convention the discrete gradient of TM is the
consistent weighted load (no mass lumping), so the ascent direction below is
the exact (1, alpha)-Riesz representative of the functional's derivative.

Exponents above ``OVERFLOW_CAP`` are capped and flagged instead of producing
infinities; callers treat a flagged evaluation as blow-up territory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .geometry import SingularQuadrature, quadrature_tables
from .spectral import Field, operators, project_perp

__all__ = [
    "TMParams",
    "TMEvaluation",
    "OVERFLOW_CAP",
    "tm_value",
    "tm_value_ex",
    "lambda_eps",
    "nonlinear_system",
    "ascent_direction",
    "el_residual",
]

OVERFLOW_CAP = 700.0


@dataclass(frozen=True)
class TMParams:
    """Functional parameters: singularity beta, spectral shift alpha,
    subcriticality eps, and the exponent coefficient gamma.

    gamma defaults to 4 pi (1 - beta - eps); pass it explicitly to evaluate
    at the critical growth 4 pi (1 - beta) regardless of eps.
    """

    beta: float
    alpha: float = 0.0
    eps: float = 0.0
    gamma: float | None = None

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if self.eps < 0.0 or self.eps >= 1.0 - self.beta:
            raise ValueError("eps must lie in [0, 1 - beta)")
        if self.gamma is None:
            object.__setattr__(
                self, "gamma", 4.0 * math.pi * (1.0 - self.beta - self.eps)
            )

    def with_eps(self, eps: float) -> "TMParams":
        return replace(self, eps=eps, gamma=None)

    def quadrature(self) -> SingularQuadrature:
        return SingularQuadrature(beta=self.beta)


@dataclass(frozen=True)
class TMEvaluation:
    value: float
    overflow: bool


def _point_values(u: Field, quad: SingularQuadrature):
    tab = quadrature_tables(u.mesh, quad)
    return tab, tab.values(u.full())


def _capped_exp(gamma: float, v: np.ndarray) -> tuple[np.ndarray, bool]:
    expo = gamma * v * v
    overflow = bool(np.any(expo > OVERFLOW_CAP))
    if overflow:
        expo = np.minimum(expo, OVERFLOW_CAP)
    return np.exp(expo), overflow


def tm_value_ex(u: Field, p: TMParams) -> TMEvaluation:
    """Functional value together with the overflow flag."""
    tab, v = _point_values(u, p.quadrature())
    e, flagged = _capped_exp(p.gamma, v)
    # capped point values can still overflow the weighted sum; the flag
    # already marks the evaluation as saturated, so keep the sum quiet
    with np.errstate(over="ignore"):
        return TMEvaluation(value=tab.integrate(e), overflow=flagged)


def tm_value(u: Field, p: TMParams) -> float:
    return tm_value_ex(u, p).value


def lambda_eps(u: Field, p: TMParams) -> float:
    """Euler-Lagrange normalization int |x|^(-2b) u^2 exp(gamma u^2) dx."""
    tab, v = _point_values(u, p.quadrature())
    e, _ = _capped_exp(p.gamma, v)
    with np.errstate(over="ignore"):
        return tab.integrate(v * v * e)


def nonlinear_system(
    u: Field, p: TMParams, basis: Sequence[Field] | None = None
):
    """One evaluation of the nonlinear data driving the discrete EL system.

    Returns (lam, load, gammas, overflow): lam is lambda_eps(u), load the
    interior vector of int |x|^(-2b) u e^(gamma u^2) phi_i dx, gammas the
    eigenfunction multipliers psi_i' load used in subspace mode.
    """
    tab, v = _point_values(u, p.quadrature())
    e, flagged = _capped_exp(p.gamma, v)
    with np.errstate(over="ignore"):
        ue = v * e
        lam = tab.integrate(v * ue)
        load_full = tab.load(ue)
    load = load_full[u.mesh.interior]
    gammas = (
        np.array([float(psi.values @ load) for psi in basis])
        if basis is not None
        else np.zeros(0)
    )
    return lam, load, gammas, flagged


def ascent_direction(
    u: Field, p: TMParams, basis: Sequence[Field] | None = None
) -> Field:
    """(1, alpha)-Riesz representative of the functional derivative at u.

    Solves (K - alpha M) d = load(u) / lambda_eps(u); at a solution of the
    discrete EL system d equals u.  In subspace mode the result is projected
    L2-orthogonal to the basis, which reproduces the multiplier form of the
    projected EL equation exactly.
    """
    lam, load, _, _ = nonlinear_system(u, p, basis=None)
    if lam == 0.0:
        return Field(u.mesh, np.zeros_like(u.values))
    ops = operators(u.mesh)
    d = Field(u.mesh, ops.solve(p.alpha, load / lam))
    if basis:
        d = project_perp(d, basis)
    return d


def el_residual(
    u: Field, p: TMParams, basis: Sequence[Field] | None = None
) -> float:
    """Dual-norm residual of the discrete Euler-Lagrange system at u.

    r = (K - alpha M) u - load(u)/lambda + sum_i (gamma_i/lambda) M psi_i,
    measured in the norm induced by (K - alpha M)^{-1}.  With the
    eigenfunction multipliers gamma_i = psi_i' load the residual is
    automatically orthogonal to the constraint space, so the dual solve is
    well defined also when alpha exceeds constrained eigenvalues.
    """
    lam, load, gammas, _ = nonlinear_system(u, p, basis)
    ops = operators(u.mesh)
    r = ops.shifted(p.alpha) @ u.values
    if lam > 0.0:
        r -= load / lam
        if basis:
            for g, psi in zip(gammas, basis):
                r += (g / lam) * (ops.M @ psi.values)
    z = ops.solve(p.alpha, r)
    q = float(r @ z)
    return math.sqrt(max(q, 0.0))
