"""Green's function of -Delta - alpha with a pole at the origin.

The solver subtracts the free-space logarithmic singularity
s(x) = -(1/(2 pi)) log|x| and computes the regular remainder w from

    -Delta w - alpha w = alpha s   in Omega,      w = -s on the boundary,

so that G = s + w satisfies -Delta G - alpha G = delta_0 with G = 0 on the
boundary.  The constant A0 = w(0) is the regular value at the pole.  In
constrained mode the right-hand side carries eigenfunction sinks
-sum_i psi_i(0) psi_i, and the computed G is projected in L2 so the discrete
orthogonality int G psi_i dx = 0 holds to quadrature precision.

All integrals of the log singularity against P1 basis functions are done in
closed form radially on the origin triangles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import (
    Mesh,
    SingularQuadrature,
    element_gradients,
    interpolator,
    origin_triangles,
    polar_rays,
    quadrature_tables,
    radial_log_moment,
)
from .spectral import Field, eigenpairs, operators

__all__ = [
    "ResonanceError",
    "GreenFunction",
    "solve_green",
    "a0",
    "weighted_g_squared",
    "log_singularity_load",
]

_A = -1.0 / (2.0 * math.pi)  # coefficient of log r in the singular part


class ResonanceError(ValueError):
    """alpha coincides (numerically) with a Dirichlet eigenvalue."""


@dataclass(eq=False)
class GreenFunction:
    """G = s + w with s the explicit log singularity and w a P1 field.

    ``sinks`` holds the (psi_i(0), psi_i) pairs of constrained mode; empty
    for the plain Green's function.
    """

    mesh: Mesh
    alpha: float
    w: np.ndarray  # full nodal values of the regular part
    A0: float
    sinks: list[tuple[float, Field]] = field(default_factory=list)

    @staticmethod
    def singular_part(points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        r = np.hypot(points[:, 0], points[:, 1])
        with np.errstate(divide="ignore"):
            return _A * np.log(r)

    def regular_part(self, points: np.ndarray) -> np.ndarray:
        return interpolator(self.mesh)(self.w, points)

    def value(self, points: np.ndarray) -> np.ndarray:
        """G at points away from the pole (+inf exactly at the origin)."""
        return self.singular_part(points) + self.regular_part(points)

    def nodal_values(self) -> np.ndarray:
        """G at mesh nodes; the origin entry is +inf."""
        return self.singular_part(self.mesh.nodes) + self.w


def log_singularity_load(mesh: Mesh, depth: int = 2) -> np.ndarray:
    """Full nodal load L_i = int_Omega s(x) phi_i(x) dx, s = -(log|x|)/(2 pi).

    Exact radial integration on origin triangles; subdivided quadrature
    elsewhere (the integrand is smooth away from the origin).
    """
    cache_key = ("log_load", depth)
    from .geometry import _mesh_cache

    cache = _mesh_cache(mesh)
    if cache_key in cache:
        return cache[cache_key]

    quad = SingularQuadrature(beta=0.0, depth=depth)
    tab = quadrature_tables(mesh, quad)
    off = ~tab.origin_mask
    r = np.hypot(tab.xy[off, 0], tab.xy[off, 1])
    vals = np.zeros(len(tab.w))
    vals[off] = _A * np.log(r)
    L = tab.load(vals)  # origin points contribute zero; add them exactly below

    grads = element_gradients(mesh)
    n_theta = 8 * depth
    for t in origin_triangles(mesh):
        wt, dirs, rho = polar_rays(mesh, int(t), n_theta)
        m2 = radial_log_moment(rho, 2.0, 1)  # int r log r dr
        m3 = radial_log_moment(rho, 3.0, 1)  # int r^2 log r dr
        tri = mesh.triangles[t]
        for slot in range(3):
            base = 1.0 if tri[slot] == 0 else 0.0
            gu = dirs @ grads[t, slot]
            L[tri[slot]] += _A * float(wt @ (base * m2 + gu * m3))
    cache[cache_key] = L
    return L


def _resonance_guard(mesh: Mesh, alpha: float) -> None:
    if alpha <= 0.0:
        return
    count = min(16, mesh.n_interior - 1)
    sd = eigenpairs(mesh, count)
    lams = sd.eigenvalues
    if alpha > lams[-1] * 0.9:
        raise ResonanceError(
            "alpha too large for the resonance guard's computed spectrum"
        )
    if np.min(np.abs(lams - alpha)) < 1e-8 * max(1.0, alpha):
        raise ResonanceError("alpha collides with a Dirichlet eigenvalue")


def solve_green(
    mesh: Mesh, alpha: float, basis: Sequence[Field] | None = None
) -> GreenFunction:
    """Solve for the (possibly constrained) Green's function with pole at 0."""
    _resonance_guard(mesh, alpha)
    ops = operators(mesh)
    bnd = np.flatnonzero(mesh.boundary)
    rb = np.hypot(mesh.nodes[bnd, 0], mesh.nodes[bnd, 1])
    gb = (1.0 / (2.0 * math.pi)) * np.log(rb)  # w = -s on the boundary

    L = log_singularity_load(mesh)
    rhs = alpha * L[mesh.interior]
    A_full = (ops.K_full - alpha * ops.M_full).tocsr()
    rhs -= A_full[np.ix_(mesh.interior, bnd)] @ gb
    sinks: list[tuple[float, Field]] = []
    if basis:
        for psi in basis:
            p0 = float(psi.values[mesh.dof_of_node[0]])
            sinks.append((p0, psi))
            rhs -= p0 * (ops.M @ psi.values)

    w_full = np.zeros(mesh.n_nodes)
    w_full[mesh.interior] = ops.solve(alpha, rhs)
    w_full[bnd] = gb

    if basis:
        # enforce the discrete orthogonality int G psi_i = 0 exactly
        mw = ops.M_full @ w_full
        for psi in basis:
            d = float(L[mesh.interior] @ psi.values) + float(
                mw[mesh.interior] @ psi.values
            )
            w_full[mesh.interior] -= d * psi.values
        # boundary values untouched: psi vanishes there

    return GreenFunction(
        mesh=mesh, alpha=alpha, w=w_full, A0=float(w_full[0]), sinks=sinks
    )


def a0(g: GreenFunction) -> float:
    """Regular value of G at the pole."""
    return g.A0


def orthogonality_residuals(g: GreenFunction) -> np.ndarray:
    """int G psi_i dx for the sink eigenfunctions (should vanish)."""
    L = log_singularity_load(g.mesh)
    ops = operators(g.mesh)
    mw = ops.M_full @ g.w
    out = []
    for _, psi in g.sinks:
        out.append(
            float(L[g.mesh.interior] @ psi.values)
            + float(mw[g.mesh.interior] @ psi.values)
        )
    return np.asarray(out)


def weighted_g_squared(
    g: GreenFunction, beta: float, quad: SingularQuadrature | None = None
) -> float:
    """int_Omega |x|^(-2 beta) G(x)^2 dx, finite for beta < 1.

    The log^2 singularity on origin triangles is integrated in closed form
    radially; elsewhere G^2 is evaluated at quadrature points.
    """
    mesh = g.mesh
    if quad is None:
        quad = SingularQuadrature(beta=beta)
    tab = quadrature_tables(mesh, quad)
    off = ~tab.origin_mask
    r = np.hypot(tab.xy[off, 0], tab.xy[off, 1])
    w_pts = np.einsum("qk,qk->q", g.w[tab.tri_nodes[off]], tab.bary[off])
    vals = (_A * np.log(r) + w_pts) ** 2
    total = float(tab.w[off] @ vals)

    grads = element_gradients(mesh)
    w0 = g.w[0]
    n_theta = 8 * quad.depth
    p0 = 2.0 - 2.0 * beta
    for t in origin_triangles(mesh):
        wt, dirs, rho = polar_rays(mesh, int(t), n_theta)
        gt = np.einsum("k,kd->d", g.w[mesh.triangles[t]], grads[t])
        gu = dirs @ gt
        integ = (
            _A**2 * radial_log_moment(rho, p0, 2)
            + 2.0 * _A * w0 * radial_log_moment(rho, p0, 1)
            + 2.0 * _A * gu * radial_log_moment(rho, p0 + 1.0, 1)
            + w0**2 * radial_log_moment(rho, p0, 0)
            + 2.0 * w0 * gu * radial_log_moment(rho, p0 + 1.0, 0)
            + gu**2 * radial_log_moment(rho, p0 + 2.0, 0)
        )
        total += float(wt @ integ)
    return total
