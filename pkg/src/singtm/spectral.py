"""P1 finite element operators, Dirichlet eigenpairs, and the (1, alpha) norm.

Stiffness and mass matrices are assembled once per mesh and cached; fields are
vectors of interior nodal values (homogeneous Dirichlet data).  The quadratic
form behind most of the toolkit is

    ||u||_{1,alpha}^2 = u' K u - alpha u' M u,

a norm on the interior space exactly when alpha < lambda_1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .geometry import Mesh, _mesh_cache, element_areas, element_gradients

__all__ = [
    "Field",
    "Operators",
    "SpectralData",
    "assemble",
    "operators",
    "eigenpairs",
    "norm_1alpha",
    "project_perp",
    "l2_inner",
    "eigen_report_csv",
]


@dataclass(eq=False)
class Field:
    """Interior nodal coefficients of a P1 function vanishing on the boundary."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.n_interior,):
            raise ValueError("field length must match interior node count")

    def full(self) -> np.ndarray:
        """Values on all mesh nodes (zero on the boundary)."""
        return self.mesh.full_vector(self.values)

    def copy(self) -> "Field":
        return Field(self.mesh, self.values.copy())

    def __add__(self, other: "Field") -> "Field":
        return Field(self.mesh, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        return Field(self.mesh, self.values - other.values)

    def __mul__(self, a: float) -> "Field":
        return Field(self.mesh, self.values * a)

    __rmul__ = __mul__


@dataclass(eq=False)
class Operators:
    """Assembled sparse operators for one mesh, plus cached factorizations."""

    mesh: Mesh
    K_full: sp.csr_matrix
    M_full: sp.csr_matrix
    K: sp.csr_matrix
    M: sp.csr_matrix
    _factors: dict = field(default_factory=dict)

    def shifted(self, alpha: float) -> sp.csc_matrix:
        return (self.K - alpha * self.M).tocsc()

    def factor(self, alpha: float):
        """LU factorization of K - alpha M on interior nodes (cached)."""
        key = float(alpha)
        if key not in self._factors:
            self._factors[key] = spla.splu(self.shifted(alpha))
        return self._factors[key]

    def solve(self, alpha: float, rhs: np.ndarray) -> np.ndarray:
        return self.factor(alpha).solve(rhs)


def assemble(mesh: Mesh) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Stiffness and consistent mass matrices on interior nodes."""
    ops = operators(mesh)
    return ops.K, ops.M


def operators(mesh: Mesh) -> Operators:
    cache = _mesh_cache(mesh)
    if "operators" not in cache:
        cache["operators"] = _assemble_full(mesh)
    return cache["operators"]


def _assemble_full(mesh: Mesh) -> Operators:
    tris = mesh.triangles
    a = element_areas(mesh)
    g = element_gradients(mesh)

    k_loc = np.einsum("tid,tjd->tij", g, g) * a[:, None, None]
    m_ref = (np.ones((3, 3)) + np.eye(3)) / 12.0
    m_loc = a[:, None, None] * m_ref[None, :, :]

    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    n = mesh.n_nodes
    K_full = sp.coo_matrix((k_loc.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    M_full = sp.coo_matrix((m_loc.ravel(), (rows, cols)), shape=(n, n)).tocsr()

    idx = mesh.interior
    K = K_full[np.ix_(idx, idx)].tocsr()
    M = M_full[np.ix_(idx, idx)].tocsr()
    return Operators(mesh=mesh, K_full=K_full, M_full=M_full, K=K, M=M)


@dataclass(eq=False)
class SpectralData:
    """Sorted Dirichlet eigenvalues with M-orthonormal eigenfunctions.

    ``groups`` collects indices of numerically equal eigenvalues (relative
    gap below 1e-6), so groups[j] spans the j-th distinct eigenspace.
    """

    mesh: Mesh
    eigenvalues: np.ndarray
    fields: list[Field]
    residuals: np.ndarray
    groups: list[list[int]]

    def distinct(self) -> np.ndarray:
        """One representative eigenvalue per multiplicity group."""
        return np.array([self.eigenvalues[g[0]] for g in self.groups])

    def basis_of_first_groups(self, ell: int) -> list[Field]:
        """Eigenfunctions spanning the first ``ell`` distinct eigenspaces."""
        if ell > len(self.groups):
            raise ValueError("not enough computed groups")
        out: list[Field] = []
        for g in self.groups[:ell]:
            out.extend(self.fields[i] for i in g)
        return out

    def first_field_above(self, ell: int) -> Field:
        """First eigenfunction strictly above the ell-th distinct eigenvalue."""
        if ell >= len(self.groups):
            raise ValueError("not enough computed groups")
        return self.fields[self.groups[ell][0]]


_RESIDUAL_TOL = 1e-8
_GROUP_RTOL = 1e-6


def eigenpairs(mesh: Mesh, count: int) -> SpectralData:
    """Smallest ``count`` Dirichlet eigenpairs by shift-invert Lanczos.

    Eigenvectors come back M-orthonormal with deterministic signs; the
    residual ||K psi - lambda M psi|| must not exceed 1e-8 ||psi||.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    cache = _mesh_cache(mesh).setdefault("eigs", {})
    if count in cache:
        return cache[count]
    ops = operators(mesh)
    n = ops.K.shape[0]
    if count >= n:
        raise ValueError("count must be below the interior dimension")
    v0 = np.ones(n) / math.sqrt(n)
    vals, vecs = spla.eigsh(ops.K, k=count, M=ops.M, sigma=0.0, which="LM", v0=v0)
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]

    for j in range(count):
        i = int(np.argmax(np.abs(vecs[:, j])))
        if vecs[i, j] < 0:
            vecs[:, j] = -vecs[:, j]

    res = np.array(
        [
            np.linalg.norm(ops.K @ vecs[:, j] - vals[j] * (ops.M @ vecs[:, j]))
            / np.linalg.norm(vecs[:, j])
            for j in range(count)
        ]
    )
    if np.any(res > _RESIDUAL_TOL):
        raise RuntimeError(f"eigen residual {res.max():.2e} exceeds {_RESIDUAL_TOL}")

    groups: list[list[int]] = [[0]]
    for j in range(1, count):
        if vals[j] - vals[j - 1] <= _GROUP_RTOL * max(1.0, abs(vals[j])):
            groups[-1].append(j)
        else:
            groups.append([j])

    sd = SpectralData(
        mesh=mesh,
        eigenvalues=vals,
        fields=[Field(mesh, vecs[:, j].copy()) for j in range(count)],
        residuals=res,
        groups=groups,
    )
    cache[count] = sd
    return sd


def norm_1alpha(u: Field, alpha: float) -> float:
    """sqrt(u' K u - alpha u' M u); raises if the radicand is negative."""
    ops = operators(u.mesh)
    v = u.values
    ku = float(v @ (ops.K @ v))
    q = ku - alpha * float(v @ (ops.M @ v))
    if q < -1e-12 * max(ku, 1.0):
        raise ValueError(
            "negative (1,alpha) radicand: alpha is not below the first eigenvalue "
            "on this subspace"
        )
    return math.sqrt(max(q, 0.0))


def l2_inner(u: Field, v: Field) -> float:
    ops = operators(u.mesh)
    return float(u.values @ (ops.M @ v.values))


def project_perp(u: Field, basis: Sequence[Field]) -> Field:
    """Remove the L2 components of ``u`` along the given (orthonormal) fields."""
    ops = operators(u.mesh)
    mu = ops.M @ u.values
    out = u.values.copy()
    for psi in basis:
        out -= float(psi.values @ mu) * psi.values
    return Field(u.mesh, out)


def eigen_report_csv(sd: SpectralData) -> str:
    """CSV rows: index, eigenvalue, multiplicity group, residual."""
    lines = ["index,eigenvalue,group,residual"]
    for j, lam in enumerate(sd.eigenvalues):
        grp = next(i for i, g in enumerate(sd.groups) if j in g)
        lines.append(f"{j},{lam:.17g},{grp},{sd.residuals[j]:.17g}")
    return "\n".join(lines) + "\n"
