"""Triangle meshes on planar domains and quadrature for |x|^(-2*beta) weights.

Domains are disks centered at the origin or simple polygons containing the
origin strictly in their interior.  The origin is special throughout: it is
always mesh node 0, and the weight |x|^(-2*beta) is integrated exactly in the
radial direction on the triangles incident to it.

Disk meshes are built from concentric rings (ring k carries 6k nodes), which
keeps near-radial symmetry and puts every boundary node exactly on the circle.
Polygon meshes combine boundary subdivision with a triangular interior lattice
and a Delaunay triangulation.

Quadrature away from the origin uses symmetric triangle rules (Dunavant);
triangles touching the origin are integrated in polar coordinates with a
Gauss-Jacobi rule in r (weight r^(1-2*beta), exact for polynomial radial
profiles) and Gauss-Legendre in the angle.
"""

from __future__ import annotations

import io
import math
import weakref
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.spatial import Delaunay, cKDTree
from scipy.special import roots_jacobi

__all__ = [
    "DomainSpec",
    "Mesh",
    "SingularQuadrature",
    "QuadTables",
    "build_mesh",
    "quadrature_tables",
    "integrate_singular",
    "weighted_load",
    "origin_triangles",
    "polar_rays",
    "radial_log_moment",
    "element_areas",
    "element_gradients",
    "P1Interpolator",
    "save_mesh",
    "load_mesh",
    "save_field_values",
    "load_field_values",
]


# ---------------------------------------------------------------------------
# domain specification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DomainSpec:
    """A planar domain containing the origin.

    Either a disk of given ``radius`` centered at the origin, or a simple
    polygon given by its vertices in counterclockwise order.  The origin must
    lie strictly inside the domain.
    """

    kind: str
    radius: float | None = None
    vertices: tuple[tuple[float, float], ...] | None = None

    @staticmethod
    def disk(radius: float) -> "DomainSpec":
        if not radius > 0:
            raise ValueError("disk radius must be positive")
        return DomainSpec(kind="disk", radius=float(radius))

    @staticmethod
    def polygon(vertices: Iterable[Sequence[float]]) -> "DomainSpec":
        verts = tuple((float(x), float(y)) for x, y in vertices)
        if len(verts) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        poly = _shapely_polygon(verts)
        from shapely.geometry import Point

        if not poly.contains(Point(0.0, 0.0)):
            raise ValueError("polygon must contain the origin strictly inside")
        return DomainSpec(kind="polygon", vertices=verts)

    @staticmethod
    def regular_polygon(n: int, radius: float = 1.0,
                        center: Sequence[float] = (0.0, 0.0)) -> "DomainSpec":
        """Regular n-gon, handy for approximating off-center disks."""
        ang = 2.0 * np.pi * np.arange(n) / n
        vx = center[0] + radius * np.cos(ang)
        vy = center[1] + radius * np.sin(ang)
        return DomainSpec.polygon(zip(vx, vy))

    def weighted_volume(self, beta: float) -> float:
        """Closed form of the weighted volume for disks; None for polygons."""
        if self.kind != "disk":
            raise ValueError("closed-form weighted volume only for disks")
        return math.pi * self.radius ** (2 - 2 * beta) / (1.0 - beta)


def _shapely_polygon(verts):
    from shapely.geometry import Polygon
    from shapely.geometry.polygon import orient

    poly = Polygon(verts)
    if (not poly.is_valid) or poly.area <= 0:
        raise ValueError("polygon must be simple with positive area")
    return orient(poly)  # counterclockwise


# ---------------------------------------------------------------------------
# mesh
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class Mesh:
    """Conforming P1 triangle mesh.  Node 0 is the origin; immutable once built.

    Attributes
    ----------
    nodes : (N, 2) float array of vertex coordinates.
    triangles : (T, 3) int array, counterclockwise vertex triples.
    boundary : (N,) bool array, True on boundary nodes.
    h : float, maximum edge length actually realized.
    spec : DomainSpec the mesh discretizes (None for loaded meshes).
    ring_radii : radii of the concentric rings for disk meshes, else None.
    """

    nodes: np.ndarray
    triangles: np.ndarray
    boundary: np.ndarray
    h: float
    spec: DomainSpec | None = None
    ring_radii: np.ndarray | None = None
    interior: np.ndarray = field(init=False)
    dof_of_node: np.ndarray = field(init=False)

    def __post_init__(self):
        self.nodes = np.ascontiguousarray(self.nodes, dtype=float)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int32)
        self.boundary = np.asarray(self.boundary, dtype=bool)
        self.interior = np.flatnonzero(~self.boundary)
        dof = np.full(len(self.nodes), -1, dtype=np.int64)
        dof[self.interior] = np.arange(len(self.interior))
        self.dof_of_node = dof
        _validate_mesh(self)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_interior(self) -> int:
        return len(self.interior)

    def full_vector(self, interior_values: np.ndarray) -> np.ndarray:
        """Extend interior coefficients by zero to all nodes."""
        full = np.zeros(self.n_nodes)
        full[self.interior] = interior_values
        return full

    def boundary_distance_from_origin(self) -> float:
        """Distance from the origin to the nearest boundary node."""
        b = self.nodes[self.boundary]
        return float(np.min(np.hypot(b[:, 0], b[:, 1])))


def _validate_mesh(mesh: Mesh) -> None:
    if not np.allclose(mesh.nodes[0], 0.0, atol=1e-14):
        raise ValueError("node 0 must be the origin")
    if mesh.boundary[0]:
        raise ValueError("origin must be an interior node")
    areas = element_areas(mesh)
    if np.any(areas <= 0):
        raise ValueError("all triangles must be positively oriented")
    used = np.zeros(mesh.n_nodes, dtype=bool)
    used[mesh.triangles] = True
    if not used.all():
        raise ValueError("mesh has hanging nodes")


def _boundary_flags(n_nodes: int, triangles: np.ndarray) -> np.ndarray:
    """Nodes on edges that belong to exactly one triangle."""
    edges = np.concatenate(
        [triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]]
    )
    edges = np.sort(edges, axis=1)
    uniq, counts = np.unique(edges, axis=0, return_counts=True)
    flags = np.zeros(n_nodes, dtype=bool)
    flags[uniq[counts == 1].ravel()] = True
    return flags


def _max_edge(nodes: np.ndarray, triangles: np.ndarray) -> float:
    p = nodes[triangles]
    e = np.concatenate([p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]])
    return float(np.max(np.hypot(e[:, 0], e[:, 1])))


def _fix_orientation(nodes, triangles):
    p = nodes[triangles]
    det = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (
        p[:, 1, 1] - p[:, 0, 1]
    ) * (p[:, 2, 0] - p[:, 0, 0])
    flip = det < 0
    triangles[flip] = triangles[flip][:, [0, 2, 1]]
    return triangles


def build_mesh(spec: DomainSpec, h: float) -> Mesh:
    """Triangulate the domain with target mesh size h, origin as node 0."""
    if not h > 0:
        raise ValueError("mesh size h must be positive")
    if spec.kind == "disk":
        return _disk_mesh(spec, h)
    if spec.kind == "polygon":
        return _polygon_mesh(spec, h)
    raise ValueError(f"unknown domain kind {spec.kind!r}")


def _disk_mesh(spec: DomainSpec, h: float) -> Mesh:
    R = spec.radius
    n = max(1, int(round(R / h)))
    radii = R * np.arange(1, n + 1) / n
    nodes = [np.zeros((1, 2))]
    ring_ids = [np.array([0])]
    start = 1
    for k in range(1, n + 1):
        m = 6 * k
        ang = 2.0 * np.pi * np.arange(m) / m
        nodes.append(radii[k - 1] * np.column_stack([np.cos(ang), np.sin(ang)]))
        ring_ids.append(start + np.arange(m))
        start += m
    nodes = np.vstack(nodes)
    tris = []
    for k in range(1, n + 1):
        inner, outer = ring_ids[k - 1], ring_ids[k]
        if len(inner) == 1:
            c = inner[0]
            m = len(outer)
            for j in range(m):
                tris.append((c, outer[j], outer[(j + 1) % m]))
        else:
            tris.extend(_annulus_strip(inner, outer))
    triangles = _fix_orientation(nodes, np.asarray(tris, dtype=np.int32))
    flags = _boundary_flags(len(nodes), triangles)
    return Mesh(
        nodes=nodes,
        triangles=triangles,
        boundary=flags,
        h=_max_edge(nodes, triangles),
        spec=spec,
        ring_radii=radii,
    )


def _annulus_strip(inner: np.ndarray, outer: np.ndarray) -> list[tuple[int, int, int]]:
    """Merge two concentric node rings (sorted by angle, aligned at 0) into a
    conforming triangle strip."""
    mi, mo = len(inner), len(outer)
    tris = []
    i = o = 0
    while i < mi or o < mo:
        advance_outer = o < mo and (i == mi or (o + 1) * mi <= (i + 1) * mo)
        if advance_outer:
            tris.append((outer[o % mo], outer[(o + 1) % mo], inner[i % mi]))
            o += 1
        else:
            tris.append((outer[o % mo], inner[(i + 1) % mi], inner[i % mi]))
            i += 1
    return tris


def _polygon_mesh(spec: DomainSpec, h: float) -> Mesh:
    import shapely

    poly = _shapely_polygon(spec.vertices)
    verts = np.asarray(poly.exterior.coords)[:-1]

    # boundary chain subdivided at spacing <= h
    bpts = []
    nv = len(verts)
    for i in range(nv):
        a, b = verts[i], verts[(i + 1) % nv]
        nseg = max(1, int(np.ceil(np.hypot(*(b - a)) / h)))
        t = np.arange(nseg) / nseg
        bpts.append(a + t[:, None] * (b - a))
    bpts = np.vstack(bpts)

    # interior triangular lattice, kept clear of the boundary and the origin
    xmin, ymin, xmax, ymax = poly.bounds
    dy = h * math.sqrt(3.0) / 2.0
    rows = np.arange(ymin - h, ymax + h, dy)
    pts = []
    for j, y in enumerate(rows):
        xs = np.arange(xmin - h, xmax + h, h) + (0.5 * h if j % 2 else 0.0)
        pts.append(np.column_stack([xs, np.full_like(xs, y)]))
    lattice = np.vstack(pts)
    shrunk = poly.buffer(-0.55 * h)
    keep = shapely.contains_xy(shrunk, lattice[:, 0], lattice[:, 1])
    lattice = lattice[keep]
    lattice = lattice[np.hypot(lattice[:, 0], lattice[:, 1]) > 0.45 * h]

    points = np.vstack([np.zeros((1, 2)), bpts, lattice])
    tri = Delaunay(points)
    cand = tri.simplices.astype(np.int32)
    cent = points[cand].mean(axis=1)
    inside = shapely.contains_xy(poly, cent[:, 0], cent[:, 1])
    p = points[cand]
    areas2 = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (
        p[:, 1, 1] - p[:, 0, 1]
    ) * (p[:, 2, 0] - p[:, 0, 0])
    good = inside & (np.abs(areas2) > 1e-12 * h * h)
    triangles = cand[good]

    # drop orphan points, keeping the origin at index 0
    used = np.unique(triangles)
    if used[0] != 0:
        raise RuntimeError("origin node fell out of the triangulation")
    remap = np.full(len(points), -1, dtype=np.int32)
    remap[used] = np.arange(len(used), dtype=np.int32)
    nodes = points[used]
    triangles = remap[triangles]
    triangles = _fix_orientation(nodes, triangles)
    flags = _boundary_flags(len(nodes), triangles)
    return Mesh(
        nodes=nodes,
        triangles=triangles,
        boundary=flags,
        h=_max_edge(nodes, triangles),
        spec=spec,
    )


# ---------------------------------------------------------------------------
# cached per-mesh element data
# ---------------------------------------------------------------------------

_MESH_CACHE: "weakref.WeakKeyDictionary[Mesh, dict]" = weakref.WeakKeyDictionary()


def _mesh_cache(mesh: Mesh) -> dict:
    d = _MESH_CACHE.get(mesh)
    if d is None:
        d = {}
        _MESH_CACHE[mesh] = d
    return d


def element_areas(mesh: Mesh) -> np.ndarray:
    cache = _mesh_cache(mesh)
    if "areas" not in cache:
        p = mesh.nodes[mesh.triangles]
        cache["areas"] = 0.5 * (
            (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
            - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
        )
    return cache["areas"]


def element_gradients(mesh: Mesh) -> np.ndarray:
    """Gradients of the three P1 basis functions per triangle, shape (T, 3, 2)."""
    cache = _mesh_cache(mesh)
    if "grads" not in cache:
        p = mesh.nodes[mesh.triangles]
        a = element_areas(mesh)
        g = np.empty((len(p), 3, 2))
        for k in range(3):
            # opposite edge rotated by 90 degrees / (2 area)
            e = p[:, (k + 2) % 3] - p[:, (k + 1) % 3]
            g[:, k, 0] = -e[:, 1]
            g[:, k, 1] = e[:, 0]
        g /= (2.0 * a)[:, None, None]
        cache["grads"] = g
    return cache["grads"]


def origin_triangles(mesh: Mesh) -> np.ndarray:
    """Indices of triangles having the origin (node 0) as a vertex."""
    cache = _mesh_cache(mesh)
    if "origin_tris" not in cache:
        cache["origin_tris"] = np.flatnonzero((mesh.triangles == 0).any(axis=1))
    return cache["origin_tris"]


# ---------------------------------------------------------------------------
# singular quadrature
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SingularQuadrature:
    """Quadrature specification for integrals against |x|^(-2*beta) dx.

    order : symmetric triangle rule order away from the origin (1, 2, 4, 5, 6).
    depth : refinement level near the origin; controls the number of angular
        Gauss nodes on origin triangles (8*depth) and the subdivision depth of
        nearby triangles.  Must be >= 1.
    radial_nodes : Gauss-Jacobi node count in r on origin triangles; the rule
        is exact for radial polynomials of degree 2*radial_nodes - 1 against
        the weight r^(1-2*beta).
    """

    beta: float
    order: int = 4
    depth: int = 2
    radial_nodes: int = 6

    def __post_init__(self):
        if not 0.0 <= self.beta < 1.0:
            raise ValueError("beta must lie in [0, 1)")
        if self.order not in _TRIANGLE_RULES:
            raise ValueError(f"order must be one of {sorted(_TRIANGLE_RULES)}")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.radial_nodes < 2:
            raise ValueError("need at least 2 radial nodes")


def _rule(bary_groups):
    pts, wts = [], []
    for w, b in bary_groups:
        for perm in {tuple(p) for p in _perms(b)}:
            pts.append(perm)
            wts.append(w)
    return np.asarray(pts), np.asarray(wts)


def _perms(b):
    a, c, d = b
    return [(a, c, d), (a, d, c), (c, a, d), (c, d, a), (d, a, c), (d, c, a)]


_TRIANGLE_RULES: dict[int, tuple[np.ndarray, np.ndarray]] = {
    1: (np.array([[1 / 3, 1 / 3, 1 / 3]]), np.array([1.0])),
    2: _rule([(1 / 3, (2 / 3, 1 / 6, 1 / 6))]),
    4: _rule(
        [
            (0.223381589678011, (0.108103018168070, 0.445948490915965, 0.445948490915965)),
            (0.109951743655322, (0.816847572980459, 0.091576213509771, 0.091576213509771)),
        ]
    ),
    5: _rule(
        [
            (0.225, (1 / 3, 1 / 3, 1 / 3)),
            (0.132394152788506, (0.059715871789770, 0.470142064105115, 0.470142064105115)),
            (0.125939180544827, (0.797426985353087, 0.101286507323456, 0.101286507323456)),
        ]
    ),
    6: _rule(
        [
            (0.050844906370207, (0.873821971016996, 0.063089014491502, 0.063089014491502)),
            (0.116786275726379, (0.501426509658179, 0.249286745170910, 0.249286745170910)),
            (0.082851075618374, (0.636502499121399, 0.310352451033785, 0.053145049844816)),
        ]
    ),
}


def _subdivision_bary(depth: int) -> list[np.ndarray]:
    """Corner matrices (rows = barycentric corners) of 4^depth subtriangles."""
    mats = [np.eye(3)]
    for _ in range(depth):
        out = []
        for c in mats:
            m01, m12, m20 = (c[0] + c[1]) / 2, (c[1] + c[2]) / 2, (c[2] + c[0]) / 2
            out += [
                np.array([c[0], m01, m20]),
                np.array([m01, c[1], m12]),
                np.array([m20, m12, c[2]]),
                np.array([m01, m12, m20]),
            ]
        mats = out
    return mats


@dataclass(eq=False)
class QuadTables:
    """Flattened quadrature rule for one (mesh, SingularQuadrature) pair.

    ``w`` already contains the full measure |x|^(-2*beta) dx, so
    ``integrate = w . values``.  ``origin_mask`` marks points generated by the
    polar rule on origin triangles (callers composing custom integrands with
    extra singular factors may want to treat those triangles separately).
    """

    mesh: Mesh
    quad: SingularQuadrature
    xy: np.ndarray
    w: np.ndarray
    tri: np.ndarray
    bary: np.ndarray
    origin_mask: np.ndarray
    tri_nodes: np.ndarray = field(init=False)

    def __post_init__(self):
        self.tri_nodes = self.mesh.triangles[self.tri]

    def values(self, f) -> np.ndarray:
        """Point values of a callable, a full nodal array, or a constant."""
        if callable(f):
            return np.asarray(f(self.xy), dtype=float)
        if np.isscalar(f):
            return np.full(len(self.w), float(f))
        f = np.asarray(f, dtype=float)
        if f.shape != (self.mesh.n_nodes,):
            raise ValueError("nodal array must have one value per mesh node")
        return np.einsum("qk,qk->q", f[self.tri_nodes], self.bary)

    def integrate(self, point_values: np.ndarray) -> float:
        return float(self.w @ point_values)

    def load(self, point_values: np.ndarray) -> np.ndarray:
        """Assemble L_i = sum_q w_q v_q phi_i(x_q) over all nodes."""
        contrib = (self.w * point_values)[:, None] * self.bary
        return np.bincount(
            self.tri_nodes.ravel(), weights=contrib.ravel(), minlength=self.mesh.n_nodes
        )


def quadrature_tables(mesh: Mesh, quad: SingularQuadrature) -> QuadTables:
    cache = _mesh_cache(mesh).setdefault("tables", {})
    if quad not in cache:
        cache[quad] = _build_tables(mesh, quad)
    return cache[quad]


def _barycentric(tri_pts: np.ndarray, xy: np.ndarray) -> np.ndarray:
    """Barycentric coordinates of points xy (n,2) in one triangle (3,2)."""
    a, b, c = tri_pts
    m = np.array([[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]])
    lam = np.linalg.solve(m, (xy - a).T).T
    return np.column_stack([1.0 - lam[:, 0] - lam[:, 1], lam])


def polar_rays(mesh: Mesh, tri_index: int, n_theta: int):
    """Gauss-Legendre angular nodes for one origin triangle.

    Returns (theta_weights, directions (n,2), rho (n,)) where rho is the
    distance from the origin to the opposite edge along each direction.
    """
    tri = mesh.triangles[tri_index]
    if 0 not in tri:
        raise ValueError("triangle does not touch the origin")
    others = [v for v in tri if v != 0]
    pa, pb = mesh.nodes[others[0]], mesh.nodes[others[1]]
    ta, tb = math.atan2(pa[1], pa[0]), math.atan2(pb[1], pb[0])
    span = (tb - ta) % (2.0 * math.pi)
    if span > math.pi:  # wrong order, swap
        pa, pb = pb, pa
        ta, tb = tb, ta
        span = (tb - ta) % (2.0 * math.pi)
    xg, wg = leggauss(n_theta)
    theta = ta + (xg + 1.0) * 0.5 * span
    wt = wg * 0.5 * span
    dirs = np.column_stack([np.cos(theta), np.sin(theta)])
    # ray-edge intersection: n.x = d with n normal to the chord (pa, pb)
    edge = pb - pa
    nrm = np.array([edge[1], -edge[0]])
    nrm /= math.hypot(*nrm)
    d = float(nrm @ pa)
    if d < 0:
        nrm, d = -nrm, -d
    rho = d / (dirs @ nrm)
    return wt, dirs, rho


def radial_log_moment(rho, p: float, logpow: int):
    """Closed form of int_0^rho r^(p-1) log(r)^j dr for j in {0, 1, 2}."""
    rho = np.asarray(rho, dtype=float)
    if p <= 0:
        raise ValueError("moment requires p > 0")
    rp = rho**p
    lr = np.log(rho)
    if logpow == 0:
        return rp / p
    if logpow == 1:
        return rp * (lr / p - 1.0 / p**2)
    if logpow == 2:
        return rp * (lr**2 / p - 2.0 * lr / p**2 + 2.0 / p**3)
    raise ValueError("log power must be 0, 1, or 2")


def _build_tables(mesh: Mesh, quad: SingularQuadrature) -> QuadTables:
    beta = quad.beta
    otris = origin_triangles(mesh)
    oset = set(int(t) for t in otris)
    areas = element_areas(mesh)
    pts_b, wts = _TRIANGLE_RULES[quad.order]

    xs, ws, tids, barys, omask = [], [], [], [], []

    # --- regular triangles, with subdivision near the origin -------------
    p_all = mesh.nodes[mesh.triangles]
    vert_r = np.hypot(p_all[..., 0], p_all[..., 1])
    edge_len = np.array(
        [
            np.hypot(*(p_all[:, 1] - p_all[:, 0]).T),
            np.hypot(*(p_all[:, 2] - p_all[:, 1]).T),
            np.hypot(*(p_all[:, 0] - p_all[:, 2]).T),
        ]
    ).max(axis=0)
    near = vert_r.min(axis=1) < 3.0 * edge_len

    for refine in (False, True):
        sel = np.flatnonzero(near == refine)
        sel = sel[[int(t) not in oset for t in sel]]
        if len(sel) == 0:
            continue
        if refine:
            bary_list, wt_list = [], []
            for c in _subdivision_bary(quad.depth):
                bary_list.append(pts_b @ c)
                wt_list.append(wts / 4.0**quad.depth)
            bary = np.vstack(bary_list)
            wt = np.concatenate(wt_list)
        else:
            bary, wt = pts_b, wts
        npt = len(wt)
        pts = np.einsum("qk,tkd->tqd", bary, p_all[sel])
        r = np.hypot(pts[..., 0], pts[..., 1])
        weight = (areas[sel][:, None] * wt[None, :]) * (
            r ** (-2.0 * beta) if beta > 0 else 1.0
        )
        xs.append(pts.reshape(-1, 2))
        ws.append(weight.ravel())
        tids.append(np.repeat(sel, npt))
        barys.append(np.tile(bary, (len(sel), 1)))
        omask.append(np.zeros(len(sel) * npt, dtype=bool))

    # --- origin triangles: polar rule -------------------------------------
    xj, wj = roots_jacobi(quad.radial_nodes, 0.0, 1.0 - 2.0 * beta)
    n_theta = 8 * quad.depth
    for t in otris:
        wt, dirs, rho = polar_rays(mesh, int(t), n_theta)
        # radial nodes r = rho (1+x)/2; weights carry (rho/2)^(2-2beta)
        r = rho[:, None] * (xj[None, :] + 1.0) * 0.5
        wq = wt[:, None] * (rho[:, None] / 2.0) ** (2.0 - 2.0 * beta) * wj[None, :]
        pts = dirs[:, None, :] * r[..., None]
        pts = pts.reshape(-1, 2)
        bar = _barycentric(mesh.nodes[mesh.triangles[t]], pts)
        xs.append(pts)
        ws.append(wq.ravel())
        tids.append(np.full(len(pts), t, dtype=np.int64))
        barys.append(bar)
        omask.append(np.ones(len(pts), dtype=bool))

    return QuadTables(
        mesh=mesh,
        quad=quad,
        xy=np.vstack(xs),
        w=np.concatenate(ws),
        tri=np.concatenate(tids),
        bary=np.vstack(barys),
        origin_mask=np.concatenate(omask),
    )


def integrate_singular(
    mesh: Mesh,
    f,
    beta: float | None = None,
    quad: SingularQuadrature | None = None,
) -> float:
    """Integral of f(x) |x|^(-2*beta) over the mesh.

    ``f`` may be a callable of an (n, 2) point array, a full nodal array
    (interpolated as P1), or a scalar.  Exact in the radial direction for P1
    integrands on origin triangles.
    """
    if quad is None:
        if beta is None:
            raise ValueError("pass beta or a SingularQuadrature")
        quad = SingularQuadrature(beta=beta)
    tab = quadrature_tables(mesh, quad)
    return tab.integrate(tab.values(f))


def weighted_load(
    mesh: Mesh,
    point_values: np.ndarray,
    quad: SingularQuadrature,
) -> np.ndarray:
    """Nodal load L_i = int |x|^(-2b) v(x) phi_i(x) dx for point values v."""
    tab = quadrature_tables(mesh, quad)
    return tab.load(point_values)


# ---------------------------------------------------------------------------
# P1 interpolation at arbitrary points
# ---------------------------------------------------------------------------


class P1Interpolator:
    """Point location + barycentric evaluation of nodal fields."""

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        p = mesh.nodes[mesh.triangles]
        self._corners = p
        self._tree = cKDTree(p.mean(axis=1))

    def locate(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Containing triangle index (-1 if outside) and barycentric coords."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        n = len(points)
        k = min(32, self.mesh.n_triangles)
        _, cand = self._tree.query(points, k=k)
        cand = np.atleast_2d(cand)
        tri_idx = np.full(n, -1, dtype=np.int64)
        bary = np.zeros((n, 3))
        for i, pt in enumerate(points):
            hit = self._try_candidates(pt, cand[i])
            if hit is None and k < self.mesh.n_triangles:
                hit = self._try_candidates(pt, np.arange(self.mesh.n_triangles))
            if hit is not None:
                tri_idx[i], bary[i] = hit
        return tri_idx, bary

    def _try_candidates(self, pt, cand):
        p = self._corners[cand]
        v0 = p[:, 1] - p[:, 0]
        v1 = p[:, 2] - p[:, 0]
        d = pt - p[:, 0]
        det = v0[:, 0] * v1[:, 1] - v0[:, 1] * v1[:, 0]
        l1 = (d[:, 0] * v1[:, 1] - d[:, 1] * v1[:, 0]) / det
        l2 = (v0[:, 0] * d[:, 1] - v0[:, 1] * d[:, 0]) / det
        l0 = 1.0 - l1 - l2
        lam = np.column_stack([l0, l1, l2])
        score = lam.min(axis=1)
        j = int(np.argmax(score))
        if score[j] >= -1e-10:
            return int(cand[j]), np.clip(lam[j], 0.0, None)
        return None

    def __call__(self, nodal_full: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Interpolate; raises if any point falls outside the mesh."""
        tri_idx, bary = self.locate(points)
        if np.any(tri_idx < 0):
            raise ValueError("interpolation point outside the mesh")
        vals = nodal_full[self.mesh.triangles[tri_idx]]
        return np.einsum("qk,qk->q", vals, bary)


def interpolator(mesh: Mesh) -> P1Interpolator:
    cache = _mesh_cache(mesh)
    if "interp" not in cache:
        cache["interp"] = P1Interpolator(mesh)
    return cache["interp"]


# ---------------------------------------------------------------------------
# text serialization
# ---------------------------------------------------------------------------

_MESH_MAGIC = "singtm-mesh 1"
_FIELD_MAGIC = "singtm-field 1"


def save_mesh(mesh: Mesh, path) -> None:
    """Whitespace text format: header, node rows 'x y flag', triangle rows."""
    buf = io.StringIO()
    buf.write(f"{_MESH_MAGIC}\n")
    buf.write(f"{mesh.n_nodes} {mesh.n_triangles} {mesh.h:.17g}\n")
    if mesh.ring_radii is not None:
        buf.write("rings " + " ".join(f"{r:.17g}" for r in mesh.ring_radii) + "\n")
    else:
        buf.write("rings\n")
    for (x, y), b in zip(mesh.nodes, mesh.boundary):
        buf.write(f"{x:.17g} {y:.17g} {int(b)}\n")
    for i, j, k in mesh.triangles:
        buf.write(f"{i} {j} {k}\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def load_mesh(path) -> Mesh:
    with open(path) as fh:
        lines = fh.read().split("\n")
    if lines[0].strip() != _MESH_MAGIC:
        raise ValueError("not a mesh file")
    n, t, h = lines[1].split()
    n, t, h = int(n), int(t), float(h)
    ring_tok = lines[2].split()
    rings = np.array([float(x) for x in ring_tok[1:]]) if len(ring_tok) > 1 else None
    rows = [ln.split() for ln in lines[3 : 3 + n]]
    nodes = np.array([[float(r[0]), float(r[1])] for r in rows])
    flags = np.array([bool(int(r[2])) for r in rows])
    tris = np.array(
        [[int(v) for v in ln.split()] for ln in lines[3 + n : 3 + n + t]],
        dtype=np.int32,
    )
    return Mesh(nodes=nodes, triangles=tris, boundary=flags, h=h,
                ring_radii=rings)


def save_field_values(values: np.ndarray, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{_FIELD_MAGIC}\n{len(values)}\n")
        fh.write("\n".join(f"{v:.17g}" for v in values))
        fh.write("\n")


def load_field_values(path) -> np.ndarray:
    with open(path) as fh:
        lines = fh.read().split("\n")
    if lines[0].strip() != _FIELD_MAGIC:
        raise ValueError("not a field file")
    n = int(lines[1])
    return np.array([float(v) for v in lines[2 : 2 + n]])
