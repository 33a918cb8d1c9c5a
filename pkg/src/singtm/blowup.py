"""Blow-up diagnostics for maximizer families: concentration scale, rescaled
profiles against the limit bubble, truncation energy splits, and comparison
of c_eps * u_eps with the Green's function away from the peak.

Everything here reports; nothing decides.  Trends (peak growth, energy
concentration, profile convergence) are left to the caller to assert, and
every interpolation-limited quantity carries a resolution indicator so soft
checks stay honest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bubble import phi0
from .geometry import Mesh, element_areas, element_gradients, interpolator
from .green import GreenFunction
from .maximizer import MaximizerResult
from .spectral import Field

__all__ = [
    "blowup_scale",
    "ConcentrationReport",
    "concentration_report",
    "ProfileComparison",
    "rescaled_profile",
    "TruncationSplit",
    "truncation_energy",
    "WeakLimitComparison",
    "weak_limit_compare",
    "BlowupDiagnostics",
    "sweep_diagnostics",
    "diagnostics_csv",
]


def blowup_scale(c: float, lam: float, beta: float, eps: float) -> float:
    """r_eps = sqrt(lam) c^-1 exp(-2 pi (1-beta-eps) c^2), computed in log space
    so deep concentration does not underflow."""
    if c <= 0 or lam <= 0:
        raise ValueError("peak value and lambda must be positive")
    log_r = 0.5 * math.log(lam) - math.log(c) - 2.0 * math.pi * (1.0 - beta - eps) * c * c
    return math.exp(log_r)


def _element_energies(mesh: Mesh, full: np.ndarray) -> np.ndarray:
    """Per-element Dirichlet energy of a full nodal field."""
    g = element_gradients(mesh)
    a = element_areas(mesh)
    gu = np.einsum("tkd,tk->td", g, full[mesh.triangles])
    return a * (gu**2).sum(axis=1)


@dataclass(frozen=True)
class ConcentrationReport:
    peak_node: int
    x_peak: np.ndarray
    c: float
    delta: float
    energy_fraction: float  # share of Dirichlet energy in B_delta(x_peak)


def concentration_report(u: Field, delta: float) -> ConcentrationReport:
    """Peak location (lowest node index on ties) and local energy share."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    mesh = u.mesh
    full = u.full()
    node = int(np.argmax(full))
    xp = mesh.nodes[node]
    energies = _element_energies(mesh, full)
    cent = mesh.nodes[mesh.triangles].mean(axis=1)
    near = np.hypot(cent[:, 0] - xp[0], cent[:, 1] - xp[1]) <= delta
    total = float(energies.sum())
    frac = float(energies[near].sum() / total) if total > 0 else 0.0
    return ConcentrationReport(
        peak_node=node, x_peak=xp.copy(), c=float(full[node]), delta=delta,
        energy_fraction=frac,
    )


@dataclass(frozen=True)
class ProfileComparison:
    """Rescaled profile sampled on B_R against the limit bubble.

    ``cells_across`` counts mesh elements spanning the sampled (physical)
    radius -- below ~2 the mesh no longer resolves the bubble and the
    deviation mostly measures interpolation error.
    """

    radii: np.ndarray
    mean_values: np.ndarray
    reference: np.ndarray
    sup_dev: float
    cells_across: float
    scale: float


def rescaled_profile(
    u: Field,
    x_peak: np.ndarray,
    c: float,
    r_eps: float,
    beta: float,
    R: float = 5.0,
    n_radial: int = 24,
    n_angular: int = 16,
) -> ProfileComparison:
    """phi(y) = c (u(x_peak + r_eps^(1/(1-b)) y) - c) on |y| <= R vs phi0.

    Raises if the rescaled ball leaves the mesh.  Values of u come from
    barycentric interpolation of the P1 field.
    """
    if c <= 0:
        raise ValueError("peak value must be positive")
    mesh = u.mesh
    sigma = r_eps ** (1.0 / (1.0 - beta))
    radii = R * np.arange(1, n_radial + 1) / n_radial
    ang = 2.0 * math.pi * np.arange(n_angular) / n_angular
    ys = np.concatenate(
        [
            np.zeros((1, 2)),
            (radii[:, None, None] * np.stack(
                [np.cos(ang), np.sin(ang)], axis=-1
            )[None, :, :]).reshape(-1, 2),
        ]
    )
    pts = np.asarray(x_peak)[None, :] + sigma * ys
    interp = interpolator(mesh)
    tri_idx, _ = interp.locate(pts)
    if np.any(tri_idx < 0):
        raise ValueError("rescaled ball B_R leaves the domain")
    vals = c * (interp(u.full(), pts) - c)
    ref_all = np.concatenate([[0.0], np.repeat(phi0(radii, beta), n_angular)])
    sup_dev = float(np.max(np.abs(vals - ref_all)))
    ring_vals = vals[1:].reshape(n_radial, n_angular).mean(axis=1)
    return ProfileComparison(
        radii=radii,
        mean_values=ring_vals,
        reference=phi0(radii, beta),
        sup_dev=sup_dev,
        cells_across=sigma * R / mesh.h,
        scale=sigma,
    )


@dataclass(frozen=True)
class TruncationSplit:
    """Dirichlet energies of the nodal truncation at level gamma * c.

    low/high are the energies of min(u, gamma c) and (u - gamma c)^+.  Their
    sum equals the energy of u exactly on elements where u - gamma c does not
    change sign; ``identity_gap`` is the (round-off level) defect summed over
    those, while ``crossing_defect`` accumulates the genuine mismatch on the
    threshold-crossing elements.
    """

    gamma: float
    level: float
    low: float
    high: float
    total: float
    identity_gap: float
    crossing_defect: float
    crossing_elements: int


def truncation_energy(u: Field, gamma: float, c: float) -> TruncationSplit:
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    if c <= 0:
        raise ValueError("c must be positive")
    mesh = u.mesh
    full = u.full()
    level = gamma * c
    low = np.minimum(full, level)
    high = np.maximum(full - level, 0.0)
    e_u = _element_energies(mesh, full)
    e_lo = _element_energies(mesh, low)
    e_hi = _element_energies(mesh, high)
    sign = full[mesh.triangles] - level
    crossing = (sign.min(axis=1) < 0) & (sign.max(axis=1) > 0)
    gap = e_u - e_lo - e_hi
    return TruncationSplit(
        gamma=gamma,
        level=level,
        low=float(e_lo.sum()),
        high=float(e_hi.sum()),
        total=float(e_u.sum()),
        identity_gap=float(gap[~crossing].sum()),
        crossing_defect=float(np.abs(gap[crossing]).sum()),
        crossing_elements=int(crossing.sum()),
    )


@dataclass(frozen=True)
class WeakLimitComparison:
    sup_dev: float
    l2_dev: float
    n_nodes: int
    lambda_over_c2: float | None


def weak_limit_compare(
    u: Field,
    c: float,
    g: GreenFunction,
    annulus: tuple[float, float],
    lam: float | None = None,
) -> WeakLimitComparison:
    """Deviation of c * u from G on an annulus around the origin.

    The annulus must avoid both the pole and the boundary.  Reports sup and
    L2 deviations over the annulus nodes/elements, plus lam / c^2 when the
    EL normalization is supplied.
    """
    r_in, r_out = annulus
    if not 0.0 < r_in < r_out:
        raise ValueError("annulus radii must satisfy 0 < r_in < r_out")
    mesh = u.mesh
    r = np.hypot(mesh.nodes[:, 0], mesh.nodes[:, 1])
    sel = (r >= r_in) & (r <= r_out)
    if not np.any(sel):
        raise ValueError("annulus contains no mesh nodes")
    g_nodes = g.nodal_values()
    dev = np.where(sel, c * u.full() - g_nodes, 0.0)
    sup = float(np.max(np.abs(dev[sel])))

    tri_sel = sel[mesh.triangles].all(axis=1)
    v = dev[mesh.triangles[tri_sel]]
    a = element_areas(mesh)[tri_sel]
    sq = (v**2).sum(axis=1) + v[:, 0] * v[:, 1] + v[:, 0] * v[:, 2] + v[:, 1] * v[:, 2]
    l2 = math.sqrt(max(float((a / 6.0 * sq).sum()), 0.0))
    return WeakLimitComparison(
        sup_dev=sup,
        l2_dev=l2,
        n_nodes=int(sel.sum()),
        lambda_over_c2=(lam / (c * c)) if lam is not None else None,
    )


@dataclass(frozen=True)
class BlowupDiagnostics:
    """One continuation step's diagnostics row."""

    eps: float
    value: float
    c: float
    lam: float
    r_eps: float
    x_peak_norm: float
    lambda_over_c2: float
    energy_fraction: float
    profile_sup_dev: float
    profile_cells: float
    trunc_fracs: tuple[float, ...]
    weak_sup: float
    weak_l2: float


def sweep_diagnostics(
    results: Sequence[MaximizerResult],
    g: GreenFunction | None = None,
    delta: float = 0.1,
    profile_R: float = 5.0,
    gammas: tuple[float, ...] = (0.25, 0.5, 0.75),
    annulus: tuple[float, float] = (0.25, 0.75),
) -> list[BlowupDiagnostics]:
    rows = []
    for res in results:
        beta, eps = res.params.beta, res.params.eps
        r_eps = blowup_scale(res.c, res.lam, beta, eps)
        conc = concentration_report(res.u, delta)
        try:
            prof = rescaled_profile(
                res.u, res.x_peak, res.c, r_eps, beta, R=profile_R
            )
            prof_dev, prof_cells = prof.sup_dev, prof.cells_across
        except ValueError:
            prof_dev, prof_cells = math.nan, math.nan
        fr = []
        for gm in gammas:
            ts = truncation_energy(res.u, gm, res.c)
            fr.append(ts.low / max(ts.total, 1e-300))
        if g is not None:
            wl = weak_limit_compare(res.u, res.c, g, annulus, lam=res.lam)
            weak_sup, weak_l2 = wl.sup_dev, wl.l2_dev
        else:
            weak_sup = weak_l2 = math.nan
        rows.append(
            BlowupDiagnostics(
                eps=eps,
                value=res.value,
                c=res.c,
                lam=res.lam,
                r_eps=r_eps,
                x_peak_norm=float(np.hypot(*res.x_peak)),
                lambda_over_c2=res.lam / (res.c**2),
                energy_fraction=conc.energy_fraction,
                profile_sup_dev=prof_dev,
                profile_cells=prof_cells,
                trunc_fracs=tuple(fr),
                weak_sup=weak_sup,
                weak_l2=weak_l2,
            )
        )
    return rows


def diagnostics_csv(rows: Sequence[BlowupDiagnostics],
                    gammas: tuple[float, ...] = (0.25, 0.5, 0.75)) -> str:
    head = [
        "eps", "value", "c", "lambda_eps", "r_eps", "x_peak_norm",
        "lambda_over_c2", "energy_fraction", "profile_sup_dev", "profile_cells",
    ]
    head += [f"trunc_frac_{int(100 * g):02d}" for g in gammas]
    head += ["weak_sup", "weak_l2"]
    lines = [",".join(head)]
    for r in rows:
        cells = [
            f"{r.eps:.17g}", f"{r.value:.17g}", f"{r.c:.17g}", f"{r.lam:.17g}",
            f"{r.r_eps:.17g}", f"{r.x_peak_norm:.17g}", f"{r.lambda_over_c2:.17g}",
            f"{r.energy_fraction:.17g}", f"{r.profile_sup_dev:.17g}",
            f"{r.profile_cells:.17g}",
        ]
        cells += [f"{v:.17g}" for v in r.trunc_fracs]
        cells += [f"{r.weak_sup:.17g}", f"{r.weak_l2:.17g}"]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
