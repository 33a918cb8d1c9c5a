"""Maximizers of the subcritical functional on the unit (1, alpha) sphere.

The iteration is a damped, normalized fixed-point ascent: blend the current
iterate with the Riesz ascent direction, re-impose the constraints (sign in
full-space mode, L2-orthogonality to low eigenspaces in subspace mode),
normalize, and backtrack the damping whenever the functional value would
drop.  At a discrete Euler-Lagrange solution the ascent direction equals the
iterate, so EL solutions are exact fixed points.

Continuation sweeps walk a decreasing eps schedule, warm-starting each solve
from the previous maximizer; together with the monotone line search this
makes the reported values nonincreasing in eps by construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .functional import TMParams, nonlinear_system, tm_value_ex
from .geometry import Mesh
from .spectral import Field, eigenpairs, norm_1alpha, operators, project_perp

__all__ = [
    "MaximizerOptions",
    "MaximizerResult",
    "maximize_subcritical",
    "continuation_sweep",
    "result_to_json",
]


@dataclass(frozen=True)
class MaximizerOptions:
    tol_residual: float = 1e-6
    tol_value: float = 1e-10
    max_iter: int = 10_000
    tau: float = 1.0
    backtrack_max: int = 30
    multistart: int = 0
    seed: int = 0


@dataclass(eq=False)
class MaximizerResult:
    """Converged (or flagged) maximizer with its headline scalars.

    value is the functional value, c the nodal maximum, x_peak its location,
    lam the EL normalization lambda_eps.  ``overflow`` marks runs that hit
    the exponent cap (blow-up territory on this mesh); ``stalled`` marks line
    searches that could no longer improve the value before reaching the
    residual tolerance.
    """

    u: Field
    params: TMParams
    value: float
    c: float
    x_peak: np.ndarray
    peak_node: int
    lam: float
    norm: float
    residual: float
    iterations: int
    converged: bool
    overflow: bool
    stalled: bool


def _peak(u: Field, signed: bool) -> tuple[int, float]:
    """Peak node (lowest index on ties) and value; by |u| if signed."""
    full = u.full()
    key = np.abs(full) if signed else full
    node = int(np.argmax(key))
    return node, float(full[node])


def _normalize(u: Field, alpha: float) -> tuple[Field, float]:
    n = norm_1alpha(u, alpha)
    if n == 0.0:
        raise ValueError("cannot normalize the zero field")
    return Field(u.mesh, u.values / n), n


def _prepare(u: Field, alpha: float, basis: Sequence[Field] | None) -> Field:
    """Constraint step applied before every normalization."""
    if basis:
        u = project_perp(u, basis)
    else:
        u = Field(u.mesh, np.abs(u.values))
    u, _ = _normalize(u, alpha)
    return u


def _default_init(mesh: Mesh, alpha: float, basis: Sequence[Field] | None) -> Field:
    sd = eigenpairs(mesh, 1 if not basis else len(basis) + 2)
    if not basis:
        if alpha >= sd.eigenvalues[0]:
            raise ValueError("alpha must be below the first eigenvalue")
        return sd.fields[0]
    cand = sd.fields[len(basis)]
    if alpha >= sd.eigenvalues[len(basis)]:
        raise ValueError("alpha must be below the first eigenvalue of the complement")
    return cand


def maximize_subcritical(
    mesh: Mesh,
    params: TMParams,
    basis: Sequence[Field] | None = None,
    init: Field | None = None,
    opts: MaximizerOptions = MaximizerOptions(),
) -> MaximizerResult:
    """Maximize the subcritical functional over the unit (1, alpha) sphere.

    In full-space mode (basis None) iterates are kept nonnegative; with a
    basis of eigenfunctions the iterates stay L2-orthogonal to it.  eps must
    be strictly positive.  Multi-start (opts.multistart > 0) reruns from
    seeded random eigenfunction mixtures and keeps the best value.
    """
    if params.eps <= 0.0:
        raise ValueError("maximizer requires strictly subcritical eps > 0")
    start = init if init is not None else _default_init(mesh, params.alpha, basis)
    best = _ascend(mesh, params, start, basis, opts)
    if opts.multistart > 0:
        rng = np.random.default_rng(opts.seed)
        sd = eigenpairs(mesh, min(6, mesh.n_interior - 1) + (len(basis) if basis else 0))
        for _ in range(opts.multistart):
            coef = rng.standard_normal(len(sd.fields))
            mix = Field(mesh, sum(c * f.values for c, f in zip(coef, sd.fields)))
            trial = _ascend(mesh, params, mix, basis, opts)
            if trial.value > best.value:
                best = trial
    return best


def _ascend(
    mesh: Mesh,
    params: TMParams,
    init: Field,
    basis: Sequence[Field] | None,
    opts: MaximizerOptions,
) -> MaximizerResult:
    ops = operators(mesh)
    shifted = ops.shifted(params.alpha)
    u = _prepare(init, params.alpha, basis)
    ev = tm_value_ex(u, params)
    value, overflow = ev.value, ev.overflow
    tau = opts.tau
    stalled = False
    residual = math.inf
    it = 0
    flat_count = 0

    while it < opts.max_iter and not overflow:
        it += 1
        lam, load, gammas, flagged = nonlinear_system(u, params, basis)
        overflow = overflow or flagged
        if lam == 0.0:
            break

        # dual-norm EL residual from the same nonlinear evaluation
        r = shifted @ u.values - load / lam
        if basis:
            for g, psi in zip(gammas, basis):
                r += (g / lam) * (ops.M @ psi.values)
        z = ops.solve(params.alpha, r)
        residual = math.sqrt(max(float(r @ z), 0.0))
        if residual <= opts.tol_residual:
            break

        d = Field(mesh, ops.solve(params.alpha, load / lam))
        step = tau
        accepted = False
        for _ in range(opts.backtrack_max):
            cand = _prepare(
                Field(mesh, (1.0 - step) * u.values + step * d.values),
                params.alpha,
                basis,
            )
            cev = tm_value_ex(cand, params)
            if cev.overflow or cev.value >= value * (1.0 - 1e-14) - 1e-14:
                u, prev = cand, value
                value, overflow = cev.value, overflow or cev.overflow
                accepted = True
                break
            step *= 0.5
        if not accepted:
            stalled = True
            break
        if abs(value - prev) <= opts.tol_value * max(abs(value), 1.0):
            flat_count += 1
            if flat_count >= 10:
                stalled = residual > opts.tol_residual
                break
        else:
            flat_count = 0

    # final sign convention and exact normalization
    node, peak = _peak(u, signed=basis is not None)
    if basis and peak < 0:
        u = Field(mesh, -u.values)
        peak = -peak
    u, _ = _normalize(u, params.alpha)
    lam, load, gammas, flagged = nonlinear_system(u, params, basis)
    overflow = overflow or flagged
    r = shifted @ u.values - (load / lam if lam > 0 else 0.0)
    if basis and lam > 0:
        for g, psi in zip(gammas, basis):
            r += (g / lam) * (ops.M @ psi.values)
    z = ops.solve(params.alpha, r)
    residual = math.sqrt(max(float(r @ z), 0.0))
    ev = tm_value_ex(u, params)
    node, peak = _peak(u, signed=basis is not None)

    return MaximizerResult(
        u=u,
        params=params,
        value=ev.value,
        c=peak,
        x_peak=mesh.nodes[node].copy(),
        peak_node=node,
        lam=lam,
        norm=norm_1alpha(u, params.alpha),
        residual=residual,
        iterations=it,
        converged=residual <= opts.tol_residual and not overflow,
        overflow=overflow or ev.overflow,
        stalled=stalled,
    )


def continuation_sweep(
    mesh: Mesh,
    params: TMParams,
    eps_schedule: Sequence[float],
    basis: Sequence[Field] | None = None,
    opts: MaximizerOptions = MaximizerOptions(),
) -> list[MaximizerResult]:
    """Decreasing-eps continuation with warm starts.

    Stops early when a step hits the overflow cap; the returned list then
    holds the completed prefix plus the flagged step.
    """
    eps_schedule = list(eps_schedule)
    if any(b >= a for a, b in zip(eps_schedule, eps_schedule[1:])):
        raise ValueError("eps schedule must be strictly decreasing")
    results: list[MaximizerResult] = []
    init: Field | None = None
    for eps in eps_schedule:
        p = params.with_eps(eps)
        res = maximize_subcritical(mesh, p, basis=basis, init=init, opts=opts)
        results.append(res)
        if res.overflow:
            break
        init = res.u
    return results


def result_to_json(res: MaximizerResult) -> str:
    """Scalar summary (no nodal data) as a JSON document."""
    doc = {
        "beta": res.params.beta,
        "alpha": res.params.alpha,
        "eps": res.params.eps,
        "gamma": res.params.gamma,
        "value": res.value,
        "c": res.c,
        "x_peak": list(map(float, res.x_peak)),
        "peak_node": res.peak_node,
        "lambda_eps": res.lam,
        "norm": res.norm,
        "residual": res.residual,
        "iterations": res.iterations,
        "converged": res.converged,
        "overflow": res.overflow,
        "stalled": res.stalled,
    }
    return json.dumps(doc, indent=2, sort_keys=True)
