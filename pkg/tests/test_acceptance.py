"""End-to-end acceptance checks for the toolkit, one test per criterion.

Each test pins the tolerances of one advertised property; ``pytest -v``
prints one PASS/FAIL line per criterion.  The heavyweight artifacts (the
h = 1/64 continuation sweep and eigenpairs) are shared module-scoped
fixtures so the whole file stays inside a few minutes.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import jn_zeros

from singtm import (
    DomainSpec,
    MaximizerOptions,
    OVERFLOW_CAP,
    TMParams,
    build_mesh,
    build_test_function,
    bubble_energy,
    bubble_energy_asymptotic,
    bubble_mass,
    continuation_sweep,
    eigenpairs,
    integrate_singular,
    l2_inner,
    liouville_mass,
    liouville_solution,
    maximize_subcritical,
    phi0,
    project_test_function,
    solve_green,
    sweep_diagnostics,
    truncation_energy,
    upper_bound,
    verify_exceeds,
)
from singtm.geometry import SingularQuadrature, quadrature_tables
from singtm.green import orthogonality_residuals

BETAS = (0.1, 0.25, 0.5, 0.75)
SCHEDULE = (0.3, 0.2, 0.14, 0.1, 0.07, 0.05, 0.035, 0.025)


@pytest.fixture(scope="module")
def sweep64(disk64):
    results = continuation_sweep(disk64, TMParams(0.5, alpha=0.0, eps=SCHEDULE[0]), SCHEDULE)
    assert all(r.converged for r in results)
    return results


@pytest.fixture(scope="module")
def eigs64(disk64):
    return eigenpairs(disk64, 6)


def _trend_fraction(seq, increasing):
    pairs = list(zip(seq, seq[1:]))
    good = sum(1 for a, b in pairs if (b >= a if increasing else b <= a))
    return good / len(pairs)


def test_01_bubble_mass():
    for beta in BETAS:
        assert bubble_mass(np.inf, beta) == 1.0
        g8 = 8.0 * math.pi * (1.0 - beta)
        f = lambda s: 2.0 * math.pi * s ** (1.0 - 2.0 * beta) * math.exp(g8 * phi0(s, beta))
        q, _ = quad(f, 0.0, 1e6, points=[10.0 ** k for k in range(-3, 6)], limit=400)
        assert abs(q - bubble_mass(1e6, beta)) < 1e-6
    print("criterion 01 bubble mass: PASS")


def test_02_bubble_energy():
    for beta in BETAS:
        a = math.pi / (1.0 - beta)
        p = 2.0 - 2.0 * beta
        grad = lambda s: -a * p * s ** (p - 1.0) / (4.0 * math.pi * (1.0 - beta) * (1.0 + a * s**p))
        f = lambda s: 2.0 * math.pi * s * grad(s) ** 2
        for R in (1.0, 10.0, 100.0):
            q, _ = quad(f, 0.0, R, limit=400)
            assert bubble_energy(R, beta) == pytest.approx(q, rel=1e-8)
        fitted = [
            abs(bubble_energy(R, beta) - bubble_energy_asymptotic(R, beta)) * R**p
            for R in (10.0, 100.0, 1000.0)
        ]
        assert max(fitted) < 2.0 * min(fitted)
    print("criterion 02 bubble energy: PASS")


def test_03_liouville_constants():
    for beta in BETAS:
        mass = liouville_mass(beta)
        assert mass == 1.0 / (1.0 - beta)
        assert mass > 1.0
        g8 = 8.0 * math.pi * (1.0 - beta)
        f = lambda s: 2.0 * math.pi * s * math.exp(g8 * liouville_solution(np.array([s]), beta)[0])
        q, _ = quad(f, 0.0, np.inf, limit=400)
        assert abs(q - mass) < 1e-6
    print("criterion 03 Liouville constants: PASS")


def test_04_spectral_oracle(eigs32):
    j01 = jn_zeros(0, 1)[0] ** 2
    j11 = jn_zeros(1, 1)[0] ** 2
    d32 = eigs32.distinct()
    assert abs(d32[0] - j01) / j01 < 0.01
    assert abs(d32[1] - j11) / j11 < 0.01
    ladder = [d32[:2]]
    for h in (1.0 / 16.0, 1.0 / 8.0):
        sd = eigenpairs(build_mesh(DomainSpec.disk(1.0), h), 4)
        ladder.append(sd.distinct()[:2])
    for k, exact in enumerate((j01, j11)):
        vals = [row[k] for row in ladder]
        assert all(v > exact for v in vals)  # conforming: above the limit
        assert vals[0] < vals[1] < vals[2]  # and decreasing under refinement
    print(f"criterion 04 spectral oracle: PASS (lam1={d32[0]:.5f}, lam2={d32[1]:.5f})")


def test_05_green_constant(green64):
    assert abs(green64.A0) <= 1e-3
    for rho in (0.5, 2.0):
        m = build_mesh(DomainSpec.disk(rho), rho / 64.0)
        g = solve_green(m, 0.0)
        assert abs(g.A0 - math.log(rho) / (2.0 * math.pi)) <= 1e-3
    print("criterion 05 Green constant: PASS")


def test_06_maximizer_contract(disk64, eigs64):
    lam1 = eigs64.distinct()[0]
    for alpha in (0.0, 0.5 * lam1):
        values = []
        for eps in (0.1, 0.05, 0.02):
            res = maximize_subcritical(disk64, TMParams(0.5, alpha=alpha, eps=eps))
            assert res.converged
            assert abs(res.norm - 1.0) <= 1e-8
            assert res.residual <= 1e-6
            assert res.value >= 2.0 * math.pi
            assert np.min(res.u.values) >= 0.0
            values.append(res.value)
        # Lambda is nonincreasing in eps, i.e. grows as eps shrinks
        assert values[0] <= values[1] <= values[2]
    print("criterion 06 maximizer contract: PASS")


def test_07_blowup_trends(sweep64, green64, disk64):
    rows = sweep_diagnostics(sweep64, g=green64)
    cs = [r.c for r in rows]
    xs = [r.x_peak_norm for r in rows]
    efs = [r.energy_fraction for r in rows]
    assert _trend_fraction(cs, increasing=True) >= 0.8
    assert _trend_fraction(xs, increasing=False) >= 0.8
    assert xs[-1] <= disk64.h  # peak sits at the origin within mesh resolution
    assert _trend_fraction(efs, increasing=True) >= 0.8
    # the rescaled ball only fits inside the disk once eps is small enough;
    # the profile deviation must fall monotonically after its first sample
    psd = [r.profile_sup_dev for r in rows if not math.isnan(r.profile_sup_dev)]
    assert len(psd) >= 4
    assert _trend_fraction(psd[1:], increasing=False) >= 0.8
    assert psd[-1] < psd[0]
    print(f"criterion 07 blow-up trends: PASS (profile dev {psd[0]:.3f} -> {psd[-1]:.3f})")


def test_08_truncation_split(sweep64):
    for res in sweep64:
        for gamma in (0.25, 0.5, 0.75):
            ts = truncation_energy(res.u, gamma, res.c)
            assert abs(ts.identity_gap) <= 1e-10
    deepest = sweep64[-1]
    ts = truncation_energy(deepest.u, 0.5, deepest.c)
    frac = ts.low / ts.total
    assert 0.35 <= frac <= 0.65
    print(f"criterion 08 truncation split: PASS (low fraction {frac:.4f})")


def test_09_bound_bracketing(disk64, green64, sweep64):
    exact = 2.0 * math.pi + 2.0 * math.pi * math.e
    assert upper_bound(0.5, 0.0, 2.0 * math.pi) == pytest.approx(exact, rel=1e-12)
    report = verify_exceeds(disk64, green64, 0.5, 0.0, (1e-2, 1e-3, 1e-4))
    assert report.bound == pytest.approx(exact, rel=1e-3)
    for row in report.rows[-2:]:
        assert row.excess > 0.0
    assert 0.5 <= report.rows[-1].ratio <= 2.0

    sup = max(r.value for r in sweep64)
    best = max(sweep64, key=lambda r: r.value)
    tabs = quadrature_tables(disk64, SingularQuadrature(0.5, order=5, depth=3))
    refined = tabs.integrate(
        np.exp(np.minimum(best.params.gamma * tabs.values(best.u.full()) ** 2, OVERFLOW_CAP))
    )
    bar = abs(refined - best.value) + 1e-8
    assert sup <= report.bound + bar
    print(
        f"criterion 09 bound bracketing: PASS (sup {sup:.4f} <= bound {report.bound:.4f}, "
        f"excess {report.rows[-1].excess:.4f}, ratio {report.rows[-1].ratio:.4f})"
    )


def test_10_subspace_mode(disk64, eigs64):
    lam = eigs64.distinct()
    alpha = 0.5 * (lam[0] + lam[1])
    basis = eigs64.basis_of_first_groups(1)

    g = solve_green(disk64, alpha, basis=basis)
    assert np.max(np.abs(orthogonality_residuals(g))) <= 1e-6

    res = maximize_subcritical(
        disk64,
        TMParams(0.5, alpha=alpha, eps=0.05),
        basis=basis,
        opts=MaximizerOptions(max_iter=6000),
    )
    assert abs(l2_inner(res.u, basis[0])) <= 1e-8

    # pairing decay of the glued family needs the log core resolved well
    # below the smallest gluing radius, hence the much finer mesh
    m256 = build_mesh(DomainSpec.disk(1.0), 1.0 / 256.0)
    sd256 = eigenpairs(m256, 4)
    lam256 = sd256.distinct()
    g256 = solve_green(
        m256, 0.5 * (lam256[0] + lam256[1]), basis=sd256.basis_of_first_groups(1)
    )
    ladder = []
    for eps in (1e-2, 1e-3, 1e-4):
        tf = build_test_function(m256, g256, 0.5, eps)
        ptf = project_test_function(tf, sd256, count=1)
        ladder.append(abs(ptf.pairings[0]) * math.log(eps) ** 2)
    assert all(a > b for a, b in zip(ladder, ladder[1:]))
    print(
        "criterion 10 subspace mode: PASS "
        f"(pairing ladder {', '.join(f'{v:.3e}' for v in ladder)})"
    )
