import json
import math

import numpy as np
import pytest

from singtm import (
    DomainSpec,
    build_mesh,
    build_test_function,
    capacity_energy,
    l2_inner,
    project_test_function,
    solve_green,
    upper_bound,
    verify_exceeds,
)
from singtm.bounds import bound_report_csv, bound_report_json
from singtm.bounds import test_function_tm as family_tm
from singtm.spectral import operators

EPS_LADDER = (1e-2, 1e-3, 1e-4)


def test_upper_bound_closed_form():
    # beta = 1/2, A0 = 0, weighted volume 2 pi: the bound is 2 pi (1 + e)
    assert upper_bound(0.5, 0.0, 2.0 * math.pi) == pytest.approx(
        2.0 * math.pi * (1.0 + math.e), rel=1e-14
    )
    # the weighted volume enters additively ...
    assert upper_bound(0.5, 0.0, 5.0) == pytest.approx(5.0 + 2.0 * math.pi * math.e, rel=1e-14)
    # ... and A0 exponentially, with rate 4 pi (1 - beta)
    for beta in (0.25, 0.5):
        base = upper_bound(beta, 0.0, 1.0) - 1.0
        shift = upper_bound(beta, 0.1, 1.0) - 1.0
        assert shift / base == pytest.approx(
            math.exp(4.0 * math.pi * (1.0 - beta) * 0.1), rel=1e-12
        )


def test_capacity_energy():
    s, i, delta, R, r_eps, beta = 1.3, 0.2, 0.4, 7.0, 1e-5, 0.3
    r_in = R * r_eps ** (1.0 / (1.0 - beta))
    # discrete minimization over radial piecewise-linear functions in log r
    # lands exactly on the harmonic interpolant
    t = np.linspace(math.log(r_in), math.log(delta), 2001)
    h = s + (i - s) * (t - t[0]) / (t[-1] - t[0])
    disc = 2.0 * math.pi * np.sum(np.diff(h) ** 2 / np.diff(t))
    assert capacity_energy(s, i, delta, R, r_eps, beta) == pytest.approx(disc, rel=1e-12)
    # wider annulus -> lower capacity; bigger jump -> quadratically higher
    assert capacity_energy(s, i, 0.8, R, r_eps, beta) < capacity_energy(s, i, 0.4, R, r_eps, beta)
    assert capacity_energy(2.0 * s, 2.0 * i, delta, R, r_eps, beta) == pytest.approx(
        4.0 * capacity_energy(s, i, delta, R, r_eps, beta), rel=1e-12
    )


def test_family_structure(disk32, green32):
    """Gluing constants of the matched test family: exact center value,
    machine-zero glue defects, norms approaching 1 from above."""
    beta = 0.5
    norm_errs = []
    origin = int(np.argmin((disk32.nodes**2).sum(axis=1)))
    for eps in EPS_LADDER:
        tf = build_test_function(disk32, green32, beta, eps)
        assert tf.semi_analytic
        assert tf.field.full()[origin] == pytest.approx(tf.c + tf.b / tf.c, abs=1e-12)
        assert abs(tf.glue_defect_inner) < 1e-12
        assert abs(tf.glue_defect_outer) < 1e-12
        # b splits into the bubble constant plus the finite-R defect
        assert tf.b - tf.b_defect == pytest.approx(1.0 / (4.0 * math.pi * (1.0 - beta)), rel=1e-14)
        assert 0.0 < tf.b_defect < tf.b
        # snapping the gluing radius to a mesh ring rescales R = r1 / eps
        assert tf.R == pytest.approx(tf.r1 / eps, rel=1e-12)
        assert tf.R >= tf.R_nominal * (1.0 - 1e-12)
        assert 0.0 < tf.r1 < tf.r2 < 1.0
        norm_errs.append(abs(tf.norm_sq - 1.0))
    assert all(a > b for a, b in zip(norm_errs, norm_errs[1:]))
    assert norm_errs[0] < 5e-3


def test_value_decreases_with_scale(disk32, green32):
    tf = build_test_function(disk32, green32, 0.5, 1e-3)
    vals = [family_tm(tf, scale=s)[0] for s in (1.0, 1.05, 1.2, 2.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert all(math.isfinite(v) and v > 0 for v in vals)


def test_report_and_bracketing(disk32, green32):
    report = verify_exceeds(disk32, green32, 0.5, 0.0, EPS_LADDER)
    assert report.bound == pytest.approx(2.0 * math.pi * (1.0 + math.e), rel=1e-3)
    assert report.weighted_g2 == pytest.approx(1.0 / math.pi, rel=1e-6)
    assert [row.eps for row in report.rows] == list(EPS_LADDER)
    for row in report.rows[1:]:
        assert row.excess > 0.0  # the certified lower bound clears the bound
    last = report.rows[-1]
    assert last.tm == pytest.approx(report.bound + last.excess, rel=1e-12)
    assert 0.0 < last.ratio < 2.0
    assert math.isfinite(last.tm_bar) and last.tm_bar < 1e-3

    body = bound_report_csv(report)
    lines = body.strip().splitlines()
    assert lines[0].startswith("eps,")
    assert len(lines) == 1 + len(EPS_LADDER)
    doc = json.loads(bound_report_json(report))
    assert doc["bound"] == report.bound
    assert len(doc["rows"]) == len(EPS_LADDER)


def test_parallel_rows_identical(disk16):
    g = solve_green(disk16, 0.0)
    seq = verify_exceeds(disk16, g, 0.5, 0.0, (1e-2, 1e-3), jobs=1)
    par = verify_exceeds(disk16, g, 0.5, 0.0, (1e-2, 1e-3), jobs=2)
    for a, b in zip(seq.rows, par.rows):
        assert a == b


def test_projection(disk32, green32, eigs32):
    tf = build_test_function(disk32, green32, 0.5, 1e-3)
    ptf = project_test_function(tf, eigs32, count=1)
    assert len(ptf.pairings) == 1
    assert abs(l2_inner(ptf.field, eigs32.fields[0])) < 1e-12
    # renormalization is exact in the discrete norm
    ops = operators(disk32)
    v = ptf.field.values
    q = float(v @ (ops.K @ v))
    assert q == pytest.approx(1.0, abs=1e-10)
    assert ptf.norm_sq_nodal == 1.0


def test_nodal_fallback_off_ring_meshes():
    """On a polygon the closed-form pieces do not apply; the value falls
    back to plain quadrature of the normalized field with no error bar."""
    spec = DomainSpec.regular_polygon(6, 1.0)
    m = build_mesh(spec, 1.0 / 16.0)
    g = solve_green(m, 0.0)
    tf = build_test_function(m, g, 0.5, 1e-2)
    assert not tf.semi_analytic
    val, bar = family_tm(tf)
    assert math.isfinite(val) and val > 0.0
    assert math.isnan(bar)
