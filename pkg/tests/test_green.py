import math

import numpy as np
import pytest

from singtm import DomainSpec, build_mesh, solve_green, weighted_g_squared
from singtm.green import ResonanceError, a0, orthogonality_residuals


def test_unit_disk_constant(green32):
    # A0 = (1/2pi) log rho vanishes on the unit disk; the ring mesh is
    # symmetric enough that the discrete value is exact to rounding
    assert abs(green32.A0) < 1e-9
    assert a0(green32) == green32.A0


def test_scaled_disk_constant():
    for rho in (0.5, 2.0):
        m = build_mesh(DomainSpec.disk(rho), rho / 32.0)
        g = solve_green(m, 0.0)
        assert g.A0 == pytest.approx(math.log(rho) / (2.0 * math.pi), abs=1e-6)


def test_offcenter_polygon_constant():
    """Image-charge oracle: pole at distance d from the center of a radius
    rho disk gives A0 = (1/2pi) log((rho^2 - d^2)/rho)."""
    d = 0.3
    spec = DomainSpec.regular_polygon(64, 1.0, center=(d, 0.0))
    m = build_mesh(spec, 1.0 / 24.0)
    g = solve_green(m, 0.0)
    oracle = math.log(1.0 - d * d) / (2.0 * math.pi)
    assert g.A0 == pytest.approx(oracle, abs=1e-3)


def test_boundary_values_vanish(green32, disk32):
    vals = green32.nodal_values()
    assert np.max(np.abs(vals[disk32.boundary])) < 1e-12


def test_weighted_g_squared(green32):
    # int_B |x|^(-1) G^2 = 1/pi on the unit disk for beta = 1/2
    got = weighted_g_squared(green32, 0.5)
    assert got == pytest.approx(1.0 / math.pi, rel=1e-6)


def test_subspace_orthogonality(disk32, eigs32):
    basis = eigs32.basis_of_first_groups(1)
    lam = eigs32.distinct()
    g = solve_green(disk32, 0.5 * (lam[0] + lam[1]), basis=basis)
    res = orthogonality_residuals(g)
    assert np.max(np.abs(res)) < 1e-10
    assert math.isfinite(g.A0)


def test_resonance_guard(disk32, eigs32):
    with pytest.raises(ResonanceError):
        solve_green(disk32, eigs32.eigenvalues[0])
