import math

import numpy as np
import pytest
from scipy.integrate import quad

from singtm import (
    bubble_energy,
    bubble_energy_asymptotic,
    bubble_mass,
    liouville_mass,
    liouville_solution,
    phi0,
)

BETAS = (0.1, 0.25, 0.5, 0.75)


def _mass_integrand(beta):
    g8 = 8.0 * math.pi * (1.0 - beta)
    return lambda s: 2.0 * math.pi * s ** (1.0 - 2.0 * beta) * np.exp(g8 * phi0(s, beta))


def test_profile_shape():
    for beta in BETAS:
        assert phi0(0.0, beta) == 0.0
        r = np.linspace(0.0, 50.0, 400)
        v = phi0(r, beta)
        assert v.shape == r.shape
        assert np.all(np.diff(v) < 0.0)  # strictly decreasing


def test_mass_closed_form():
    for beta in BETAS:
        assert bubble_mass(np.inf, beta) == 1.0
        f = _mass_integrand(beta)
        marks = [10.0 ** k for k in range(-3, 6)]
        q, _ = quad(f, 0.0, 1e6, points=marks, limit=400)
        assert abs(q - bubble_mass(1e6, beta)) < 1e-6
        # mass increases with R
        assert bubble_mass(1.0, beta) < bubble_mass(10.0, beta) < 1.0


def test_energy_closed_form():
    """Dirichlet energy of phi0 on B_R against adaptive radial quadrature.

    phi0(s) = -log(1 + a s^(2-2b)) / (4 pi (1-b)) with a = pi/(1-b), so the
    quadrature uses the hand-differentiated profile.
    """
    for beta in BETAS:
        a = math.pi / (1.0 - beta)
        p = 2.0 - 2.0 * beta

        def grad(s):
            return -a * p * s ** (p - 1.0) / (4.0 * math.pi * (1.0 - beta) * (1.0 + a * s**p))

        f = lambda s: 2.0 * math.pi * s * grad(s) ** 2
        for R in (1.0, 10.0, 100.0):
            q, _ = quad(f, 0.0, R, limit=400)
            assert bubble_energy(R, beta) == pytest.approx(q, rel=1e-8)


def test_energy_asymptotic_remainder():
    # remainder of the log expansion decays exactly like R^(2 beta - 2):
    # the fitted constant is stable along the R ladder
    for beta in BETAS:
        cs = []
        for R in (10.0, 100.0, 1000.0):
            rem = abs(bubble_energy(R, beta) - bubble_energy_asymptotic(R, beta))
            cs.append(rem * R ** (2.0 - 2.0 * beta))
        assert max(cs) < 2.0 * min(cs)


def test_liouville_solution():
    for beta in (0.1, 0.5):
        assert liouville_mass(beta) == pytest.approx(1.0 / (1.0 - beta), rel=1e-15)
        assert liouville_mass(beta) > 1.0
        g8 = 8.0 * math.pi * (1.0 - beta)
        f = lambda s: 2.0 * math.pi * s * np.exp(g8 * liouville_solution(np.array([s]), beta))[0]
        q, _ = quad(f, 0.0, np.inf, limit=400)
        assert q == pytest.approx(liouville_mass(beta), abs=1e-6)
        # pointwise PDE residual -(v'' + v'/r) = e^(8 pi (1-b) v) by central
        # differences at a generic radius
        d = 1e-4
        r0 = 0.7
        v = lambda s: liouville_solution(np.array([s]), beta)[0]
        lap = (v(r0 + d) - 2.0 * v(r0) + v(r0 - d)) / d**2 + (
            v(r0 + d) - v(r0 - d)
        ) / (2.0 * d * r0)
        assert -lap == pytest.approx(math.exp(g8 * v(r0)), rel=1e-5)


def test_accepts_points_and_radii():
    pts = np.array([[0.3, 0.4], [0.0, 0.0]])
    a = liouville_solution(pts, 0.5)
    b = liouville_solution(np.array([0.5, 0.0]), 0.5)
    np.testing.assert_allclose(a, b, rtol=1e-14)
