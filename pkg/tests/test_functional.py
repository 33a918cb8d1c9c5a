import math

import numpy as np
import pytest

from singtm import Field, OVERFLOW_CAP, TMParams, integrate_singular, tm_value, tm_value_ex
from singtm.functional import ascent_direction, el_residual, lambda_eps, nonlinear_system


def _random_field(mesh, rng, amp=0.3):
    return Field(mesh, amp * rng.standard_normal(mesh.n_interior))


def test_params_defaults():
    p = TMParams(0.25, eps=0.05)
    assert p.gamma == pytest.approx(4.0 * math.pi * (1.0 - 0.25 - 0.05), rel=1e-15)
    q = p.with_eps(0.01)
    assert q.eps == 0.01 and q.beta == p.beta
    override = TMParams(0.25, gamma=3.0)
    assert override.gamma == 3.0


def test_value_at_zero_is_weighted_volume(disk16):
    p = TMParams(0.5)
    u0 = Field(disk16, np.zeros(disk16.n_interior))
    wv = integrate_singular(disk16, lambda x: np.ones(len(x)), beta=0.5)
    assert tm_value(u0, p) == pytest.approx(wv, rel=1e-12)


def test_value_lower_bound_and_symmetry(disk16):
    p = TMParams(0.5, eps=0.1)
    rng = np.random.default_rng(1)
    wv = integrate_singular(disk16, lambda x: np.ones(len(x)), beta=0.5)
    for _ in range(5):
        u = _random_field(disk16, rng)
        v = tm_value(u, p)
        assert v >= wv  # e^t >= 1
        assert tm_value(Field(disk16, -u.values), p) == v
        # nodal |u| dominates |nodal u| pointwise on sign-crossing elements
        assert tm_value(Field(disk16, np.abs(u.values)), p) >= v - 1e-12


def test_gradient_matches_finite_differences(disk16):
    """d/dt TM(u + t v) = 2 gamma int w u e^(gamma u^2) v, i.e. the load
    vector assembled by nonlinear_system."""
    p = TMParams(0.5, alpha=1.0, eps=0.05)
    rng = np.random.default_rng(7)
    t = 1e-6
    for _ in range(8):
        u = _random_field(disk16, rng)
        v = rng.standard_normal(disk16.n_interior)
        v /= np.linalg.norm(v)
        _, load, _, overflow = nonlinear_system(u, p)
        assert not overflow
        analytic = 2.0 * p.gamma * float(load @ v)
        up = Field(disk16, u.values + t * v)
        um = Field(disk16, u.values - t * v)
        fd = (tm_value(up, p) - tm_value(um, p)) / (2.0 * t)
        assert fd == pytest.approx(analytic, rel=1e-5)


def test_lambda_eps_is_gamma_derivative(disk16):
    # d/dgamma TM = int w u^2 e^(gamma u^2) = lambda_eps
    rng = np.random.default_rng(3)
    u = _random_field(disk16, rng)
    base = TMParams(0.5, eps=0.05)
    lam = lambda_eps(u, base)
    dg = 1e-6
    fd = (
        tm_value(u, TMParams(0.5, gamma=base.gamma + dg))
        - tm_value(u, TMParams(0.5, gamma=base.gamma - dg))
    ) / (2.0 * dg)
    assert lam == pytest.approx(fd, rel=1e-6)
    assert lam > 0.0


def test_overflow_flag(disk16):
    p = TMParams(0.5, eps=0.01)
    rng = np.random.default_rng(4)
    u = _random_field(disk16, rng, amp=40.0)
    ev = tm_value_ex(u, p)
    assert ev.overflow
    assert math.isfinite(ev.value)
    # the cap keeps every point value below exp(OVERFLOW_CAP)
    assert ev.value <= math.exp(OVERFLOW_CAP) * 10.0


def test_fixed_point_consistency(max16):
    """At a converged maximizer the Riesz ascent direction reproduces u."""
    u, p = max16.u, max16.params
    d = ascent_direction(u, p)
    assert np.max(np.abs(d.values - u.values)) < 1e-5
    assert el_residual(u, p) < 1e-6
