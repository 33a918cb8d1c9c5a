import json
import math

import numpy as np
import pytest

from singtm import (
    MaximizerOptions,
    TMParams,
    continuation_sweep,
    integrate_singular,
    l2_inner,
    maximize_subcritical,
)
from singtm.maximizer import result_to_json


def test_contract(max16, disk16):
    """Unit norm, small EL residual, value above the weighted volume,
    positive maximizer."""
    res = max16
    assert res.converged and not res.overflow
    assert abs(res.norm - 1.0) < 1e-8
    assert res.residual <= 1e-6
    wv = integrate_singular(disk16, lambda x: np.ones(len(x)), beta=0.5)
    assert res.value > wv
    assert np.min(res.u.values) >= 0.0
    assert res.c == pytest.approx(np.max(res.u.full()), rel=1e-15)
    # radially symmetric data concentrates at the origin
    assert np.hypot(*res.x_peak) == 0.0
    assert res.lam > 0.0


def test_restart_is_a_fixed_point(max16, disk16):
    res2 = maximize_subcritical(disk16, max16.params, init=max16.u)
    assert res2.iterations <= 2
    assert res2.value == pytest.approx(max16.value, rel=1e-12)


def test_continuation_monotone(disk16):
    p = TMParams(0.5, alpha=0.0, eps=0.2)
    results = continuation_sweep(disk16, p, (0.2, 0.1, 0.05))
    assert all(r.converged for r in results)
    vals = [r.value for r in results]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    # the schedule is recorded on the results
    assert [r.params.eps for r in results] == [0.2, 0.1, 0.05]


def test_multistart_deterministic(disk16):
    p = TMParams(0.5, alpha=0.0, eps=0.1)
    opts = MaximizerOptions(multistart=3, seed=11)
    a = maximize_subcritical(disk16, p, opts=opts)
    b = maximize_subcritical(disk16, p, opts=opts)
    assert a.value == b.value
    np.testing.assert_array_equal(a.u.values, b.u.values)


def test_shifted_norm_value_grows(disk16, eigs32):
    # alpha > 0 weakens the norm constraint, so the supremum grows
    p0 = TMParams(0.5, alpha=0.0, eps=0.1)
    p1 = TMParams(0.5, alpha=1.5, eps=0.1)
    v0 = maximize_subcritical(disk16, p0).value
    v1 = maximize_subcritical(disk16, p1).value
    assert v1 > v0


def test_subspace_orthogonality(disk32, eigs32):
    """Projected ascent keeps the iterates L2-orthogonal to the removed
    eigenspace at machine precision, whatever the convergence state."""
    basis = eigs32.basis_of_first_groups(1)
    lam = eigs32.distinct()
    p = TMParams(0.5, alpha=0.5 * (lam[0] + lam[1]), eps=0.1)
    res = maximize_subcritical(
        disk32, p, basis=basis, opts=MaximizerOptions(max_iter=300)
    )
    assert abs(res.norm - 1.0) < 1e-8
    for b in basis:
        assert abs(l2_inner(res.u, b)) < 1e-10
    assert res.value > 0.0 and math.isfinite(res.value)


def test_result_to_json(max16):
    doc = json.loads(result_to_json(max16))
    for key in ("value", "c", "lambda_eps", "norm", "residual", "iterations", "converged"):
        assert key in doc
    assert doc["converged"] is True
    assert doc["value"] == max16.value
