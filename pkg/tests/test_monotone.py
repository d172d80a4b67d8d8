"""Monotone iteration: recoveries, chain/sandwich invariants, exhaustion."""

import numpy as np
import pytest

from chernsolve.errors import ConfigurationError, ConvergenceError
from chernsolve.geometry import Bounds, ConformalMetric, model_metric
from chernsolve.grids import DiscreteField, DomainExhaustion, Grid, field_from
from chernsolve.monotone import (
    ExhaustionResult,
    SemilinearProblem,
    exhaustion_solve,
    monotonicity_shift,
    solve_on_domain,
)

from oracles import nonexist_center_closed_form


def _flat_like(n, scalar):
    """Flat-coefficient metric with a constant scalar curvature surrogate."""
    return ConformalMetric(n, lambda r: np.zeros_like(np.asarray(r, float)),
                           lambda r: np.full_like(np.asarray(r, float), scalar),
                           np.inf, f"flat_s{scalar}")


def _quadratic_lower(grid, beta):
    return field_from(grid, lambda r: beta * (r ** 2 - grid.extent ** 2))


def _poincare_bounds(grid):
    lower = _quadratic_lower(grid, 0.25)  # handles max(-K) = 2 on a flat base
    data_max = float(np.log(2.0 / (1.0 - grid.r[grid.active_mask].max() ** 2)))
    upper = field_from(grid, data_max + 0.05)
    return Bounds(lower, upper)


# ---------------------------------------------------------------------------
# recoveries against the catalog models
# ---------------------------------------------------------------------------

def test_poincare_recovery_radial():
    g = Grid("radial", 0.005, 0.9, 1)
    flat = model_metric("flat")
    sp = SemilinearProblem(flat, -2.0)
    bounds = _poincare_bounds(g)
    phi = lambda r: np.log(2.0 / (1.0 - r ** 2))
    res = solve_on_domain(sp, bounds, boundary=phi, tol=1e-7, max_iter=3000)
    assert res.converged
    err = np.abs(res.solution.values - phi(g.r))
    assert float(err[g.active_mask].max()) < 5e-4


def test_poincare_recovery_tensor2d_coarse():
    g = Grid("tensor2d", 0.02, 0.9, 1)
    flat = model_metric("flat")
    sp = SemilinearProblem(flat, -2.0)
    bounds = _poincare_bounds(g)
    phi = lambda r: np.log(2.0 / (1.0 - r ** 2))
    res = solve_on_domain(sp, bounds, boundary=phi, tol=1e-6, max_iter=3000)
    act = g.active_mask
    err = np.abs(res.solution.values[act] - phi(g.r[act]))
    assert float(err.max()) < 5e-3


def test_ball_n2_recovery_radial():
    g = Grid("radial", 0.0045, 0.9, 2)
    flat = model_metric("flat", n=2)
    sp = SemilinearProblem(flat, lambda r: 4.0 * r ** 2 - 8.0)
    lower = _quadratic_lower(g, 0.5)  # max(-K) = 8, beta = 8/(8*2)
    phi = lambda r: 2.0 * np.log(2.0 / (1.0 - r ** 2))
    upper = field_from(g, float(phi(0.9)) + 0.05)
    res = solve_on_domain(SemilinearProblem(flat, lambda r: 4.0 * r ** 2 - 8.0),
                          Bounds(lower, upper), boundary=phi, tol=1e-7,
                          max_iter=3000)
    err = np.abs(res.solution.values - phi(g.r))
    assert float(err[g.active_mask].max()) < 1e-3


# ---------------------------------------------------------------------------
# chain / sandwich invariants
# ---------------------------------------------------------------------------

def test_chain_is_monotone_and_sandwiched():
    g = Grid("radial", 0.01, 0.9, 1)
    sp = SemilinearProblem(model_metric("flat"), -2.0)
    bounds = _poincare_bounds(g)
    phi = lambda r: np.log(2.0 / (1.0 - r ** 2))
    res = solve_on_domain(sp, bounds, boundary=phi, tol=1e-9, max_iter=5000)
    scale = max(1.0, float(np.abs(bounds.upper.values).max()))
    assert min(res.trace.min_increment) >= -1e-12 * scale
    act = g.active_mask
    assert np.all(res.solution.values[act] >= bounds.lower.values[act] - 1e-9)
    assert np.all(res.solution.values[act] <= bounds.upper.values[act] + 1e-9)
    assert res.trace.sup_delta[-1] <= 1e-9


def test_upper_start_decreasing_chain_same_limit():
    g = Grid("radial", 0.02, 0.9, 1)
    sp = SemilinearProblem(model_metric("flat"), -2.0)
    bounds = _poincare_bounds(g)
    phi = lambda r: np.log(2.0 / (1.0 - r ** 2))
    up = solve_on_domain(sp, bounds, boundary=phi, tol=1e-11, max_iter=8000,
                         start="upper")
    lo = solve_on_domain(sp, bounds, boundary=phi, tol=1e-11, max_iter=8000,
                         start="lower")
    assert min(up.trace.min_increment) >= -1e-12  # decreasing chain, signed
    gap = np.abs(up.solution.values - lo.solution.values)
    assert float(gap.max()) < 1e-8


def test_fixed_point_in_one_sweep():
    """K = base scalar makes u = 0 exact; the solver stops immediately."""
    g = Grid("radial", 0.05, 2.0, 1)
    sp = SemilinearProblem(_flat_like(1, -1.0), -1.0)
    zero = field_from(g, 0.0)
    res = solve_on_domain(sp, Bounds(zero, zero), boundary=0.0, tol=1e-12,
                          max_iter=10)
    assert res.iterations == 1
    assert float(np.abs(res.solution.values).max()) < 1e-13
    assert res.residual < 1e-12


# ---------------------------------------------------------------------------
# guards
# ---------------------------------------------------------------------------

def test_boundary_data_must_respect_barriers():
    g = Grid("radial", 0.05, 1.0, 1)
    sp = SemilinearProblem(model_metric("flat"), -2.0)
    bounds = Bounds(field_from(g, -1.0), field_from(g, 1.0))
    with pytest.raises(ConfigurationError):
        solve_on_domain(sp, bounds, boundary=5.0)


def test_shift_override_must_dominate():
    g = Grid("radial", 0.05, 0.9, 1)
    sp = SemilinearProblem(model_metric("flat"), -2.0)
    bounds = _poincare_bounds(g)
    with pytest.raises(ConfigurationError):
        solve_on_domain(sp, bounds, shift=0.5)


def test_exhausted_budget_raises_with_trace():
    g = Grid("radial", 0.01, 0.9, 1)
    sp = SemilinearProblem(model_metric("flat"), -2.0)
    bounds = _poincare_bounds(g)
    phi = lambda r: np.log(2.0 / (1.0 - r ** 2))
    with pytest.raises(ConvergenceError) as exc:
        solve_on_domain(sp, bounds, boundary=phi, tol=1e-9, max_iter=3)
    assert exc.value.trace is not None
    assert len(exc.value.trace) == 3


# ---------------------------------------------------------------------------
# exhaustion by nested balls
# ---------------------------------------------------------------------------

def test_exhaustion_stabilizes_for_matching_curvature():
    """K = S = -1: u = 0 on every ball, probe differences vanish."""
    base = Grid("radial", 0.05, 8.0, 1)
    sp = SemilinearProblem(_flat_like(1, -1.0), -1.0)
    zero = field_from(base, 0.0)
    ex = DomainExhaustion(base, (2.0, 4.0, 8.0))
    res = exhaustion_solve(sp, Bounds(zero, zero), ex, probe_radius=1.0,
                           boundary=0.0, tol=1e-10)
    assert res.stabilized and not res.diverging
    assert max(res.probe_diffs) < 1e-9


def test_exhaustion_flags_divergence_for_flat_negative():
    """S = 0, K = -1 has no bounded entire solution: zero-boundary ball
    solutions drift down forever and the probe differences stop shrinking."""
    base = Grid("radial", 0.02, 16.0, 1)
    flat = model_metric("flat")
    sp = SemilinearProblem(flat, -1.0)
    lower = _quadratic_lower(base, 1.0 / 8.0)
    upper = field_from(base, 0.0)
    ex = DomainExhaustion(base, (2.0, 4.0, 8.0, 16.0))
    res = exhaustion_solve(sp, Bounds(lower, upper), ex, probe_radius=1.0,
                           boundary=0.0, tol=1e-7, max_iter=20000)
    assert res.diverging and not res.stabilized
    # center values follow the independent closed form
    for grid_res, R in zip(res.levels, ex.radii):
        assert grid_res.solution.values[0] == pytest.approx(
            nonexist_center_closed_form(R), abs=2e-3)


def test_exhaustion_probe_must_fit():
    base = Grid("radial", 0.05, 8.0, 1)
    sp = SemilinearProblem(_flat_like(1, -1.0), -1.0)
    zero = field_from(base, 0.0)
    ex = DomainExhaustion(base, (2.0, 4.0))
    with pytest.raises(ConfigurationError):
        exhaustion_solve(sp, Bounds(zero, zero), ex, probe_radius=3.0)
