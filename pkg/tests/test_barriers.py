"""Barrier constructions and their discrete verification."""

import math

import numpy as np
import pytest

from chernsolve.errors import BarrierConstructionError, ConfigurationError
from chernsolve.barriers import (
    auxiliary_phi,
    bump_profile,
    cutoff_function,
    epsilon_threshold,
    lower_constant,
    local_upper_bound,
    per_domain_upper_constant,
    quadratic_subsolution,
    reports_to_csv,
    sign_changing_upper_bump,
    standard_upper_bump,
    verified_bounds,
    verify_subsolution,
    verify_supersolution,
)
from chernsolve.geometry import Bounds, ConformalMetric, chern_laplacian, model_metric
from chernsolve.grids import DiscreteField, Grid, field_from
from chernsolve.monotone import SemilinearProblem, solve_on_domain


def _flat_like(n, scalar):
    return ConformalMetric(n, lambda r: np.zeros_like(np.asarray(r, float)),
                           lambda r: np.full_like(np.asarray(r, float), scalar),
                           np.inf, f"flat_s{scalar}")


# ---------------------------------------------------------------------------
# verification basics
# ---------------------------------------------------------------------------

def test_verify_flags_the_obvious():
    g = Grid("radial", 0.02, 1.0, 1)
    m = _flat_like(1, -2.0)
    # u = 0: defect = k - K = -2 + 2 = 0 -> both sides pass at K = -2
    zero = field_from(g, 0.0)
    assert verify_subsolution(m, -2.0, zero).ok
    assert verify_supersolution(m, -2.0, zero).ok
    # u = +1 makes the growth term dominate: supersolution only
    one = field_from(g, 1.0)
    assert verify_supersolution(m, -2.0, one).ok
    assert not verify_subsolution(m, -2.0, one).ok
    # u = -1: the other way around
    neg = field_from(g, -1.0)
    assert verify_subsolution(m, -2.0, neg).ok
    assert not verify_supersolution(m, -2.0, neg).ok


def test_reports_csv_shape():
    g = Grid("radial", 0.02, 1.0, 1)
    m = _flat_like(1, -2.0)
    rep = verify_subsolution(m, -2.0, field_from(g, 0.0))
    text = reports_to_csv([("lower", rep)])
    lines = text.strip().splitlines()
    assert lines[0] == "name,kind,ok,margin,scale,slack"
    assert lines[1].startswith("lower,subsolution,1,")


# ---------------------------------------------------------------------------
# constants and simple profiles
# ---------------------------------------------------------------------------

def test_lower_constant_poincare_value_and_validity():
    g = Grid("radial", 0.01, 0.9, 1)
    m = _flat_like(1, -2.0)
    K = lambda r: -1.0 - 3.0 * np.exp(-((r / 0.3) ** 2))  # in [-4, -1]
    low = lower_constant(m, K, g)
    assert low.values[0] == pytest.approx(0.5 * math.log(2.0 / 4.0))
    assert verify_subsolution(m, K, low).ok


def test_lower_constant_needs_negative_base():
    g = Grid("radial", 0.01, 0.9, 1)
    with pytest.raises(BarrierConstructionError):
        lower_constant(model_metric("flat"), -1.0, g)


def test_quadratic_subsolution_flat_only():
    g = Grid("radial", 0.01, 2.0, 1)
    flat = model_metric("flat")
    low = quadratic_subsolution(flat, -1.0, g)
    # beta = 1/8, value at the rim is 0
    assert low.values[g.m] == pytest.approx(0.0)
    assert low.values[0] == pytest.approx(-4.0 / 8.0)
    assert verify_subsolution(flat, -1.0, low).ok
    with pytest.raises(BarrierConstructionError):
        quadratic_subsolution(model_metric("poincare_disk"), -1.0,
                              Grid("radial", 0.01, 0.9, 1))


def test_bump_profile_closed_form():
    # -2 lap u0 = 2 on the unit disk, zero edge: u0 = (1 - r^2)/4
    g = Grid("radial", 0.01, 1.0, 1)
    flat = model_metric("flat")
    u0 = bump_profile(flat, g, 2.0)
    assert np.max(np.abs(u0.values - (1.0 - g.r ** 2) / 4.0)) < 1e-10


def test_cutoff_smoothstep_values():
    g = Grid("radial", 0.01, 1.0, 1)
    phi = cutoff_function(g, 0.3, 0.6)
    r = g.r
    assert np.all(phi.values[r <= 0.3] == 1.0)
    assert np.all(phi.values[r >= 0.6] == 0.0)
    mid = phi.values[(r > 0.3) & (r < 0.6)]
    assert np.all((mid > 0) & (mid < 1))
    # midpoint of the quintic smoothstep is exactly 1/2
    k = int(round(0.45 / g.h))
    assert phi.values[k] == pytest.approx(0.5, abs=1e-12)


# ---------------------------------------------------------------------------
# bump-based upper barriers
# ---------------------------------------------------------------------------

def _a4_setup(h=0.01, R=1.5):
    g = Grid("radial", h, R, 1)
    m = _flat_like(1, -2.0)
    K = lambda r: -1.0 - 3.0 * np.exp(-((r / 0.3) ** 2))
    return g, m, K


def test_standard_upper_bump_verifies():
    g, m, K = _a4_setup()
    bar = standard_upper_bump(m, K, g, region_radius=0.3)
    rep = verify_supersolution(m, K, bar.upper)
    assert rep.ok, rep.margin
    low = lower_constant(m, K, g)
    bounds = verified_bounds(m, K, low, bar.upper)
    assert isinstance(bounds, Bounds)


def test_solver_runs_between_verified_pair():
    """Tighter pair: the pointwise min of two supersolutions verifies too
    (M-matrix stencil), and keeps the monotonicity shift small."""
    g, m, K = _a4_setup()
    bar = standard_upper_bump(m, K, g, region_radius=0.3)
    tight = DiscreteField(g, np.minimum(bar.upper.values, 1.0))
    assert verify_supersolution(m, K, tight).ok
    low = lower_constant(m, K, g)
    bounds = verified_bounds(m, K, low, tight)
    res = solve_on_domain(SemilinearProblem(m, K), bounds, tol=1e-7,
                          max_iter=5000)
    assert res.converged


def test_standard_upper_bump_rejects_positive_curvature():
    g = Grid("radial", 0.01, 1.5, 1)
    m = _flat_like(1, -2.0)
    with pytest.raises(BarrierConstructionError):
        standard_upper_bump(m, lambda r: 1.0 - r, g)


def test_standard_upper_bump_needs_room():
    g = Grid("radial", 0.1, 1.0, 1)
    m = _flat_like(1, -2.0)
    with pytest.raises(BarrierConstructionError):
        standard_upper_bump(m, -1.0, g, region_radius=0.9)


def test_sign_changing_bump_absorbs_small_positive_part():
    g = Grid("radial", 0.01, 2.0, 1)
    m = _flat_like(1, -2.0)
    base = lambda r: -1.0 - np.exp(-(r ** 2))

    bar = sign_changing_upper_bump(m, base, g, region_radius=0.5, b=1.0)
    eps = epsilon_threshold(bar)
    assert eps > 0.0

    bump = lambda r: np.exp(-((r / 0.25) ** 2))
    K_small = lambda r: base(r) + 0.9 * eps * bump(r)
    bar2 = sign_changing_upper_bump(m, K_small, g, region_radius=0.5, b=1.0)
    rep = verify_supersolution(m, K_small, bar2.upper)
    assert rep.ok, rep.margin
    low = lower_constant(m, K_small, g)
    assert verify_subsolution(m, K_small, low).ok
    assert np.all(bar2.upper.values >= low.values - 1e-12)


def test_sign_changing_bump_validates_tail():
    g = Grid("radial", 0.01, 2.0, 1)
    m = _flat_like(1, -2.0)
    with pytest.raises(BarrierConstructionError):
        # K = -0.5 outside the region violates K <= -1
        sign_changing_upper_bump(m, -0.5, g, region_radius=0.5, b=1.0)


def test_epsilon_threshold_requires_sign_changing_barrier():
    g, m, K = _a4_setup()
    bar = standard_upper_bump(m, K, g, region_radius=0.3)
    with pytest.raises(ConfigurationError):
        epsilon_threshold(bar)


# ---------------------------------------------------------------------------
# interior bound and per-domain constants
# ---------------------------------------------------------------------------

def test_local_upper_bound_constant_problem():
    g = Grid("radial", 0.01, 4.0, 1)
    m = _flat_like(1, -1.0)
    bound, C_loc = local_upper_bound(m, g, region_radius=1.0)
    assert C_loc >= 1.0  # at cutoff == 1 nodes the expression is -k = 1
    # solve with boundary data pushing up; the region sup must obey the bound
    low = quadratic_subsolution(model_metric("flat"), -1.0, g)
    low = DiscreteField(g, np.minimum(low.values, 0.0))
    res = solve_on_domain(SemilinearProblem(m, -1.0),
                          Bounds(low, field_from(g, 1.0)), boundary=1.0,
                          tol=1e-9, max_iter=4000)
    region = g.r <= 1.0
    assert float(res.solution.values[region].max()) <= bound + 1e-6


def test_per_domain_upper_constant_is_supersolution():
    m = _flat_like(1, -2.0)
    for R in (2.0, 4.0):
        g = Grid("radial", 0.02, R, 1)
        up = per_domain_upper_constant(m, g)
        assert up.values[0] == pytest.approx(0.5 * math.log(3.0) + 0.1)
        assert verify_supersolution(m, -1.0, up).ok


# ---------------------------------------------------------------------------
# auxiliary profile
# ---------------------------------------------------------------------------

def test_auxiliary_phi_amplitude_and_laplacian():
    g = Grid("radial", 0.01, 2.0, 1)
    flat = model_metric("flat")
    phi = auxiliary_phi(flat, g, inner=0.5, outer=1.5, source_level=1.0,
                        boundary_level=0.0, amplitude=0.05)
    act = g.active_mask
    assert np.abs(phi.values[act]).max() <= 0.05 + 1e-12
    lap = chern_laplacian(flat, phi)
    assert np.abs(lap[g.interior_mask]).max() <= 1.0 + 1e-9
