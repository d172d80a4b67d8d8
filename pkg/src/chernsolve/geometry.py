"""Conformally flat Hermitian models and the Chern-scalar-curvature map.

A model metric on a ball/plane in C^n is written omega = e^{(2/n) phi} omega_0
with omega_0 the flat Kaehler form and phi a radial conformal exponent.  The
calibrated conventions used throughout:

* the Chern Laplacian of the FLAT metric acts on functions as twice the
  euclidean Laplacian of R^{2n}: lap_flat = 2 lap_eucl;
* conformal covariance:  lap_{e^{(2/n) phi} omega_0} = e^{-(2/n) phi} lap_flat,
  so every model's Laplacian is c(x) lap_eucl with c(x) = 2 e^{-(2/n) phi(x)};
* scalar curvature of the model:  S = -lap_omega phi = -c(x) lap_eucl phi;
* the forward map sends a conformal factor u on a background (phi, S) to the
  scalar curvature of e^{(2/n) u} omega:

      forward(u) = e^{-(2/n) u} * ( -c lap_eucl u + S ).

Cross terms between conformal exponents are metric-scaled: grad a . grad b
means c(x) * (grad a . grad b)_eucl, the unique convention under which the
product rule for lap_omega(ab) is exact.

The built-in catalog:

    flat            phi = 0,                 S = 0,        any n, no edge
    poincare_disk   phi = log(2/(1-r^2)),    S = -2,       n = 1, unit disk
    ball_n2         phi = 2 log(2/(1-r^2)),  S = 4r^2 - 8, n = 2, unit ball

Also implements the radial growth-comparison machinery: an envelope
G(t) = C1/(4n) (1+t)^alpha + n C2^2 / 2 (1+t)^{2 beta}, the profile
h(t) = (e^{int_0^t sqrt(G)} - 1)/sqrt(G(0)) solving h'' >= G h with h(0)=0,
h'(0)=1, and the resulting upper bound 4n sqrt(G) E/(E-1) on the radial
Laplacian comparison quotient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError
from .grids import DiscreteField, Grid, evaluate_on, gradient_dot, laplacian_values

# ---------------------------------------------------------------------------
# problem containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DomainSpec:
    """Ball of the given radius (inf => whole space) inside the model's edge."""

    radius: float

    def __post_init__(self):
        if not (self.radius > 0.0):
            raise ConfigurationError("domain radius must be positive")


@dataclass(frozen=True)
class ConformalMetric:
    """Radial conformal metric e^{(2/n) phi} omega_0 on a ball (or all of C^n).

    Parameters
    ----------
    n : int
        Complex dimension.
    phi : callable
        Radial conformal exponent r -> phi(r) (vectorized).
    scalar : callable
        Radial Chern scalar curvature r -> S(r) of the metric (vectorized).
    edge : float
        Radius at which the conformal factor degenerates (np.inf if never).
    name : str
    """

    n: int
    phi: object
    scalar: object
    edge: float = np.inf
    name: str = "custom"

    def coefficient(self, r):
        """c(r) = 2 e^{-(2/n) phi(r)}: the factor turning lap_eucl into lap_omega."""
        return 2.0 * np.exp(-(2.0 / self.n) * np.asarray(self.phi(r), dtype=float))

    def coefficient_field(self, grid: Grid) -> DiscreteField:
        if grid.n != self.n:
            raise ConfigurationError("grid dimension does not match the metric")
        self._check_inside(grid.extent, grid)
        return DiscreteField(grid, evaluate_on(grid, self.coefficient))

    def phi_field(self, grid: Grid) -> DiscreteField:
        self._check_inside(grid.extent, grid)
        return DiscreteField(grid, evaluate_on(grid, self.phi))

    def scalar_field(self, grid: Grid) -> DiscreteField:
        self._check_inside(grid.extent, grid)
        return DiscreteField(grid, evaluate_on(grid, self.scalar))

    def _check_inside(self, radius, grid=None):
        # every active node (including the staircase boundary ring of a
        # tensor2d grid) must stay strictly inside the degeneracy edge
        reach = radius
        if grid is not None and grid.kind == "tensor2d":
            reach = float(grid.r[grid.active_mask].max())
        if reach >= self.edge:
            raise DomainError(
                f"domain reaches radius {reach:g} but the metric degenerates at {self.edge:g}")


def model_metric(name: str, n: int | None = None) -> ConformalMetric:
    """Return a catalog metric by name."""
    if name == "flat":
        nn = 1 if n is None else int(n)
        return ConformalMetric(nn, lambda r: np.zeros_like(np.asarray(r, dtype=float)),
                               lambda r: np.zeros_like(np.asarray(r, dtype=float)),
                               np.inf, "flat")
    if name == "poincare_disk":
        if n not in (None, 1):
            raise ConfigurationError("poincare_disk is a one-dimensional model")
        return ConformalMetric(1, lambda r: np.log(2.0 / (1.0 - np.asarray(r, dtype=float) ** 2)),
                               lambda r: np.full_like(np.asarray(r, dtype=float), -2.0),
                               1.0, "poincare_disk")
    if name == "ball_n2":
        if n not in (None, 2):
            raise ConfigurationError("ball_n2 is a two-dimensional model")
        return ConformalMetric(2, lambda r: 2.0 * np.log(2.0 / (1.0 - np.asarray(r, dtype=float) ** 2)),
                               lambda r: 4.0 * np.asarray(r, dtype=float) ** 2 - 8.0,
                               1.0, "ball_n2")
    raise ConfigurationError(f"unknown model metric {name!r}")


@dataclass(frozen=True)
class CurvatureProblem:
    """Prescription data: find u with scalar curvature K on metric * e^{(2/n) u}."""

    metric: ConformalMetric
    curvature: object  # radial callable / constant / array / DiscreteField
    domain: DomainSpec = field(default_factory=lambda: DomainSpec(np.inf))

    def curvature_field(self, grid: Grid) -> DiscreteField:
        return DiscreteField(grid, evaluate_on(grid, self.curvature))


@dataclass(frozen=True)
class Bounds:
    """Ordered sub/supersolution pair on one grid."""

    lower: DiscreteField
    upper: DiscreteField

    def __post_init__(self):
        if self.lower.grid != self.upper.grid:
            raise ConfigurationError("bounds live on different grids")
        act = self.lower.grid.active_mask
        gap = self.upper.values[act] - self.lower.values[act]
        if gap.min() < -1e-12:
            raise ConfigurationError("lower bound exceeds upper bound")

    @property
    def grid(self) -> Grid:
        return self.lower.grid

    def interval(self):
        act = self.grid.active_mask
        return (float(self.lower.values[act].min()),
                float(self.upper.values[act].max()))


# ---------------------------------------------------------------------------
# differential operators of a metric, and the forward curvature map
# ---------------------------------------------------------------------------

def chern_laplacian(metric: ConformalMetric, f: DiscreteField) -> np.ndarray:
    """lap_omega f = c(x) lap_eucl f at interior nodes (zero elsewhere)."""
    c = evaluate_on(f.grid, metric.coefficient)
    return c * laplacian_values(f)


def metric_gradient_dot(metric: ConformalMetric, a: DiscreteField,
                        b: DiscreteField) -> np.ndarray:
    """Metric-scaled gradient pairing c(x) (grad a . grad b)_eucl."""
    c = evaluate_on(a.grid, metric.coefficient)
    return c * gradient_dot(a, b)


def metric_gradient_sq(metric: ConformalMetric, a: DiscreteField) -> np.ndarray:
    return metric_gradient_dot(metric, a, a)


def forward_chern_scalar(metric: ConformalMetric, u) -> DiscreteField:
    """Scalar curvature of e^{(2/n) u} * metric, discretized.

    forward(u) = e^{-(2/n) u} ( -lap_omega u + S ).  Values at boundary and
    inert nodes are zero (the stencil is interior-only).
    """
    if not isinstance(u, DiscreteField):
        raise ConfigurationError("forward map expects a DiscreteField")
    grid = u.grid
    if grid.n != metric.n:
        raise ConfigurationError("grid dimension does not match the metric")
    S = evaluate_on(grid, metric.scalar)
    lap = chern_laplacian(metric, u)
    p = 2.0 / metric.n
    out = np.exp(-p * u.values) * (-lap + S)
    out[~grid.interior_mask] = 0.0
    return DiscreteField(grid, out)


def conformal_shift(metric: ConformalMetric, u) -> ConformalMetric:
    """The metric e^{(2/n) u} * metric, with its forward-computed curvature.

    u must be a DiscreteField; the shifted scalar curvature is the discrete
    forward map of u sampled back by radius.  Because the stencil is linear,
    composing shifts commutes with adding exponents, so the cocycle identity
    forward_{shift(g,u)}(v) = forward_g(u + v) holds to rounding when v lives
    on the same grid.
    """
    if not isinstance(u, DiscreteField):
        raise ConfigurationError("conformal_shift expects a DiscreteField")
    phi0 = metric.phi
    uvals = u.values
    grid = u.grid
    Svals = forward_chern_scalar(metric, u).values

    def phi(r):
        return np.asarray(phi0(r), dtype=float) + _sample(grid, uvals, r)

    def scalar(r):
        return _sample(grid, Svals, r)

    return ConformalMetric(metric.n, phi, scalar, metric.edge,
                           f"{metric.name}+shift")


def _sample(grid: Grid, values: np.ndarray, r):
    """Sample a stored field at radius/radii r (exact at grid nodes)."""
    rr = np.asarray(r, dtype=float)
    if grid.kind == "radial":
        return np.interp(rr, grid.r, values)
    # tensor2d fields are sampled by matching node radii exactly; fall back
    # to the nearest active node value.
    flat_r = grid.r[grid.active_mask]
    flat_v = values[grid.active_mask]
    order = np.argsort(flat_r, kind="stable")
    fr, fv = flat_r[order], flat_v[order]
    idx = np.clip(np.searchsorted(fr, rr), 0, len(fr) - 1)
    idx_lo = np.clip(idx - 1, 0, len(fr) - 1)
    pick = np.where(np.abs(fr[idx_lo] - rr) < np.abs(fr[idx] - rr), idx_lo, idx)
    return fv[pick]


# ---------------------------------------------------------------------------
# growth envelopes and the radial comparison profile
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonParams:
    """Polynomial growth envelope parameters (all nonnegative, alpha/beta rates)."""

    n: int
    C1: float
    C2: float
    alpha: float
    beta: float

    def __post_init__(self):
        if self.n < 1 or self.C1 < 0 or self.C2 < 0:
            raise ConfigurationError("envelope needs n >= 1 and nonnegative C1, C2")


def growth_envelope(p: ComparisonParams, t):
    """G(t) = C1/(4n) (1+t)^alpha + n C2^2/2 (1+t)^{2 beta}."""
    tt = np.asarray(t, dtype=float)
    base = 1.0 + tt
    return (p.C1 / (4.0 * p.n)) * base ** p.alpha \
        + (p.n * p.C2 ** 2 / 2.0) * base ** (2.0 * p.beta)


def _simpson_panel(fn, a, b, fa, fm, fb):
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive_simpson(fn, a, b, abs_tol=1e-8, max_depth=40):
    """Composite Simpson with panel doubling to an absolute tolerance."""
    fa, fb = fn(a), fn(b)
    m = 0.5 * (a + b)
    fm = fn(m)
    whole = _simpson_panel(fn, a, b, fa, fm, fb)

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = fn(lm), fn(rm)
        left = _simpson_panel(fn, a, m, fa, flm, fm)
        right = _simpson_panel(fn, m, b, fm, frm, fb)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return (rec(a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(m, b, fm, frm, fb, right, tol / 2.0, depth - 1))

    return rec(a, b, fa, fm, fb, whole, abs_tol, max_depth)


def envelope_integral(p: ComparisonParams, t: float, abs_tol: float = 1e-8) -> float:
    """int_0^t sqrt(G(s)) ds."""
    if t < 0:
        raise ConfigurationError("envelope integral needs t >= 0")
    if t == 0.0:
        return 0.0
    return _adaptive_simpson(lambda s: math.sqrt(float(growth_envelope(p, s))),
                             0.0, float(t), abs_tol)


def comparison_profile(p: ComparisonParams, t, abs_tol: float = 1e-8):
    """h(t) = (e^{int_0^t sqrt G} - 1) / sqrt(G(0)): h(0)=0, h'(0)=1, h'' >= G h."""
    g0 = math.sqrt(float(growth_envelope(p, 0.0)))
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(len(tt))
    for k, s in enumerate(tt):
        integral = envelope_integral(p, s, abs_tol)
        # the profile outgrows float range on wide sweeps; report +inf there
        out[k] = math.expm1(integral) / g0 if integral < 700.0 else np.inf
    return out if np.ndim(t) else float(out[0])


def laplacian_comparison_bound(p: ComparisonParams, t, abs_tol: float = 1e-8):
    """Upper bound 4n sqrt(G(t)) E/(E-1), E = e^{int_0^t sqrt G}, for the
    radial comparison quotient; +inf at t = 0 where the bound degenerates."""
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(len(tt))
    for k, s in enumerate(tt):
        if s <= 0.0:
            out[k] = np.inf
            continue
        # E/(E-1) = 1/(1 - e^{-I}) stays finite for arbitrarily large I
        ratio = 1.0 / -math.expm1(-envelope_integral(p, s, abs_tol))
        out[k] = 4.0 * p.n * math.sqrt(float(growth_envelope(p, s))) * ratio
    return out if np.ndim(t) else float(out[0])


def flat_radial_drift(n: int, r):
    """lap_eucl-comparison drift 2(2n-1)/r of the flat model (lap = 2 lap_eucl)."""
    rr = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        return 2.0 * (2 * n - 1) / rr
