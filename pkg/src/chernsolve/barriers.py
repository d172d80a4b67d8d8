"""Explicit sub/supersolutions for the curvature equation, plus verification.

Every construction returns ordinary DiscreteFields; nothing here is trusted
blindly.  ``verify_subsolution`` / ``verify_supersolution`` evaluate the
defect of the discrete equation

    m(x) = -lap_omega u + k - K e^{(2/n) u}

at interior nodes (m <= 0 for subsolutions, m >= 0 for supersolutions, up to
a relative rounding slack), and the solver consumes only pairs that pass.

Constructions
-------------
* ``lower_constant``      constant from the pointwise ratio (-k)/(-K); works
                          whenever the base scalar stays <= -C2 < 0.
* ``quadratic_subsolution``  beta (r^2 - R^2) on flat-coefficient bases.
* ``bump_profile``        solves -lap_omega u0 = source with zero edge data.
* ``cutoff_function``     quintic smoothstep, == 1 inside, == 0 outside.
* ``standard_upper_bump`` cutoff * bump + constant for strictly negative K.
* ``sign_changing_upper_bump``  the same shape with a doubled bump source
                          and an explicit smallness threshold on sup K+.
* ``local_upper_bound``   interior sup bound (n/2) log C_loc from a cutoff,
                          valid regardless of boundary data.
* ``per_domain_upper_constant``  crude per-ball constant for exhaustions.
* ``auxiliary_phi``       small auxiliary profile with controlled Laplacian.

The cross-term constant of the bump constructions is taken as the larger of
the analytic estimate sup |u0 lap_omega phi + 2 c grad phi . grad u0| and the
discrete commutator sup |lap_omega(phi u0) - phi lap_omega u0|, so the
verified margins inherit the exact discrete algebra rather than a continuum
limit.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import BarrierConstructionError, ConfigurationError
from .geometry import Bounds, ConformalMetric, chern_laplacian, metric_gradient_dot
from .grids import DiscreteField, Grid, evaluate_on, field_from
from .linsolve import DirichletOperator

_VERIFY_SLACK = 1e-9


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BarrierReport:
    """Outcome of one barrier verification."""

    kind: str            # "subsolution" | "supersolution"
    ok: bool
    margin: float        # worst signed defect (<= 0 wanted for sub, >= 0 for super)
    scale: float         # size of the terms entering the defect
    slack: float         # tolerance actually used: slack * scale

    def row(self):
        return {"kind": self.kind, "ok": int(self.ok),
                "margin": self.margin, "scale": self.scale,
                "slack": self.slack}


def _defect(metric: ConformalMetric, curvature, u: DiscreteField):
    grid = u.grid
    K = evaluate_on(grid, curvature)
    k = evaluate_on(grid, metric.scalar)
    p = 2.0 / metric.n
    lap = chern_laplacian(metric, u)
    growth = K * np.exp(p * u.values)
    m = -lap + k - growth
    inter = grid.interior_mask
    scale = max(1.0,
                float(np.abs(k[inter]).max()),
                float(np.abs(growth[inter]).max()),
                float(np.abs(lap[inter]).max()))
    return m, inter, scale


def verify_subsolution(metric: ConformalMetric, curvature, u: DiscreteField,
                       slack: float = _VERIFY_SLACK) -> BarrierReport:
    """Check -lap u + k - K e^{(2/n)u} <= slack * scale at interior nodes."""
    m, inter, scale = _defect(metric, curvature, u)
    worst = float(m[inter].max())
    return BarrierReport("subsolution", worst <= slack * scale, worst, scale,
                         slack * scale)


def verify_supersolution(metric: ConformalMetric, curvature, u: DiscreteField,
                         slack: float = _VERIFY_SLACK) -> BarrierReport:
    """Check -lap u + k - K e^{(2/n)u} >= -slack * scale at interior nodes."""
    m, inter, scale = _defect(metric, curvature, u)
    worst = float(m[inter].min())
    return BarrierReport("supersolution", worst >= -slack * scale, worst, scale,
                         slack * scale)


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    buf.write("name,kind,ok,margin,scale,slack\n")
    for name, rep in reports:
        buf.write("%s,%s,%d,%.17g,%.17g,%.17g\n"
                  % (name, rep.kind, rep.ok, rep.margin, rep.scale, rep.slack))
    return buf.getvalue()


# ---------------------------------------------------------------------------
# constants and simple profiles
# ---------------------------------------------------------------------------

def lower_constant(metric: ConformalMetric, curvature, grid: Grid,
                   envelope: float | None = None) -> DiscreteField:
    """Constant subsolution (n/2) log(C2 / a~^2).

    Requires the base scalar to stay <= -C2 < 0 on the grid.  a~^2 is the
    largest value of -K (or the caller's envelope if bigger); where K >= 0
    the constraint is vacuous, so a nonpositive K somewhere is enough.
    """
    K = evaluate_on(grid, curvature)
    k = evaluate_on(grid, metric.scalar)
    act = grid.active_mask
    C2 = -float(k[act].max())
    if C2 <= 0.0:
        raise BarrierConstructionError(
            "constant subsolution needs a strictly negative base scalar")
    a2 = max(0.0, float(-K[act].min()))
    if envelope is not None:
        a2 = max(a2, float(envelope))
    if a2 <= 0.0:
        # K >= 0 everywhere: any constant works; return 0
        return field_from(grid, 0.0)
    value = 0.5 * metric.n * math.log(C2 / a2)
    return field_from(grid, value)


def quadratic_subsolution(metric: ConformalMetric, curvature,
                          grid: Grid) -> DiscreteField:
    """beta (r^2 - R^2), flat-coefficient bases only.

    beta = (max(0, sup k) + max(0, sup(-K))) / (8n) makes the defect
    -8n beta + k - K e^{...} <= 0 because the profile is nonpositive and the
    growth term is then bounded by sup(-K)+.
    """
    c = evaluate_on(grid, metric.coefficient)
    act = grid.active_mask
    if np.abs(c[act] - 2.0).max() > 1e-12:
        raise BarrierConstructionError(
            "quadratic subsolution requires the flat coefficient")
    K = evaluate_on(grid, curvature)
    k = evaluate_on(grid, metric.scalar)
    beta = (max(0.0, float(k[act].max()))
            + max(0.0, float(-K[act].min()))) / (8.0 * metric.n)
    R2 = grid.extent ** 2
    return field_from(grid, lambda r: beta * (r ** 2 - R2))


def bump_profile(metric: ConformalMetric, grid: Grid, source: float,
                 tol: float = 1e-12) -> DiscreteField:
    """Solve -lap_omega u0 = source with zero Dirichlet data on the grid."""
    if source < 0.0:
        raise ConfigurationError("bump source must be nonnegative")
    op = DirichletOperator(grid, metric.coefficient, 0.0)
    return op.solve(float(source), boundary=0.0, tol=tol)


def cutoff_function(grid: Grid, inner: float, outer: float) -> DiscreteField:
    """Quintic smoothstep: 1 for r <= inner, 0 for r >= outer, C^2 between."""
    if not (0.0 < inner < outer):
        raise ConfigurationError("cutoff needs 0 < inner < outer")

    def profile(r):
        s = np.clip((np.asarray(r, float) - inner) / (outer - inner), 0.0, 1.0)
        return 1.0 - s ** 3 * (10.0 - 15.0 * s + 6.0 * s ** 2)

    return field_from(grid, profile)


# ---------------------------------------------------------------------------
# bump-based upper barriers
# ---------------------------------------------------------------------------

def _snap_up(grid: Grid, radius: float) -> float:
    steps = int(math.ceil(radius / grid.h - 1e-9))
    return steps * grid.h


def _cross_term_constant(metric, phi: DiscreteField, u0: DiscreteField,
                         source: float) -> float:
    """Bound on what multiplying the bump by the cutoff does to the defect.

    Analytic form: sup |u0 lap_omega phi + 2 c grad phi . grad u0|.
    Discrete form: sup |lap_omega(phi u0) - phi lap_omega u0|.
    The larger of the two keeps the discrete verification sound.
    """
    grid = phi.grid
    inter = grid.interior_mask
    lap_phi = chern_laplacian(metric, phi)
    cross = metric_gradient_dot(metric, phi, u0)
    analytic = np.abs(u0.values * lap_phi + 2.0 * cross)[inter].max()
    prod = DiscreteField(grid, phi.values * u0.values)
    commut = chern_laplacian(metric, prod) - phi.values * chern_laplacian(metric, u0)
    discrete = np.abs(commut[inter]).max()
    return float(max(analytic, discrete))


@dataclass(frozen=True)
class BumpBarrier:
    """Upper barrier phi * u0 + C with its construction record."""

    upper: DiscreteField
    constant: float
    cross_term: float
    bump: DiscreteField
    cutoff: DiscreteField
    inner: float
    outer: float
    b_squared: float
    epsilon: float = np.nan  # sign-changing threshold when applicable


def _bump_geometry(grid: Grid, region_radius: float | None):
    """Cutoff radii around the region: a gap of at least 4h, then an annulus
    taking half of the remaining room (wider annuli mean smaller derivative
    constants, hence smaller barrier constants and faster iterations)."""
    h = grid.h
    base = 4 * h if region_radius is None else max(_snap_up(grid, region_radius), 4 * h)
    room = grid.extent - 2 * h - base
    if room < 8 * h - 1e-12:
        raise BarrierConstructionError(
            "grid too small to fit the cutoff annulus around the region")
    inner = base + max(4 * h, _snap_up(grid, room / 4.0))
    outer = inner + max(4 * h, _snap_up(grid, room / 2.0))
    if outer > grid.extent - 2 * h + 1e-12:
        outer = _snap_up(grid, grid.extent - 2 * h)
    if outer - inner < 4 * h - 1e-12:
        raise BarrierConstructionError(
            "grid too small to fit the cutoff annulus around the region")
    return inner, outer


def standard_upper_bump(metric: ConformalMetric, curvature, grid: Grid,
                        region_radius: float | None = None,
                        envelope: float | None = None) -> BumpBarrier:
    """Upper barrier for strictly negative prescribed curvature.

    Needs sup K = -b^2 < 0.  The nodes where K >= -b^2/2 (none, when K is
    sampled below its own sup) must fall inside the bump region; the cutoff
    annulus then sits where K <= -b^2/2 and the constant

        C = max( (n/2) log(2 (C' + C1)/b^2), lower-constant value ) + 0.1

    with C1 = -inf k + 1 makes the defect nonnegative everywhere.
    """
    K = evaluate_on(grid, curvature)
    k = evaluate_on(grid, metric.scalar)
    act = grid.active_mask
    b2 = -float(K[act].max())
    if b2 <= 0.0:
        raise BarrierConstructionError(
            "standard upper bump needs strictly negative curvature; "
            "use the sign-changing variant")
    hot = act & (K >= -0.5 * b2)
    hot_radius = float(grid.r[hot].max()) if hot.any() else None
    if region_radius is not None:
        hot_radius = max(region_radius, hot_radius or 0.0)
    inner, outer = _bump_geometry(grid, hot_radius)
    C1 = max(0.0, -float(k[act].min())) + 1.0
    u0 = bump_profile(metric, grid, C1)
    phi = cutoff_function(grid, inner, outer)
    Cp = _cross_term_constant(metric, phi, u0, C1)
    n = metric.n
    C = 0.5 * n * math.log(2.0 * (Cp + C1) / b2)
    try:
        low = lower_constant(metric, curvature, grid, envelope)
        C = max(C, float(low.values[act].max()))
    except BarrierConstructionError:
        pass  # no constant subsolution; the bump constant stands alone
    C = C + 0.1
    upper = DiscreteField(grid, phi.values * u0.values + C)
    return BumpBarrier(upper, C, Cp, u0, phi, inner, outer, b2)


def sign_changing_upper_bump(metric: ConformalMetric, curvature, grid: Grid,
                             region_radius: float, b: float,
                             envelope: float | None = None) -> BumpBarrier:
    """Upper barrier tolerating a small positive part of K inside a region.

    Outside the ball of ``region_radius`` the curvature must satisfy
    K <= -b^2 (validated on the grid).  The bump source is doubled and the
    constant picks up an inclusive +1 margin; the returned ``epsilon`` is the
    largest sup K+ the barrier absorbs:

        epsilon = C1 * exp(-(2/n) (max_{bump region} u1 + C)).
    """
    if b <= 0.0:
        raise ConfigurationError("b must be positive")
    K = evaluate_on(grid, curvature)
    k = evaluate_on(grid, metric.scalar)
    act = grid.active_mask
    outside = act & (grid.r > region_radius + 1e-12)
    if outside.any() and float(K[outside].max()) > -b * b + 1e-12:
        raise BarrierConstructionError(
            "curvature exceeds -b^2 outside the stated region")
    inner, outer = _bump_geometry(grid, region_radius)
    n = metric.n
    C1 = max(0.0, -float(k[act].min())) + 1.0
    u1 = bump_profile(metric, grid, 2.0 * C1)
    phi = cutoff_function(grid, inner, outer)
    Cp = _cross_term_constant(metric, phi, u1, 2.0 * C1)
    C = 0.5 * n * math.log((Cp + C1) / (b * b))
    try:
        low = lower_constant(metric, curvature, grid, envelope)
        C = max(C, float(low.values[act].max()))
    except BarrierConstructionError:
        pass
    C = C + 1.0
    p = 2.0 / n
    core = act & (grid.r <= inner + 1e-12)
    u1_top = float(u1.values[core].max())
    eps = C1 * math.exp(-p * (u1_top + C))
    upper = DiscreteField(grid, phi.values * u1.values + C)
    return BumpBarrier(upper, C, Cp, u1, phi, inner, outer, b * b, eps)


def epsilon_threshold(barrier: BumpBarrier) -> float:
    """Largest sup K+ the sign-changing barrier is built to absorb."""
    if not np.isfinite(barrier.epsilon):
        raise ConfigurationError("barrier carries no sign-changing threshold")
    return float(barrier.epsilon)


# ---------------------------------------------------------------------------
# interior bounds independent of boundary data
# ---------------------------------------------------------------------------

def local_upper_bound(metric: ConformalMetric, grid: Grid, region_radius: float,
                      outer_radius: float | None = None):
    """Interior sup bound for solutions with K <= -1 envelope normalization.

    With a cutoff phi == 1 on the region and vanishing before the edge,

        C_loc = sup ( -phi^2 k - n phi lap_omega phi + n c |grad phi|^2 ),

    any solution of the equation with K <= -1 obeys
    sup_region u <= (n/2) log C_loc.  Returns (bound, C_loc).
    """
    outer = grid.extent - 2 * grid.h if outer_radius is None else outer_radius
    if outer <= region_radius:
        raise ConfigurationError("outer radius must exceed the region radius")
    phi = cutoff_function(grid, region_radius, outer)
    k = evaluate_on(grid, metric.scalar)
    lap_phi = chern_laplacian(metric, phi)
    grad2 = metric_gradient_dot(metric, phi, phi)
    n = metric.n
    expr = -phi.values ** 2 * k - n * phi.values * lap_phi + n * grad2
    C_loc = float(expr[grid.interior_mask].max())
    if C_loc <= 0.0:
        raise BarrierConstructionError("local bound degenerated (C_loc <= 0)")
    return 0.5 * n * math.log(C_loc), C_loc


def per_domain_upper_constant(metric: ConformalMetric, grid: Grid) -> DiscreteField:
    """Crude per-ball constant supersolution for K <= -1 normalized problems:
    (n/2) log(-inf k + 1) + 0.1."""
    k = evaluate_on(grid, metric.scalar)
    act = grid.active_mask
    Ck = -float(k[act].min()) + 1.0
    return field_from(grid, 0.5 * metric.n * math.log(Ck) + 0.1)


# ---------------------------------------------------------------------------
# auxiliary profile with controlled Laplacian
# ---------------------------------------------------------------------------

def auxiliary_phi(metric: ConformalMetric, grid: Grid, inner: float,
                  outer: float, source_level: float, boundary_level: float,
                  amplitude: float) -> DiscreteField:
    """Small profile with |values| <= amplitude and |lap_omega| <= source_level.

    Solves lap_omega phi0 = source_level inside the outer ball with edge data
    boundary_level, blends it to zero through a cutoff annulus, rescales to
    the requested amplitude, and widens the annulus once if the blended
    Laplacian overshoots.
    """
    if amplitude <= 0.0 or source_level <= 0.0:
        raise ConfigurationError("amplitude and source level must be positive")
    for attempt in range(2):
        cut_outer = min(grid.extent - 2 * grid.h, outer + attempt * 4 * grid.h)
        if cut_outer <= inner:
            raise BarrierConstructionError("no room for the auxiliary annulus")
        op = DirichletOperator(grid, metric.coefficient, 0.0)
        phi0 = op.solve(-source_level, boundary=boundary_level)
        phi = cutoff_function(grid, inner, cut_outer)
        blended = DiscreteField(grid, phi.values * phi0.values)
        top = float(np.abs(blended.values[grid.active_mask]).max())
        if top == 0.0:
            raise BarrierConstructionError("auxiliary profile vanished")
        scaled = DiscreteField(grid, blended.values * (amplitude / top))
        lap = chern_laplacian(metric, scaled)
        if np.abs(lap[grid.interior_mask]).max() <= source_level * (1.0 + 1e-9):
            return scaled
    raise BarrierConstructionError(
        "auxiliary profile kept an oversized Laplacian after widening")


# ---------------------------------------------------------------------------
# assembled pairs
# ---------------------------------------------------------------------------

def verified_bounds(metric: ConformalMetric, curvature, lower: DiscreteField,
                    upper: DiscreteField, slack: float = _VERIFY_SLACK) -> Bounds:
    """Bundle (lower, upper) after verifying both sides; raise otherwise."""
    sub = verify_subsolution(metric, curvature, lower, slack)
    sup = verify_supersolution(metric, curvature, upper, slack)
    if not sub.ok:
        raise BarrierConstructionError(
            f"lower barrier fails verification (margin {sub.margin:.3e})",
            report=sub)
    if not sup.ok:
        raise BarrierConstructionError(
            f"upper barrier fails verification (margin {sup.margin:.3e})",
            report=sup)
    return Bounds(lower, upper)
