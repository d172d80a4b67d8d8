"""Experiments probing maximum-principle behavior of the curvature solver.

Five report-producing experiments built on the solver stack:

* ``omori_yau_points`` — extracts, per exhaustion level, an almost-maximum
  node of a bounded function (large value, small gradient) and records the
  metric Laplacian there; a finite-sample stand-in for an almost-maximizing
  sequence on a complete noncompact background.
* ``uniqueness_experiment`` — solves the same curvature problem twice from
  different barrier pairs or different iteration starts and reports the sup
  distance between the limits on a probe region.
* ``nonexistence_experiment`` — solves zero-boundary problems on growing
  balls of a flat-type background and tracks the center value; a strictly
  decreasing, non-flattening trace is the discrete signature that no bounded
  entire solution exists.
* ``contradiction_certificate`` — given a candidate bounded solution, builds
  the auxiliary function phi = (v+1)^(-a) with v = e^{(2/n)u}, verifies the
  two chain-rule displays for grad(phi) and lap(phi) nodewise, and evaluates
  the positivity certificate at the nodes where v is nearly extremal.
* ``comparison_check`` — tabulates the flat-model radial drift against the
  envelope comparison bound and verifies the defining inequalities of the
  comparison profile on a sampled grid.

All experiments are deterministic and safe to run concurrently; each is
internally sequential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ConvergenceError
from .geometry import (
    Bounds,
    ComparisonParams,
    ConformalMetric,
    CurvatureProblem,
    chern_laplacian,
    comparison_profile,
    envelope_integral,
    flat_radial_drift,
    growth_envelope,
    laplacian_comparison_bound,
    metric_gradient_sq,
)
from .grids import (
    RADIAL,
    DiscreteField,
    Grid,
    evaluate_on,
    field_from,
    gradient_components,
    probe_values,
)
from .monotone import MonotoneResult, SemilinearProblem, monotonicity_shift, solve_on_domain
from .barriers import quadratic_subsolution

__all__ = [
    "OmoriYauPoint",
    "OmoriYauSequence",
    "omori_yau_points",
    "UniquenessReport",
    "uniqueness_experiment",
    "NonexistenceLevel",
    "NonexistenceReport",
    "nonexistence_experiment",
    "CertificateReport",
    "contradiction_certificate",
    "ComparisonReport",
    "comparison_check",
    "flat_background",
]

_FRACTION = 0.01          # candidate pool: top fraction of interior values
_DECREASE_TOL = 1e-10     # noise floor for "strictly decreasing" center values
_STALL_TOL = 1e-6         # center-value stall => existence branch
_PHI_SLACK = 1e-8         # allowed backward step in the comparison wronskian
_LOG_PHI_SLACK = 1e-12    # same, for the log-scale branch
_DERIV_SLACK = 1e-6       # allowed defect in h'' - G h
_LOG_CAP = 300.0          # past this envelope integral, use log-scale forms


# ---------------------------------------------------------------------------
# almost-maximum extraction over an exhaustion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OmoriYauPoint:
    """One almost-maximum node: location, value, and derivative data."""

    level: int
    node: tuple
    radius: float
    f_value: float
    gradient_norm: float
    laplacian: float
    constrained: bool     # gradient filter succeeded (else global argmax)
    within_eps: bool      # laplacian <= eps at this node


@dataclass(frozen=True)
class OmoriYauSequence:
    """Per-level almost-maximum nodes of a bounded function family.

    ``monotone`` records whether the selected values increase toward the
    sampled supremum (expected on nested domains); ``satisfied`` whether the
    Laplacian stayed below its tolerance at every selected node.
    """

    points: list
    sup_estimate: float
    monotone: bool
    satisfied: bool

    def rows(self):
        """(level, radius, f, grad_norm, laplacian, constrained, within_eps)."""
        return [(p.level, p.radius, p.f_value, p.gradient_norm, p.laplacian,
                 int(p.constrained), int(p.within_eps)) for p in self.points]


def omori_yau_points(metric: ConformalMetric, fields, eta, eps) -> OmoriYauSequence:
    """Select, per level, the largest-f node whose metric gradient is small.

    Parameters
    ----------
    metric : ConformalMetric
        Background supplying the gradient/Laplacian scaling.
    fields : sequence of DiscreteField
        Samples of one bounded function on an increasing family of grids.
    eta, eps : float or sequence
        Per-level gradient tolerance and Laplacian threshold.

    Returns
    -------
    OmoriYauSequence
        Candidates are the top ``1%`` of interior values; among those with
        metric gradient norm ``<= eta`` the f-argmax is chosen.  If none
        qualifies the global interior argmax is recorded with its (large)
        gradient and ``constrained=False``.  Purely diagnostic: no errors.
    """
    fields = list(fields)
    if not fields:
        raise ConfigurationError("omori_yau_points needs at least one field")
    etas = np.broadcast_to(np.asarray(eta, dtype=float), (len(fields),))
    epss = np.broadcast_to(np.asarray(eps, dtype=float), (len(fields),))

    points = []
    sup_estimate = -np.inf
    for level, f in enumerate(fields):
        grid = f.grid
        if grid.n != metric.n:
            raise ConfigurationError("field dimension does not match metric")
        inter = grid.interior_mask
        vals = f.values
        gnorm = np.sqrt(metric_gradient_sq(metric, f))
        lap = chern_laplacian(metric, f)

        fint = vals[inter]
        count = max(1, int(math.ceil(_FRACTION * fint.size)))
        threshold = np.partition(fint, fint.size - count)[fint.size - count]
        pool = inter & (vals >= threshold) & (gnorm <= etas[level])
        constrained = bool(pool.any())
        if not constrained:
            pool = inter
        flat_idx = np.flatnonzero(pool.ravel())
        pick = flat_idx[np.argmax(vals.ravel()[flat_idx])]
        node = np.unravel_index(pick, grid.shape)
        node = tuple(int(i) for i in node)

        points.append(OmoriYauPoint(
            level=level, node=node, radius=float(grid.r[node]),
            f_value=float(vals[node]), gradient_norm=float(gnorm[node]),
            laplacian=float(lap[node]), constrained=constrained,
            within_eps=bool(lap[node] <= epss[level])))
        sup_estimate = max(sup_estimate, float(fint.max()))

    scale = max(1.0, abs(sup_estimate))
    seq = [p.f_value for p in points]
    monotone = all(b >= a - 1e-9 * scale for a, b in zip(seq, seq[1:]))
    return OmoriYauSequence(points=points, sup_estimate=sup_estimate,
                            monotone=monotone,
                            satisfied=all(p.within_eps for p in points))


# ---------------------------------------------------------------------------
# two-run uniqueness comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UniquenessReport:
    """Sup distance between two independently computed solutions."""

    sup_difference: float
    probe_radius: float
    first: MonotoneResult
    second: MonotoneResult

    def rows(self):
        return [("sup_difference", self.sup_difference),
                ("probe_radius", self.probe_radius),
                ("first_iterations", self.first.iterations),
                ("second_iterations", self.second.iterations)]


def uniqueness_experiment(problem, bounds: Bounds, alternate: Bounds | None = None,
                          boundary="midpoint", tol: float = 1e-10,
                          max_iter: int = 200000,
                          probe_radius: float | None = None) -> UniquenessReport:
    """Solve twice and report the sup distance of the limits.

    With ``alternate`` given, both runs start at the respective lower barrier
    of two distinct valid pairs; otherwise one lower-start and one upper-start
    run share ``bounds``.  Both runs use the same linearization shift and must
    induce identical Dirichlet data (checked), so any difference measures the
    iteration, not the problem.

    Raises
    ------
    ConfigurationError
        Mismatched grids or boundary data that differs between the pairs.
    ConvergenceError
        Either run failing propagates.
    """
    if isinstance(problem, CurvatureProblem):
        problem = SemilinearProblem.from_problem(problem)
    second_bounds = bounds if alternate is None else alternate
    if second_bounds.grid != bounds.grid:
        raise ConfigurationError("uniqueness runs need a common grid")
    grid = bounds.grid

    if alternate is not None and boundary == "midpoint":
        bnd = grid.boundary_mask
        mid1 = 0.5 * (bounds.lower.values + bounds.upper.values)[bnd]
        mid2 = 0.5 * (alternate.lower.values + alternate.upper.values)[bnd]
        scale = max(1.0, float(np.abs(mid1).max()))
        if np.abs(mid1 - mid2).max() > 1e-12 * scale:
            raise ConfigurationError(
                "barrier pairs induce different midpoint boundary data; "
                "pass explicit Dirichlet values instead")

    shift = max(monotonicity_shift(problem.metric, problem.curvature, bounds),
                monotonicity_shift(problem.metric, problem.curvature, second_bounds))
    first = solve_on_domain(problem, bounds, boundary=boundary, tol=tol,
                            max_iter=max_iter, start="lower", shift=shift)
    second = solve_on_domain(problem, second_bounds, boundary=boundary, tol=tol,
                             max_iter=max_iter,
                             start="lower" if alternate is not None else "upper",
                             shift=shift)

    if probe_radius is None:
        probe_radius = grid.extent
    a = probe_values(first.solution, probe_radius)
    b = probe_values(second.solution, probe_radius)
    return UniquenessReport(sup_difference=float(np.abs(a - b).max()),
                            probe_radius=float(probe_radius),
                            first=first, second=second)


# ---------------------------------------------------------------------------
# growing-domain nonexistence probe
# ---------------------------------------------------------------------------

def flat_background(n: int, base_scalar=0.0) -> ConformalMetric:
    """Conformally trivial background in complex dimension n.

    ``base_scalar`` overrides the scalar term (the honest flat model has 0);
    used by the contrast branch of the nonexistence experiment.
    """
    name = "flat" if np.isscalar(base_scalar) and base_scalar == 0.0 else "flat-shifted"
    if not callable(base_scalar):
        level = float(base_scalar)
        base_scalar = lambda r, _s=level: np.full_like(np.asarray(r, float), _s)
    return ConformalMetric(n=n,
                           phi=lambda r: np.zeros_like(np.asarray(r, float)),
                           scalar=base_scalar, name=name)


@dataclass(frozen=True)
class NonexistenceLevel:
    """One zero-boundary solve on a ball of the given radius."""

    radius: float
    center_value: float
    decrement: float      # previous center value minus this one (nan first)
    iterations: int
    residual: float

    def row(self):
        return (self.radius, self.center_value, self.decrement)


@dataclass(frozen=True)
class NonexistenceReport:
    """Center-value trace across growing balls, with a consistency verdict.

    ``consistent`` is True when the center values strictly decrease (beyond
    a 1e-10 noise floor) and no decrement drops below half the median
    decrement — the non-flattening signature of unbounded decay.  The
    ``verdict`` adds the stabilized branch: when the trace stalls, a bounded
    solution is being approached and the experiment reports existence.
    """

    levels: list
    consistent: bool
    verdict: str
    median_decrement: float
    final_solution: DiscreteField | None = None

    @property
    def center_values(self):
        return np.array([lv.center_value for lv in self.levels])

    @property
    def decrements(self):
        return np.array([lv.decrement for lv in self.levels[1:]])

    def rows(self):
        """Divergence trace rows (R, u_at_0, decrement)."""
        return [lv.row() for lv in self.levels]


def nonexistence_experiment(n: int, curvature, radii, base_scalar=0.0,
                            h: float = 0.02, kind: str = RADIAL,
                            tol: float = 1e-8,
                            max_iter: int = 60000) -> NonexistenceReport:
    """Zero-boundary solves on growing balls of a flat-type background.

    For each radius R the Dirichlet problem with data 0 is solved by the
    monotone iteration between the quadratic subsolution and the zero
    supersolution (valid when the prescribed curvature is <= 0), and the
    value at the center is recorded.

    Parameters
    ----------
    n : int
        Complex dimension of the flat background.
    curvature : spec
        Prescribed curvature; must be nonpositive on every sampled grid.
    radii : sequence of float
        Strictly increasing ball radii; near-doubling steps make the
        decrement statistics meaningful.
    base_scalar : float or spec
        Scalar term of the background (0 for the honest flat model; the
        contrast branch passes -1 to land in the existence regime).
    h, kind : grid spec per level.
    tol, max_iter : per-solve iteration controls.

    Raises
    ------
    ConvergenceError
        A failed level propagates, with the completed levels attached as
        the partial trace.
    """
    radii = [float(R) for R in radii]
    if len(radii) < 2:
        raise ConfigurationError("nonexistence experiment needs >= 2 radii")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ConfigurationError("radii must be strictly increasing")
    metric = flat_background(n, base_scalar)
    problem = SemilinearProblem(metric=metric, curvature=curvature)

    levels = []
    final_solution = None
    previous = math.nan
    for R in radii:
        grid = Grid(kind=kind, h=h, extent=R, n=n)
        K = evaluate_on(grid, curvature)
        if K[grid.active_mask].max() > 1e-12:
            raise ConfigurationError(
                "zero ceases to be a supersolution where curvature > 0")
        bounds = Bounds(lower=quadratic_subsolution(metric, curvature, grid),
                        upper=field_from(grid, 0.0))
        try:
            result = solve_on_domain(problem, bounds, boundary=0.0,
                                     tol=tol, max_iter=max_iter)
        except ConvergenceError as exc:
            raise ConvergenceError(
                f"nonexistence level R={R} failed: {exc}",
                residual=exc.residual,
                trace={"completed_levels": [lv.row() for lv in levels],
                       "failed_radius": R, "iteration_trace": exc.trace},
            ) from exc
        center = np.unravel_index(int(np.argmin(grid.r)), grid.shape)
        value = float(result.solution.values[center])
        levels.append(NonexistenceLevel(
            radius=R, center_value=value, decrement=previous - value,
            iterations=result.iterations, residual=result.residual))
        previous = value
        final_solution = result.solution

    decrements = np.array([lv.decrement for lv in levels[1:]])
    median = float(np.median(decrements))
    strictly = bool((decrements > _DECREASE_TOL).all())
    nonflattening = bool(decrements.min() >= 0.5 * median)
    consistent = strictly and nonflattening
    if consistent:
        verdict = "nonexistence-consistent"
    elif abs(decrements[-1]) <= _STALL_TOL:
        verdict = "existence-consistent"
    else:
        verdict = "inconclusive"
    return NonexistenceReport(levels=levels, consistent=consistent,
                              verdict=verdict, median_decrement=median,
                              final_solution=final_solution)


# ---------------------------------------------------------------------------
# auxiliary-function contradiction certificate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CertificateReport:
    """Nodewise identity residuals and the positivity certificate.

    ``grad_residual`` / ``lap_residual`` are sup norms of the difference
    between stencil derivatives of phi and the chain-rule displays evaluated
    from stencil derivatives of v; both shrink at second order for smooth u.
    ``l_values`` and ``lap_phi_values`` are sampled at the interior nodes of
    largest v outside the distinguished region.  ``contradiction`` is set
    when the certificate quantity stays positive while the Laplacian of phi
    at every sampled node sits below -min(L)/2 — the configuration a bounded
    entire solution could not sustain.
    """

    a: float
    region_radius: float
    grad_residual: float
    lap_residual: float
    sup_v: float
    sup_curvature_outside: float
    nodes: list
    v_values: np.ndarray
    l_values: np.ndarray
    lap_phi_values: np.ndarray
    min_l: float
    max_lap_phi: float
    positive: bool
    contradiction: bool

    def rows(self):
        out = [("a", self.a), ("grad_residual", self.grad_residual),
               ("lap_residual", self.lap_residual), ("sup_v", self.sup_v),
               ("min_l", self.min_l), ("max_lap_phi", self.max_lap_phi),
               ("positive", float(self.positive)),
               ("contradiction", float(self.contradiction))]
        return out


def contradiction_certificate(problem: CurvatureProblem, u: DiscreteField,
                              a: float = 0.25,
                              sample_count: int = 10) -> CertificateReport:
    """Evaluate the bounded-solution certificate for a candidate u.

    Builds v = e^{(2/n)u} and phi = (v+1)^(-a), checks the two chain-rule
    displays nodewise,

        grad phi = -a grad v / (v+1)^(a+1),
        lap phi  = -a lap v / (v+1)^(a+1) + a(a+1) |grad v|^2 / (v+1)^(a+2)

    (Laplacian and squared gradient metric-scaled; the gradient identity is
    scale-invariant so plain stencils compare), and at the ``sample_count``
    interior nodes of largest v outside the problem's distinguished region
    evaluates

        L = -(2a/n) sup_outside(K) v^2 / (v+1)^(2a+1).

    Report-only: returns every number; nothing is enforced.  ``a`` must lie
    strictly inside (0, 1/2).
    """
    if not 0.0 < a < 0.5:
        raise ConfigurationError("certificate exponent must lie in (0, 1/2)")
    metric = problem.metric
    grid = u.grid
    if grid.n != metric.n:
        raise ConfigurationError("field dimension does not match metric")
    p = 2.0 / metric.n
    inter = grid.interior_mask
    act = grid.active_mask

    vals = np.zeros(grid.shape)
    vals[act] = np.exp(p * u.values[act])
    v = u.with_values(vals)
    phi_vals = np.zeros(grid.shape)
    phi_vals[act] = (vals[act] + 1.0) ** (-a)
    phi = u.with_values(phi_vals)

    vp1 = vals + 1.0  # inert nodes hold v = 0, so vp1 stays positive
    lap_v = chern_laplacian(metric, v)
    lap_phi = chern_laplacian(metric, phi)
    grad_v_sq = metric_gradient_sq(metric, v)

    grad_residual = 0.0
    for dphi, dv in zip(gradient_components(phi), gradient_components(v)):
        display = -a * dv / vp1 ** (a + 1.0)
        grad_residual = max(grad_residual,
                            float(np.abs(dphi - display)[inter].max()))
    lap_display = (-a * lap_v / vp1 ** (a + 1.0)
                   + a * (a + 1.0) * grad_v_sq / vp1 ** (a + 2.0))
    lap_residual = float(np.abs(lap_phi - lap_display)[inter].max())

    outside = inter & (grid.r > problem.domain.radius)
    if not outside.any():
        outside = inter  # distinguished region swallows the grid: sample all
    K = problem.curvature_field(grid).values
    sup_k = float(K[outside].max())
    flat_idx = np.flatnonzero(outside.ravel())
    order = np.argsort(vals.ravel()[flat_idx])[::-1]
    take = flat_idx[order[:min(sample_count, flat_idx.size)]]
    nodes = [tuple(int(i) for i in np.unravel_index(j, grid.shape)) for j in take]

    v_sel = vals.ravel()[take]
    l_sel = -(2.0 * a / metric.n) * sup_k * v_sel ** 2 / (v_sel + 1.0) ** (2 * a + 1.0)
    lap_sel = lap_phi.ravel()[take]
    min_l = float(l_sel.min())
    max_lap_phi = float(lap_sel.max())
    positive = bool(min_l > 0.0)
    return CertificateReport(
        a=a, region_radius=float(problem.domain.radius),
        grad_residual=grad_residual, lap_residual=lap_residual,
        sup_v=float(vals[inter].max()), sup_curvature_outside=sup_k,
        nodes=nodes, v_values=v_sel, l_values=l_sel, lap_phi_values=lap_sel,
        min_l=min_l, max_lap_phi=max_lap_phi, positive=positive,
        contradiction=bool(positive and max_lap_phi <= -0.5 * min_l))


# ---------------------------------------------------------------------------
# radial comparison table
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonReport:
    """Tabulated drift-vs-bound data and profile inequality checks.

    Columns: sampled radius, flat-model radial drift, envelope comparison
    bound, and their margin.  ``derivative_margin`` holds h'' - G h by
    centered differences where the profile is floating-point representable;
    ``wronskian`` holds g h' - g' h with g the flat-model profile.  The
    boolean summaries state domination, the derivative inequality, the
    wronskian monotonicity, and the h'(0) = 1 normalization.
    """

    params: ComparisonParams
    radii: np.ndarray
    drift: np.ndarray
    bound: np.ndarray
    margin: np.ndarray
    h_values: np.ndarray
    derivative_margin: np.ndarray
    wronskian: np.ndarray
    h_zero: float
    h_prime_zero: float
    dominated: bool
    derivative_ok: bool
    wronskian_ok: bool
    normalized: bool

    @property
    def ok(self) -> bool:
        return (self.dominated and self.derivative_ok
                and self.wronskian_ok and self.normalized)

    def rows(self):
        """(radius, drift, bound, margin, h, h''-Gh, wronskian) per sample."""
        return list(zip(self.radii, self.drift, self.bound, self.margin,
                        self.h_values, self.derivative_margin, self.wronskian))


def _flat_profile(n: int, t):
    """Radial profile whose comparison quotient reproduces the flat drift.

    g(t) = t^((2n-1)/(2n)) satisfies 4n g'/g = 2(2n-1)/t.
    """
    s = (2.0 * n - 1.0) / (2.0 * n)
    return np.asarray(t, dtype=float) ** s, s * np.asarray(t, dtype=float) ** (s - 1.0)


def comparison_check(params: ComparisonParams, radii) -> ComparisonReport:
    """Verify the radial comparison inequalities on sampled radii.

    Checks, against the growth envelope G of ``params``:

    * domination: the flat-model drift 2(2n-1)/r never exceeds the
      comparison bound 4n sqrt(G) E/(E-1);
    * profile inequality: h'' - G h >= -1e-6 with h'' by centered
      differences, evaluated where h fits in float range;
    * wronskian monotonicity: g h' - g' h nondecreasing along the samples
      (allowing a 1e-8 backward step; compared in log scale where the
      profile overflows);
    * normalization: h(0) = 0 and a one-sided difference quotient at 0
      equal to 1 within 1e-4.

    Report-only; the booleans carry the outcome.
    """
    rr = np.asarray(sorted(float(r) for r in radii), dtype=float)
    if rr.size < 2 or rr[0] <= 0.0:
        raise ConfigurationError("comparison check needs >= 2 positive radii")
    n = params.n

    drift = flat_radial_drift(n, rr)
    bound = laplacian_comparison_bound(params, rr)
    margin = bound - drift
    dominated = bool((margin >= 0.0).all())

    integrals = np.array([envelope_integral(params, t) for t in rr])
    h_values = comparison_profile(params, rr)

    # h'' - G h by centered differences, where h is representable
    derivative_margin = np.full(rr.size, np.inf)
    for i, t in enumerate(rr):
        if integrals[i] > _LOG_CAP:
            continue
        d = min(1e-4 * max(1.0, t), 0.5 * t)
        trio = comparison_profile(params, np.array([t - d, t, t + d]))
        hpp = (trio[2] - 2.0 * trio[1] + trio[0]) / (d * d)
        derivative_margin[i] = hpp - float(growth_envelope(params, t)) * trio[1]
    finite = np.isfinite(derivative_margin)
    derivative_ok = bool((derivative_margin[finite] >= -_DERIV_SLACK).all())

    # wronskian g h' - g' h, with h' = sqrt(G) e^I / sqrt(G(0))
    g0 = math.sqrt(float(growth_envelope(params, 0.0)))
    gvals, gprime = _flat_profile(n, rr)
    sqrtG = np.sqrt(np.array([float(growth_envelope(params, t)) for t in rr]))
    with np.errstate(over="ignore", invalid="ignore"):
        h_prime = sqrtG * np.exp(integrals) / g0
        wronskian = gvals * h_prime - gprime * h_values
    # log-scale stand-in, exact wherever the direct value overflows
    lead = gvals * sqrtG - gprime
    log_wronskian = np.where(lead > 0.0, integrals + np.log(np.maximum(lead, 1e-300)),
                             -np.inf)
    wronskian_ok = True
    for i in range(rr.size - 1):
        pair = wronskian[i:i + 2]
        if np.isfinite(pair).all():
            if pair[1] - pair[0] < -_PHI_SLACK:
                wronskian_ok = False
        elif log_wronskian[i + 1] - log_wronskian[i] < -_LOG_PHI_SLACK:
            wronskian_ok = False

    h_zero = float(comparison_profile(params, 0.0))
    d0 = 1e-6
    h_prime_zero = float(comparison_profile(params, d0)) / d0
    normalized = h_zero == 0.0 and abs(h_prime_zero - 1.0) <= 1e-4

    return ComparisonReport(
        params=params, radii=rr, drift=drift, bound=bound, margin=margin,
        h_values=h_values, derivative_margin=derivative_margin,
        wronskian=wronskian, h_zero=h_zero, h_prime_zero=h_prime_zero,
        dominated=dominated, derivative_ok=derivative_ok,
        wronskian_ok=wronskian_ok, normalized=normalized)
