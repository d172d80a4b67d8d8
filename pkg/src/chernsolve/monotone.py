"""Monotone iteration between ordered barriers for the curvature equation.

The continuous problem on a domain with Dirichlet data is

    -lap_omega u + k = K e^{(2/n) u},      u = data on the edge,

with k the base scalar curvature and K the prescribed one.  Writing
f(x, r) = K(x) e^{(2/n) r} - k(x), the equation reads -lap_omega u = f(x, u)
and the scheme iterates the shifted linear solve

    (-lap_omega + shift) v_m = f(x, t(v_{m-1})) + shift * t(v_{m-1})

where t clips nodewise to the barrier interval [lower(x), upper(x)] and the
shift dominates the downward slope of f on that interval:

    shift = 1 + (2/n) * max(0, -inf K) * e^{(2/n) max upper}.

Starting from the lower barrier the iterates form a nondecreasing chain
squeezed between the barriers; starting from the upper barrier they are
nonincreasing.  Both limits solve the discrete equation; chain and sandwich
are asserted every sweep at rounding tolerances and a violation beyond
1e-7 aborts with MonotonicityError.

Convergence is declared when the sup-norm update and the nonlinear defect
||lap_omega u + f(x, u)||_inf are both small relative to the natural scale
||f||_inf + shift ||u||_inf + 1; the bound |defect| <= (shift + slope) *
sup-update makes the second criterion reachable whenever the first is.

Unbounded domains are handled by solving on an increasing family of balls
cut from one fine grid and watching a fixed probe ball: stabilization of the
probe values signals existence, while probe differences that stop shrinking
raise a divergence flag (no exception -- nonexistence studies consume it).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ConvergenceError, MonotonicityError
from .geometry import Bounds, ConformalMetric, CurvatureProblem
from .grids import (
    DiscreteField,
    DomainExhaustion,
    Grid,
    evaluate_on,
    probe_sup_diff,
    probe_values,
    restrict,
)
from .linsolve import DirichletOperator

_CHAIN_TOL = 1e-12
_SANDWICH_TOL = 1e-9
_ABORT_TOL = 1e-7


@dataclass(frozen=True)
class SemilinearProblem:
    """Curvature prescription discretized on one grid."""

    metric: ConformalMetric
    curvature: object

    def fields(self, grid: Grid):
        K = evaluate_on(grid, self.curvature)
        k = evaluate_on(grid, self.metric.scalar)
        return K, k

    def nonlinearity(self, grid: Grid):
        """f(x, r) = K e^{(2/n) r} - k as a vectorized closure."""
        K, k = self.fields(grid)
        p = 2.0 / self.metric.n

        def f(r_values):
            return K * np.exp(p * r_values) - k

        return f

    @classmethod
    def from_problem(cls, problem: CurvatureProblem) -> "SemilinearProblem":
        return cls(problem.metric, problem.curvature)


def monotonicity_shift(metric: ConformalMetric, curvature, bounds: Bounds) -> float:
    """Shift making r -> f(x, r) + shift * r nondecreasing on the barrier interval."""
    grid = bounds.grid
    K = evaluate_on(grid, curvature)
    act = grid.active_mask
    neg = max(0.0, float(-K[act].min()))
    p = 2.0 / metric.n
    top = float(bounds.upper.values[act].max())
    return 1.0 + p * neg * np.exp(p * top)


@dataclass
class IterationTrace:
    """Per-sweep scalars of one monotone run."""

    sup_delta: list = field(default_factory=list)
    min_increment: list = field(default_factory=list)
    residual: list = field(default_factory=list)

    def append(self, sup_delta, min_increment, residual):
        self.sup_delta.append(float(sup_delta))
        self.min_increment.append(float(min_increment))
        self.residual.append(float(residual))

    def __len__(self):
        return len(self.sup_delta)

    def rows(self):
        return list(zip(range(1, len(self) + 1), self.sup_delta,
                        self.min_increment, self.residual))


@dataclass(frozen=True)
class MonotoneResult:
    solution: DiscreteField
    bounds: Bounds
    shift: float
    iterations: int
    converged: bool
    residual: float
    trace: IterationTrace


def _boundary_values(grid: Grid, bounds: Bounds, boundary):
    if isinstance(boundary, str):
        if boundary != "midpoint":
            raise ConfigurationError(f"unknown boundary policy {boundary!r}")
        mid = 0.5 * (bounds.lower.values + bounds.upper.values)
        return mid[grid.boundary_mask]
    vals = evaluate_on(grid, boundary)
    return vals[grid.boundary_mask]


def solve_on_domain(problem: SemilinearProblem, bounds: Bounds,
                    boundary="midpoint", tol: float = 1e-8,
                    max_iter: int = 500, start: str = "lower",
                    shift: float | None = None) -> MonotoneResult:
    """Run the monotone iteration on the bounds' grid until the update and
    the nonlinear defect are below tolerance.

    Parameters
    ----------
    problem : SemilinearProblem
    bounds : Bounds
        Ordered barrier pair; the iteration starts at one of them.
    boundary : "midpoint" | field spec
        Dirichlet data; the default averages the barriers nodewise.
    tol : float
        Sup-norm update tolerance.  The defect must also drop below
        10 * tol * (||f||_inf + shift ||u||_inf + 1).
    max_iter : int
        Sweep budget; exhausting it raises ConvergenceError with the trace.
    start : "lower" | "upper"
        Which barrier seeds the chain (nondecreasing resp. nonincreasing).
    shift : float, optional
        Override of the monotonicity shift (must dominate the computed one).

    Raises
    ------
    MonotonicityError
        If chain or sandwich break beyond rounding slack.
    ConvergenceError
        If max_iter sweeps do not reach the tolerances.
    """
    grid = bounds.grid
    if grid.n != problem.metric.n:
        raise ConfigurationError("bounds grid does not match the metric dimension")
    if start not in ("lower", "upper"):
        raise ConfigurationError("start must be 'lower' or 'upper'")
    lam_min = monotonicity_shift(problem.metric, problem.curvature, bounds)
    lam = lam_min if shift is None else float(shift)
    if lam < lam_min:
        raise ConfigurationError(
            f"shift {lam:g} below the monotonicity threshold {lam_min:g}")

    f = problem.nonlinearity(grid)
    op = DirichletOperator(grid, problem.metric.coefficient, lam)
    b_vals = _boundary_values(grid, bounds, boundary)
    lo = bounds.lower.values
    hi = bounds.upper.values
    bscale = max(1.0, float(np.abs(lo[grid.active_mask]).max()),
                 float(np.abs(hi[grid.active_mask]).max()))
    b_lo = lo[grid.boundary_mask]
    b_hi = hi[grid.boundary_mask]
    if np.any(b_vals < b_lo - _SANDWICH_TOL * bscale) or \
            np.any(b_vals > b_hi + _SANDWICH_TOL * bscale):
        raise ConfigurationError("boundary data escapes the barrier interval")

    current = (bounds.lower if start == "lower" else bounds.upper).values.copy()
    current[grid.boundary_mask] = b_vals
    sign = 1.0 if start == "lower" else -1.0
    inter = grid.interior_mask
    act = grid.active_mask
    trace = IterationTrace()
    converged = False
    res_norm = np.inf
    lin_tol = min(1e-10, tol * 1e-3)

    for sweep in range(1, max_iter + 1):
        clipped = np.clip(current, lo, hi)
        rhs = f(clipped) + lam * clipped
        rhs[~inter] = 0.0
        nxt = op.solve(rhs, _into(grid, b_vals), tol=lin_tol).values

        delta = nxt - current
        sup_delta = float(np.abs(delta[act]).max())
        min_inc = float((sign * delta[inter]).min())
        if min_inc < -_ABORT_TOL * bscale:
            raise MonotonicityError(
                f"chain broke at sweep {sweep}: increment {min_inc:.3e}",
                trace=trace)
        below = float((nxt - lo)[act].min())
        above = float((hi - nxt)[act].min())
        if min(below, above) < -_ABORT_TOL * bscale:
            raise MonotonicityError(
                f"iterate escaped the barriers at sweep {sweep}", trace=trace)

        current = nxt
        fu = f(current)
        res = op.apply(DiscreteField(grid, current)) - (fu + lam * current)
        res_norm = float(np.abs(res[inter]).max())
        res_scale = float(np.abs(fu[act]).max()) + lam * float(np.abs(current[act]).max()) + 1.0
        trace.append(sup_delta, min_inc, res_norm)
        if sup_delta <= tol and res_norm <= 10.0 * tol * res_scale:
            converged = True
            break

    solution = DiscreteField(grid, current)
    result = MonotoneResult(solution, bounds, lam, len(trace), converged,
                            res_norm, trace)
    if not converged:
        raise ConvergenceError(
            f"monotone iteration did not converge in {max_iter} sweeps "
            f"(last update {trace.sup_delta[-1]:.3e})",
            residual=res_norm, trace=trace)
    return result


def _into(grid: Grid, boundary_values: np.ndarray) -> np.ndarray:
    out = np.zeros(grid.shape)
    out[grid.boundary_mask] = boundary_values
    return out


# ---------------------------------------------------------------------------
# exhaustion by nested balls
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExhaustionResult:
    levels: tuple          # MonotoneResult per ball
    radii: tuple
    probe_radius: float
    probe_diffs: tuple     # sup difference of probe values between levels
    stabilized: bool
    diverging: bool

    @property
    def solution(self) -> DiscreteField:
        return self.levels[-1].solution


def exhaustion_solve(problem: SemilinearProblem, bounds: Bounds,
                     exhaustion: DomainExhaustion, probe_radius: float,
                     boundary="midpoint", tol: float = 1e-8,
                     max_iter: int = 500, stab_tol: float = 1e-6) -> ExhaustionResult:
    """Solve on each ball of the exhaustion and track a fixed probe region.

    The barrier pair lives on the exhaustion's base grid and restricts to
    every level; the monotonicity shift is computed once from the full pair
    so a single value dominates all levels.  ``stabilized`` reports whether
    the last probe difference dropped below stab_tol; ``diverging`` reports
    probe differences that did not decrease over three consecutive levels.
    """
    if bounds.grid != exhaustion.base:
        raise ConfigurationError("bounds must live on the exhaustion base grid")
    if probe_radius > exhaustion.radii[0]:
        raise ConfigurationError("probe region must fit inside the smallest ball")
    lam = monotonicity_shift(problem.metric, problem.curvature, bounds)
    results = []
    diffs = []
    prev = None
    for grid_k in exhaustion.grids:
        sub = Bounds(restrict(bounds.lower, grid_k.extent),
                     restrict(bounds.upper, grid_k.extent))
        res = solve_on_domain(problem, sub, boundary=boundary, tol=tol,
                              max_iter=max_iter, shift=lam)
        results.append(res)
        if prev is not None:
            diffs.append(probe_sup_diff(prev, res.solution, probe_radius))
        else:
            probe_values(res.solution, probe_radius)  # validates the region
        prev = res.solution
    stabilized = bool(diffs) and diffs[-1] <= stab_tol
    diverging = len(diffs) >= 3 and diffs[-1] >= diffs[-2] >= diffs[-3]
    return ExhaustionResult(tuple(results), tuple(exhaustion.radii),
                            float(probe_radius), tuple(diffs), stabilized,
                            diverging)
