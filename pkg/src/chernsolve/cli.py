"""Batch front end: JSON-configured experiments emitting CSV and SVG artifacts.

One subcommand, ``chernsolve run CONFIG.json``, executes a single experiment
described by the config file and writes three CSV artifacts into the output
directory (``--out`` or the config's ``out`` field, default ``.``):

* ``result.csv`` — the experiment's primary table (per-node fields for the
  solvers, per-radius rows for the growing-ball and comparison experiments,
  one row per child for sweeps);
* ``trace.csv``  — iteration history ``level,iter,sup_delta,min_increment,
  residual`` (header-only for non-iterative experiments);
* ``report.csv`` — ``name,value`` summary pairs; the wall-clock row comes
  last and is the only nondeterministic entry.

``--plot`` (or ``"plot": true``) additionally writes ``plot.svg``, a plain
SVG 1.1 polyline rendering of the experiment's natural curve.

Exit codes: 0 success, 2 convergence failure, 3 barrier construction or
verification failure, 4 configuration error.  On failure stderr carries one
machine-greppable line ``ERR:<code>:<slug> [detail]``.

Every numeric CSV value is printed with 17 significant digits; identical
configs produce bit-identical artifacts except for the wall-clock entries.
Experiments contain no stochastic component; the ``CHERN_SEED`` environment
variable is reserved for future randomized diagnostics and is ignored today.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import barriers as bar
from .diagnostics import (
    comparison_check,
    contradiction_certificate,
    flat_background,
    nonexistence_experiment,
    uniqueness_experiment,
)
from .errors import (
    BarrierConstructionError,
    ChernsolveError,
    ConfigurationError,
    ConvergenceError,
    DomainError,
    MonotonicityError,
)
from .geometry import (
    Bounds,
    ComparisonParams,
    CurvatureProblem,
    DomainSpec,
    forward_chern_scalar,
    model_metric,
)
from .grids import (
    RADIAL,
    DiscreteField,
    DomainExhaustion,
    Grid,
    evaluate_on,
    field_from,
    read_field_csv,
)
from .monotone import SemilinearProblem, exhaustion_solve, solve_on_domain

_EXPERIMENTS = ("forward", "solve", "exhaust", "barriers", "unique",
                "nonexist", "compare", "sweep")
_TRACE_HEADER = "level,iter,sup_delta,min_increment,residual"
_SWEEP_AXES = ("h", "R", "a", "b", "n")


class _CliFailure(Exception):
    """Internal carrier of (exit code, greppable slug, free-form detail)."""

    def __init__(self, code: int, slug: str, detail: str = ""):
        super().__init__(detail)
        self.code = code
        self.slug = slug
        self.detail = detail


def _translate(exc: Exception) -> _CliFailure:
    if isinstance(exc, _CliFailure):
        return exc
    if isinstance(exc, json.JSONDecodeError):
        return _CliFailure(4, "parse", str(exc))
    if isinstance(exc, DomainError):
        return _CliFailure(4, "domain", str(exc))
    if isinstance(exc, ConfigurationError):
        return _CliFailure(4, "config", str(exc))
    if isinstance(exc, MonotonicityError):
        return _CliFailure(2, "monotonicity", str(exc))
    if isinstance(exc, ConvergenceError):
        return _CliFailure(2, "convergence", str(exc))
    if isinstance(exc, BarrierConstructionError):
        return _CliFailure(3, "barrier", str(exc))
    if isinstance(exc, OSError):
        return _CliFailure(4, "io", str(exc))
    raise exc


def _check(cond, message: str):
    if not cond:
        raise ConfigurationError(message)


# ---------------------------------------------------------------------------
# CSV / SVG emission
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "%d" % int(x)
    if isinstance(x, (int, np.integer)):
        return "%d" % int(x)
    return "%.17g" % float(x)


def _write_rows(path: Path, header: str, rows):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _write_report(path: Path, pairs):
    _write_rows(path, "name,value", pairs)


def _write_table(path: Path, grid: Grid, columns: dict):
    """Per-node table over the active nodes, prefixed by grid identity."""
    names = list(columns)
    vals = [np.asarray(columns[k]) for k in names]
    with open(path, "w") as fh:
        fh.write("# kind,n,h,R\n")
        fh.write("# %s,%d,%s,%s\n" % (grid.kind, grid.n, _fmt(grid.h),
                                      _fmt(grid.extent)))
        if grid.kind == RADIAL:
            fh.write("index,r," + ",".join(names) + "\n")
            for i in range(grid.m + 1):
                fh.write("%d,%s," % (i, _fmt(grid.r[i]))
                         + ",".join(_fmt(v[i]) for v in vals) + "\n")
        else:
            fh.write("i,j,x,y," + ",".join(names) + "\n")
            half = grid.m + 1
            act = grid.active_mask
            for i in range(grid.shape[0]):
                for j in range(grid.shape[1]):
                    if act[i, j]:
                        fh.write("%d,%d,%s,%s," % (i - half, j - half,
                                                   _fmt(grid.axis[i]),
                                                   _fmt(grid.axis[j]))
                                 + ",".join(_fmt(v[i, j]) for v in vals) + "\n")


def _trace_rows(results):
    """Flatten (level, MonotoneResult) pairs into trace.csv rows."""
    out = []
    for level, res in results:
        for it, sup_delta, min_inc, residual in res.trace.rows():
            out.append((level, it, sup_delta, min_inc, residual))
    return out


def _write_svg(path: Path, series, title: str):
    """Plain SVG 1.1 polyline plot; series = [(label, xs, ys)]."""
    width, height, pad = 640, 480, 56
    xs = np.concatenate([np.asarray(s[1], float) for s in series])
    ys = np.concatenate([np.asarray(s[2], float) for s in series])
    keep = np.isfinite(xs) & np.isfinite(ys)
    if not keep.any():
        xs, ys = np.array([0.0, 1.0]), np.array([0.0, 1.0])
    else:
        xs, ys = xs[keep], ys[keep]
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    colors = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")
    parts = ['<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
             f'width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<text x="{width // 2}" y="24" text-anchor="middle" '
             f'font-family="sans-serif" font-size="16">{title}</text>',
             f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" '
             f'y2="{height - pad}" stroke="black"/>',
             f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" '
             'stroke="black"/>',
             f'<text x="{pad}" y="{height - pad + 18}" font-family="sans-serif" '
             f'font-size="11">{x0:.6g}</text>',
             f'<text x="{width - pad}" y="{height - pad + 18}" text-anchor="end" '
             f'font-family="sans-serif" font-size="11">{x1:.6g}</text>',
             f'<text x="{pad - 4}" y="{height - pad}" text-anchor="end" '
             f'font-family="sans-serif" font-size="11">{y0:.6g}</text>',
             f'<text x="{pad - 4}" y="{pad + 4}" text-anchor="end" '
             f'font-family="sans-serif" font-size="11">{y1:.6g}</text>']
    for k, (label, sxs, sys_) in enumerate(series):
        pts = [(float(a), float(b)) for a, b in zip(sxs, sys_)
               if math.isfinite(float(a)) and math.isfinite(float(b))]
        if not pts:
            continue
        coords = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in pts)
        color = colors[k % len(colors)]
        parts.append(f'<polyline points="{coords}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{width - pad}" y="{pad + 16 * (k + 1)}" '
                     f'text-anchor="end" font-family="sans-serif" '
                     f'font-size="12" fill="{color}">{label}</text>')
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# config resolution
# ---------------------------------------------------------------------------

def _load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise _CliFailure(4, "parse", str(exc)) from exc
    except OSError as exc:
        raise _CliFailure(4, "io", str(exc)) from exc
    _check(isinstance(cfg, dict), "config root must be a JSON object")
    return cfg


def _grid_from(cfg) -> Grid:
    spec = cfg.get("grid")
    _check(isinstance(spec, dict), "a 'grid' object with h and extent is required")
    _check("h" in spec and "extent" in spec, "grid needs 'h' and 'extent'")
    return Grid(kind=spec.get("kind", RADIAL), h=float(spec["h"]),
                extent=float(spec["extent"]), n=int(cfg.get("n", 1)))


def _metric_from(cfg):
    model = cfg.get("model", "flat")
    if model == "flat":
        return flat_background(int(cfg.get("n", 1)), cfg.get("base_scalar", 0.0))
    metric = model_metric(model)
    if "n" in cfg:
        _check(int(cfg["n"]) == metric.n,
               f"model {model} has n={metric.n}, config says n={cfg['n']}")
    return metric


def _resolve_spec(spec, grid: Grid, what: str):
    """Turn a JSON field spec into something evaluate_on understands."""
    if isinstance(spec, (int, float)):
        return float(spec)
    if isinstance(spec, dict):
        if "poly" in spec:
            coeffs = [float(c) for c in spec["poly"]]
            _check(coeffs, f"{what} polynomial needs coefficients")
            return lambda r: np.polynomial.polynomial.polyval(
                np.asarray(r, dtype=float), coeffs)
        if "file" in spec:
            f = read_field_csv(spec["file"])
            _check(f.grid == grid, f"{what} file lives on a different grid")
            return f
        if "model_phi" in spec:
            m = model_metric(spec["model_phi"])
            off = float(spec.get("offset", 0.0))
            return lambda r: np.asarray(m.phi(r), dtype=float) + off
        if "model_scalar" in spec:
            return model_metric(spec["model_scalar"]).scalar
    raise ConfigurationError(f"unrecognized {what} spec: {spec!r}")


def _curvature_from(cfg, grid: Grid):
    _check("curvature" in cfg, "a 'curvature' spec is required")
    return _resolve_spec(cfg["curvature"], grid, "curvature")


def _boundary_from(cfg, grid: Grid):
    spec = cfg.get("boundary", "midpoint")
    if spec == "midpoint":
        return "midpoint"
    return _resolve_spec(spec, grid, "boundary")


def _barrier_from(spec, metric, curvature, grid: Grid, boundary) -> DiscreteField:
    _check(isinstance(spec, dict) and "kind" in spec,
           "each barrier spec needs a 'kind'")
    kind = spec["kind"]
    if kind == "constant":
        _check("value" in spec, "constant barrier needs 'value'")
        return field_from(grid, float(spec["value"]))
    if kind == "quadratic":
        return bar.quadratic_subsolution(metric, curvature, grid)
    if kind == "lower_constant":
        return bar.lower_constant(metric, curvature, grid,
                                  envelope=spec.get("envelope"))
    if kind == "per_domain":
        return bar.per_domain_upper_constant(metric, grid)
    if kind == "boundary_max":
        _check(boundary != "midpoint",
               "boundary_max barrier needs explicit boundary data")
        data = evaluate_on(grid, boundary)
        top = float(data[grid.boundary_mask].max())
        return field_from(grid, top + float(spec.get("offset", 0.0)))
    if kind == "model_phi":
        m = model_metric(spec["model"])
        off = float(spec.get("offset", 0.0))
        return field_from(grid, lambda r: np.asarray(m.phi(r), float) + off)
    if kind == "standard_bump":
        bump = bar.standard_upper_bump(metric, curvature, grid,
                                       region_radius=spec.get("region_radius"),
                                       envelope=spec.get("envelope"))
        return bump.upper
    if kind == "sign_bump":
        _check("region_radius" in spec and "b" in spec,
               "sign_bump barrier needs 'region_radius' and 'b'")
        bump = bar.sign_changing_upper_bump(metric, curvature, grid,
                                            region_radius=float(spec["region_radius"]),
                                            b=float(spec["b"]),
                                            envelope=spec.get("envelope"))
        return bump.upper
    raise ConfigurationError(f"unknown barrier kind {kind!r}")


def _bounds_from(cfg, metric, curvature, grid: Grid, boundary) -> Bounds:
    spec = cfg.get("barriers")
    _check(isinstance(spec, dict) and "lower" in spec and "upper" in spec,
           "a 'barriers' object with 'lower' and 'upper' is required")
    lower = _barrier_from(spec["lower"], metric, curvature, grid, boundary)
    upper = _barrier_from(spec["upper"], metric, curvature, grid, boundary)
    if cfg.get("verify_barriers", False):
        return bar.verified_bounds(metric, curvature, lower, upper)
    return Bounds(lower=lower, upper=upper)


def _exact_from(cfg, grid: Grid):
    if "exact" not in cfg:
        return None
    return evaluate_on(grid, _resolve_spec(cfg["exact"], grid, "exact"))


# ---------------------------------------------------------------------------
# experiment runners (each returns the report.csv pairs and a headline metric)
# ---------------------------------------------------------------------------

def _run_forward(cfg, out: Path, plot: bool):
    grid = _grid_from(cfg)
    metric = _metric_from(cfg)
    _check("u" in cfg, "forward experiment needs a 'u' spec")
    u = field_from(grid, _resolve_spec(cfg["u"], grid, "u"))
    forward = forward_chern_scalar(metric, u)
    columns = {"u": u.values, "forward": forward.values}
    pairs = [("experiment", "forward"), ("model", metric.name)]
    metric_value = float(np.abs(forward.values[grid.interior_mask]).max())
    if "curvature" in cfg:
        K = evaluate_on(grid, _curvature_from(cfg, grid))
        err = np.where(grid.interior_mask, np.abs(forward.values - K), 0.0)
        columns["error"] = err
        metric_value = float(err.max())
        pairs.append(("max_error", metric_value))
    pairs.append(("sup_forward", float(np.abs(forward.values[grid.interior_mask]).max())))
    _write_table(out / "result.csv", grid, columns)
    _write_rows(out / "trace.csv", _TRACE_HEADER, [])
    if plot and grid.kind == RADIAL:
        _write_svg(out / "plot.svg",
                   [("u", grid.r, u.values), ("forward", grid.r, forward.values)],
                   "forward curvature map")
    return pairs, metric_value


def _run_solve(cfg, out: Path, plot: bool):
    grid = _grid_from(cfg)
    metric = _metric_from(cfg)
    curvature = _curvature_from(cfg, grid)
    boundary = _boundary_from(cfg, grid)
    bounds = _bounds_from(cfg, metric, curvature, grid, boundary)
    problem = SemilinearProblem(metric=metric, curvature=curvature)
    result = solve_on_domain(problem, bounds, boundary=boundary,
                             tol=float(cfg.get("tol", 1e-8)),
                             max_iter=int(cfg.get("max_iter", 500)),
                             start=cfg.get("start", "lower"))
    columns = {"solution": result.solution.values}
    pairs = [("experiment", "solve"), ("model", metric.name),
             ("iterations", result.iterations),
             ("converged", result.converged),
             ("residual", result.residual), ("shift", result.shift)]
    metric_value = result.residual
    exact = _exact_from(cfg, grid)
    if exact is not None:
        err = np.where(grid.active_mask,
                       np.abs(result.solution.values - exact), 0.0)
        columns["exact"] = np.where(grid.active_mask, exact, 0.0)
        columns["error"] = err
        metric_value = float(err.max())
        pairs.append(("max_error", metric_value))
    _write_table(out / "result.csv", grid, columns)
    _write_rows(out / "trace.csv", _TRACE_HEADER, _trace_rows([(0, result)]))
    if plot:
        if grid.kind == RADIAL:
            _write_svg(out / "plot.svg",
                       [("solution", grid.r, result.solution.values)],
                       "solved conformal factor")
        else:
            its = [row[0] for row in result.trace.rows()]
            _write_svg(out / "plot.svg",
                       [("sup_delta", its, result.trace.sup_delta)],
                       "iteration updates")
    return pairs, metric_value


def _run_exhaust(cfg, out: Path, plot: bool):
    grid = _grid_from(cfg)
    metric = _metric_from(cfg)
    curvature = _curvature_from(cfg, grid)
    boundary = _boundary_from(cfg, grid)
    bounds = _bounds_from(cfg, metric, curvature, grid, boundary)
    _check("radii" in cfg, "exhaust experiment needs a 'radii' list")
    radii = [float(R) for R in cfg["radii"]]
    exhaustion = DomainExhaustion(base=grid, radii=tuple(radii))
    probe = float(cfg.get("probe_radius", radii[0]))
    problem = SemilinearProblem(metric=metric, curvature=curvature)
    result = exhaustion_solve(problem, bounds, exhaustion, probe,
                              boundary=boundary,
                              tol=float(cfg.get("tol", 1e-8)),
                              max_iter=int(cfg.get("max_iter", 500)),
                              stab_tol=float(cfg.get("stab_tol", 1e-6)))
    final = result.solution
    _write_table(out / "result.csv", final.grid, {"solution": final.values})
    _write_rows(out / "trace.csv", _TRACE_HEADER,
                _trace_rows(list(enumerate(result.levels))))
    pairs = [("experiment", "exhaust"), ("model", metric.name),
             ("levels", len(result.levels)),
             ("probe_radius", result.probe_radius),
             ("stabilized", result.stabilized),
             ("diverging", result.diverging)]
    for k, diff in enumerate(result.probe_diffs, start=1):
        pairs.append((f"probe_diff_{k}", diff))
    metric_value = result.probe_diffs[-1] if result.probe_diffs else math.nan
    if plot and grid.kind == RADIAL:
        _write_svg(out / "plot.svg",
                   [(f"R={lv.solution.grid.extent:g}", lv.solution.grid.r,
                     lv.solution.values) for lv in result.levels],
                   "exhaustion profiles")
    return pairs, metric_value


def _run_barriers(cfg, out: Path, plot: bool):
    grid = _grid_from(cfg)
    metric = _metric_from(cfg)
    curvature = _curvature_from(cfg, grid)
    boundary = _boundary_from(cfg, grid)
    spec = cfg.get("barriers")
    _check(isinstance(spec, dict) and "lower" in spec and "upper" in spec,
           "a 'barriers' object with 'lower' and 'upper' is required")
    lower = _barrier_from(spec["lower"], metric, curvature, grid, boundary)
    upper = _barrier_from(spec["upper"], metric, curvature, grid, boundary)
    reports = [("lower", bar.verify_subsolution(metric, curvature, lower)),
               ("upper", bar.verify_supersolution(metric, curvature, upper))]
    _write_table(out / "result.csv", grid,
                 {"lower": lower.values, "upper": upper.values})
    _write_rows(out / "trace.csv", _TRACE_HEADER, [])
    (out / "report.csv").write_text(bar.reports_to_csv(reports))
    if plot and grid.kind == RADIAL:
        _write_svg(out / "plot.svg", [("lower", grid.r, lower.values),
                                      ("upper", grid.r, upper.values)],
                   "barrier pair")
    if not all(rep.ok for _, rep in reports):
        bad = ", ".join(name for name, rep in reports if not rep.ok)
        raise BarrierConstructionError(f"barrier verification failed: {bad}")
    metric_value = min(rep.margin for _, rep in reports)
    return None, metric_value          # report.csv already written


def _run_unique(cfg, out: Path, plot: bool):
    grid = _grid_from(cfg)
    metric = _metric_from(cfg)
    curvature = _curvature_from(cfg, grid)
    boundary = _boundary_from(cfg, grid)
    bounds = _bounds_from(cfg, metric, curvature, grid, boundary)
    offset = float(cfg.get("alternate_offset", 1.0))
    alternate = Bounds(lower=bounds.lower.with_values(bounds.lower.values - offset),
                       upper=bounds.upper.with_values(bounds.upper.values + offset))
    problem = SemilinearProblem(metric=metric, curvature=curvature)
    report = uniqueness_experiment(problem, bounds, alternate,
                                   boundary=boundary,
                                   tol=float(cfg.get("tol", 1e-10)),
                                   max_iter=int(cfg.get("max_iter", 200000)),
                                   probe_radius=cfg.get("probe_radius"))
    diff = np.abs(report.first.solution.values - report.second.solution.values)
    _write_table(out / "result.csv", grid,
                 {"first": report.first.solution.values,
                  "second": report.second.solution.values,
                  "abs_diff": np.where(grid.active_mask, diff, 0.0)})
    _write_rows(out / "trace.csv", _TRACE_HEADER,
                _trace_rows([(0, report.first), (1, report.second)]))
    pairs = [("experiment", "unique"), ("model", metric.name),
             ("sup_difference", report.sup_difference),
             ("probe_radius", report.probe_radius),
             ("first_iterations", report.first.iterations),
             ("second_iterations", report.second.iterations)]
    if plot and grid.kind == RADIAL:
        _write_svg(out / "plot.svg",
                   [("first", grid.r, report.first.solution.values),
                    ("second", grid.r, report.second.solution.values)],
                   "uniqueness runs")
    return pairs, report.sup_difference


def _run_nonexist(cfg, out: Path, plot: bool):
    n = int(cfg.get("n", 1))
    _check("radii" in cfg, "nonexist experiment needs a 'radii' list")
    radii = [float(R) for R in cfg["radii"]]
    _check("curvature" in cfg, "a 'curvature' spec is required")
    spec = cfg["curvature"]
    if isinstance(spec, dict):
        _check("file" not in spec,
               "file curvature is tied to one grid; nonexist builds its own")
    curvature = _resolve_spec(spec, None, "curvature")
    grid_spec = cfg.get("grid", {})
    report = nonexistence_experiment(
        n, curvature, radii,
        base_scalar=cfg.get("base_scalar", 0.0),
        h=float(grid_spec.get("h", 0.02)),
        kind=grid_spec.get("kind", RADIAL),
        tol=float(cfg.get("tol", 1e-8)),
        max_iter=int(cfg.get("max_iter", 60000)))
    _write_rows(out / "result.csv", "R,u_at_0,decrement", report.rows())
    _write_rows(out / "trace.csv", "level,R,iterations,residual",
                [(k, lv.radius, lv.iterations, lv.residual)
                 for k, lv in enumerate(report.levels)])
    pairs = [("experiment", "nonexist"), ("n", n),
             ("verdict", report.verdict),
             ("consistent", report.consistent),
             ("median_decrement", report.median_decrement),
             ("final_center", report.levels[-1].center_value)]
    if "certificate_a" in cfg:
        problem = CurvatureProblem(
            metric=flat_background(n, cfg.get("base_scalar", 0.0)),
            curvature=curvature,
            domain=DomainSpec(float(cfg.get("region_radius", 1.0))))
        cert = contradiction_certificate(problem, report.final_solution,
                                         a=float(cfg["certificate_a"]))
        pairs += [("certificate_" + name, value) for name, value in cert.rows()]
    metric_value = float(report.decrements[-1])
    if plot:
        _write_svg(out / "plot.svg",
                   [("u_at_0", [lv.radius for lv in report.levels],
                     [lv.center_value for lv in report.levels])],
                   "center value vs ball radius")
    return pairs, metric_value


def _run_compare(cfg, out: Path, plot: bool):
    spec = cfg.get("comparison")
    _check(isinstance(spec, dict), "compare experiment needs a 'comparison' object")
    params = ComparisonParams(n=int(spec.get("n", cfg.get("n", 1))),
                              C1=float(spec.get("C1", 1.0)),
                              C2=float(spec.get("C2", 1.0)),
                              alpha=float(spec.get("alpha", 2.0)),
                              beta=float(spec.get("beta", 1.0)))
    if "radii" in cfg:
        radii = [float(r) for r in cfg["radii"]]
    else:
        log_spec = cfg.get("log_radii", [0.1, 100.0, 50])
        _check(isinstance(log_spec, list) and len(log_spec) == 3,
               "log_radii must be [min, max, count]")
        lo, hi, count = log_spec
        radii = np.logspace(math.log10(float(lo)), math.log10(float(hi)),
                            int(count))
    report = comparison_check(params, radii)
    _write_rows(out / "result.csv",
                "radius,drift,bound,margin,h,hpp_minus_Gh,wronskian",
                report.rows())
    _write_rows(out / "trace.csv", _TRACE_HEADER, [])
    pairs = [("experiment", "compare"), ("n", params.n),
             ("C1", params.C1), ("C2", params.C2),
             ("dominated", report.dominated),
             ("derivative_ok", report.derivative_ok),
             ("wronskian_ok", report.wronskian_ok),
             ("normalized", report.normalized), ("ok", report.ok),
             ("h_zero", report.h_zero), ("h_prime_zero", report.h_prime_zero),
             ("min_margin", float(report.margin.min()))]
    if plot:
        _write_svg(out / "plot.svg",
                   [("drift", report.radii, report.drift),
                    ("bound", report.radii, np.minimum(report.bound, 1e6))],
                   "drift vs comparison bound")
    return pairs, float(report.margin.min())


_RUNNERS = {"forward": _run_forward, "solve": _run_solve,
            "exhaust": _run_exhaust, "barriers": _run_barriers,
            "unique": _run_unique, "nonexist": _run_nonexist,
            "compare": _run_compare}


# ---------------------------------------------------------------------------
# sweep orchestration
# ---------------------------------------------------------------------------

def _apply_axis(child: dict, axis: str, value) -> dict:
    cfg = json.loads(json.dumps(child))  # configs are JSON-born: deep copy
    if axis == "h":
        cfg.setdefault("grid", {})["h"] = float(value)
    elif axis == "R":
        cfg.setdefault("grid", {})["extent"] = float(value)
    elif axis == "n":
        cfg["n"] = int(value)
    elif axis == "b":
        cfg["curvature"] = -float(value) ** 2
    elif axis == "a":
        cfg["certificate_a"] = float(value)
    return cfg


def _sweep_child(payload):
    """One sweep child; picklable for process pools, never raises."""
    child_cfg, out_dir, plot = payload
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    try:
        metric_value = _execute(child_cfg, out, plot, jobs=1)
        return (0, "", metric_value, time.perf_counter() - start)
    except Exception as exc:  # noqa: BLE001 - recorded per-row by design
        try:
            fail = _translate(exc)
        except Exception:
            fail = _CliFailure(4, "internal", repr(exc))
        return (fail.code, fail.slug, math.nan, time.perf_counter() - start)


def _run_sweep(cfg, out: Path, plot: bool, jobs: int):
    spec = cfg.get("sweep")
    _check(isinstance(spec, dict), "sweep experiment needs a 'sweep' object")
    axis = spec.get("axis")
    _check(axis in _SWEEP_AXES, f"sweep axis must be one of {_SWEEP_AXES}")
    values = spec.get("values", [])
    _check(isinstance(values, list) and values, "sweep needs nonempty 'values'")
    child = spec.get("child")
    _check(isinstance(child, dict), "sweep needs a 'child' config object")
    _check(child.get("experiment") in _RUNNERS,
           "sweep child must be a non-sweep experiment")

    payloads = []
    for k, value in enumerate(values):
        child_cfg = _apply_axis(child, axis, value)
        payloads.append((child_cfg, str(out / f"{axis}_{k:03d}"), plot))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_sweep_child, payloads))
    else:
        outcomes = [_sweep_child(p) for p in payloads]

    # observed convergence order relative to the previous h where applicable
    orders = [math.nan] * len(values)
    if axis == "h":
        for k in range(1, len(values)):
            c0, _, m0, _ = outcomes[k - 1]
            c1, _, m1, _ = outcomes[k]
            if c0 == 0 and c1 == 0 and m0 > 0 and m1 > 0:
                ratio = float(values[k - 1]) / float(values[k])
                if ratio > 0 and ratio != 1:
                    orders[k] = math.log(m0 / m1) / math.log(ratio)

    rows = [(float(v), code, met, orders[k], slug or "ok", wall)
            for k, (v, (code, slug, met, wall)) in enumerate(zip(values, outcomes))]
    _write_rows(out / "result.csv", f"{axis},status,metric,order,detail,wall_clock",
                rows)
    _write_rows(out / "trace.csv", _TRACE_HEADER, [])
    succeeded = sum(1 for code, *_ in outcomes if code == 0)
    pairs = [("experiment", "sweep"), ("axis", axis),
             ("children", len(values)), ("succeeded", succeeded),
             ("failed", len(values) - succeeded)]
    if plot:
        good = [(float(v), met) for v, (code, _, met, _) in zip(values, outcomes)
                if code == 0 and math.isfinite(met)]
        if good:
            _write_svg(out / "plot.svg",
                       [("metric", [g[0] for g in good], [g[1] for g in good])],
                       f"sweep over {axis}")
    if succeeded == 0:
        first_bad = next((o for o in outcomes if o[0] != 0), None)
        _write_report(out / "report.csv", pairs)
        raise _CliFailure(first_bad[0], first_bad[1] or "sweep",
                          "every sweep child failed")
    return pairs, float(succeeded)


# ---------------------------------------------------------------------------
# dispatch and entry point
# ---------------------------------------------------------------------------

def _execute(cfg: dict, out: Path, plot: bool, jobs: int) -> float:
    """Run one experiment config; returns its headline metric."""
    experiment = cfg.get("experiment")
    _check(experiment in _EXPERIMENTS,
           f"'experiment' must be one of {_EXPERIMENTS}")
    start = time.perf_counter()
    if experiment == "sweep":
        pairs, metric_value = _run_sweep(cfg, out, plot, jobs)
    else:
        pairs, metric_value = _RUNNERS[experiment](cfg, out, plot)
    if pairs is not None:
        pairs.append(("wall_clock", time.perf_counter() - start))
        _write_report(out / "report.csv", pairs)
    return metric_value


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="chernsolve",
        description="Batch experiments for the prescribed-curvature solver.")
    sub = parser.add_subparsers(dest="command")
    runp = sub.add_parser("run", help="execute one JSON-configured experiment")
    runp.add_argument("config", help="path to the experiment config (JSON)")
    runp.add_argument("--out", default=None, help="output directory")
    runp.add_argument("--jobs", type=int, default=1,
                      help="concurrent children for sweep experiments")
    runp.add_argument("--plot", action="store_true",
                      help="also write plot.svg")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code == 0:
            return 0
        print("ERR:4:usage", file=sys.stderr)
        return 4
    if args.command != "run":
        print("ERR:4:usage", file=sys.stderr)
        return 4
    try:
        cfg = _load_config(args.config)
        out = Path(args.out) if args.out else Path(cfg.get("out", "."))
        out.mkdir(parents=True, exist_ok=True)
        plot = bool(args.plot or cfg.get("plot", False))
        _execute(cfg, out, plot, jobs=max(1, int(args.jobs)))
        return 0
    except (_CliFailure, ChernsolveError, OSError) as exc:
        fail = _translate(exc)
        detail = f" {fail.detail}" if fail.detail else ""
        print(f"ERR:{fail.code}:{fail.slug}{detail}", file=sys.stderr)
        return fail.code


if __name__ == "__main__":
    sys.exit(main())
