"""Uniform finite-difference grids, discrete fields and stencils.

Two grid kinds cover the model catalog:

* ``radial`` -- nodes {0, h, ..., R} carrying rotation-invariant profiles in
  2n real dimensions.  The Laplacian uses the conservative flux form

      lap f(r_i) ~ [A(r_{i+1/2})(f_{i+1}-f_i) - A(r_{i-1/2})(f_i-f_{i-1})]
                   * 2n / (h * (r_{i+1/2}^{2n} - r_{i-1/2}^{2n})),

  A(r) = r^{2n-1}, which coincides exactly with the centered 3-point scheme
  f'' + (2n-1)/r f' for n = 1, reproduces the r = 0 symmetry rule
  2*(2n)*(f(h)-f(0))/h^2, is exact on quadratics at every node, and keeps
  every assembled Dirichlet operator an M-matrix for all n >= 1.

* ``tensor2d`` -- a centred square lattice with a disk mask of radius R
  (n = 1 only), standard 5-point Laplacian.  Interior nodes satisfy r < R;
  the Dirichlet ring is the set of lattice nodes outside that neighbour an
  interior node.  Remaining lattice nodes are inert (stored as 0, never read).

Fields are immutable after construction; every operation allocates output.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, DomainError

RADIAL = "radial"
TENSOR2D = "tensor2d"

_MIN_INTERIOR = 8  # minimum interior nodes per axis


def _snap_node_count(extent: float, h: float) -> int:
    m = int(round(extent / h))
    if m < 1 or abs(m * h - extent) > 1e-8 * max(1.0, abs(extent)):
        raise ConfigurationError(
            f"extent {extent!r} is not a multiple of spacing {h!r}")
    return m


@dataclass(frozen=True)
class Grid:
    """Uniform grid of one of the two supported kinds.

    Parameters
    ----------
    kind : {"radial", "tensor2d"}
    h : float
        Node spacing, > 0.
    extent : float
        Ball radius R; must be a multiple of h with at least 8 interior
        nodes per axis.
    n : int
        Complex dimension of the model the grid discretizes (real dimension
        2n).  tensor2d grids require n = 1.
    """

    kind: str
    h: float
    extent: float
    n: int = 1

    def __post_init__(self):
        if self.kind not in (RADIAL, TENSOR2D):
            raise ConfigurationError(f"unknown grid kind {self.kind!r}")
        if not (self.h > 0.0) or not np.isfinite(self.h):
            raise ConfigurationError("grid spacing must be positive and finite")
        if self.n < 1 or int(self.n) != self.n:
            raise ConfigurationError("n must be a positive integer")
        if self.kind == TENSOR2D and self.n != 1:
            raise ConfigurationError("tensor2d grids are only defined for n = 1")
        m = _snap_node_count(self.extent, self.h)
        if m < _MIN_INTERIOR:
            raise ConfigurationError(
                f"grid needs at least {_MIN_INTERIOR} interior nodes per axis, got {m}")
        object.__setattr__(self, "n", int(self.n))

    # -- node bookkeeping ---------------------------------------------------

    @cached_property
    def m(self) -> int:
        """Index of the radial boundary node / half-width of the disk in nodes."""
        return _snap_node_count(self.extent, self.h)

    @cached_property
    def shape(self):
        if self.kind == RADIAL:
            return (self.m + 1,)
        half = self.m + 1  # one inert ring beyond the Dirichlet ring
        return (2 * half + 1, 2 * half + 1)

    @cached_property
    def r(self) -> np.ndarray:
        """Node radii (radial: 1D node positions; tensor2d: lattice |x|)."""
        if self.kind == RADIAL:
            return self.h * np.arange(self.m + 1, dtype=float)
        ax = self.axis
        return np.hypot(ax[:, None], ax[None, :])

    @cached_property
    def axis(self) -> np.ndarray:
        half = self.m + 1
        return self.h * np.arange(-half, half + 1, dtype=float)

    @cached_property
    def interior_mask(self) -> np.ndarray:
        if self.kind == RADIAL:
            mask = np.zeros(self.shape, dtype=bool)
            mask[: self.m] = True
            return mask
        tol = 1e-12 * max(1.0, self.extent)
        return self.r < self.extent - tol

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        if self.kind == RADIAL:
            mask = np.zeros(self.shape, dtype=bool)
            mask[self.m] = True
            return mask
        inter = self.interior_mask
        near = np.zeros_like(inter)
        near[1:, :] |= inter[:-1, :]
        near[:-1, :] |= inter[1:, :]
        near[:, 1:] |= inter[:, :-1]
        near[:, :-1] |= inter[:, 1:]
        return near & ~inter

    @cached_property
    def active_mask(self) -> np.ndarray:
        return self.interior_mask | self.boundary_mask

    @cached_property
    def interior_count(self) -> int:
        return int(self.interior_mask.sum())

    def restrict(self, radius: float) -> "Grid":
        """Subgrid of the same kind/spacing with the boundary moved to r = radius."""
        if radius < 4 * self.h:
            raise ConfigurationError("restriction radius below 4 grid spacings")
        if radius > self.extent + 1e-12 * max(1.0, self.extent):
            raise ConfigurationError("restriction radius exceeds grid extent")
        return Grid(self.kind, self.h, _snap_node_count(radius, self.h) * self.h, self.n)

    # -- radial stencil coefficients -----------------------------------------

    @cached_property
    def _flux_coeffs(self):
        """(west, east) multipliers of the radial Laplacian at nodes 1..m-1."""
        assert self.kind == RADIAL
        d = 2 * self.n
        i = np.arange(1, self.m, dtype=float)
        shell = (i + 0.5) ** d - (i - 0.5) ** d
        east = d * (i + 0.5) ** (d - 1) / (shell * self.h ** 2)
        west = d * (i - 0.5) ** (d - 1) / (shell * self.h ** 2)
        return west, east


@dataclass(frozen=True)
class DiscreteField:
    """Values on a grid.  Immutable; finite at every active node."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise ConfigurationError(
                f"field shape {vals.shape} does not match grid shape {self.grid.shape}")
        if not np.all(np.isfinite(vals[self.grid.active_mask])):
            raise ConfigurationError("field has non-finite values at active nodes")
        vals = vals.copy()
        vals[~self.grid.active_mask] = 0.0
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def interior(self) -> np.ndarray:
        return self.values[self.grid.interior_mask]

    def boundary(self) -> np.ndarray:
        return self.values[self.grid.boundary_mask]

    def active(self) -> np.ndarray:
        return self.values[self.grid.active_mask]

    def with_values(self, values) -> "DiscreteField":
        return DiscreteField(self.grid, values)


def field_from(grid: Grid, spec) -> DiscreteField:
    """Build a field from a constant, a radial profile r -> value, an array,
    or an existing field on the same grid."""
    return DiscreteField(grid, evaluate_on(grid, spec))


def evaluate_on(grid: Grid, spec) -> np.ndarray:
    """Evaluate a field spec on every lattice node (radius convention for callables)."""
    if isinstance(spec, DiscreteField):
        if spec.grid != grid:
            raise ConfigurationError("field defined on a different grid")
        return np.array(spec.values)
    if callable(spec):
        with np.errstate(all="ignore"):
            vals = np.asarray(spec(grid.r), dtype=float)
        out = np.broadcast_to(vals, grid.shape).copy()
        out[~grid.active_mask] = 0.0
        return out
    arr = np.asarray(spec, dtype=float)
    if arr.ndim == 0:
        return np.full(grid.shape, float(arr))
    if arr.shape != grid.shape:
        raise ConfigurationError(
            f"array shape {arr.shape} does not match grid shape {grid.shape}")
    return arr.copy()


# ---------------------------------------------------------------------------
# stencils
# ---------------------------------------------------------------------------

def laplacian_values(f: DiscreteField) -> np.ndarray:
    """Euclidean 2n-dimensional Laplacian stencil; zero at non-interior nodes."""
    g = f.grid
    v = f.values
    out = np.zeros(g.shape)
    if g.kind == RADIAL:
        m = g.m
        # symmetry rule at the center node
        out[0] = 2.0 * (2 * g.n) * (v[1] - v[0]) / g.h ** 2
        west, east = g._flux_coeffs
        out[1:m] = east * (v[2:m + 1] - v[1:m]) - west * (v[1:m] - v[0:m - 1])
    else:
        h2 = g.h ** 2
        out[1:-1, 1:-1] = (v[2:, 1:-1] + v[:-2, 1:-1] + v[1:-1, 2:]
                           + v[1:-1, :-2] - 4.0 * v[1:-1, 1:-1]) / h2
        out[~g.interior_mask] = 0.0
    return out


def laplacian_apply(f: DiscreteField) -> DiscreteField:
    return DiscreteField(f.grid, laplacian_values(f))


def gradient_components(f: DiscreteField):
    """Centered first differences at interior nodes (zero elsewhere).

    Radial grids return a single radial derivative (zero at r = 0 by
    symmetry); tensor2d returns (d/dx, d/dy).
    """
    g = f.grid
    v = f.values
    if g.kind == RADIAL:
        out = np.zeros(g.shape)
        out[1:g.m] = (v[2:g.m + 1] - v[0:g.m - 1]) / (2 * g.h)
        return (out,)
    gx = np.zeros(g.shape)
    gy = np.zeros(g.shape)
    gx[1:-1, :] = (v[2:, :] - v[:-2, :]) / (2 * g.h)
    gy[:, 1:-1] = (v[:, 2:] - v[:, :-2]) / (2 * g.h)
    gx[~g.interior_mask] = 0.0
    gy[~g.interior_mask] = 0.0
    return gx, gy


def gradient_sq_norm(f: DiscreteField) -> DiscreteField:
    comps = gradient_components(f)
    out = sum(c ** 2 for c in comps)
    return DiscreteField(f.grid, out)


def gradient_dot(f: DiscreteField, g: DiscreteField) -> np.ndarray:
    """Euclidean dot product of the centered gradients at interior nodes."""
    if f.grid != g.grid:
        raise ConfigurationError("gradient_dot requires a shared grid")
    cf = gradient_components(f)
    cg = gradient_components(g)
    return sum(a * b for a, b in zip(cf, cg))


# ---------------------------------------------------------------------------
# restriction / interpolation
# ---------------------------------------------------------------------------

def restrict(f: DiscreteField, radius: float) -> DiscreteField:
    """Same nodes, boundary flags moved to the sphere r = radius; outside dropped."""
    sub = f.grid.restrict(radius)
    if f.grid.kind == RADIAL:
        return DiscreteField(sub, f.values[: sub.m + 1])
    off = (f.grid.shape[0] - sub.shape[0]) // 2
    sl = slice(off, f.grid.shape[0] - off)
    return DiscreteField(sub, f.values[sl, sl])


def interpolate(f: DiscreteField, target: Grid) -> DiscreteField:
    """Linear (radial) / bilinear (tensor2d) interpolation onto a finer or
    coarser grid of the same kind.

    Exact on affine fields at target interior nodes.  Target interior nodes
    must lie in fully active source cells (else ``DomainError``); target
    boundary nodes falling in partially inert cells take an inverse-distance
    average of the cell's active corners (every solver path overwrites them
    with Dirichlet data).
    """
    src = f.grid
    if target.kind != src.kind or target.n != src.n:
        raise ConfigurationError("interpolation requires matching grid kind and n")
    if target.extent > src.extent + 1e-12 * max(1.0, src.extent):
        raise DomainError("target grid extends beyond the source grid")
    if src.kind == RADIAL:
        vals = np.interp(target.r, src.r, f.values)
        return DiscreteField(target, vals)
    ax_s = src.axis
    act_s = src.active_mask
    xt = target.axis
    out = np.zeros(target.shape)
    act = target.active_mask
    X, Y = np.meshgrid(xt, xt, indexing="ij")
    px, py = X[act], Y[act]
    fx = (px - ax_s[0]) / src.h
    fy = (py - ax_s[0]) / src.h
    ix = np.clip(np.floor(fx + 1e-12).astype(int), 0, len(ax_s) - 2)
    iy = np.clip(np.floor(fy + 1e-12).astype(int), 0, len(ax_s) - 2)
    wx = fx - ix
    wy = fy - iy
    v = f.values
    weights = ((1 - wx) * (1 - wy), wx * (1 - wy), (1 - wx) * wy, wx * wy)
    corners = (act_s[ix, iy], act_s[ix + 1, iy], act_s[ix, iy + 1],
               act_s[ix + 1, iy + 1])
    # a corner only matters when its bilinear weight is nonzero
    full = np.ones(len(px), dtype=bool)
    for w, c in zip(weights, corners):
        full &= c | (w <= 1e-12)
    if not np.all(full | target.boundary_mask[act]):
        raise DomainError("target interior node not covered by active source cells")
    interp = (v[ix, iy] * weights[0] + v[ix + 1, iy] * weights[1]
              + v[ix, iy + 1] * weights[2] + v[ix + 1, iy + 1] * weights[3])
    for k in np.flatnonzero(~full):
        wsum = vsum = 0.0
        for di, dj, tx, ty in ((0, 0, 0.0, 0.0), (1, 0, 1.0, 0.0),
                               (0, 1, 0.0, 1.0), (1, 1, 1.0, 1.0)):
            ci, cj = ix[k] + di, iy[k] + dj
            if act_s[ci, cj]:
                w = 1.0 / max(np.hypot(wx[k] - tx, wy[k] - ty), 1e-12)
                wsum += w
                vsum += w * v[ci, cj]
        if wsum == 0.0:
            raise DomainError("target boundary node isolated from active source nodes")
        interp[k] = vsum / wsum
    out[act] = interp
    return DiscreteField(target, out)


# ---------------------------------------------------------------------------
# probe-region extraction (for cross-level comparison on a shared lattice)
# ---------------------------------------------------------------------------

def probe_values(f: DiscreteField, radius: float) -> np.ndarray:
    """Interior values at nodes with r <= radius, in canonical node order.

    Node positions are shared across restrictions of a common base grid, so
    equal-radius probes from different levels align elementwise.
    """
    g = f.grid
    tol = 1e-9 * max(1.0, radius)
    mask = g.interior_mask & (g.r <= radius + tol)
    if not mask.any():
        raise ConfigurationError("probe region contains no interior nodes")
    return f.values[mask]


def probe_sup_diff(f1: DiscreteField, f2: DiscreteField, radius: float) -> float:
    a = probe_values(f1, radius)
    b = probe_values(f2, radius)
    if a.shape != b.shape:
        raise ConfigurationError("probe node sets differ between levels")
    return float(np.max(np.abs(a - b)))


# ---------------------------------------------------------------------------
# nested-ball exhaustions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DomainExhaustion:
    """Strictly increasing ball radii realized as restrictions of one base grid."""

    base: Grid
    radii: tuple

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        if len(radii) < 1:
            raise ConfigurationError("exhaustion needs at least one radius")
        if any(b - a < 2 * self.base.h - 1e-12 for a, b in zip(radii, radii[1:])):
            raise ConfigurationError(
                "exhaustion radii must increase by at least 2 grid spacings")
        if radii[-1] > self.base.extent + 1e-12:
            raise ConfigurationError("exhaustion exceeds the base grid")
        object.__setattr__(self, "radii", radii)

    @cached_property
    def grids(self):
        return tuple(self.base.restrict(r) for r in self.radii)


# ---------------------------------------------------------------------------
# CSV serialization (17 significant digits; bit-exact round trip)
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return "%.17g" % x


def field_to_csv(f: DiscreteField) -> str:
    g = f.grid
    buf = io.StringIO()
    buf.write("# kind,n,h,R\n")
    buf.write(f"# {g.kind},{g.n},{_fmt(g.h)},{_fmt(g.extent)}\n")
    if g.kind == RADIAL:
        buf.write("index,r,value\n")
        for i in range(g.m + 1):
            buf.write(f"{i},{_fmt(g.r[i])},{_fmt(f.values[i])}\n")
    else:
        buf.write("i,j,x,y,value\n")
        half = g.m + 1
        act = g.active_mask
        for i in range(g.shape[0]):
            for j in range(g.shape[1]):
                if act[i, j]:
                    buf.write(f"{i - half},{j - half},{_fmt(g.axis[i])},"
                              f"{_fmt(g.axis[j])},{_fmt(f.values[i, j])}\n")
    return buf.getvalue()


def write_field_csv(f: DiscreteField, path) -> None:
    with open(path, "w") as fh:
        fh.write(field_to_csv(f))


def field_from_csv(text: str) -> DiscreteField:
    lines = text.strip().splitlines()
    if len(lines) < 4 or not lines[0].startswith("#") or not lines[1].startswith("#"):
        raise ConfigurationError("malformed field CSV header")
    kind, n_s, h_s, R_s = [tok.strip() for tok in lines[1][1:].split(",")]
    grid = Grid(kind, float(h_s), float(R_s), int(n_s))
    vals = np.zeros(grid.shape)
    if kind == RADIAL:
        for line in lines[3:]:
            i_s, _, v_s = line.split(",")
            vals[int(i_s)] = float(v_s)
    else:
        half = grid.m + 1
        for line in lines[3:]:
            i_s, j_s, _, _, v_s = line.split(",")
            vals[int(i_s) + half, int(j_s) + half] = float(v_s)
    return DiscreteField(grid, vals)


def read_field_csv(path) -> DiscreteField:
    with open(path) as fh:
        return field_from_csv(fh.read())
