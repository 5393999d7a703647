"""Cell-centered rectangular grids, discrete fields and operators.

Uniform grids on an interval (dim 1) or rectangle (dim 2).  Pressure lives
at cell centers; gradients live on interior faces (two-point normal
difference, plus a tangential average in 2D so the face gradient magnitude
seen by the conductivity is the full one).  An interior margin fraction
defines the compactly contained subdomain used by the interior estimates.

Fields are value-semantic snapshots; all operators are pure.
"""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid:
    dim: int
    cells: tuple
    extents: tuple
    interior_margin: float = 0.125

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        cells = tuple(int(c) for c in self.cells)
        extents = tuple(float(e) for e in self.extents)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "extents", extents)
        if len(cells) != self.dim or len(extents) != self.dim:
            raise ValueError("cells/extents must match dim")
        if any(c < 1 for c in cells):
            raise ValueError("cell counts must be positive")
        if any(e <= 0 for e in extents):
            raise ValueError("extents must be positive")
        if not (0.0 <= self.interior_margin < 0.5):
            raise ValueError("interior_margin must lie in [0, 0.5)")
        for n, k in zip(cells, self.margin_cells):
            if n - 2 * k < 1:
                raise ValueError("interior subdomain is empty at this resolution")

    @property
    def spacing(self):
        return tuple(e / c for e, c in zip(self.extents, self.cells))

    @property
    def cell_volume(self):
        return math.prod(self.spacing)

    @property
    def domain_volume(self):
        return math.prod(self.extents)

    @property
    def margin_cells(self):
        return tuple(math.ceil(self.interior_margin * c) for c in self.cells)

    @property
    def interior_slices(self):
        return tuple(slice(k, n - k) for n, k in zip(self.cells, self.margin_cells))

    def centers(self, axis):
        h = self.spacing[axis]
        return (np.arange(self.cells[axis]) + 0.5) * h

    def boundary_area(self):
        """Total boundary measure (2 endpoints in 1D count area 1 each)."""
        if self.dim == 1:
            return 2.0
        lx, ly = self.extents
        return 2.0 * (lx + ly)

    def empty_values(self):
        return np.zeros(self.cells)


@dataclass
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != tuple(self.grid.cells):
            raise ValueError(f"values shape {vals.shape} does not match grid {self.grid.cells}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        self.values = vals

    def copy(self):
        return ScalarField(self.grid, self.values.copy())


@dataclass(frozen=True)
class FaceGradients:
    """Per-axis interior-face gradient data.

    ``normal[d]`` holds the two-point normal difference across every
    interior face orthogonal to axis d; ``magnitude[d]`` the reconstructed
    full gradient magnitude at those faces (equal to |normal| in 1D).
    """

    normal: tuple
    magnitude: tuple


def face_gradient(f: ScalarField) -> FaceGradients:
    g = f.grid
    v = f.values
    h = g.spacing
    if g.dim == 1:
        gn = (v[1:] - v[:-1]) / h[0]
        return FaceGradients(normal=(gn,), magnitude=(np.abs(gn),))

    hx, hy = h
    gx = (v[1:, :] - v[:-1, :]) / hx
    gy = (v[:, 1:] - v[:, :-1]) / hy
    tx = _tangential_average(gy, axis=0)
    ty = _tangential_average(gx, axis=1)
    return FaceGradients(
        normal=(gx, gy),
        magnitude=(np.hypot(gx, tx), np.hypot(gy, ty)),
    )


def _tangential_average(gother, axis):
    """Average the adjacent cross-axis differences onto faces of `axis`.

    For an x-face between cell columns i-1 and i, the tangential slope is
    the mean of the up-to-four neighboring y-differences; at the domain
    edge only the existing ones enter.
    """
    return _face_pair_sum(gother, axis) / _face_pair_count(gother, axis)


def _face_pair_sum(gother, axis):
    # sum of the cross differences adjacent to each face of `axis`
    if axis == 0:
        # gother = gy with shape (nx, ny-1); x-faces have shape (nx-1, ny)
        nx, nym1 = gother.shape
        ny = nym1 + 1
        out = np.zeros((nx - 1, ny))
        out[:, :-1] += gother[:-1, :] + gother[1:, :]
        out[:, 1:] += gother[:-1, :] + gother[1:, :]
        return out
    # gother = gx with shape (nx-1, ny); y-faces have shape (nx, ny-1)
    nxm1, ny = gother.shape
    nx = nxm1 + 1
    out = np.zeros((nx, ny - 1))
    out[:-1, :] += gother[:, :-1] + gother[:, 1:]
    out[1:, :] += gother[:, :-1] + gother[:, 1:]
    return out


def _face_pair_count(gother, axis):
    if axis == 0:
        nx, nym1 = gother.shape
        ny = nym1 + 1
        cnt = np.zeros((nx - 1, ny))
        cnt[:, :-1] += 2.0
        cnt[:, 1:] += 2.0
        return cnt
    nxm1, ny = gother.shape
    nx = nxm1 + 1
    cnt = np.zeros((nx, ny - 1))
    cnt[:-1, :] += 2.0
    cnt[1:, :] += 2.0
    return cnt


def _axis_cell_average(face_vals, n):
    """Aggregate face values to cell centers along the leading axis.

    Interior cells average their two faces; edge cells extrapolate linearly
    from the two nearest faces, which keeps the operator exact on
    quadratics everywhere.
    """
    shape = (n,) + face_vals.shape[1:]
    out = np.zeros(shape)
    if n == 1 or face_vals.shape[0] == 0:
        return out
    if face_vals.shape[0] == 1:
        out[0] = face_vals[0]
        out[1] = face_vals[0]
        return out
    out[1:-1] = 0.5 * (face_vals[:-1] + face_vals[1:])
    out[0] = 1.5 * face_vals[0] - 0.5 * face_vals[1]
    out[-1] = 1.5 * face_vals[-1] - 0.5 * face_vals[-2]
    return out


def cell_gradient(f: ScalarField):
    """Cell-centered gradient vectors, shape cells + (dim,)."""
    g = f.grid
    fg = face_gradient(f)
    if g.dim == 1:
        gx = _axis_cell_average(fg.normal[0], g.cells[0])
        return gx[:, None]
    gx = _axis_cell_average(fg.normal[0], g.cells[0])
    gy = _axis_cell_average(np.swapaxes(fg.normal[1], 0, 1), g.cells[1])
    gy = np.swapaxes(gy, 0, 1)
    return np.stack([gx, gy], axis=-1)


def cell_gradient_magnitude(f: ScalarField):
    cg = cell_gradient(f)
    return np.sqrt(np.sum(cg * cg, axis=-1))


def _region_view(grid: Grid, arr, region):
    if region == "full":
        return arr
    if region == "interior":
        return arr[grid.interior_slices]
    raise ValueError(f"unknown region {region!r}")


def norm_Ls(f: ScalarField, s, region="full"):
    """Midpoint-rule Lebesgue norm over the full domain or the interior
    subdomain; s = inf gives the max norm."""
    vals = _region_view(f.grid, f.values, region)
    return _lebesgue_norm(np.abs(vals), s, f.grid.cell_volume)


def _lebesgue_norm(absvals, s, cellvol):
    if np.isinf(s):
        return float(absvals.max()) if absvals.size else 0.0
    s = float(s)
    if s < 1.0:
        raise ValueError("norm order must be >= 1 (or inf)")
    return float((np.sum(absvals**s) * cellvol) ** (1.0 / s))


def gradient_norm_Ls(f: ScalarField, s, region="full"):
    """L^s norm of the cell-aggregated gradient magnitude."""
    mag = _region_view(f.grid, cell_gradient_magnitude(f), region)
    return _lebesgue_norm(mag, s, f.grid.cell_volume)


def hessian_frobenius(f: ScalarField):
    """Frobenius magnitude of the second-difference Hessian on cells where
    the full central stencil fits (one ring in from the boundary)."""
    g = f.grid
    v = f.values
    if any(c < 3 for c in g.cells):
        raise ValueError("hessian needs at least 3 cells per axis")
    h = g.spacing
    if g.dim == 1:
        pxx = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h[0] ** 2
        return np.abs(pxx)
    hx, hy = h
    c = v[1:-1, 1:-1]
    pxx = (v[2:, 1:-1] - 2.0 * c + v[:-2, 1:-1]) / hx**2
    pyy = (v[1:-1, 2:] - 2.0 * c + v[1:-1, :-2]) / hy**2
    pxy = (v[2:, 2:] - v[2:, :-2] - v[:-2, 2:] + v[:-2, :-2]) / (4.0 * hx * hy)
    return np.sqrt(pxx**2 + pyy**2 + 2.0 * pxy**2)


def _hessian_region_view(grid: Grid, hess, region):
    # hess covers cells 1..n-2 per axis; intersect with the margin region
    if region == "full":
        return hess
    if region != "interior":
        raise ValueError(f"unknown region {region!r}")
    sl = []
    for n, k in zip(grid.cells, grid.margin_cells):
        lo = max(k, 1)
        hi = min(n - k, n - 1)
        if hi - lo < 1:
            raise ValueError("interior region too small for hessian stencil")
        sl.append(slice(lo - 1, hi - 1))
    return hess[tuple(sl)]


def hessian_interior_cell_count(grid: Grid, region="interior"):
    counts = []
    for n, k in zip(grid.cells, grid.margin_cells):
        lo = max(k, 1) if region == "interior" else 1
        hi = min(n - k, n - 1) if region == "interior" else n - 1
        counts.append(max(hi - lo, 0))
    return math.prod(counts)


def hessian_norm(f: ScalarField, delta, region="full"):
    """L^(2-delta) norm of the Hessian Frobenius magnitude."""
    delta = float(delta)
    if not (0.0 < delta < 1.0):
        raise ValueError("delta must lie in (0, 1)")
    hess = hessian_frobenius(f)
    view = _hessian_region_view(f.grid, hess, region)
    if view.size == 0:
        raise ValueError("region too small for hessian stencil")
    return _lebesgue_norm(view, 2.0 - delta, f.grid.cell_volume)


def field_mean(f: ScalarField):
    return float(f.values.mean())


def field_integral(f: ScalarField):
    return float(f.values.sum() * f.grid.cell_volume)


def zero_mean_shift(f: ScalarField) -> ScalarField:
    return ScalarField(f.grid, f.values - f.values.mean())


# ---------------------------------------------------------------------------
# Boundary flux profiles


_FLUX_FAMILIES = ("constant", "decaying_exp", "power_growth", "sinusoidal")
_FLUX_WEIGHTS = ("uniform", "dipole")


@dataclass(frozen=True)
class BoundaryFlux:
    """Prescribed outward normal velocity flux on the whole boundary.

    psi(face, t) = w(face) * phi(t) with a named time profile phi and a
    spatial weight w of unit sup norm (``uniform``: +1 on every face;
    ``dipole``: +1 on the axis-0 max side, -1 on the min side, 0 elsewhere).
    The sup norm over the boundary and the time derivative are exact,
    evaluated from the profile parameters.
    """

    family: str
    amplitude: float = 0.0
    rate: float = 1.0
    exponent: float = 0.0
    omega: float = 1.0
    offset: float = 0.0
    weight: str = "uniform"

    def __post_init__(self):
        if self.family not in _FLUX_FAMILIES:
            raise ValueError(f"unknown flux family {self.family!r}")
        if self.weight not in _FLUX_WEIGHTS:
            raise ValueError(f"unknown flux weight {self.weight!r}")
        if self.family == "decaying_exp" and self.rate <= 0.0:
            raise ValueError("decaying_exp needs rate > 0")

    def phi(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.family == "constant":
            shape = np.ones_like(t)
        elif self.family == "decaying_exp":
            shape = np.exp(-self.rate * t)
        elif self.family == "power_growth":
            shape = (1.0 + t) ** self.exponent
        else:
            shape = np.sin(self.omega * t)
        return self.offset + self.amplitude * shape

    def phi_t(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.family == "constant":
            return np.zeros_like(t)
        if self.family == "decaying_exp":
            return -self.rate * self.amplitude * np.exp(-self.rate * t)
        if self.family == "power_growth":
            return self.amplitude * self.exponent * (1.0 + t) ** (self.exponent - 1.0)
        return self.amplitude * self.omega * np.cos(self.omega * t)

    @property
    def has_time_derivative(self):
        return True

    def sup_norm(self, t):
        """Exact L-inf norm over the boundary at time t."""
        return np.abs(self.phi(t))

    def sup_norm_dt(self, t):
        return np.abs(self.phi_t(t))

    @property
    def is_zero(self):
        return self.amplitude == 0.0 and self.offset == 0.0

    @property
    def decays_to_zero(self):
        if self.is_zero:
            return True
        if self.offset != 0.0:
            return False
        if self.family == "decaying_exp":
            return True
        if self.family == "power_growth":
            return self.amplitude == 0.0 or self.exponent < 0.0
        return self.amplitude == 0.0

    @property
    def psi_t_vanishes(self):
        if self.amplitude == 0.0:
            return True
        if self.family in ("constant", "decaying_exp"):
            return True
        if self.family == "power_growth":
            return self.exponent < 1.0
        return self.omega == 0.0

    @property
    def bounded(self):
        if self.family == "power_growth":
            return self.amplitude == 0.0 or self.exponent <= 0.0
        return True

    @property
    def envelope_integrable(self):
        """Whether the flux envelope f(t) has a finite time integral."""
        if self.is_zero:
            return True
        if self.offset != 0.0:
            return False
        if self.family == "decaying_exp":
            return True
        if self.family == "power_growth":
            # f ~ phi^2 at small phi, integrable iff 2*exponent < -1
            return self.amplitude == 0.0 or 2.0 * self.exponent < -1.0
        return self.amplitude == 0.0

    def side_weight(self, axis, is_max):
        if self.weight == "uniform":
            return 1.0
        if axis == 0:
            return 1.0 if is_max else -1.0
        return 0.0

    def side_values(self, grid: Grid, axis, is_max, t):
        w = self.side_weight(axis, is_max)
        val = w * float(self.phi(t))
        if grid.dim == 1:
            return val
        n_other = grid.cells[1 - axis]
        return np.full(n_other, val)

    def boundary_integral(self, grid: Grid, t):
        """Exact surface integral of psi at time t."""
        tot_w = 0.0
        if grid.dim == 1:
            areas = {0: 1.0}
        else:
            areas = {0: grid.extents[1], 1: grid.extents[0]}
        for axis in range(grid.dim):
            for is_max in (False, True):
                tot_w += self.side_weight(axis, is_max) * areas[axis]
        return tot_w * float(self.phi(t))


def zero_flux():
    return BoundaryFlux(family="constant", amplitude=0.0)


# ---------------------------------------------------------------------------
# Field snapshot files (text, 17 significant digits, bit-identical round trip)

_SNAPSHOT_MAGIC = "forchflow-field 1"


def _fmt(x):
    return "%.17g" % float(x)


def save_field(f: ScalarField, path, time=0.0):
    g = f.grid
    lines = [
        _SNAPSHOT_MAGIC,
        f"dim {g.dim}",
        "cells " + " ".join(str(c) for c in g.cells),
        "extents " + " ".join(_fmt(e) for e in g.extents),
        "margin " + _fmt(g.interior_margin),
        "time " + _fmt(time),
        "values",
    ]
    lines.extend(_fmt(v) for v in f.values.ravel())
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_field(path):
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != _SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: not a field snapshot file")
    header = {}
    idx = 1
    while idx < len(lines) and lines[idx] != "values":
        key, _, rest = lines[idx].partition(" ")
        header[key] = rest
        idx += 1
    if idx >= len(lines):
        raise ValueError(f"{path}: missing values section")
    dim = int(header["dim"])
    cells = tuple(int(c) for c in header["cells"].split())
    extents = tuple(float(e) for e in header["extents"].split())
    margin = float(header.get("margin", 0.125))
    time = float(header.get("time", 0.0))
    vals = np.array([float(v) for v in lines[idx + 1 :] if v], dtype=np.float64)
    grid = Grid(dim=dim, cells=cells, extents=extents, interior_margin=margin)
    return ScalarField(grid, vals.reshape(cells)), time
