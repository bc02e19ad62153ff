"""Quasimodes on translation surfaces as finite sums of lifted Euclidean ones.

On the surface the evolved packet is the Euclidean one read off in the
unrolled cylinder, so for a point ``x`` of polygon ``p``

    Lambda(x) = sum over copies (p, c) of Phi(x + c),

where ``x + c`` is the position of ``x`` in the copy of ``p`` placed at offset
``c`` in the plane.  On a rectangular torus the same field has the exact
Fourier series with coefficients 2 pi Phi_hat(k) / area on the dual lattice,
which gives a second, grid-free route to its norms.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import GridTooCoarse, PreconditionNotCertified
from .flow import (PhaseSpaceBox, as_surface_point, enumerate_translates,
                   find_cylinder, time_budget, translate_reach,
                   verify_no_self_intersection)
from .quadrature import composite_nodes
from .spectral import make_report
from .wavepacket import (ENVELOPE_CUT, EuclideanQuasimodeEval, TimeWindow,
                         coherent_state_value, defect_field_value,
                         defect_transform, euclidean_quasimode_value,
                         quasimode_transform)

NORM_POINTS_PER_WAVELENGTH = 8
DEFECT_POINTS_PER_WAVELENGTH = 16


# ------------------------------------------------------------------- cutoff

def _smooth_zero(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    a = _smooth_zero(t)
    b = _smooth_zero(1.0 - np.asarray(t, dtype=float))
    return a / (a + b)


def cutoff_profile(r):
    """chi(r) = 1 on [0, 1/2], 0 on [1, inf), smooth in between."""
    return 1.0 - smooth_step(2.0 * np.asarray(r, dtype=float) - 1.0)


@dataclass(frozen=True)
class CutoffState:
    params: object

    @property
    def radius(self):
        return self.params.hbar ** (0.5 - self.params.epsilon)


def cutoff_state_value(state, x):
    """psi_0(x) = chi(|x - x0| / r) phi_0(x), x in the chart of x0."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x - np.asarray(state.params.x0), axis=-1) / state.radius
    return cutoff_profile(r) * coherent_state_value(state.params, x)


def cutoff_remainder_norm_squared(state, panels=64):
    """||phi_0 - psi_0||^2 by radial quadrature (the state is radial in modulus)."""
    h, R = state.params.hbar, state.radius
    hi = max(R, 12.0 * math.sqrt(h))
    r, w = composite_nodes(0.0, hi, panels)
    dens = np.exp(-r * r / h) / (4.0 * math.pi * h)
    return float(2.0 * math.pi * np.sum(w * r * dens * (1.0 - cutoff_profile(r / R)) ** 2))


# --------------------------------------------------------------- evaluation

@dataclass(frozen=True, eq=False)
class SurfaceQuasimodeEval:
    surface: object
    state: CutoffState
    window: TimeWindow
    translates: object
    cylinder: object = None
    certificate: object = None
    rtol: float = 1e-9
    by_polygon: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        groups = {}
        for p, off in self.translates.copies:
            groups.setdefault(p, []).append(np.asarray(off, dtype=float))
        object.__setattr__(self, "by_polygon", groups)
        if not any(np.allclose(t, 0.0) for t in self.translates.translations):
            raise ValueError("translate set lacks the identity")

    @property
    def params(self):
        return self.state.params

    @property
    def euclid(self):
        return EuclideanQuasimodeEval(self.params, self.window, self.rtol)

    def offsets(self, polygon):
        return self.by_polygon.get(polygon, [])


def build_surface_quasimode(surface, params, window=None, cylinder=None, c=1.0,
                            exponent=None, certify=True, max_length=1e3,
                            n_samples=64, rtol=1e-9):
    """Assemble the cylinder, time budget, certificate and translate set."""
    x0 = as_surface_point(surface, params.x0)
    if cylinder is None:
        cylinder = find_cylinder(surface, params.xi0, x0, max_length)
    h, eps = params.hbar, params.epsilon
    if window is None:
        T = time_budget(h, eps, cylinder.length, cylinder.width, c, exponent)
        window = TimeWindow(T)
    box = PhaseSpaceBox.from_hbar(params.x0, params.xi0, h, eps)
    report = verify_no_self_intersection(surface, box, cylinder, window.T, h, n_samples)
    if certify and not report.ok:
        raise PreconditionNotCertified(
            f"packet tube leaves the cylinder (transverse {report.max_transverse:.4g}, "
            f"extent {report.longitudinal_extent:.4g})")
    ev = EuclideanQuasimodeEval(params, window, rtol)
    reach = max(translate_reach(window.T, h, box.position_radius),
                ev.travel + ENVELOPE_CUT * ev.envelope_width)
    margin = ENVELOPE_CUT * ev.envelope_width
    translates = enumerate_translates(surface, cylinder, x0, params.xi0, window.T, h,
                                      eps, reach=reach, margin=margin)
    return SurfaceQuasimodeEval(surface, CutoffState(params), window, translates,
                                cylinder, report, rtol)


def _translate_sum(ev, x, polygon, evaluator, rtol=None):
    x = np.asarray(x, dtype=float)
    pts = x.reshape(-1, 2)
    offs = ev.offsets(polygon)
    if not offs:
        return np.zeros(x.shape[:-1], dtype=complex)
    lifted = np.concatenate([pts + o for o in offs])
    vals = evaluator(ev.euclid, lifted, rtol).reshape(len(offs), len(pts))
    return vals.sum(axis=0).reshape(x.shape[:-1])


def translate_terms(ev, x, polygon=None):
    """List of (offset, Phi(x + offset)) for every copy of x's polygon."""
    pt = as_surface_point(ev.surface, x) if polygon is None else None
    p = pt.polygon if pt is not None else polygon
    xa = np.asarray(x, dtype=float)
    return [(o, complex(euclidean_quasimode_value(ev.euclid, xa + o)))
            for o in ev.offsets(p)]


def surface_quasimode_value(ev, x, polygon=None, rtol=None):
    """Lambda(x) for local coordinates x of ``polygon`` (located if omitted)."""
    if polygon is None:
        polygon = ev.surface.locate(np.asarray(x, dtype=float).reshape(-1, 2)[0])
    return _translate_sum(ev, x, polygon, euclidean_quasimode_value, rtol)


def surface_defect_value(ev, x, polygon=None, rtol=None):
    """(Delta + lambda) Lambda(x) from the analytic Euclidean defect field."""
    if polygon is None:
        polygon = ev.surface.locate(np.asarray(x, dtype=float).reshape(-1, 2)[0])
    return _translate_sum(ev, x, polygon, defect_field_value, rtol)


# --------------------------------------------------------------------- grids

@dataclass(frozen=True, eq=False)
class SurfaceGrid:
    """Midpoint sample grids, one per polygon."""

    points: tuple     # per polygon: (n, 2) local coordinates
    weights: tuple    # per polygon: (n,) cell areas
    spacing: float
    shapes: tuple = ()
    origins: tuple = ()
    steps: tuple = ()

    @property
    def size(self):
        return sum(len(p) for p in self.points)


def _clip_to_box(poly, lo, hi):
    """Part of a polygon inside an axis-aligned box (Sutherland-Hodgman)."""
    out = [tuple(v) for v in poly]
    for axis in (0, 1):
        for bound, keep in ((lo[axis], lambda q, b, a=axis: q[a] >= b),
                            (hi[axis], lambda q, b, a=axis: q[a] <= b)):
            src, out = out, []
            for i, cur in enumerate(src):
                prev = src[i - 1]
                cin, pin = keep(cur, bound), keep(prev, bound)
                if cin != pin:
                    t = (bound - prev[axis]) / (cur[axis] - prev[axis])
                    out.append(tuple(prev[k] + t * (cur[k] - prev[k]) for k in (0, 1)))
                if cin:
                    out.append(cur)
            if not out:
                return []
    return out


def _area_centroid(pts):
    P = np.asarray(pts)
    x, y = P[:, 0], P[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    c = x * yn - xn * y
    A = 0.5 * c.sum()
    if abs(A) < 1e-300:
        return 0.0, P.mean(axis=0)
    return A, np.array([((x + xn) * c).sum(), ((y + yn) * c).sum()]) / (6.0 * A)


def make_surface_grid(surface, spacing):
    """Midpoint grid over each polygon.  Cells cut by the boundary are clipped
    to the polygon: their weight is the clipped area and their node the
    clipped centroid, so the weights sum to the polygon area."""
    pts, wts, shapes, origins, steps = [], [], [], [], []
    hmax = 0.0
    for poly in surface.polygons:
        lo, hi = poly.bounding_box()
        ext = hi - lo
        n = np.maximum(1, np.ceil(ext / spacing - 1e-9)).astype(int)
        step = ext / n
        xs = lo[0] + (np.arange(n[0]) + 0.5) * step[0]
        ys = lo[1] + (np.arange(n[1]) + 0.5) * step[1]
        P = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
        W = np.full(len(P), step[0] * step[1])
        # cells whose centre lies within half a diagonal of the boundary
        near = np.zeros(len(P), dtype=bool)
        half = 0.5 * float(np.hypot(*step)) * (1 + 1e-9)
        for e in range(len(poly)):
            a, b = poly.edge(e)
            ab = b - a
            t = np.clip(((P - a) @ ab) / (ab @ ab), 0.0, 1.0)
            near |= np.linalg.norm(P - (a + t[:, None] * ab), axis=1) <= half
        inside = poly.contains(P, tol=0.0)
        for i in np.nonzero(near)[0]:
            piece = _clip_to_box(poly.vertices, P[i] - 0.5 * step, P[i] + 0.5 * step)
            if len(piece) < 3:
                W[i] = 0.0
                continue
            A, c = _area_centroid(piece)
            W[i] = A
            if A > 0 and not np.allclose(A, step[0] * step[1], rtol=1e-12):
                P[i] = c
        keep = (W > 1e-15 * step[0] * step[1]) & (inside | near)
        pts.append(P[keep])
        wts.append(W[keep])
        shapes.append(tuple(n))
        origins.append(tuple(lo + 0.5 * step))
        steps.append(tuple(step))
        hmax = max(hmax, float(step.max()))
    return SurfaceGrid(tuple(pts), tuple(wts), hmax, tuple(shapes), tuple(origins), tuple(steps))


def grid_for(surface, hbar, per_wavelength=NORM_POINTS_PER_WAVELENGTH):
    return make_surface_grid(surface, 2.0 * math.pi * hbar / per_wavelength)


def check_grid(grid, hbar, per_wavelength):
    limit = 2.0 * math.pi * hbar / per_wavelength
    if grid.spacing > limit * (1 + 1e-9):
        raise GridTooCoarse(f"grid spacing {grid.spacing:.4g} exceeds {limit:.4g}")


def sample_surface_field(ev, grid, defect=False, rtol=None):
    fn = surface_defect_value if defect else surface_quasimode_value
    return [fn(ev, P, polygon=i, rtol=rtol) if len(P) else np.zeros(0, complex)
            for i, P in enumerate(grid.points)]


def _grid_norm(values, grid):
    return float(sum(np.sum(w * np.abs(v) ** 2) for v, w in zip(values, grid.weights)))


# --------------------------------------------------------------- torus lattice

def rectangle_torus_periods(surface, tol=1e-9):
    """(width, height) if the surface is one axis-aligned rectangle glued to a torus."""
    if len(surface.polygons) != 1:
        return None
    V = surface.polygons[0].vertices
    if len(V) != 4:
        return None
    lo, hi = V.min(axis=0), V.max(axis=0)
    corners = {(round(x, 9), round(y, 9)) for x, y in V}
    want = {(round(a, 9), round(b, 9)) for a in (lo[0], hi[0]) for b in (lo[1], hi[1])}
    if corners != want:
        return None
    W, H = hi - lo
    taus = {tuple(np.round(np.abs(i.translation), 9)) for i in surface.identifications}
    if taus != {(round(W, 9), 0.0), (0.0, round(H, 9))}:
        return None
    return float(W), float(H)


@dataclass(frozen=True)
class TorusLattice:
    """Fourier series Lambda(x) = sum_m coeff_m exp(i k_m . x) of a torus field."""

    k: np.ndarray         # (n, 2)
    coeff: np.ndarray     # (n,)
    defect_coeff: np.ndarray
    periods: tuple

    @property
    def area(self):
        return self.periods[0] * self.periods[1]

    def norm_squared(self):
        return float(self.area * np.sum(np.abs(self.coeff) ** 2))

    def defect_norm_squared(self):
        return float(self.area * np.sum(np.abs(self.defect_coeff) ** 2))

    def value(self, x, defect=False):
        c = self.defect_coeff if defect else self.coeff
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, 2)
        out = np.array([np.sum(c * np.exp(1j * (self.k @ p))) for p in flat])
        return out.reshape(x.shape[:-1])


def torus_lattice(ev, k_sigma=12.0):
    """Exact Fourier coefficients of Lambda on a rectangular torus.

    Poisson summation turns the sum over all lattice translates into the
    series with coefficients 2 pi Phi_hat(k) / area; the k-range is cut at
    ``k_sigma`` Gaussian widths around the packet momentum.
    """
    periods = rectangle_torus_periods(ev.surface)
    if periods is None:
        raise ValueError("surface is not a rectangular torus")
    W, H = periods
    p = ev.params.momentum
    K = k_sigma / math.sqrt(ev.params.hbar)
    ax = []
    for centre, side in ((p[0], W), (p[1], H)):
        dk = 2.0 * math.pi / side
        ax.append(np.arange(math.floor((centre - K) / dk), math.ceil((centre + K) / dk) + 1) * dk)
    k = np.stack(np.meshgrid(ax[0], ax[1], indexing="ij"), axis=-1).reshape(-1, 2)
    scale = 2.0 * math.pi / (W * H)
    euclid = ev.euclid
    return TorusLattice(k, scale * quasimode_transform(euclid, k),
                        scale * defect_transform(euclid, k), periods)


# ------------------------------------------------------------------ norms

def _resolve_method(ev, method):
    if method == "auto":
        return "lattice" if rectangle_torus_periods(ev.surface) else "pointwise"
    return method


def surface_norm_squared(ev, grid=None, method="pointwise"):
    """int_Q |Lambda|^2 by midpoint quadrature or the torus Fourier series."""
    method = _resolve_method(ev, method)
    if method == "lattice":
        return torus_lattice(ev).norm_squared()
    h = ev.params.hbar
    grid = grid_for(ev.surface, h) if grid is None else grid
    check_grid(grid, h, NORM_POINTS_PER_WAVELENGTH)
    return _grid_norm(sample_surface_field(ev, grid), grid)


def surface_defect_norm_squared(ev, grid=None, method="pointwise"):
    method = _resolve_method(ev, method)
    if method == "lattice":
        return torus_lattice(ev).defect_norm_squared()
    h = ev.params.hbar
    grid = grid_for(ev.surface, h, DEFECT_POINTS_PER_WAVELENGTH) if grid is None else grid
    check_grid(grid, h, DEFECT_POINTS_PER_WAVELENGTH)
    return _grid_norm(sample_surface_field(ev, grid, defect=True), grid)


def surface_spectral_width(ev, grid=None, method="auto"):
    """Width ||(Delta+lambda) Lambda|| / ||Lambda|| on the surface."""
    method = _resolve_method(ev, method)
    h = ev.params.hbar
    if method == "lattice":
        lat = torus_lattice(ev)
        n2, d2 = lat.norm_squared(), lat.defect_norm_squared()
    else:
        grid = grid_for(ev.surface, h, DEFECT_POINTS_PER_WAVELENGTH) if grid is None else grid
        check_grid(grid, h, DEFECT_POINTS_PER_WAVELENGTH)
        n2 = _grid_norm(sample_surface_field(ev, grid), grid)
        d2 = _grid_norm(sample_surface_field(ev, grid, defect=True), grid)
    return make_report(h, ev.window.T, n2, d2, "surface-" + method,
                       copies=len(ev.translates.copies))


# ------------------------------------------------------------- FD oracle

FD6 = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])


def finite_difference_defect(value_fn, x, h, lam):
    """(Delta + lambda) u at points x from a sixth-order central Laplacian."""
    x = np.asarray(x, dtype=float)
    pts = x.reshape(-1, 2)
    offs = np.arange(-3, 4) * h
    lap = np.zeros(len(pts), dtype=complex)
    centre = None
    for axis in (0, 1):
        shift = np.zeros((7, 2))
        shift[:, axis] = offs
        stencil = (pts[:, None, :] + shift[None, :, :]).reshape(-1, 2)
        vals = np.asarray(value_fn(stencil)).reshape(len(pts), 7)
        lap += vals @ FD6 / (h * h)
        centre = vals[:, 3]
    return (lap + lam * centre).reshape(x.shape[:-1])
