"""Momentum densities, Weyl matrix elements of momentum symbols, Dirac combs,
and the folded (method of images) quasimode on a rational polygon.

A momentum density is stored as a discrete measure: points xi in the
momentum plane with masses summing to one, plus the cell measure of each
point so that masses / cells approximates the continuous density.
"""
from dataclasses import dataclass, field
import math
from typing import Callable

import numpy as np

from .errors import GridTooCoarse, PointOutsidePolygon, ZeroField
from .geometry import PlanarPolygon, unfold_rational_polygon
from .spectral import norm_squared
from .surface import (NORM_POINTS_PER_WAVELENGTH, build_surface_quasimode,
                      surface_quasimode_value)
from .wavepacket import quasimode_transform, unit_vector


# ------------------------------------------------------------------ densities

@dataclass(frozen=True, eq=False)
class MomentumDensity:
    points: np.ndarray
    masses: np.ndarray
    cells: np.ndarray
    hbar: float
    raw_mass: float = 1.0
    source: str = ""
    spacing: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def total_mass(self):
        return float(np.sum(self.masses))

    @property
    def values(self):
        return self.masses / self.cells

    def argmax(self):
        return self.points[int(np.argmax(self.values))]


def _normalize(points, weights, cells, hbar, source, spacing, **info):
    weights = np.asarray(weights, dtype=float)
    total = float(np.sum(weights))
    if not total > 0 or not np.isfinite(total):
        raise ZeroField("field has zero norm")
    return MomentumDensity(np.asarray(points, dtype=float), weights / total,
                           np.asarray(cells, dtype=float), hbar, total, source,
                           spacing, dict(info))


def momentum_density_from_lattice(k, coeff, hbar):
    """Density of a torus field sum_m c_m exp(i k_m.x): masses |c_m|^2 at hbar k_m."""
    k = np.asarray(k, dtype=float)
    d = np.diff(np.unique(np.round(k[:, 0], 12)))
    dk = float(d.min()) if d.size else 1.0
    d2 = np.diff(np.unique(np.round(k[:, 1], 12)))
    dk2 = float(d2.min()) if d2.size else 1.0
    cell = hbar * hbar * dk * dk2
    return _normalize(hbar * k, np.abs(coeff) ** 2, np.full(len(k), cell), hbar,
                      "lattice", hbar * max(dk, dk2))


def momentum_density_from_samples(values, spacing, hbar, origin=(0.0, 0.0), pad=1):
    """Density of a field sampled on a regular grid, by discrete Fourier transform.

    The samples are embedded (zero-extended when ``pad > 1``) in a periodic box
    and psi_hat(k) = (1/2pi) sum psi exp(-i k.x) dx dy is evaluated on the
    box's dual lattice.
    """
    values = np.asarray(values, dtype=complex)
    hx, hy = (spacing, spacing) if np.isscalar(spacing) else spacing
    nx, ny = values.shape
    Nx, Ny = int(round(pad * nx)), int(round(pad * ny))
    buf = np.zeros((Nx, Ny), dtype=complex)
    buf[:nx, :ny] = values
    kx = 2.0 * np.pi * np.fft.fftfreq(Nx, hx)
    ky = 2.0 * np.pi * np.fft.fftfreq(Ny, hy)
    F = np.fft.fft2(buf) * hx * hy / (2.0 * np.pi)
    F *= np.exp(-1j * (kx[:, None] * origin[0] + ky[None, :] * origin[1]))
    K = np.stack(np.meshgrid(kx, ky, indexing="ij"), axis=-1).reshape(-1, 2)
    dkx, dky = 2.0 * np.pi / (Nx * hx), 2.0 * np.pi / (Ny * hy)
    cell = hbar * hbar * dkx * dky
    dens = np.abs(F.ravel()) ** 2
    return _normalize(hbar * K, dens, np.full(len(K), cell), hbar, "dft",
                      hbar * max(dkx, dky), transform=F, k=K)


def closed_form_density(ev, xi, norm_sq=None):
    """hbar^-2 |Phi_hat(xi/hbar)|^2 / ||Phi||^2 (integrates to one)."""
    h = ev.params.hbar
    if norm_sq is None:
        norm_sq = norm_squared(ev.params, ev.window)
    F = quasimode_transform(ev, np.asarray(xi, dtype=float) / h)
    return np.abs(F) ** 2 / (h * h * norm_sq)


def polar_momentum_grid(ev, annulus=10.0):
    """Midpoint polar grid on the annulus | |xi| - 1 | <= annulus hbar^(1/2-eps)."""
    h, eps, T = ev.params.hbar, ev.params.epsilon, ev.window.T
    half = annulus * h ** (0.5 - eps)
    lo, hi = max(0.0, 1.0 - half), 1.0 + half
    dr = min(math.sqrt(h) / 8.0, h * h / (16.0 * T))
    nr = int(math.ceil((hi - lo) / dr))
    dr = (hi - lo) / nr
    nt = int(math.ceil(2.0 * math.pi / (math.sqrt(h) / 8.0)))
    dt = 2.0 * math.pi / nt
    r = lo + (np.arange(nr) + 0.5) * dr
    th = (np.arange(nt) + 0.5) * dt
    return r, th, dr, dt


def momentum_density_closed_form(ev, annulus=10.0):
    """Density of the Euclidean quasimode from the closed-form transform."""
    r, th, dr, dt = polar_momentum_grid(ev, annulus)
    h = ev.params.hbar
    R, TH = np.meshgrid(r, th, indexing="ij")
    pts = np.stack([R * np.cos(TH), R * np.sin(TH)], axis=-1).reshape(-1, 2)
    cells = (R * dr * dt).ravel()
    F = quasimode_transform(ev, pts / h)
    dens = np.abs(F) ** 2 / (h * h)
    edge = max(float(np.max(np.abs(F.reshape(R.shape)[[0, -1], :]))), 0.0)
    return _normalize(pts, dens * cells, cells, h, "closed-form", dr,
                      edge_ratio=edge / float(np.max(np.abs(F))))


def momentum_density(source, hbar=None, **kw):
    """Dispatch: Euclidean quasimode evaluator, torus lattice, or sampled field."""
    from .surface import TorusLattice
    from .wavepacket import EuclideanQuasimodeEval
    if isinstance(source, EuclideanQuasimodeEval):
        return momentum_density_closed_form(source, **kw)
    if isinstance(source, TorusLattice):
        return momentum_density_from_lattice(source.k, source.coeff, hbar)
    return momentum_density_from_samples(source, kw.pop("spacing"), hbar, **kw)


def density_l1_distance(density, reference):
    """sum |density value - reference(xi)| * cell over the density's points."""
    ref = np.asarray(reference(density.points), dtype=float)
    return float(np.sum(np.abs(density.values - ref) * density.cells))


# ------------------------------------------------------------------ symbols

@dataclass(frozen=True)
class MomentumSymbol:
    name: str
    fn: Callable
    grad_bound: float = 1.0

    def __call__(self, xi):
        return np.asarray(self.fn(np.asarray(xi, dtype=float)), dtype=float)

    def __add__(self, other):
        return MomentumSymbol(f"{self.name}+{other.name}",
                              lambda xi: self(xi) + other(xi),
                              self.grad_bound + other.grad_bound)


def _angle(xi):
    return np.arctan2(xi[..., 1], xi[..., 0])


def test_symbols(xi0=(1.0, 0.0)):
    """The weak-* test suite: 1, xi_1, xi_2, |xi|^2, a Gaussian bump at xi0,
    and cos(k theta) for k <= 4."""
    c = np.asarray(unit_vector(xi0))
    syms = [
        MomentumSymbol("one", lambda xi: np.ones(xi.shape[:-1]), 0.0),
        MomentumSymbol("xi1", lambda xi: xi[..., 0], 1.0),
        MomentumSymbol("xi2", lambda xi: xi[..., 1], 1.0),
        MomentumSymbol("abs2", lambda xi: np.sum(xi * xi, axis=-1), 4.0),
        MomentumSymbol("bump", lambda xi: np.exp(-np.sum((xi - c) ** 2, axis=-1)), 1.0),
    ]
    for k in range(1, 5):
        syms.append(MomentumSymbol(f"cos{k}", lambda xi, k=k: np.cos(k * _angle(xi)), float(k)))
    return syms


test_symbols.__test__ = False  # not a pytest test


def weyl_matrix_element(a, density):
    """<Op(a) psi, psi>/||psi||^2 = int a d mu for a momentum symbol a."""
    return float(np.sum(density.masses * a(density.points)))


def localization_mass(density, center, r):
    if r <= density.spacing:
        raise ValueError(f"radius {r} does not exceed the grid spacing {density.spacing}")
    d = np.linalg.norm(density.points - np.asarray(center, dtype=float), axis=1)
    return float(np.sum(density.masses[d <= r]))


# --------------------------------------------------------------------- combs

@dataclass(frozen=True)
class DiracComb:
    atoms: tuple
    weights: tuple

    def __post_init__(self):
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError("comb weights must sum to one")

    def expectation(self, a):
        return float(sum(w * float(a(np.asarray(x))) for x, w in zip(self.atoms, self.weights)))

    def distinct_atoms(self, tol=1e-9):
        out = []
        for x in self.atoms:
            if not any(np.linalg.norm(np.subtract(x, y)) < tol for y in out):
                out.append(tuple(x))
        return out


def single_atom_comb(xi0):
    return DiracComb((tuple(unit_vector(xi0)),), (1.0,))


def dihedral_comb(unfolding, xi0):
    """(1/|D|) sum_g delta(xi - g xi0) over the linear parts of the unfolding."""
    xi0 = unit_vector(xi0)
    atoms = tuple(tuple(g.linear @ xi0) for g in unfolding.group_elements)
    n = len(atoms)
    return DiracComb(atoms, tuple([1.0 / n] * n))


@dataclass
class DiracLimitTable:
    rows: list
    rates: dict
    ratios: dict

    def errors(self, symbol):
        return [r["error"] for r in self.rows if r["symbol"] == symbol]


def dirac_limit_error(densities, comb, symbols, floor=1e-12):
    """|int a d mu_hbar - comb(a)| for each hbar and symbol, with decay rates.

    ``densities`` maps hbar to MomentumDensity.  The rate of a symbol is the
    log-log slope of its error against hbar; symbols whose errors are all
    below ``floor`` have no rate (they are exact).
    """
    from .experiments import fit_power_law
    if len(symbols) < 2 or len(densities) < 3:
        raise ValueError("need at least 2 test symbols and 3 hbar values")
    hs = sorted(densities, reverse=True)
    rows, rates, ratios = [], {}, {}
    for a in symbols:
        target = comb.expectation(a)
        errs = []
        for h in hs:
            val = weyl_matrix_element(a, densities[h])
            err = abs(val - target)
            errs.append(err)
            rows.append({"hbar": h, "symbol": a.name, "value": val, "target": target,
                         "error": err})
        ratios[a.name] = [errs[i] / errs[i + 1] if errs[i + 1] > 0 else math.inf
                          for i in range(len(errs) - 1)]
        if all(e > floor for e in errs):
            rates[a.name] = fit_power_law(list(zip(hs, errs))).exponent
        else:
            rates[a.name] = None
    return DiracLimitTable(rows, rates, ratios)


# --------------------------------------------------------------- folding

@dataclass(frozen=True, eq=False)
class FoldedQuasimode:
    unfolding: object
    surface_eval: object

    @property
    def polygon(self):
        if self.unfolding is None:
            return self.surface_eval.surface.polygons[0]
        return self.unfolding.base_polygon

    @property
    def params(self):
        return self.surface_eval.params


def build_folded_quasimode(P, params, angle_denominators=None, **kw):
    """Unfold P, build the surface quasimode on the unfolding, and fold it back."""
    P = P if isinstance(P, PlanarPolygon) else PlanarPolygon(P)
    unf = unfold_rational_polygon(P, angle_denominators)
    ev = build_surface_quasimode(unf.surface, params, **kw)
    return FoldedQuasimode(unf, ev)


def folded_value(folded, x, check=True):
    """Psi(x) = sum_g Lambda(g x) for x in P."""
    x = np.asarray(x, dtype=float)
    pts = x.reshape(-1, 2)
    if check and not np.all(folded.polygon.contains(pts)):
        raise PointOutsidePolygon("point outside the base polygon")
    ev = folded.surface_eval
    if folded.unfolding is None:
        return surface_quasimode_value(ev, x, polygon=0)
    out = np.zeros(len(pts), dtype=complex)
    for i, g in enumerate(folded.unfolding.group_elements):
        out += surface_quasimode_value(ev, g(pts), polygon=i)
    return out.reshape(x.shape[:-1])


def polygon_grid(P, spacing):
    """Midpoint grid over the bounding box of P: (centres, inside mask, steps, origin)."""
    lo, hi = P.bounding_box()
    n = np.maximum(1, np.ceil((hi - lo) / spacing - 1e-9)).astype(int)
    step = (hi - lo) / n
    xs = lo[0] + (np.arange(n[0]) + 0.5) * step[0]
    ys = lo[1] + (np.arange(n[1]) + 0.5) * step[1]
    C = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1)
    inside = P.contains(C.reshape(-1, 2), tol=0.0).reshape(n)
    return C, inside, step, lo + 0.5 * step


def sample_folded(folded, spacing):
    P = folded.polygon
    C, inside, step, origin = polygon_grid(P, spacing)
    vals = np.zeros(inside.shape, dtype=complex)
    vals[inside] = folded_value(folded, C[inside], check=False)
    return vals, inside, step, origin


def folded_norm_squared(folded, spacing=None):
    h = folded.params.hbar
    spacing = 2.0 * math.pi * h / NORM_POINTS_PER_WAVELENGTH if spacing is None else spacing
    vals, inside, step, _ = sample_folded(folded, spacing)
    return float(np.sum(np.abs(vals[inside]) ** 2) * step[0] * step[1])


def sample_unfolded(folded, spacing, samples=None):
    """Psi pulled back to the unfolded surface: F(y) = Psi(g_i^-1 y) on copy i.

    Returns values on a midpoint grid over the bounding box of all copies
    (zero outside them), together with the step and the grid origin.
    """
    unf = folded.unfolding
    polys = unf.surface.polygons
    lo = np.min([p.vertices.min(axis=0) for p in polys], axis=0)
    hi = np.max([p.vertices.max(axis=0) for p in polys], axis=0)
    vals_p, inside_p, step_p, origin_p = sample_folded(folded, spacing) if samples is None else samples
    n = np.maximum(1, np.round((hi - lo) / step_p).astype(int))
    step = (hi - lo) / n
    xs = lo[0] + (np.arange(n[0]) + 0.5) * step[0]
    ys = lo[1] + (np.arange(n[1]) + 0.5) * step[1]
    C = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
    out = np.zeros(len(C), dtype=complex)
    done = np.zeros(len(C), dtype=bool)
    for i, g in enumerate(unf.group_elements):
        mask = polys[i].contains(C, tol=0.0) & ~done
        if not np.any(mask):
            continue
        x = g.inverse(C[mask])
        idx = (x - origin_p) / step_p
        near = np.all(np.abs(idx - np.round(idx)) < 1e-6, axis=1)
        ii = np.round(idx).astype(int)
        ok = near & np.all((ii >= 0) & (ii < np.array(vals_p.shape)), axis=1)
        v = np.empty(int(mask.sum()), dtype=complex)
        v[ok] = vals_p[ii[ok, 0], ii[ok, 1]]
        if np.any(~ok):
            v[~ok] = folded_value(folded, x[~ok], check=False)
        out[mask] = v
        done |= mask
    return out.reshape(n), step, lo + 0.5 * step


def folded_momentum_measure(folded, spacing=None, pad=None, samples=None,
                            extension="zero"):
    """Momentum density of the folded quasimode by DFT.

    ``extension="zero"`` transforms Psi on P extended by zero (pad defaults to
    2).  ``extension="unfolded"`` transforms the pull-back of Psi to every copy
    g P of the unfolded surface (pad defaults to 1, which is exact when the
    copies tile a periodic rectangle, as for the square).
    """
    h = folded.params.hbar
    limit = 2.0 * math.pi * h / NORM_POINTS_PER_WAVELENGTH
    spacing = limit if spacing is None else spacing
    if spacing > limit * (1 + 1e-9):
        raise GridTooCoarse(f"grid spacing {spacing:.4g} exceeds {limit:.4g}")
    if samples is None:
        samples = sample_folded(folded, spacing)
    if extension == "zero":
        vals, _, step, origin = samples
        return momentum_density_from_samples(vals, tuple(step), h, tuple(origin),
                                             2 if pad is None else pad)
    if extension == "unfolded":
        if folded.unfolding is None:
            raise ValueError("unfolded extension needs an unfolding")
        vals, step, origin = sample_unfolded(folded, spacing, samples)
        return momentum_density_from_samples(vals, tuple(step), h, tuple(origin),
                                             1 if pad is None else pad)
    raise ValueError(f"unknown extension {extension!r}")


def neumann_defect(folded, per_edge=64, fd_step=None, spacing=None, margin=0.05):
    """max over boundary samples of |d_n Psi| / (lambda^(1/2) max |Psi|).

    The normal derivative uses the second-order one-sided difference
    (-3 f0 + 4 f1 - f2) / (2 h) into the polygon with h = hbar / 32.
    """
    P = folded.polygon
    h = folded.params.hbar
    fd_step = h / 32.0 if fd_step is None else fd_step
    limit = 2.0 * math.pi * h / NORM_POINTS_PER_WAVELENGTH
    spacing = limit if spacing is None else spacing
    if spacing > limit * (1 + 1e-9):
        raise GridTooCoarse(f"grid spacing {spacing:.4g} exceeds {limit:.4g}")
    vals, inside, _, _ = sample_folded(folded, spacing)
    peak = float(np.max(np.abs(vals[inside])))
    if peak == 0.0:
        raise ZeroField("folded quasimode vanishes on the grid")
    s = np.linspace(margin, 1.0 - margin, per_edge)
    worst = 0.0
    for e in range(len(P)):
        a, b = P.edge(e)
        nin = P.inward_normal(e)
        base = a[None, :] + s[:, None] * (b - a)[None, :]
        f = [folded_value(folded, base + j * fd_step * nin, check=False) for j in range(3)]
        dn = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * fd_step)
        worst = max(worst, float(np.max(np.abs(dn))))
    return worst / (h ** -1 * peak)
