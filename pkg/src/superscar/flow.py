"""Straight-line flow on translation surfaces, cylinders and time budgets.

A point on a surface is a polygon index plus local coordinates.  Tracing also
tracks a plane offset ``c`` so that ``local + c`` is the position of the
particle in the unrolled plane; crossing an edge with translation tau sends
``c`` to ``c - tau``.
"""
from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from .errors import (BudgetExceeded, HitSingularity, NonPositiveBudget,
                     NotPeriodic, StartAtSingularity)
from .wavepacket import unit_vector

MAX_SEGMENTS = 1_000_000
MAX_COPIES = 100_000
TWO_PI = 2.0 * math.pi


def _cross(a, b):
    return a[0] * b[1] - a[1] * b[0]


@dataclass(frozen=True)
class SurfacePoint:
    polygon: int
    xy: tuple

    def __post_init__(self):
        object.__setattr__(self, "polygon", int(self.polygon))
        object.__setattr__(self, "xy", tuple(float(c) for c in self.xy))

    @property
    def array(self):
        return np.asarray(self.xy, dtype=float)


def as_surface_point(surface, x):
    if isinstance(x, SurfacePoint):
        return x
    x = np.asarray(x, dtype=float)
    return SurfacePoint(surface.locate(x), tuple(x))


@dataclass(frozen=True)
class Segment:
    polygon: int
    start: np.ndarray
    end: np.ndarray
    offset: np.ndarray     # plane position = local + offset
    length_before: float

    @property
    def length(self):
        return float(np.linalg.norm(self.end - self.start))


@dataclass
class FlowTrace:
    segments: list
    total_length: float
    terminal: str                    # "Completed" or "HitSingularity"
    cone_point: int = None
    end: SurfacePoint = None
    end_offset: np.ndarray = None

    @property
    def hit_singularity(self):
        return self.terminal == "HitSingularity"

    @property
    def translations(self):
        """Plane offsets of the successive polygon copies visited."""
        return [s.offset for s in self.segments]


def trace_position(trace, t):
    """Surface point reached after flow time t along a trace."""
    if not 0.0 <= t <= trace.total_length * (1 + 1e-12):
        raise ValueError(f"time {t} outside [0, {trace.total_length}]")
    for seg in trace.segments:
        if t <= seg.length_before + seg.length or seg is trace.segments[-1]:
            L = seg.length
            frac = 0.0 if L == 0 else min(max((t - seg.length_before) / L, 0.0), 1.0)
            return SurfacePoint(seg.polygon, seg.start + frac * (seg.end - seg.start))


def default_hit_tol(surface, length=1.0):
    return 1e-9 * max(1.0, length)


def _in_sector(poly, w, d, tol=1e-12):
    out = poly.edge_vector(w)
    phi = math.atan2(_cross(out, d), float(out @ d)) % TWO_PI
    if phi > TWO_PI - tol:
        phi = 0.0
    return phi < poly.interior_angle(w) - tol


def _corner_for_direction(surface, cone, d):
    for q, w in cone.corners:
        if _in_sector(surface.polygons[q], w, d):
            return q, w
    raise RuntimeError("no sector of a regular vertex contains the direction")


class _Walker:
    """Iterates over the segments of a ray until a length or a singularity."""

    def __init__(self, surface, p, x, d, hit_tol, offset=None, corner=False):
        self.surface = surface
        self.p = p
        self.x = np.asarray(x, dtype=float)
        self.d = unit_vector(d)
        self.hit_tol = hit_tol
        self.offset = np.zeros(2) if offset is None else np.asarray(offset, dtype=float)
        self.s_min = hit_tol if corner else -1e-12
        self.travelled = 0.0
        self.cone_point = None

    def step(self, remaining):
        """Advance by at most ``remaining``; return the segment or None at a stop."""
        surf, d = self.surface, self.d
        poly = surf.polygons[self.p]
        V = poly.vertices
        E = np.roll(V, -1, axis=0) - V
        A = V - self.x
        cr = E[:, 0] * d[1] - E[:, 1] * d[0]           # cross(edge, d)
        outward = cr < -1e-15
        den = -cr
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):  # masked by `outward`
            s = (A[:, 0] * E[:, 1] - A[:, 1] * E[:, 0]) / den
            u = (A[:, 0] * d[1] - A[:, 1] * d[0]) / den
        ok = outward & (u > -1e-9) & (u < 1 + 1e-9) & (s >= self.s_min)
        if not np.any(ok):
            raise RuntimeError(f"ray left polygon {self.p} without crossing an edge")
        s_exit = np.where(ok, s, np.inf)
        e = int(np.argmin(s_exit))
        s_exit = float(s_exit[e])

        # vertices lying on the ray before the exit
        sv = A @ d
        perp = np.abs(A[:, 0] * d[1] - A[:, 1] * d[0])
        near = (perp < self.hit_tol) & (sv > self.hit_tol) & (sv <= min(s_exit + self.hit_tol, remaining))
        if np.any(near):
            k = int(np.argmin(np.where(near, sv, np.inf)))
            s_v = float(sv[k])
            seg = Segment(self.p, self.x, V[k].copy(), self.offset, self.travelled)
            self.travelled += s_v
            cone_idx = surf.vertex_class[(self.p, k)]
            cone = surf.cone_points[cone_idx]
            if cone.is_singular():
                self.cone_point = cone_idx
                return seg, True
            q, w = _corner_for_direction(surf, cone, d)
            plane = V[k] + self.offset
            self.p = q
            self.x = surf.polygons[q].vertices[w].copy()
            self.offset = plane - self.x
            self.s_min = self.hit_tol
            return seg, False

        if s_exit >= remaining:
            end = self.x + remaining * d
            seg = Segment(self.p, self.x, end, self.offset, self.travelled)
            self.travelled += remaining
            self.x = end
            self.s_min = -1e-12
            return seg, False

        y = self.x + s_exit * d
        seg = Segment(self.p, self.x, y, self.offset, self.travelled)
        self.travelled += s_exit
        q, f, tau = surf.partner[(self.p, e)]
        self.p = q
        self.x = y + tau
        self.offset = self.offset - tau
        self.s_min = -1e-12
        return seg, False


def _check_start(surface, pt, hit_tol):
    poly = surface.polygons[pt.polygon]
    dist = np.linalg.norm(poly.vertices - pt.array, axis=1)
    for k in np.nonzero(dist < hit_tol)[0]:
        cone = surface.cone_points[surface.vertex_class[(pt.polygon, int(k))]]
        if cone.is_singular():
            raise StartAtSingularity(f"start point {pt.xy} is a cone point")


def trace_flow(surface, x0, xi0, max_length, hit_tol=None, offset=None):
    """Follow the straight line from x0 in direction xi0 for max_length."""
    pt = as_surface_point(surface, x0)
    hit_tol = default_hit_tol(surface) if hit_tol is None else hit_tol
    _check_start(surface, pt, hit_tol)
    walker = _Walker(surface, pt.polygon, pt.array, xi0, hit_tol, offset)
    segments = []
    for _ in range(MAX_SEGMENTS):
        remaining = max_length - walker.travelled
        if remaining <= 0:
            break
        seg, stopped = walker.step(remaining)
        segments.append(seg)
        if stopped:
            return FlowTrace(segments, walker.travelled, "HitSingularity",
                             walker.cone_point, SurfacePoint(seg.polygon, tuple(seg.end)),
                             seg.offset)
    else:
        raise RuntimeError("segment cap reached")
    return FlowTrace(segments, walker.travelled, "Completed", None,
                     SurfacePoint(walker.p, tuple(walker.x)), walker.offset)


def first_return(surface, x0, xi0, max_length, hit_tol=None, tol=None):
    """Length of the first return of the orbit to x0 (NotPeriodic if none)."""
    pt = as_surface_point(surface, x0)
    hit_tol = default_hit_tol(surface) if hit_tol is None else hit_tol
    tol = surface.tol_geom * 10 if tol is None else tol
    _check_start(surface, pt, hit_tol)
    walker = _Walker(surface, pt.polygon, pt.array, xi0, hit_tol)
    d, x0a = walker.d, pt.array
    while walker.travelled < max_length:
        seg, stopped = walker.step(max_length - walker.travelled)
        if seg.polygon == pt.polygon:
            w = x0a - seg.start
            s = float(w @ d)
            if abs(_cross(d, w)) < tol and tol < s + seg.length_before and s <= seg.length + tol:
                if seg.length_before + s > tol:
                    return seg.length_before + s, seg.offset
        if stopped:
            raise HitSingularity("orbit runs into a cone point", walker.cone_point,
                                 walker.travelled)
    raise NotPeriodic(f"orbit does not close within length {max_length}")


# ------------------------------------------------------------------ cylinders

@dataclass(frozen=True)
class Cylinder:
    direction: tuple
    length: float
    width: float
    core_basepoint: SurfacePoint
    boundary_saddles: tuple = ()

    @property
    def normal(self):
        d = self.direction
        return np.array([-d[1], d[0]])


def _segment_hit(a0, a1, b0, b1, tol):
    """Parameters (s, t) in [0,1] where segments a and b cross, else None."""
    da, db = a1 - a0, b1 - b0
    den = _cross(da, db)
    if abs(den) < 1e-300:
        return None
    w = b0 - a0
    s = _cross(w, db) / den
    t = _cross(w, da) / den
    la, lb = np.linalg.norm(da), np.linalg.norm(db)
    if -tol / max(la, 1e-300) <= s <= 1 + tol / max(la, 1e-300) and \
            -tol / max(lb, 1e-300) <= t <= 1 + tol / max(lb, 1e-300):
        return s, t
    return None


def _half_width(surface, pt, d, sign, L, reach, hit_tol):
    """Distance from the core to the first singular orbit on one side.

    Every orbit at offset delta that runs into a cone point within length L
    shows up as a backward ray from that cone point crossing the transverse
    segment at distance delta.
    """
    n = sign * np.array([-d[1], d[0]])
    trans = trace_flow(surface, pt, n, reach, hit_tol)
    best = trans.total_length if trans.hit_singularity else math.inf
    saddle = trans.cone_point if trans.hit_singularity else None
    by_poly = {}
    for seg in trans.segments:
        by_poly.setdefault(seg.polygon, []).append(seg)
    back = -d
    for ci, cone in enumerate(surface.cone_points):
        if not cone.is_singular():
            continue
        for q, w in cone.corners:
            poly = surface.polygons[q]
            if not _in_sector(poly, w, back):
                continue
            walker = _Walker(surface, q, poly.vertices[w], back, hit_tol, corner=True)
            while walker.travelled < L * (1 + 1e-12):
                seg, stopped = walker.step(L * (1 + 1e-12) - walker.travelled)
                for tseg in by_poly.get(seg.polygon, ()):
                    hit = _segment_hit(seg.start, seg.end, tseg.start, tseg.end, hit_tol)
                    if hit is None:
                        continue
                    delta = tseg.length_before + hit[1] * tseg.length
                    if delta < best:
                        best, saddle = delta, ci
                if stopped:
                    break
    return best, saddle


def find_cylinder(surface, xi0, x0, max_length, hit_tol=None):
    """Maximal cylinder of closed orbits parallel to the orbit through x0."""
    d = unit_vector(xi0)
    pt = as_surface_point(surface, x0)
    L, _ = first_return(surface, pt, d, max_length, hit_tol)
    hit_tol = default_hit_tol(surface, L) if hit_tol is None else hit_tol
    if not surface.singular_points():
        return Cylinder(tuple(map(float, d)), float(L), surface.total_area / L, pt, ())
    reach = surface.total_area / L
    up, s_up = _half_width(surface, pt, d, +1, L, reach, hit_tol)
    down, s_down = _half_width(surface, pt, d, -1, L, reach, hit_tol)
    up, down = min(up, reach), min(down, reach)
    shift = 0.5 * (up - down)
    n = np.array([-d[1], d[0]])
    if abs(shift) > surface.tol_geom:
        move = trace_flow(surface, pt, n if shift > 0 else -n, abs(shift), hit_tol)
        core = move.end
    else:
        core = pt
    saddles = tuple(sorted({s for s in (s_up, s_down) if s is not None}))
    return Cylinder(tuple(map(float, d)), float(L), float(up + down), core, saddles)


def _primitive_vectors(bound):
    out = []
    r = int(math.floor(bound))
    for p in range(0, r + 1):
        for q in range(-r, r + 1):
            if p == 0 and q <= 0:
                continue
            if p * p + q * q > bound * bound + 1e-12:
                continue
            if math.gcd(p, abs(q)) != 1:
                continue
            out.append((p, q))
    return out


def search_periodic_directions(surface, length_bound, x0, lattice=None,
                               angular_grid=None, hit_tol=None):
    """Closed orbits of length <= length_bound through the given base point(s).

    Candidate directions are B (p, q) for primitive integer (p, q) with B the
    period lattice (identity by default), or a uniform grid of angles when
    ``angular_grid`` is set.  ``x0`` may be one point or a list of points.
    """
    if length_bound <= 0:
        return []
    pts = [x0] if isinstance(x0, SurfacePoint) or np.ndim(x0) == 1 else list(x0)
    if angular_grid:
        dirs = [np.array([math.cos(a), math.sin(a)])
                for a in np.arange(angular_grid) * math.pi / angular_grid]
    else:
        B = np.eye(2) if lattice is None else np.asarray(lattice, dtype=float)
        dirs = [B @ np.array(v, dtype=float) for v in _primitive_vectors(length_bound)]
    found = {}
    for v in dirs:
        d = unit_vector(v)
        for x in pts:
            try:
                cyl = find_cylinder(surface, d, x, length_bound * (1 + 1e-12), hit_tol)
            except (NotPeriodic, HitSingularity, StartAtSingularity):
                continue
            key = (round(d[0], 9), round(d[1], 9), round(cyl.length, 9), round(cyl.width, 9))
            found.setdefault(key, (tuple(map(float, d)), cyl))
    return sorted(found.values(), key=lambda dc: (dc[1].length, -dc[0][0], dc[0][1]))


# ------------------------------------------------------------------ budgets

def time_budget(hbar, epsilon, L, w, c=1.0, exponent=None):
    """T = min(c hbar^(3/4+2 eps), hbar^(1/2+eps) w / 4, hbar L / 4)."""
    if not 0.0 < hbar < 1.0:
        raise ValueError("hbar must lie in (0, 1)")
    if not 0.0 <= epsilon < 0.125:
        raise ValueError("epsilon must lie in [0, 1/8)")
    if epsilon == 0.0:
        warnings.warn("epsilon = 0 is a boundary case of the time budget")
    if exponent is None:
        exponent = 0.75 + 2.0 * epsilon
    T = min(c * hbar ** exponent, hbar ** (0.5 + epsilon) * w / 4.0, hbar * L / 4.0)
    if not T > 0:
        raise NonPositiveBudget(f"time budget {T} is not positive")
    return T


@dataclass(frozen=True)
class PhaseSpaceBox:
    x0: tuple
    xi0: tuple
    position_radius: float
    direction_radius: float

    @classmethod
    def from_hbar(cls, x0, xi0, hbar, epsilon):
        r = hbar ** (0.5 - epsilon)
        return cls(tuple(np.asarray(x0, dtype=float)), tuple(unit_vector(xi0)), r, r)


@dataclass
class SelfIntersectionReport:
    ok: bool
    transverse_ok: bool
    longitudinal_ok: bool
    max_transverse: float
    longitudinal_extent: float
    offending_sample: tuple = None


def verify_no_self_intersection(surface, box, cylinder, T, hbar, n_samples=64):
    """Check that the tube swept by the box for |v| <= T stays in the cylinder.

    Positions and momenta on the boundary of the box are flowed for geodesic
    time v/hbar; in the developed cylinder the motion is a straight line, so
    the extremes sit at v = +-T.
    """
    d = np.asarray(cylinder.direction)
    n = cylinder.normal
    core = cylinder.core_basepoint.array
    rel0 = np.asarray(box.x0) - core
    alpha = np.linspace(0.0, TWO_PI, n_samples, endpoint=False)
    ring = np.stack([np.cos(alpha), np.sin(alpha)], axis=1)
    pos = rel0 + box.position_radius * ring
    mom = np.asarray(box.xi0) + box.direction_radius * ring
    tmax = T / hbar
    worst_t, worst_sample = 0.0, None
    lo, hi = math.inf, -math.inf
    for i, x in enumerate(pos):
        ends = x[None, :] + np.array([-tmax, 0.0, tmax])[:, None, None] * mom[None, :, :]
        ends = ends.reshape(-1, 2)
        t = np.abs(ends @ n)
        s = ends @ d
        lo, hi = min(lo, float(s.min())), max(hi, float(s.max()))
        j = int(np.argmax(t))
        if t[j] > worst_t:
            worst_t, worst_sample = float(t[j]), (tuple(x + core), tuple(mom[j % len(mom)]))
    transverse_ok = worst_t < cylinder.width / 2.0
    extent = hi - lo
    longitudinal_ok = extent < cylinder.length
    ok = transverse_ok and longitudinal_ok
    return SelfIntersectionReport(ok, transverse_ok, longitudinal_ok, worst_t, extent,
                                  None if ok else worst_sample)


# ------------------------------------------------------------------ translates

@dataclass
class TranslateSet:
    """Polygon copies of the unrolled cylinder met by the averaged packet.

    ``translations`` are the plane offsets along the core line, ordered from
    j = -M_T to N_T with translations[M_T] = 0.  ``copies`` lists every
    (polygon, offset) pair within the transverse margin.
    """

    translations: list
    M_T: int
    N_T: int
    copies: list = field(default_factory=list)
    reach: float = 0.0
    margin: float = 0.0

    @property
    def tau(self):
        return {j - self.M_T: t for j, t in enumerate(self.translations)}


def translate_reach(T, hbar, position_radius):
    return 4.0 * T / hbar + 4.0 * position_radius


def _copies_along(surface, pt, offset, d, D, hit_tol):
    """Ordered (polygon, offset) copies met by the ray of length D."""
    if D <= 0:
        return [(pt.polygon, tuple(np.round(offset, 12) + 0.0))]
    tr = trace_flow(surface, pt, d, D, hit_tol, offset=offset)
    out = []
    for seg in tr.segments:
        key = (seg.polygon, tuple(np.round(seg.offset, 12) + 0.0))
        if not out or out[-1] != key:
            out.append(key)
        if len(out) > MAX_COPIES:
            raise BudgetExceeded("too many polygon copies in the unrolled cylinder")
    return out


def enumerate_translates(surface, cylinder, x0, xi0, T, hbar, epsilon=0.05,
                         reach=None, margin=0.0, hit_tol=None):
    """Unroll the cylinder around x0 along +-xi0 for distance ``reach``.

    ``reach`` defaults to 4T/hbar + 4 hbar^(1/2-eps).  With ``margin > 0``
    parallel lines at transverse offsets up to +-margin are traced too, so
    that copies touched by the packet's Gaussian tails are included.
    """
    d = unit_vector(xi0)
    pt = as_surface_point(surface, x0)
    if reach is None:
        reach = translate_reach(T, hbar, hbar ** (0.5 - epsilon))
    hit_tol = default_hit_tol(surface, reach) if hit_tol is None else hit_tol
    zero = np.zeros(2)
    fwd = _copies_along(surface, pt, zero, d, reach, hit_tol)
    bwd = _copies_along(surface, pt, zero, -d, reach, hit_tol)
    core = bwd[::-1][:-1] + fwd
    translations = [np.array(c[1]) for c in core]
    M_T = len(bwd) - 1
    N_T = len(fwd) - 1
    copies = dict.fromkeys(core)
    if margin > 0:
        n = np.array([-d[1], d[0]])
        edge_min = min(float(np.min(np.linalg.norm(np.diff(
            np.vstack([p.vertices, p.vertices[:1]]), axis=0), axis=1)))
            for p in surface.polygons)
        k = int(math.ceil(margin / (0.25 * edge_min)))
        for sign in (+1, -1):
            for i in range(1, k + 1):
                delta = margin * i / k
                move = trace_flow(surface, pt, sign * n, delta, hit_tol)
                if move.hit_singularity:
                    break
                start, off = move.end, move.end_offset
                for dd in (d, -d):
                    for c in _copies_along(surface, start, off, dd, reach, hit_tol):
                        copies.setdefault(c)
                if len(copies) > MAX_COPIES:
                    raise BudgetExceeded("too many polygon copies in the unrolled cylinder")
    return TranslateSet(translations, M_T, N_T,
                        [(p, np.array(o)) for p, o in copies], reach, margin)


# ------------------------------------------------------------------ billiards

def billiard_trace(P, x0, d, length, n_points=None):
    """Points of the billiard trajectory in polygon P, reflecting at edges.

    Returns (times, points) at the reflection events and the end.
    """
    V = P.vertices
    x = np.asarray(x0, dtype=float)
    d = unit_vector(d)
    times, pts = [0.0], [x.copy()]
    t = 0.0
    last = None
    while t < length:
        best, be = math.inf, None
        for e in range(len(V)):
            if e == last:
                continue
            a, b = V[e], V[(e + 1) % len(V)]
            ev = b - a
            den = _cross(d, ev)
            if abs(den) < 1e-15:
                continue
            s = _cross(a - x, ev) / den
            u = _cross(a - x, d) / den
            if s > 1e-12 and -1e-12 <= u <= 1 + 1e-12 and s < best:
                best, be = s, e
        step = min(best, length - t)
        x = x + step * d
        t += step
        times.append(t)
        pts.append(x.copy())
        if t >= length:
            break
        ev = P.edge_vector(be)
        ev = ev / np.linalg.norm(ev)
        d = 2.0 * (d @ ev) * ev - d
        last = be
    return np.array(times), np.array(pts)
