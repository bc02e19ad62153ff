"""Translation surfaces built from polygons glued along parallel edges.

Edges are directed with their polygon on the left.  An identification pairs
edge ``a`` with edge ``b`` through a translation ``tau``: the start of ``b`` is
the end of ``a`` plus ``tau`` and vice versa, so the two edges have opposite
orientation.
"""
from dataclasses import dataclass, field
from fractions import Fraction
import json
import math

import numpy as np

from .errors import (DegeneratePolygon, IrrationalAngle, NonMatching,
                     PairingMismatch, PointOutsideSurface, UnfoldOverflow)

TOL_GEOM = 1e-9
MAX_CHASE_STEPS = 10_000
MAX_DENOMINATOR = 64
GROUP_CAP = 256


def _cross(a, b):
    return a[0] * b[1] - a[1] * b[0]


def _segments_cross(p1, p2, q1, q2, tol):
    """Proper intersection of two closed segments (shared endpoints excluded)."""
    d1, d2 = p2 - p1, q2 - q1
    den = _cross(d1, d2)
    if abs(den) < tol:
        return False
    s = _cross(q1 - p1, d2) / den
    t = _cross(q1 - p1, d1) / den
    return tol < s < 1 - tol and tol < t < 1 - tol


@dataclass(frozen=True, eq=False)
class PlanarPolygon:
    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise DegeneratePolygon("a polygon needs at least 3 planar vertices")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        a = self.signed_area
        if abs(a) < TOL_GEOM:
            raise DegeneratePolygon("polygon has zero area")
        if a < 0:
            raise DegeneratePolygon("polygon vertices must be counterclockwise")
        n = len(v)
        for i in range(n):
            if np.linalg.norm(v[(i + 1) % n] - v[i]) < TOL_GEOM:
                raise DegeneratePolygon("repeated vertex")
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                if _segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n], TOL_GEOM):
                    raise DegeneratePolygon("polygon boundary self-intersects")

    def __len__(self):
        return len(self.vertices)

    @property
    def signed_area(self):
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    @property
    def area(self):
        return abs(self.signed_area)

    def edge(self, i):
        n = len(self.vertices)
        return self.vertices[i % n], self.vertices[(i + 1) % n]

    def edge_vector(self, i):
        a, b = self.edge(i)
        return b - a

    def interior_angle(self, i):
        """Interior angle at vertex i, in (0, 2 pi)."""
        out = self.edge_vector(i)
        back = -self.edge_vector(i - 1)
        ang = math.atan2(_cross(out, back), float(out @ back))
        return ang % (2 * math.pi)

    def bounding_box(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def contains(self, pts, tol=TOL_GEOM):
        """Boolean mask: points inside or within ``tol`` of the boundary."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        x, y = pts[:, 0], pts[:, 1]
        inside = np.zeros(len(pts), dtype=bool)
        on_edge = np.zeros(len(pts), dtype=bool)
        v = self.vertices
        n = len(v)
        for i in range(n):
            (x1, y1), (x2, y2) = v[i], v[(i + 1) % n]
            crosses = (y1 > y) != (y2 > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            inside ^= crosses & (x < xint)
            d = np.array([x2 - x1, y2 - y1])
            L2 = float(d @ d)
            s = np.clip(((x - x1) * d[0] + (y - y1) * d[1]) / L2, 0.0, 1.0)
            dist = np.hypot(x - (x1 + s * d[0]), y - (y1 + s * d[1]))
            on_edge |= dist <= tol
        return inside | on_edge

    def inward_normal(self, i):
        d = self.edge_vector(i)
        return np.array([-d[1], d[0]]) / np.linalg.norm(d)


@dataclass(frozen=True)
class EdgeIdentification:
    edge_a: tuple
    edge_b: tuple
    translation: tuple


@dataclass(frozen=True)
class ConePoint:
    """An equivalence class of polygon corners glued to a single point.

    ``corners`` lists (polygon, vertex) pairs in counterclockwise order around
    the point; ``offsets[k]`` is the position of corner k in its polygon minus
    the position of corner 0 in its polygon.
    """

    corners: tuple
    offsets: tuple
    total_angle: float

    @property
    def excess(self):
        return self.total_angle - 2 * math.pi

    def is_singular(self, tol=1e-7):
        return abs(self.excess) > tol


@dataclass(frozen=True, eq=False)
class TranslationSurface:
    polygons: tuple
    identifications: tuple
    cone_points: tuple
    total_area: float
    tol_geom: float = TOL_GEOM
    partner: dict = field(default_factory=dict, repr=False)
    vertex_class: dict = field(default_factory=dict, repr=False)

    @property
    def euler_characteristic(self):
        return len(self.cone_points) - len(self.identifications) + len(self.polygons)

    @property
    def genus(self):
        return (2 - self.euler_characteristic) // 2

    def singular_points(self):
        return [c for c in self.cone_points if c.is_singular()]

    def edge_translation(self, p, e):
        """(q, f, tau): leaving polygon p through edge e lands on edge f of q,
        with local coordinates shifted by tau."""
        return self.partner[(p, e)]

    def locate(self, x):
        """Index of the lowest-numbered polygon containing plane point x."""
        for i, poly in enumerate(self.polygons):
            if poly.contains(x, self.tol_geom)[0]:
                return i
        raise PointOutsideSurface(f"{tuple(x)} lies in no polygon")

    def to_dict(self):
        return {
            "polygons": [poly.vertices.tolist() for poly in self.polygons],
            "identifications": [
                {"a": list(i.edge_a), "b": list(i.edge_b), "tau": list(i.translation)}
                for i in self.identifications],
            "tol_geom": self.tol_geom,
        }


def _chase_vertices(polygons, partner, tol):
    seen = {}
    classes = []
    for p, poly in enumerate(polygons):
        for v in range(len(poly)):
            if (p, v) in seen:
                continue
            corners, offsets = [], []
            angle = 0.0
            cur, offset = (p, v), np.zeros(2)
            for _ in range(MAX_CHASE_STEPS):
                if cur in seen:
                    raise NonMatching(f"corner {cur} reached twice while chasing {p, v}")
                seen[cur] = len(classes)
                corners.append(cur)
                offsets.append(tuple(offset))
                cp, cv = cur
                cpoly = polygons[cp]
                angle += cpoly.interior_angle(cv)
                # rotate counterclockwise: leave through the incoming edge cv-1
                q, f, tau = partner[(cp, (cv - 1) % len(cpoly))]
                offset = offset + (polygons[q].vertices[f] - cpoly.vertices[cv])
                nxt = (q, f)
                if nxt == (p, v):
                    break
                cur = nxt
            else:
                raise NonMatching("vertex chase did not close within the step cap")
            classes.append(ConePoint(tuple(corners), tuple(offsets), angle))
    return classes, seen


def build_surface(polygons, identifications, tol_geom=TOL_GEOM):
    """Validate a gluing and compute its cone points."""
    if not polygons or not identifications:
        raise NonMatching("need at least one polygon and one identification")
    polys = tuple(p if isinstance(p, PlanarPolygon) else PlanarPolygon(p) for p in polygons)
    idents = []
    partner = {}
    for ident in identifications:
        if not isinstance(ident, EdgeIdentification):
            ident = EdgeIdentification(tuple(ident[0]), tuple(ident[1]), tuple(ident[2]))
        (pa, ea), (pb, eb) = ident.edge_a, ident.edge_b
        tau = np.asarray(ident.translation, dtype=float)
        try:
            a0, a1 = polys[pa].edge(ea)
            b0, b1 = polys[pb].edge(eb)
        except IndexError:
            raise NonMatching(f"identification refers to a missing polygon: {ident}")
        if not (0 <= ea < len(polys[pa]) and 0 <= eb < len(polys[pb])):
            raise NonMatching(f"identification refers to a missing edge: {ident}")
        if (np.linalg.norm(a1 + tau - b0) > tol_geom
                or np.linalg.norm(a0 + tau - b1) > tol_geom):
            raise PairingMismatch(
                f"edge {ident.edge_a} translated by {tuple(tau)} is not edge {ident.edge_b}")
        for key in ((pa, ea), (pb, eb)):
            if key in partner:
                raise NonMatching(f"edge {key} is paired twice")
        if (pa, ea) == (pb, eb):
            raise NonMatching(f"edge {(pa, ea)} paired with itself")
        partner[(pa, ea)] = (pb, eb, tau)
        partner[(pb, eb)] = (pa, ea, -tau)
        idents.append(EdgeIdentification((pa, ea), (pb, eb), tuple(map(float, tau))))
    for p, poly in enumerate(polys):
        for e in range(len(poly)):
            if (p, e) not in partner:
                raise NonMatching(f"edge {(p, e)} is unpaired")
    classes, seen = _chase_vertices(polys, partner, tol_geom)
    area = sum(p.area for p in polys)
    surf = TranslationSurface(polys, tuple(idents), tuple(classes), area, tol_geom,
                              partner, seen)
    excess = sum(c.excess for c in classes)
    if abs(excess + 2 * math.pi * surf.euler_characteristic) > 1e-6:
        raise NonMatching("cone angles violate Gauss-Bonnet; gluing is inconsistent")
    for c in classes:
        k = c.total_angle / (2 * math.pi)
        if abs(k - round(k)) > 1e-6 or round(k) < 1:
            raise NonMatching(f"cone angle {c.total_angle} is not a multiple of 2 pi")
    return surf


def cone_angles(surface):
    return [c.total_angle for c in surface.cone_points]


# ------------------------------------------------------------- standard surfaces

def rectangle_torus(width=1.0, height=1.0):
    """Flat torus from a rectangle with opposite sides glued."""
    poly = [[0, 0], [width, 0], [width, height], [0, height]]
    return build_surface([poly], [
        ((0, 0), (0, 2), (0.0, height)),
        ((0, 1), (0, 3), (-width, 0.0)),
    ])


def square_torus():
    return rectangle_torus(1.0, 1.0)


def l_surface():
    """Three unit squares in an L, opposite sides glued: genus 2, one 6 pi point."""
    poly = [[0, 0], [1, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2], [0, 1]]
    return build_surface([poly], [
        ((0, 0), (0, 5), (0.0, 2.0)),   # bottom-left  <-> top of upper square
        ((0, 1), (0, 3), (0.0, 1.0)),   # bottom-right <-> top of right square
        ((0, 2), (0, 7), (-2.0, 0.0)),  # right edge   <-> lower left edge
        ((0, 4), (0, 6), (-1.0, 0.0)),  # upper right  <-> upper left edge
    ])


def load_surface(path):
    with open(path) as fh:
        data = json.load(fh)
    return surface_from_dict(data)


def surface_from_dict(data):
    idents = [EdgeIdentification(tuple(d["a"]), tuple(d["b"]), tuple(d["tau"]))
              for d in data["identifications"]]
    return build_surface(data["polygons"], idents, data.get("tol_geom", TOL_GEOM))


def save_surface(surface, path):
    with open(path, "w") as fh:
        json.dump(surface.to_dict(), fh, indent=1)


# ------------------------------------------------------------------ unfolding

@dataclass(frozen=True)
class Isometry:
    """x -> linear @ x + offset."""

    linear: np.ndarray
    offset: np.ndarray

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.linear.T + self.offset

    def inverse(self, x):
        return (np.asarray(x, dtype=float) - self.offset) @ self.linear

    @property
    def det(self):
        return float(np.linalg.det(self.linear))


def _reflection(direction):
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    return 2.0 * np.outer(d, d) - np.eye(2)


def _linear_key(m):
    return tuple(np.round(m, 8).ravel() + 0.0)


@dataclass(frozen=True, eq=False)
class DihedralUnfolding:
    base_polygon: PlanarPolygon
    group_elements: tuple
    surface: TranslationSurface
    edge_maps: tuple  # per copy: base edge index -> copy edge index

    @property
    def group_order(self):
        return len(self.group_elements)

    def copy_containing(self, x):
        return fold_point(self, x)[1]


def rational_angle(angle, tol=TOL_GEOM, max_denominator=MAX_DENOMINATOR):
    """angle / pi as a Fraction, or IrrationalAngle."""
    r = angle / math.pi
    frac = Fraction(r).limit_denominator(max_denominator)
    if abs(float(frac) - r) > tol:
        raise IrrationalAngle(f"angle {angle} is not pi times a fraction with denominator <= {max_denominator}")
    return frac


def unfold_rational_polygon(P, angle_denominators=None, tol_geom=TOL_GEOM,
                            group_cap=GROUP_CAP):
    """Unfold a rational polygon to a translation surface.

    Copies g.P are laid out breadth first, each reflected across an edge of
    an already placed copy; an edge whose reflected neighbour already exists
    with the same linear part is glued to it by a translation.
    """
    if not isinstance(P, PlanarPolygon):
        P = PlanarPolygon(P)
    n = len(P)
    fracs = []
    for i in range(n):
        ang = P.interior_angle(i)
        if angle_denominators is not None:
            q = angle_denominators[i]
            pq = ang / math.pi * q
            if abs(pq - round(pq)) > tol_geom * q:
                raise IrrationalAngle(f"angle at vertex {i} is not pi*p/{q}")
            fracs.append(Fraction(int(round(pq)), q))
        else:
            fracs.append(rational_angle(ang, tol_geom))
    order_expected = 2 * math.lcm(*(f.denominator for f in fracs))
    if order_expected > group_cap:
        raise UnfoldOverflow(f"group order {order_expected} exceeds cap {group_cap}")

    def edge_map(det):
        if det > 0:
            return list(range(n))
        return [(-e - 1) % n for e in range(n)]

    def copy_vertices(g):
        w = g(P.vertices)
        if g.det < 0:
            w = w[[(-j) % n for j in range(n)]]
        return w

    elements = [Isometry(np.eye(2), np.zeros(2))]
    keys = {_linear_key(elements[0].linear): 0}
    pairs = {}
    queue = [0]
    while queue:
        i = queue.pop(0)
        g = elements[i]
        for e in range(n):
            a, b = g(P.vertices[e]), g(P.vertices[(e + 1) % n])
            R = _reflection(b - a)
            lin = R @ g.linear
            off = R @ (g.offset - a) + a
            key = _linear_key(lin)
            if key not in keys:
                if len(elements) >= group_cap:
                    raise UnfoldOverflow(f"group order exceeds cap {group_cap}")
                keys[key] = len(elements)
                elements.append(Isometry(lin, off))
                queue.append(len(elements) - 1)
            j = keys[key]
            tau = elements[j].offset - off
            ea = edge_map(g.det)[e]
            eb = edge_map(elements[j].det)[e]
            if (j, eb) not in pairs and (i, ea) not in pairs:
                pairs[(i, ea)] = ((j, eb), tuple(tau))
    polys = [PlanarPolygon(copy_vertices(g)) for g in elements]
    idents = [EdgeIdentification(a, b, tau) for a, (b, tau) in pairs.items()]
    surface = build_surface(polys, idents, tol_geom)
    maps = tuple(tuple(edge_map(g.det)) for g in elements)
    return DihedralUnfolding(P, tuple(elements), surface, maps)


def fold_point(unfolding, x):
    """(g^-1 x, index of g) for a point x of the unfolded surface.

    ``x`` is either a surface point (an object with ``polygon`` and ``xy``),
    which names its copy, or bare plane coordinates.  Planar copies may
    overlap, so bare coordinates resolve to the lowest-index copy containing
    them; this is also the tie-break on shared edges.
    """
    if hasattr(x, "polygon"):
        i = int(x.polygon)
        xy = np.asarray(x.xy, dtype=float)
        if not 0 <= i < len(unfolding.surface.polygons) or not \
                unfolding.surface.polygons[i].contains(xy, unfolding.surface.tol_geom)[0]:
            raise PointOutsideSurface(f"{tuple(xy)} is not in copy {i}")
        return unfolding.group_elements[i].inverse(xy), i
    x = np.asarray(x, dtype=float)
    for i, poly in enumerate(unfolding.surface.polygons):
        if poly.contains(x, unfolding.surface.tol_geom)[0]:
            return unfolding.group_elements[i].inverse(x), i
    raise PointOutsideSurface(f"{tuple(x)} is not on the unfolded surface")
