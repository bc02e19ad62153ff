# coding: utf-8

# # Translation surfaces and straight-line flow
#
# A translation surface is a set of polygons with edges glued by translations.
# We build the L-shaped surface, look at its single cone point, and follow a
# few straight lines on it.

import math

import numpy as np

from superscar.geometry import cone_angles, l_surface, square_torus, unfold_rational_polygon, PlanarPolygon
from superscar.flow import find_cylinder, search_periodic_directions, trace_flow

S = l_surface()
print("cone angles / pi:", [a / math.pi for a in cone_angles(S)])
print("genus:", S.genus, " area:", S.total_area)

# A horizontal line through the top square closes after length 1; the
# cylinder it sits in has width 1 and is bounded by the cone point.

cyl = find_cylinder(S, (1, 0), (0.5, 1.5), 100.0)
print("top cylinder: L =", cyl.length, " w =", cyl.width)

# Aimed at the corner (1, 1) the line runs into the cone point and stops.

tr = trace_flow(S, (0.5, 0.5), (1, 1), 10.0)
print("diagonal from (0.5, 0.5):", tr.terminal, "after", round(tr.total_length, 6))

# Periodic directions up to length 3, shortest first.

for d, c in search_periodic_directions(S, 3.0, [(0.5, 0.5), (0.5, 1.5), (1.5, 0.5)]):
    print(f"  direction {np.round(d, 4)}  L = {c.length:.4f}  w = {c.width:.4f}")

# On the square torus every rational slope p/q gives L = sqrt(p^2 + q^2) and
# L * w = 1.

for p, q in [(1, 0), (1, 1), (2, 1), (3, 2)]:
    c = find_cylinder(square_torus(), (p, q), (0.2, 0.3), 100.0)
    print(f"  slope {q}/{p}: L * w = {c.length * c.width:.15f}")

# Rational polygons unfold to translation surfaces. The 30-60-90 triangle
# needs 12 reflected copies.

U = unfold_rational_polygon(PlanarPolygon([[0, 0], [math.sqrt(3), 0], [0, 1]]))
print("30-60-90 triangle: |D| =", U.group_order, " genus", U.surface.genus)
