# coding: utf-8

# # Folding onto the square billiard
#
# The square unfolds to a 2 x 2 torus. Building the quasimode there and
# folding it back gives a Neumann quasimode on the square whose momentum
# measure splits evenly over the four reflections of xi0.

import math

from superscar.semiclassical import (build_folded_quasimode, dihedral_comb,
                                     folded_momentum_measure, localization_mass,
                                     neumann_defect)
from superscar.wavepacket import SemiclassicalParams

square = [[0, 0], [1, 0], [1, 1], [0, 1]]
h = 0.02
xi0 = (1 / math.sqrt(2), 1 / math.sqrt(2))
fq = build_folded_quasimode(square, SemiclassicalParams(h, 0.05, (0.5, 0.5), xi0))
comb = dihedral_comb(fq.unfolding, xi0)

# Pulling the folded field back to every copy of the square keeps the
# reflection symmetry, and the four atoms carry a quarter each.

d = folded_momentum_measure(fq, extension="unfolded")
for a in comb.distinct_atoms():
    print(f"atom ({a[0]:+.3f}, {a[1]:+.3f}): mass {localization_mass(d, a, 5 * math.sqrt(h)):.4f}")

# Extending by zero outside the square instead weights the atoms by which
# copies the packet visits during the window.

z = folded_momentum_measure(fq, extension="zero")
print("zero extension:", [round(localization_mass(z, a, 5 * math.sqrt(h)), 3)
                          for a in comb.distinct_atoms()])

fq0 = build_folded_quasimode(square, SemiclassicalParams(h, 0.05, (0.5, 0.5), (1, 0)))
print("Neumann defect (horizontal packet):", f"{neumann_defect(fq0):.2e}")
