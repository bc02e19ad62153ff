# coding: utf-8

# # Momentum localization of the surface quasimode
#
# On a rectangular torus the quasimode is an exact Fourier series, so its
# momentum density is a weighted lattice. As hbar shrinks the mass collects at
# xi0 and every test symbol converges to its value there.

import math

from superscar.experiments import resolve_surface
from superscar.semiclassical import (dirac_limit_error, localization_mass,
                                     momentum_density_from_lattice, single_atom_comb,
                                     test_symbols)
from superscar.surface import build_surface_quasimode, torus_lattice
from superscar.wavepacket import SemiclassicalParams

surface = resolve_surface("desk_torus")
dens = {}
for h in (0.04, 0.02, 0.01):
    ev = build_surface_quasimode(surface, SemiclassicalParams(h, 0.05, (6, 1), (1, 0)))
    lat = torus_lattice(ev)
    dens[h] = momentum_density_from_lattice(lat.k, lat.coeff, h)
    print(f"hbar = {h}: mass in B(xi0, 5 hbar^1/2) = "
          f"{localization_mass(dens[h], (1, 0), 5 * math.sqrt(h)):.10f}")

table = dirac_limit_error(dens, single_atom_comb((1, 0)), test_symbols())
for name, ratios in table.ratios.items():
    errs = table.errors(name)
    print(f"  {name:5s} errors {[f'{e:.2e}' for e in errs]}  ratios {[round(r, 2) for r in ratios]}")
