# coding: utf-8

# # Euclidean quasimodes and their spectral width
#
# Phi = int H(t) exp(i t lambda) U_t phi_0 dt averages a coherent state over a
# time window of length T. Its width ||(Delta + lambda) Phi|| / ||Phi|| scales
# like 1/T.

import numpy as np

from superscar.experiments import fit_power_law
from superscar.spectral import J0_bessel, J_integral, spectral_width_report
from superscar.wavepacket import (EuclideanQuasimodeEval, SemiclassicalParams, TimeWindow,
                                  euclidean_quasimode_value, momentum_route_value)

p = SemiclassicalParams(0.02, 0.05)
rows = []
for T in np.geomspace(0.01, 0.1, 6):
    r = spectral_width_report(p, TimeWindow(T))
    rows.append((T, r.width))
    print(f"T = {T:.4f}  width = {r.width:9.3f}  width*T = {r.width_times_T:.4f}")
print("slope of width vs T:", round(fit_power_law(rows).exponent, 4))

# The field itself can be evaluated two ways. The time quadrature and the
# momentum-lattice sum agree to rounding.

ev = EuclideanQuasimodeEval(SemiclassicalParams(0.05, 0.05), TimeWindow(0.05), rtol=1e-12)
x = np.array([[0.0, 0.0], [0.4, 0.05]])
print("time route    ", euclidean_quasimode_value(ev, x))
print("momentum route", momentum_route_value(ev, x))

# The angular integral J_0(2/hbar) against its Bessel-function form.

for h in (0.1, 0.01, 0.001):
    print(f"hbar = {h}:  J0 = {J_integral(h, 0):.12e}  via I0 = {J0_bessel(h):.12e}")
