# coding: utf-8

# # The surface quasimode over an hbar sweep
#
# On a 12 x 2 torus the horizontal direction is periodic and the packet stays
# inside its cylinder for the whole window. The surface spectral width then
# follows lambda^(3/8 + eps).

from superscar.experiments import ExperimentConfig, run_sweep

cfg = ExperimentConfig(hbar=(0.04, 0.02, 0.01, 0.005), output_dir="demo_results", name="desk")
res = run_sweep(cfg)
for r in res.rows:
    print(f"hbar = {r['hbar']:<6}  T = {r['T']:.4f}  width = {r['surface_width']:8.3f}  "
          f"width*T = {r['width_times_T']:.3f}")
fit = res.fits["width_vs_lambda"]
print(f"fitted exponent {fit.exponent:.4f}  (3/8 + eps = {3 / 8 + cfg.epsilon})")
print("results written to demo_results/desk.csv")

# The same run through the command line:
#
#     superscar run demos/desk_sweep.toml
#     superscar fit results/desk.csv --x lambda --y surface_width
