"""Command line entry point ``superscar``."""
import argparse
import json
import math
import sys

import numpy as np

from . import experiments as ex
from .flow import find_cylinder, search_periodic_directions, time_budget, trace_flow
from .io import cylinder_record, trace_record, write_field
from .semiclassical import (build_folded_quasimode, dihedral_comb, dirac_limit_error,
                            folded_momentum_measure, localization_mass,
                            momentum_density_from_lattice, neumann_defect,
                            single_atom_comb, test_symbols, weyl_matrix_element)
from .spectral import spectral_width_report
from .surface import (build_surface_quasimode, grid_for, sample_surface_field,
                      surface_spectral_width, torus_lattice)
from .wavepacket import SemiclassicalParams, TimeWindow


def _pair(s):
    return tuple(float(v) for v in s)


def _emit(obj, out=None):
    text = json.dumps(obj, indent=1)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _write_csv(header, rows, out=None):
    lines = [",".join(header)]
    lines += [",".join(ex.format_value(v) for v in r) for r in rows]
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _params(a, x0_default=(6.0, 1.0)):
    x0 = x0_default if a.x0 is None else _pair(a.x0)
    return SemiclassicalParams(a.hbar, a.epsilon, x0, _pair(a.xi0))


def _surface_eval(a):
    surf = ex.resolve_surface(a.surface)
    p = _params(a)
    window = TimeWindow(a.T) if a.T else None
    return surf, build_surface_quasimode(surf, p, window, c=a.c, certify=not a.no_certify)


# ------------------------------------------------------------------ handlers

def cmd_run(a):
    cfg = ex.load_config(a.config)
    if a.output_dir:
        cfg.output_dir = a.output_dir
    res = ex.run_sweep(cfg)
    for r in res.rows:
        print(f"hbar={r['hbar']:<8g} status={r['status']} width={r['surface_width']} {r['error']}")
    for k, f in res.fits.items():
        print(f"fit {k}: slope {f.exponent:.6f} (rms {f.residual_rms:.2e})")
    return 0 if res.ok else 1


def cmd_fit(a):
    rows = [r for r in ex.read_csv(a.csv) if r.get(a.x) not in ("", None) and r.get(a.y) not in ("", None)]
    fit = ex.fit_power_law([(r[a.x], r[a.y]) for r in rows])
    _emit({"x": a.x, "y": a.y, "exponent": fit.exponent, "intercept": fit.intercept,
           "residual_rms": fit.residual_rms, "n": len(rows)})
    return 0


def cmd_flow(a):
    surf = ex.resolve_surface(a.surface)
    if a.action == "trace":
        _emit(trace_record(trace_flow(surf, _pair(a.x0), _pair(a.xi0), a.length)), a.out)
    elif a.action == "cylinder":
        _emit(cylinder_record(find_cylinder(surf, _pair(a.xi0), _pair(a.x0), a.length)), a.out)
    else:
        found = search_periodic_directions(surf, a.bound, [_pair(a.x0)])
        _emit([cylinder_record(c) for _, c in found], a.out)
    return 0


def cmd_spectral(a):
    rows = []
    for h in a.hbar:
        p = SemiclassicalParams(h, a.epsilon)
        T = a.T if a.T else time_budget(h, a.epsilon, a.L, a.w, a.c)
        r = spectral_width_report(p, TimeWindow(T))
        rows.append([h, r.lam, T, r.norm_sq, r.defect_sq, r.width, r.width_times_T])
    _write_csv(["hbar", "lambda", "T", "norm_sq", "defect_sq", "width", "width_times_T"],
               rows, a.out)
    return 0


def cmd_surface_quasimode(a):
    surf, ev = _surface_eval(a)
    if a.action == "norms":
        r = surface_spectral_width(ev, method=a.method)
        _emit(dict(r.as_row(), method=r.method, copies=len(ev.translates.copies)), a.out)
        return 0
    grid = grid_for(surf, a.hbar)
    vals = sample_surface_field(ev, grid, defect=a.defect)
    out = a.out or "field.bin"
    for i, v in enumerate(vals):
        shape = grid.shapes[i]
        full = np.zeros(shape, dtype=complex)
        if v.size == np.prod(shape):
            full = v.reshape(shape)
        else:
            idx = np.round((grid.points[i] - grid.origins[i]) / grid.steps[i]).astype(int)
            full[idx[:, 0], idx[:, 1]] = v
        path = out if len(vals) == 1 else f"{out}.p{i}"
        write_field(path, full, polygon=i, origin=grid.origins[i], step=grid.steps[i],
                    hbar=a.hbar, T=ev.window.T, field="defect" if a.defect else "quasimode")
        print(path)
    return 0


def cmd_measure(a):
    if a.action == "fold":
        p = _params(a, (0.5, 0.5))
        square = [[0, 0], [1, 0], [1, 1], [0, 1]]
        poly = json.load(open(a.polygon)) if a.polygon else square
        fq = build_folded_quasimode(poly, p)
        d = folded_momentum_measure(fq, extension=a.extension)
        comb = dihedral_comb(fq.unfolding, p.xi0)
        atoms = comb.distinct_atoms()
        sep = min((np.linalg.norm(np.subtract(x, y)) for i, x in enumerate(atoms)
                   for y in atoms[i + 1:]), default=2.0)
        r = min(5 * math.sqrt(p.hbar), 0.5 * sep)
        rows = [[x[0], x[1], localization_mass(d, x, r)] for x in atoms]
        _write_csv(["xi1", "xi2", "mass"], rows, a.out)
        if a.neumann:
            print(f"neumann_defect,{neumann_defect(fq):.17g}", file=sys.stderr)
        return 0
    surf, ev = _surface_eval(a)
    lat = torus_lattice(ev)
    d = momentum_density_from_lattice(lat.k, lat.coeff, a.hbar)
    if a.action == "momentum":
        keep = d.masses > a.threshold
        rows = [[x[0], x[1], m] for x, m in zip(d.points[keep], d.masses[keep])]
        _write_csv(["xi1", "xi2", "mass"], rows, a.out)
    else:
        comb = single_atom_comb(ev.params.xi0)
        rows = []
        for s in test_symbols(ev.params.xi0):
            val = weyl_matrix_element(s, d)
            tgt = comb.expectation(s)
            rows.append([s.name, val, tgt, abs(val - tgt)])
        _write_csv(["symbol", "value", "target", "error"], rows, a.out)
    return 0


# ------------------------------------------------------------------ parser

def _common_params(p, surface=True):
    if surface:
        p.add_argument("--surface", default="desk_torus")
    p.add_argument("--hbar", type=float, default=0.04)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--x0", nargs=2, type=float, default=None)
    p.add_argument("--xi0", nargs=2, type=float, default=(1.0, 0.0))
    p.add_argument("--T", type=float, default=None, help="fixed window scale")
    p.add_argument("--c", type=float, default=1.0, help="time-budget constant")
    p.add_argument("--no-certify", action="store_true")
    p.add_argument("--out", default=None)


def build_parser():
    ap = argparse.ArgumentParser(prog="superscar", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an hbar sweep from a TOML config")
    p.add_argument("config")
    p.add_argument("--output-dir", default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("fit", help="power-law fit of two CSV columns")
    p.add_argument("csv")
    p.add_argument("--x", default="lambda")
    p.add_argument("--y", default="surface_width")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("flow", help="straight-line flow on a surface")
    p.add_argument("action", choices=["trace", "cylinder", "search"])
    p.add_argument("--surface", default="square_torus")
    p.add_argument("--x0", nargs=2, type=float, default=(0.5, 0.5))
    p.add_argument("--xi0", nargs=2, type=float, default=(1.0, 0.0))
    p.add_argument("--length", type=float, default=10.0)
    p.add_argument("--bound", type=float, default=3.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("spectral", help="Euclidean spectral width reports")
    p.add_argument("action", choices=["sweep"])
    p.add_argument("--hbar", nargs="+", type=float, default=[0.04, 0.02, 0.01, 0.005])
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--L", type=float, default=ex.DESK_TORUS[0])
    p.add_argument("--w", type=float, default=ex.DESK_TORUS[1])
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("surface-quasimode", help="evaluate the surface quasimode")
    p.add_argument("action", choices=["eval", "norms"])
    _common_params(p)
    p.add_argument("--defect", action="store_true")
    p.add_argument("--method", default="auto", choices=["auto", "lattice", "pointwise"])
    p.set_defaults(func=cmd_surface_quasimode)

    p = sub.add_parser("measure", help="momentum densities and Weyl elements")
    p.add_argument("action", choices=["momentum", "weyl", "fold"])
    _common_params(p)
    p.add_argument("--threshold", type=float, default=1e-12)
    p.add_argument("--polygon", default=None, help="JSON vertex list (default: unit square)")
    p.add_argument("--extension", default="unfolded", choices=["zero", "unfolded"])
    p.add_argument("--neumann", action="store_true")
    p.set_defaults(func=cmd_measure)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
