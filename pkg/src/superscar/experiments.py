"""Configuration-driven hbar sweeps, power-law fits and result files."""
from dataclasses import asdict, dataclass, field
import csv
import hashlib
import io
import json
import math
import os
from pathlib import Path
import traceback

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import NonPositiveData, SuperscarError
from .flow import (PhaseSpaceBox, as_surface_point, find_cylinder,
                   search_periodic_directions, time_budget,
                   verify_no_self_intersection)
from .geometry import l_surface, load_surface, rectangle_torus, square_torus
from .semiclassical import localization_mass, momentum_density_from_lattice
from .spectral import spectral_width_report
from .surface import (build_surface_quasimode, rectangle_torus_periods,
                      surface_spectral_width, torus_lattice)
from .wavepacket import SemiclassicalParams, TimeWindow

DESK_TORUS = (12.0, 2.0)
BUILTIN_SURFACES = {
    "square_torus": square_torus,
    "desk_torus": lambda: rectangle_torus(*DESK_TORUS),
    "l_surface": l_surface,
}

COLUMNS = ["hbar", "lambda", "T", "L", "w", "certified", "euclid_norm_sq",
           "euclid_defect_sq", "euclid_width", "surface_norm_sq", "surface_defect_sq",
           "surface_width", "width_times_T", "localization_mass", "status", "error"]


@dataclass
class ExperimentConfig:
    surface: str = "desk_torus"
    x0: tuple = (6.0, 1.0)
    xi0: object = (1.0, 0.0)         # or "auto"
    epsilon: float = 0.05
    hbar: tuple = (0.04, 0.02, 0.01, 0.005)
    t_exponent: float = None         # default 3/4 + 2 eps
    t_constant: float = 1.0
    window: str = "bump"
    points_per_wavelength: int = 8
    defect_points_per_wavelength: int = 16
    method: str = "auto"             # lattice | pointwise | auto
    search_bound: float = 5.0
    localization_radius: float = 5.0  # in units of hbar^(1/2)
    output_dir: str = "results"
    name: str = "sweep"

    def __post_init__(self):
        self.x0 = tuple(float(v) for v in self.x0)
        if not isinstance(self.xi0, str):
            self.xi0 = tuple(float(v) for v in self.xi0)
        self.hbar = tuple(float(h) for h in self.hbar)
        if any(a <= b for a, b in zip(self.hbar, self.hbar[1:])):
            raise ValueError("hbar grid must be strictly decreasing")
        if not self.hbar:
            raise ValueError("hbar grid is empty")

    @property
    def exponent(self):
        return 0.75 + 2.0 * self.epsilon if self.t_exponent is None else self.t_exponent

    def to_dict(self):
        d = asdict(self)
        d["x0"], d["hbar"] = list(self.x0), list(self.hbar)
        if not isinstance(self.xi0, str):
            d["xi0"] = list(self.xi0)
        return d

    def config_hash(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def load_config(path):
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    base = Path(path).parent
    surf = data.get("surface", "desk_torus")
    if surf not in BUILTIN_SURFACES and not os.path.isabs(surf):
        data["surface"] = str(base / surf)
    return ExperimentConfig(**data)


def resolve_surface(name):
    if name in BUILTIN_SURFACES:
        return BUILTIN_SURFACES[name]()
    return load_surface(name)


# ------------------------------------------------------------------ fitting

@dataclass
class ScalingFit:
    exponent: float
    intercept: float
    residual_rms: float
    points: list = field(default_factory=list)

    def predict(self, x):
        return math.exp(self.intercept) * np.asarray(x, dtype=float) ** self.exponent


def fit_power_law(pairs):
    """Least-squares slope of log(value) against log(abscissa)."""
    pairs = [(float(x), float(y)) for x, y in pairs]
    if len(pairs) < 3:
        raise ValueError("need at least 3 points")
    if any(x <= 0 or y <= 0 for x, y in pairs):
        raise NonPositiveData("power-law fit needs positive data")
    lx = np.log([p[0] for p in pairs])
    ly = np.log([p[1] for p in pairs])
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    (slope, icpt), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ np.array([slope, icpt])
    return ScalingFit(float(slope), float(icpt), float(np.sqrt(np.mean(resid ** 2))), pairs)


# ------------------------------------------------------------------ sweeps

@dataclass
class SweepResult:
    config: ExperimentConfig
    rows: list
    fits: dict

    @property
    def ok(self):
        return all(r["status"] == "ok" for r in self.rows)


def _direction(config, surface, x0):
    if config.xi0 != "auto":
        return config.xi0
    found = search_periodic_directions(surface, config.search_bound, x0)
    if not found:
        raise SuperscarError("no periodic direction found within the search bound")
    return found[0][0]


def run_row(config, surface, h):
    row = dict.fromkeys(COLUMNS, "")
    row.update(hbar=h, status="ok")
    row["lambda"] = h ** -2
    x0 = as_surface_point(surface, config.x0)
    xi0 = _direction(config, surface, x0)
    params = SemiclassicalParams(h, config.epsilon, config.x0, xi0)
    cyl = find_cylinder(surface, params.xi0, x0, 1e3)
    T = time_budget(h, config.epsilon, cyl.length, cyl.width, config.t_constant,
                    config.exponent)
    window = TimeWindow(T, config.window)
    row.update(T=T, L=cyl.length, w=cyl.width)
    box = PhaseSpaceBox.from_hbar(params.x0, params.xi0, h, config.epsilon)
    row["certified"] = verify_no_self_intersection(surface, box, cyl, T, h).ok
    e = spectral_width_report(params, window)
    row.update(euclid_norm_sq=e.norm_sq, euclid_defect_sq=e.defect_sq, euclid_width=e.width)
    ev = build_surface_quasimode(surface, params, window, cyl)
    s = surface_spectral_width(ev, method=config.method)
    row.update(surface_norm_sq=s.norm_sq, surface_defect_sq=s.defect_sq,
               surface_width=s.width, width_times_T=s.width_times_T)
    if rectangle_torus_periods(surface):
        lat = torus_lattice(ev)
        dens = momentum_density_from_lattice(lat.k, lat.coeff, h)
        row["localization_mass"] = localization_mass(
            dens, params.xi0, config.localization_radius * math.sqrt(h))
    return row


def run_sweep(config, write=True):
    """One row per hbar; a failing row records its error and the sweep goes on."""
    rows = []
    surface = None
    try:
        surface = resolve_surface(config.surface)
    except Exception as exc:  # surface errors fail every row
        surface_error = exc
    for h in config.hbar:
        try:
            if surface is None:
                raise surface_error
            rows.append(run_row(config, surface, h))
        except Exception as exc:
            row = dict.fromkeys(COLUMNS, "")
            row.update(hbar=h, status="error", error=f"{type(exc).__name__}: {exc}")
            row["lambda"] = h ** -2
            rows.append(row)
    fits = {}
    good = [r for r in rows if r["status"] == "ok"]
    if len(good) >= 3:
        fits["width_vs_lambda"] = fit_power_law([(r["lambda"], r["surface_width"]) for r in good])
        fits["euclid_width_vs_lambda"] = fit_power_law(
            [(r["lambda"], r["euclid_width"]) for r in good])
    result = SweepResult(config, rows, fits)
    if write:
        emit_results(result, config.output_dir, config.name)
    return result


# ------------------------------------------------------------------ output

def format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v)) if not math.isfinite(v) else f"{float(v):.17g}"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "" if v is None else str(v)


def parse_value(s):
    if s == "":
        return ""
    if s in ("true", "false"):
        return s == "true"
    try:
        return float(s)
    except ValueError:
        return s


def rows_to_csv(rows, columns=COLUMNS):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([format_value(r.get(c, "")) for c in columns])
    return buf.getvalue()


def read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [{k: parse_value(v) for k, v in row.items()} for row in reader]


def manifest(result):
    cfg = result.config
    return {
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash(),
        "columns": COLUMNS,
        "rows": len(result.rows),
        "ok": result.ok,
        "fits": {k: {"exponent": f.exponent, "intercept": f.intercept,
                     "residual_rms": f.residual_rms} for k, f in result.fits.items()},
    }


def emit_results(result, outdir, name="sweep", fmt="csv"):
    """Write <name>.csv (or .json) plus <name>.manifest.json; return the paths."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    if fmt == "csv":
        p = out / f"{name}.csv"
        p.write_text(rows_to_csv(result.rows))
    elif fmt == "json":
        p = out / f"{name}.json"
        rows = [{c: r.get(c, "") for c in COLUMNS} for r in result.rows]
        p.write_text(json.dumps(rows, indent=1, default=float))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    paths.append(p)
    m = out / f"{name}.manifest.json"
    m.write_text(json.dumps(manifest(result), indent=1, sort_keys=True))
    paths.append(m)
    return paths
