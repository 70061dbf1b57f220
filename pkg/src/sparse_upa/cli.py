"""Command-line experiment runner.

Usage::

    sparse-upa <experiment> --config CONFIG.json --out DIR [--threads N]
    sparse-upa list
    sparse-upa replay FILE.csv --out DIR

Each experiment writes ``<experiment>.csv`` (plus ``edof_surface.csv`` for
``edof-fit``) and a matplotlib script ``<experiment>_plot.py`` that renders
the CSV. The first lines of every CSV hold the tool version and the fully
resolved configuration, which ``replay`` uses to regenerate the file.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import sys
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from ._io import dumps_meta, read_meta, write_csv
from .edof import (
    ReceiveArray,
    edof_area,
    edof_direct,
    edof_grid,
    edof_trace,
    fit_edof_surface,
    eval_edof_surface,
    singular_spectrum,
)
from .channel import channel_matrix
from .errors import (
    ConfigurationError,
    FeasibilityError,
    FittingError,
    InvalidInputError,
    SparseUPAError,
)
from .geometry import Point3, SystemConfig, load_config, upa_positions
from .interference import UserGrid, region_interference
from .lobes import default_b_min, feasibility_report, main_lobe_length, main_lobe_width
from .powerfield import field_power, p1_closed_form, p2_closed_form

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_INFEASIBLE = 4
EXIT_INVALID_INPUT = 5
EXIT_FITTING = 6
EXIT_MODEL = 7

DESCRIPTIONS = {
    "power-x": "power along x through the focus, exact vs closed form",
    "power-z": "power along z through the focus, exact vs closed form",
    "field-map": "exact power over the XoZ plane around the focus",
    "lobe-report": "main-lobe width, length and feasibility per (d, N, L)",
    "zres-sweep": "z-resolution and Fraunhofer distance versus N",
    "edof-compare": "direct EDoF of collected versus sparse transmit arrays",
    "edof-grid": "direct EDoF over a (theta, r) grid of receiver positions",
    "edof-fit": "degree-5 EDoF surface fitted to the (theta, r) grid",
    "interference-sweep": "region interference versus antenna spacing",
}

DEFAULTS: dict[str, dict[str, Any]] = {
    "power-x": {"half_span_in_widths": 2.0, "points": 401, "amplitude_mode": "exact"},
    "power-z": {"z_offset_range_in_wavelengths": [-3000.0, 3000.0], "points": 601, "amplitude_mode": "exact"},
    "field-map": {
        "x_range_in_wavelengths": [-2000.0, 2000.0],
        "z_offset_range_in_wavelengths": [-3000.0, 3000.0],
        "x_points": 101,
        "z_points": 151,
        "amplitude_mode": "exact",
    },
    "lobe-report": {
        "spacings_in_wavelengths": None,
        "side_counts": None,
        "focus_distances_in_wavelengths": None,
        "b_min": None,
    },
    "zres-sweep": {
        "spacings_in_wavelengths": [0.5, 1.0, 2.0, 5.0, 10.0],
        "side_counts": [10, 20, 30, 40, 50, 60, 70, 80, 90, 100],
        "b_min": None,
    },
    "edof-compare": {
        "systems": [
            {"label": "collected", "tx_side_count": 33, "tx_spacing_in_wavelengths": 0.5},
            {"label": "sparse", "tx_side_count": 9, "tx_spacing_in_wavelengths": 2.0},
        ],
        "rx_side_count": 9,
        "rx_spacing_in_wavelengths": 2.0,
        "distances_in_wavelengths": [400.0],
        "energy_fraction": 0.999,
    },
    "edof-grid": {
        "rx_side_count": 9,
        "rx_spacing_in_wavelengths": 2.0,
        "theta_range_rad": [0.0, math.pi / 2 - math.pi / 30],
        "theta_points": 29,
        "r_range_in_wavelengths": [1000.0, 4000.0],
        "r_points": 31,
        "energy_fraction": 0.999,
    },
    "interference-sweep": {
        "spacings_in_wavelengths": [0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0],
        "x_range_in_wavelengths": [-2000.0, 2000.0],
        "z_offset_range_in_wavelengths": [-3000.0, 3000.0],
        "x_points": 201,
        "z_points": 301,
    },
}
DEFAULTS["edof-fit"] = copy.deepcopy(DEFAULTS["edof-grid"])

SYSTEM_KEYS = ("wavelength_m", "side_count", "spacing_in_wavelengths", "total_power_w", "focus_distance_in_wavelengths")


def _section_key(name: str) -> str:
    return name.replace("-", "_")


def resolve(name: str, raw: dict[str, Any]) -> dict[str, Any]:
    """Merge a raw config mapping with the experiment defaults."""
    if name not in DESCRIPTIONS:
        raise ConfigurationError(f"unknown experiment {name!r}")
    missing = [k for k in ("wavelength_m", "side_count", "spacing_in_wavelengths") if k not in raw]
    if missing:
        raise ConfigurationError(f"missing config keys: {missing}")
    system = {k: raw[k] for k in SYSTEM_KEYS if k in raw}
    system.setdefault("total_power_w", 1.0)
    system.setdefault("focus_distance_in_wavelengths", 4000.0)
    params = copy.deepcopy(DEFAULTS[name])
    section = raw.get(_section_key(name), {})
    if not isinstance(section, dict):
        raise ConfigurationError(f"section {_section_key(name)!r} must be an object")
    unknown = set(section) - set(params)
    if unknown:
        raise ConfigurationError(f"unknown keys in {_section_key(name)!r}: {sorted(unknown)}")
    params.update(section)
    return {"experiment": name, "system": system, "params": params}


def _system(resolved) -> tuple[SystemConfig, float]:
    s = resolved["system"]
    config = SystemConfig.from_mapping(s)
    L = float(s["focus_distance_in_wavelengths"]) * config.wavelength
    return config, L


def _range(pair, name) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in pair)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{name} must be a [min, max] pair") from None
    if not lo < hi:
        raise ConfigurationError(f"{name} must be ordered, got {pair}")
    return lo, hi


def _points(value, name, minimum=2) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigurationError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return value


def _nonempty(values, name) -> list:
    if not isinstance(values, list) or not values:
        raise ConfigurationError(f"{name} must be a non-empty list")
    return values


# -- experiments --------------------------------------------------------------

def _power_x(resolved, out: Path, threads: int):
    config, L = _system(resolved)
    p = resolved["params"]
    n = _points(p["points"], "points")
    width = main_lobe_width(config, L)
    span = float(p["half_span_in_widths"]) * width
    if not span > 0:
        raise ConfigurationError("half_span_in_widths must be positive")
    xs = np.linspace(-span, span, n)
    pts = np.column_stack([xs, np.zeros(n), np.full(n, L)])
    exact = field_power(config, L, pts, p["amplitude_mode"], threads)
    closed = p1_closed_form(config, L, xs)
    lam = config.wavelength
    rows = zip(xs / lam, exact, closed)
    return {
        "header": ["x_over_lambda", "exact_power_w", "closed_form_power_w"],
        "rows": rows,
        "units": "x in wavelengths (focal plane z = L); powers in W",
        "extra_meta": {"main_lobe_width_over_lambda": width / lam},
    }


def _power_z(resolved, out: Path, threads: int):
    config, L = _system(resolved)
    p = resolved["params"]
    n = _points(p["points"], "points")
    lam = config.wavelength
    rng = p["z_offset_range_in_wavelengths"]
    if rng == "lobe":
        lo, hi = main_lobe_length(config, L)
    else:
        lo, hi = (v * lam for v in _range(rng, "z_offset_range_in_wavelengths"))
    if lo <= -L:
        raise ConfigurationError("z offsets must stay in front of the array (L + z > 0)")
    zs = np.linspace(lo, hi, n)
    pts = np.column_stack([np.zeros(n), np.zeros(n), L + zs])
    exact = field_power(config, L, pts, p["amplitude_mode"], threads)
    closed = p2_closed_form(config, L, zs)
    rep = feasibility_report(config, L)
    return {
        "header": ["z_offset_over_lambda", "exact_power_w", "closed_form_power_w"],
        "rows": zip(zs / lam, exact, closed),
        "units": "z offset from the focus in wavelengths; powers in W",
        "extra_meta": {
            "length_minus_over_lambda": rep.length_minus / lam if rep.feasible else None,
            "length_plus_over_lambda": rep.length_plus / lam if rep.feasible else None,
        },
    }


def _field_map(resolved, out: Path, threads: int):
    config, L = _system(resolved)
    p = resolved["params"]
    lam = config.wavelength
    x_lo, x_hi = _range(p["x_range_in_wavelengths"], "x_range_in_wavelengths")
    z_lo, z_hi = _range(p["z_offset_range_in_wavelengths"], "z_offset_range_in_wavelengths")
    xs = np.linspace(x_lo, x_hi, _points(p["x_points"], "x_points")) * lam
    zs = L + np.linspace(z_lo, z_hi, _points(p["z_points"], "z_points")) * lam
    if zs.min() <= 0:
        raise ConfigurationError("field map must lie in front of the array")
    xx, zz = np.meshgrid(xs, zs, indexing="ij")
    pts = np.column_stack([xx.ravel(), np.zeros(xx.size), zz.ravel()])
    power = field_power(config, L, pts, p["amplitude_mode"], threads)
    return {
        "header": ["x_over_lambda", "z_over_lambda", "exact_power_w"],
        "rows": zip(xx.ravel() / lam, zz.ravel() / lam, power),
        "units": "coordinates in wavelengths (array at z = 0); power in W",
    }


_LOBE_FIELDS = [
    "spacing_in_wavelengths", "side_count", "focus_distance_over_lambda", "b_min", "width_x_over_lambda",
    "farfield_sin_theta", "focusing_ratio", "feasible", "length_minus_over_lambda", "length_plus_over_lambda",
    "z_length_over_lambda", "min_spacing_over_lambda", "min_antennas", "z_resolution_over_lambda",
    "fraunhofer_over_lambda",
]


def _lobe_row(rep):
    lam = rep.wavelength
    scaled = lambda v: None if v is None else v / lam  # noqa: E731
    return [
        rep.spacing / lam, rep.side_count, rep.focus_distance / lam, rep.b_min, rep.width_x / lam,
        rep.farfield_sin_theta, rep.focusing_ratio, rep.feasible, scaled(rep.length_minus),
        scaled(rep.length_plus), scaled(rep.z_length), rep.min_spacing / lam, rep.min_antennas,
        rep.z_resolution_distance / lam, rep.fraunhofer_distance / lam,
    ]


def _lobe_report(resolved, out: Path, threads: int):
    config, L = _system(resolved)
    p = resolved["params"]
    lam = config.wavelength
    spacings = _nonempty(p["spacings_in_wavelengths"] or [config.spacing / lam], "spacings_in_wavelengths")
    sides = _nonempty(p["side_counts"] or [config.side_count], "side_counts")
    dists = _nonempty(p["focus_distances_in_wavelengths"] or [L / lam], "focus_distances_in_wavelengths")
    b = default_b_min() if p["b_min"] is None else float(p["b_min"])
    rows = []
    for sc in sides:
        for d in spacings:
            cfg = SystemConfig(lam, sc, float(d) * lam, config.total_power)
            for dist in dists:
                rows.append(_lobe_row(feasibility_report(cfg, float(dist) * lam, b)))
    return {"header": _LOBE_FIELDS, "rows": rows, "units": "lengths in wavelengths"}


def _zres_sweep(resolved, out: Path, threads: int):
    config, _ = _system(resolved)
    p = resolved["params"]
    lam = config.wavelength
    b = default_b_min() if p["b_min"] is None else float(p["b_min"])
    rows = []
    for d in _nonempty(p["spacings_in_wavelengths"], "spacings_in_wavelengths"):
        for sc in _nonempty(p["side_counts"], "side_counts"):
            cfg = SystemConfig(lam, sc, float(d) * lam, config.total_power)
            rep = feasibility_report(cfg, 1.0, b)  # distances below do not depend on L
            rows.append([float(d), sc, sc * sc, rep.z_resolution_distance / lam, rep.fraunhofer_distance / lam])
    return {
        "header": ["spacing_in_wavelengths", "side_count", "n_antennas", "z_resolution_over_lambda",
                   "fraunhofer_over_lambda"],
        "rows": rows,
        "units": "distances in wavelengths",
    }


def _edof_compare(resolved, out: Path, threads: int):
    config, _ = _system(resolved)
    p = resolved["params"]
    lam = config.wavelength
    rx_sc = _points(p["rx_side_count"], "rx_side_count", 1)
    rx_d = float(p["rx_spacing_in_wavelengths"]) * lam
    rows = []
    for system in _nonempty(p["systems"], "systems"):
        tx = upa_positions(int(system["tx_side_count"]), float(system["tx_spacing_in_wavelengths"]) * lam)
        for dist in _nonempty(p["distances_in_wavelengths"], "distances_in_wavelengths"):
            r = float(dist) * lam
            rx = upa_positions(rx_sc, rx_d, Point3(0.0, 0.0, r))
            spec = singular_spectrum(channel_matrix(tx, rx, lam, threads))
            rows.append([
                system.get("label", ""), tx.side_count, tx.spacing / lam, rx_sc, rx_d / lam, float(dist),
                edof_direct(spec, p["energy_fraction"]), edof_trace(spec), edof_area(tx.area, rx.area, lam, r),
            ])
    return {
        "header": ["system", "tx_side_count", "tx_spacing_in_wavelengths", "rx_side_count",
                   "rx_spacing_in_wavelengths", "distance_over_lambda", "edof_direct", "edof_trace", "edof_area"],
        "rows": rows,
        "units": "spacings and distances in wavelengths; EDoF dimensionless",
    }


def _grid_from_params(config, p, threads):
    lam = config.wavelength
    th_lo, th_hi = (float(v) for v in p["theta_range_rad"])
    r_lo, r_hi = _range(p["r_range_in_wavelengths"], "r_range_in_wavelengths")
    thetas = np.linspace(th_lo, th_hi, _points(p["theta_points"], "theta_points", 1))
    radii = np.linspace(r_lo, r_hi, _points(p["r_points"], "r_points", 1)) * lam
    rx = ReceiveArray(_points(p["rx_side_count"], "rx_side_count", 1), float(p["rx_spacing_in_wavelengths"]) * lam)
    return edof_grid(config, rx, thetas, radii, p["energy_fraction"], threads)


def _grid_rows(grid, lam, fitted=None):
    rows = []
    for i, th in enumerate(grid.thetas):
        for j, r in enumerate(grid.radii):
            row = [th, r / lam, int(grid.values[i, j]), grid.area[i, j], grid.trace[i, j]]
            if fitted is not None:
                row.append(fitted[i, j])
            rows.append(row)
    return rows


_GRID_HEADER = ["theta_rad", "r_over_lambda", "edof_direct", "edof_area", "edof_trace"]


def _edof_grid(resolved, out: Path, threads: int):
    config, _ = _system(resolved)
    grid = _grid_from_params(config, resolved["params"], threads)
    return {"header": _GRID_HEADER, "rows": _grid_rows(grid, config.wavelength),
            "units": "theta in radians from +z; r in wavelengths"}


def _edof_fit(resolved, out: Path, threads: int):
    config, _ = _system(resolved)
    lam = config.wavelength
    grid = _grid_from_params(config, resolved["params"], threads)
    surface = fit_edof_surface(grid, lam)
    tt, rr = np.meshgrid(grid.thetas, grid.radii, indexing="ij")
    fitted = eval_edof_surface(surface, tt, rr, lam)
    surface.meta = {"tool": f"sparse_upa {__version__}", "config": dumps_meta(resolved)}
    surface.to_csv(out / "edof_surface.csv")
    return {
        "header": _GRID_HEADER + ["edof_fit"],
        "rows": _grid_rows(grid, lam, fitted),
        "units": "theta in radians from +z; r in wavelengths",
        "extra_meta": {"r2": surface.r2, "max_residual": surface.max_residual},
        "extra_files": ["edof_surface.csv"],
    }


def _interference_sweep(resolved, out: Path, threads: int):
    config, L = _system(resolved)
    p = resolved["params"]
    lam = config.wavelength
    x_lo, x_hi = _range(p["x_range_in_wavelengths"], "x_range_in_wavelengths")
    z_lo, z_hi = _range(p["z_offset_range_in_wavelengths"], "z_offset_range_in_wavelengths")
    grid = UserGrid((x_lo * lam, x_hi * lam), (z_lo * lam, z_hi * lam),
                    _points(p["x_points"], "x_points", 1), _points(p["z_points"], "z_points", 1))
    spec = f"x[{x_lo:g}:{x_hi:g}]x{grid.x_count};z[{z_lo:g}:{z_hi:g}]x{grid.z_count}"
    rows = []
    for d in _nonempty(p["spacings_in_wavelengths"], "spacings_in_wavelengths"):
        total = region_interference(config.with_spacing(float(d) * lam), L, grid, threads)
        rows.append([float(d), total, grid.n_users, spec])
    return {
        "header": ["spacing_in_wavelengths", "region_interference", "n_users", "grid_spec"],
        "rows": rows,
        "units": "interference is the sum of user powers in W (focal-plane amplitudes)",
    }


EXPERIMENTS: dict[str, Callable] = {
    "power-x": _power_x,
    "power-z": _power_z,
    "field-map": _field_map,
    "lobe-report": _lobe_report,
    "zres-sweep": _zres_sweep,
    "edof-compare": _edof_compare,
    "edof-grid": _edof_grid,
    "edof-fit": _edof_fit,
    "interference-sweep": _interference_sweep,
}

_PLOT_COLUMNS = {
    "power-x": ("x_over_lambda", ["exact_power_w", "closed_form_power_w"], "line"),
    "power-z": ("z_offset_over_lambda", ["exact_power_w", "closed_form_power_w"], "line"),
    "field-map": ("x_over_lambda", ["z_over_lambda", "exact_power_w"], "map"),
    "lobe-report": ("spacing_in_wavelengths", ["z_length_over_lambda"], "group:side_count"),
    "zres-sweep": ("n_antennas", ["z_resolution_over_lambda"], "group:spacing_in_wavelengths"),
    "edof-compare": ("distance_over_lambda", ["edof_direct", "edof_trace", "edof_area"], "line"),
    "edof-grid": ("r_over_lambda", ["edof_direct", "edof_trace", "edof_area"], "scatter"),
    "edof-fit": ("r_over_lambda", ["edof_direct", "edof_fit"], "scatter"),
    "interference-sweep": ("spacing_in_wavelengths", ["region_interference"], "line"),
}

_PLOT_TEMPLATE = '''"""Render {csv_name} (generated by sparse_upa {version})."""
import sys

import matplotlib.pyplot as plt
import numpy as np

with open("{csv_name}", encoding="utf-8") as fh:
    body = [line for line in fh if not line.startswith("#")]
data = np.genfromtxt(body, delimiter=",", names=True, dtype=None, encoding="utf-8")
x_col, y_cols, kind = {x_col!r}, {y_cols!r}, {kind!r}
fig, ax = plt.subplots()
if kind == "map":
    xs, zs = np.unique(data[x_col]), np.unique(data[y_cols[0]])
    power = data[y_cols[1]].reshape(len(xs), len(zs))
    mesh = ax.pcolormesh(xs, zs, power.T, shading="auto")
    fig.colorbar(mesh, ax=ax, label=y_cols[1])
    ax.set_ylabel(y_cols[0])
elif kind.startswith("group:"):
    key = kind.split(":", 1)[1]
    for value in np.unique(data[key]):
        sel = data[key] == value
        ax.plot(data[x_col][sel], data[y_cols[0]][sel], marker="o", label=f"{{key}}={{value}}")
    ax.set_ylabel(y_cols[0])
    ax.legend()
else:
    for col in y_cols:
        if kind == "scatter":
            ax.scatter(data[x_col], data[col], s=8, label=col)
        else:
            ax.plot(data[x_col], data[col], label=col)
    ax.legend()
ax.set_xlabel(x_col)
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else "{stem}.png", dpi=150)
'''


def run(resolved: dict[str, Any], out: str | Path, threads: int = 1) -> list[Path]:
    """Execute a resolved experiment and return the files written."""
    name = resolved["experiment"]
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    result = EXPERIMENTS[name](resolved, out, threads)
    meta = {
        "tool": f"sparse_upa {__version__}",
        "experiment": name,
        "description": DESCRIPTIONS[name],
        "units": result["units"],
        "config": resolved,
    }
    for key, value in result.get("extra_meta", {}).items():
        meta[key] = "" if value is None else repr(float(value))
    csv_path = write_csv(out / f"{name}.csv", result["header"], result["rows"], meta)
    x_col, y_cols, kind = _PLOT_COLUMNS[name]
    plot_path = out / f"{name}_plot.py"
    plot_path.write_text(
        _PLOT_TEMPLATE.format(csv_name=csv_path.name, version=__version__, x_col=x_col, y_cols=y_cols,
                              kind=kind, stem=name),
        encoding="utf-8",
    )
    return [csv_path, plot_path] + [out / f for f in result.get("extra_files", [])]


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, FeasibilityError):
        return EXIT_INFEASIBLE
    if isinstance(exc, InvalidInputError):
        return EXIT_INVALID_INPUT
    if isinstance(exc, FittingError):
        return EXIT_FITTING
    if isinstance(exc, ConfigurationError):
        return EXIT_CONFIG
    return EXIT_MODEL


def _report_error(kind: str, code: int, message: str) -> int:
    print(json.dumps({"error": kind, "exit_code": code, "message": message}, sort_keys=True), file=sys.stderr)
    return code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(_report_error("UsageError", EXIT_USAGE, message))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sparse-upa", description="Near-field sparse-UPA beamfocusing experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="<experiment>", parser_class=_Parser)
    sub.required = True
    sub.add_parser("list", help="print experiment names with a one-line description")
    replay = sub.add_parser("replay", help="re-run the experiment recorded in a CSV metadata header")
    replay.add_argument("csv", type=Path)
    replay.add_argument("--out", type=Path, required=True)
    replay.add_argument("--threads", type=int, default=1)
    for name, desc in DESCRIPTIONS.items():
        p = sub.add_parser(name, help=desc)
        p.add_argument("--config", type=Path, required=True, help="JSON config file")
        p.add_argument("--out", type=Path, required=True, help="output directory")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--seed", default=None, help="accepted for interface compatibility; unused")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for name, desc in DESCRIPTIONS.items():
            print(f"{name}\t{desc}")
        return EXIT_OK
    try:
        if args.command == "replay":
            meta = read_meta(args.csv)
            if "config" not in meta:
                raise ConfigurationError(f"{args.csv} has no config metadata line")
            try:
                resolved = json.loads(meta["config"])
            except json.JSONDecodeError as exc:
                raise ConfigurationError(f"unreadable config metadata: {exc}") from None
        else:
            resolved = resolve(args.command, load_config(args.config))
        if args.threads < 1:
            raise ConfigurationError("--threads must be >= 1")
        for path in run(resolved, args.out, args.threads):
            print(path)
    except SparseUPAError as exc:
        return _report_error(type(exc).__name__, _exit_code(exc), str(exc))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
