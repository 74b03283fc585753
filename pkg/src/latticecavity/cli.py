"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bloch import monitor_timeseries, write_monitor_csv
from .bunching import LatticeConfig
from .odm import DriveConfig, NonConvergenceError
from .params import (ConfigError, Geometry, derive, parse_config_text, phys_from_mapping,
                     read_config, resolve_units, _number)
from .presets import preset
from .scan import (Axis, ScanSpec, _bloch_config, _range, cavity_profile_from_mapping, compare_models,
                   filter_experiment, free_space_from_mapping, resonance_shift_report,
                   run_scan, spec_from_mapping, write_free_space_csv, write_grid_csv,
                   write_table)
from .tmm import DegenerateProfileError, SingularConversionError, write_profile_csv

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _load(args) -> dict:
    values = {}
    if args.preset:
        values.update(preset(args.preset))
    if args.config:
        try:
            values.update(read_config(args.config))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    for item in args.set or ():
        values.update(parse_config_text(item))
    if args.model:
        values["model"] = args.model
    if args.geometry:
        values["geometry"] = args.geometry
    if not values:
        raise ConfigError("no configuration given (use --config or --preset)")
    return values


def _out(args, default: str) -> Path:
    return Path(args.out or default)


def cmd_spectrum(args, values):
    spec = spec_from_mapping(values)
    grid = run_scan(spec, args.threads)
    path = _out(args, "spectrum.csv")
    write_grid_csv(path, grid)
    print(f"wrote {path} ({spec.x.points}x{spec.y.points}, {', '.join(grid.channels)})")


def cmd_avoided(args, values):
    values.setdefault("x_axis", "delta_a")
    values.setdefault("y_axis", "delta_ca")
    if {values["x_axis"], values["y_axis"]} != {"delta_a", "delta_ca"}:
        raise ConfigError("avoided-crossing scans use the axes delta_a and delta_ca")
    cmd_spectrum(args, values)


def cmd_intensity(args, values):
    path = _out(args, "intensity.csv")
    header = {"code_version": __version__, **values}
    if "density_cm3" in values or str(values.get("free_space", "0")) == "1":
        table = free_space_from_mapping(values)
        write_free_space_csv(path, table, header)
        print(f"wrote {path} ({table.layer.size} layers)")
        return
    res = cavity_profile_from_mapping(values)
    p = derive_params(values)
    write_profile_csv(path, res.profile, p.lambda_a, header)
    print(f"wrote {path} ({res.profile.z.size} points); flux-drop correlation {res.correlation:.6f}")


def derive_params(values):
    return phys_from_mapping(resolve_units(values))


def cmd_bloch(args, values):
    spec_values = dict(values)
    if "bloch_nu" not in spec_values:
        raise ConfigError("bloch needs bloch_nu (and optionally bloch_extent, bloch_spacing, bloch_jmax)")
    p = derive_params(spec_values)
    if args.geometry:
        p = p.updated(geometry=Geometry.parse(args.geometry))
    if spec_values.get("x_axis") == "time":
        lo, hi = _range("x_range", spec_values["x_range"])
        npts = int(_number("x_points", spec_values["x_points"]))
    else:
        lo, hi = _range("t_range", spec_values.get("t_range", "0,2"))
        npts = int(_number("t_points", spec_values.get("t_points", 401)))
    # a throwaway scan spec carries the Bloch keys into the shared parser
    spec = ScanSpec("odm", p.geometry, Axis("time", lo, hi, npts), Axis("delta_c", -1, 1, 2), p,
                    (), {}, {k: v for k, v in spec_values.items() if k.startswith("bloch_")})
    cfg = _bloch_config(spec)
    d = derive(p)
    sp = float(_number("site_phase", spec_values.get("site_phase", math.pi)))
    z0 = float(_number("z0_phase", spec_values.get("z0_phase", 0.0)))
    lattice = LatticeConfig(cfg.sites.size, sp, z0)
    g = p.gamma
    dc = float(_number("delta_c", spec_values.get("delta_c", 0.0))) * g
    dca = float(_number("delta_ca", spec_values.get("delta_ca", 0.0))) * g
    eta_m = float(_number("eta_minus", spec_values.get("eta_minus", 0.0)))
    drive = DriveConfig(dc, dc - dca, d.eta, eta_m * d.eta)
    times = np.linspace(lo, hi, npts) * cfg.period
    trace = monitor_timeseries(cfg, lattice, d, drive, p.geometry, times)
    path = _out(args, "bloch.csv")
    header = {"code_version": __version__, **spec_values}
    write_monitor_csv(path, trace, p.geometry, header)
    print(f"wrote {path} ({npts} times); max leak {float(np.max(trace.leak)):.2e}")


def cmd_filter(args, values):
    spec = spec_from_mapping(values, model="tmm")
    n_off = args.offsets or int(_number("n_offsets", values.get("n_offsets", 7)))
    r_mir = spec.params.r_mir if args.r_mir is None else args.r_mir
    res = filter_experiment(spec, n_off, r_mir, args.threads)
    out = _out(args, "filter.csv")
    stem, suffix = out.with_suffix(""), out.suffix or ".csv"
    for n, grid in enumerate(res.grids, 1):
        write_grid_csv(f"{stem}_offset{n}{suffix}", grid)
    write_grid_csv(f"{stem}_sum{suffix}", res.summed)
    write_grid_csv(f"{stem}_free{suffix}", res.free)
    print(f"wrote {n_off} offset grids, sum and free-space map to {stem}_*{suffix}")


def cmd_compare(args, values):
    spec = spec_from_mapping(values)
    report, _, _ = compare_models(spec, args.threads)
    rows = []
    for name, r in report.items():
        print(f"{name:8s} max|diff| {r.max_abs:.6e} mean|diff| {r.mean_abs:.6e} "
              f"at {spec.x.name}={r.x_at_max:g}, {spec.y.name}={r.y_at_max:g}")
        rows.append((r.max_abs, r.mean_abs, r.x_at_max, r.y_at_max))
    if args.out:
        header = dict(spec.header(), channels_order=",".join(report))
        write_table(args.out, ["max_abs", "mean_abs", "x_at_max", "y_at_max"], rows, header)


def cmd_report(args, values):
    p = derive_params(values)
    d = derive(p)
    sh = resonance_shift_report(p)
    lines = {
        "g_over_2pi_hz": d.g / (2 * math.pi),
        "g_over_gamma": d.g / d.gamma,
        "kappa_over_2pi_hz": d.kappa / (2 * math.pi),
        "fsr_hz": p.fsr,
        "finesse": d.finesse,
        "cooperativity": d.upsilon,
        "optical_density": d.od,
        "beta0_resonant": abs(d.beta0),
        "n1": d.n1,
        "n1_beta0": sh.n1_beta0,
        "resonance_shift_over_2pi_mhz": sh.shift_mhz,
        "resonance_shift_over_kappa": sh.over_kappa,
    }
    text = "".join(f"{k} = {v!r}\n" for k, v in lines.items())
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")


COMMANDS = {
    "spectrum": (cmd_spectrum, "two-axis transmission/reflection/absorption scan"),
    "avoided": (cmd_avoided, "avoided-crossing scan over delta_a and delta_ca"),
    "intensity": (cmd_intensity, "intensity along the lattice, in free space or in a cavity"),
    "bloch": (cmd_bloch, "bunching and transmission during Bloch oscillations"),
    "filter": (cmd_filter, "cavity-length series, their sum and the free-space map"),
    "compare": (cmd_compare, "run both models on one grid and report differences"),
    "report": (cmd_report, "derived coupling constants and the lattice resonance shift"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latticecavity", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, helptext) in COMMANDS.items():
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", help="key = value configuration file")
        sp.add_argument("--preset", help="named parameter set, e.g. fig3a")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one configuration key (repeatable)")
        sp.add_argument("--model", choices=("odm", "tmm"))
        sp.add_argument("--geometry", choices=("linear", "ring"))
        sp.add_argument("--out", help="output path")
        sp.add_argument("--threads", type=int, default=1)
        if name == "filter":
            sp.add_argument("--offsets", type=int, help="number of cavity-length offsets")
            sp.add_argument("--r-mir", type=float, dest="r_mir", help="mirror reflectivity")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        values = _load(args)
        COMMANDS[args.command][0](args, values)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonConvergenceError, SingularConversionError, DegenerateProfileError,
            FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
