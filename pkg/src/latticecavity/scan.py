"""Parameter sweeps over two axes, model comparison and the figure-style
experiments built on them, plus CSV input/output.

Axis units: detunings ``delta_c``, ``delta_a``, ``delta_ca`` in units of
gamma; ``delta_lat`` in units of ``2*pi*fsr_ang``; ``time`` in Bloch
periods; ``z0_phase`` in radians; ``cav_offset`` in units of
``lambda_lat/2``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import __version__
from .bloch import BlochConfig, comb_populations, evolve_populations
from .bunching import LatticeConfig, antinode_phase, bunching_grid, site_indices
from .odm import DriveConfig, spectra_odm, steady_linear, steady_ring
from .params import (ConfigError, Geometry, PhysParams, derive, layer_strength_from_density,
                     parse_config_text, phys_from_mapping, polarizability, read_config,
                     resolve_units, _number)
from .ring import RingDrive, RingLayout, ring_spectrum
from .tmm import (CavityLayout, TmmDrive, atomic_layer, lattice_site_phase, propagation,
                  s_from_t, spectrum_point_linear, Mat2)

AXES = ("delta_c", "delta_a", "delta_ca", "delta_lat", "time", "z0_phase", "cav_offset")
LINEAR_CHANNELS = ("T", "R", "A", "phase")
RING_CHANNELS = ("T_plus", "T_minus", "R_plus", "R_minus", "A")
CHUNK = 16
FIXED_DEFAULTS = {"delta_ca": 0.0, "delta_lat": 0.0, "time": 0.0, "cav_offset": 0.0,
                  "eta_minus": 0.0}


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    points: int

    def __post_init__(self):
        if self.name not in AXES:
            raise ConfigError(f"unknown axis {self.name!r}")
        if self.points < 2:
            raise ConfigError(f"axis {self.name}: need at least 2 points")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.points)


def available_channels(model: str, geometry) -> tuple:
    if Geometry.parse(geometry) is Geometry.RING:
        return RING_CHANNELS
    return LINEAR_CHANNELS if model == "tmm" else ("T", "R", "A")


@dataclass(frozen=True)
class ScanSpec:
    """Two-axis sweep. ``fixed`` holds values (axis units) for non-axis inputs."""

    model: str
    geometry: Geometry
    x: Axis
    y: Axis
    params: PhysParams
    channels: tuple = ()
    fixed: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model not in ("odm", "tmm"):
            raise ConfigError(f"model must be odm or tmm, not {self.model!r}")
        object.__setattr__(self, "geometry", Geometry.parse(self.geometry))
        if self.x.name == self.y.name:
            raise ConfigError("axis names must differ")
        names = {self.x.name, self.y.name}
        if self.params.geometry is not self.geometry:
            object.__setattr__(self, "params", self.params.updated(geometry=self.geometry))
        avail = available_channels(self.model, self.geometry)
        chans = tuple(self.channels) or avail
        bad = [c for c in chans if c not in avail]
        if bad:
            raise ConfigError(f"channels {bad} unavailable for {self.model}/{self.geometry.value}")
        object.__setattr__(self, "channels", chans)
        if "time" in names and "bloch_nu" not in self.options:
            raise ConfigError("time axis needs a Bloch configuration (bloch_nu)")
        if "cav_offset" in names and self.geometry is Geometry.RING:
            raise ConfigError("cav_offset axis is only defined for the linear cavity")

    def updated(self, **changes) -> "ScanSpec":
        kw = dict(model=self.model, geometry=self.geometry, x=self.x, y=self.y,
                  params=self.params, channels=self.channels, fixed=dict(self.fixed),
                  options=dict(self.options))
        if "geometry" in changes or "model" in changes:
            kw["channels"] = ()
        kw.update(changes)
        return ScanSpec(**kw)

    def header(self) -> dict:
        """Fully resolved parameter set, round-trippable through :func:`spec_from_mapping`."""
        h = {"code_version": __version__, "model": self.model,
             "geometry": self.geometry.value}
        for k, v in self.params.as_dict().items():
            h[k] = v.value if isinstance(v, Geometry) else v
        h.update({"x_axis": self.x.name, "x_range": f"{self.x.lo!r},{self.x.hi!r}",
                  "x_points": self.x.points, "y_axis": self.y.name,
                  "y_range": f"{self.y.lo!r},{self.y.hi!r}", "y_points": self.y.points,
                  "channels": ",".join(self.channels)})
        h.update({k: repr(float(v)) for k, v in sorted(self.fixed.items())})
        h.update({k: v for k, v in sorted(self.options.items())})
        return h


class SpectrumGrid(NamedTuple):
    x_name: str
    y_name: str
    x: np.ndarray
    y: np.ndarray
    channels: dict
    header: dict

    def channel(self, name) -> np.ndarray:
        return self.channels[name]


# --------------------------------------------------------------------------
# configuration

SCAN_KEYS = {"model", "x_axis", "y_axis", "x_range", "y_range", "x_points", "y_points",
             "channels", "code_version"}
OPTION_KEYS = {"bloch_nu", "bloch_extent", "bloch_spacing", "bloch_jmax", "bloch_initial",
               "site_phase", "n_ss", "kzbar", "seed"}


def _range(key, text):
    parts = [p for p in str(text).replace(" ", "").split(",") if p]
    if len(parts) != 2:
        raise ConfigError(f"{key}: expected 'min,max'")
    return _number(key, parts[0]), _number(key, parts[1])


def spec_from_mapping(raw: dict, model=None, geometry=None) -> ScanSpec:
    """Build a scan from flat ``key = value`` strings (command-line overrides win)."""
    raw = dict(raw)
    for key in ("delta_c", "delta_a", "delta_ca"):
        # detunings are scan quantities in units of gamma either way
        if key + "_over_gamma" in raw:
            raw[key] = raw.pop(key + "_over_gamma")
    values = resolve_units(raw)
    params = phys_from_mapping(values)
    if geometry is not None:
        params = params.updated(geometry=Geometry.parse(geometry))
    model = (model or values.get("model", "odm")).lower()
    try:
        x = Axis(values["x_axis"], *_range("x_range", values["x_range"]),
                 int(_number("x_points", values["x_points"])))
        y = Axis(values["y_axis"], *_range("y_range", values["y_range"]),
                 int(_number("y_points", values["y_points"])))
    except KeyError as exc:
        raise ConfigError(f"missing scan key {exc.args[0]}") from None
    fixed = {k: float(_number(k, values[k])) for k in AXES + ("eta_minus",) if k in values}
    options = {k: values[k] for k in OPTION_KEYS if k in values}
    chans = tuple(c.strip() for c in str(values.get("channels", "")).split(",") if c.strip())
    return ScanSpec(model, params.geometry, x, y, params, chans, fixed, options)


def load_spec(path, model=None, geometry=None) -> ScanSpec:
    return spec_from_mapping(read_config(path), model, geometry)


# --------------------------------------------------------------------------
# evaluation

def _opt(spec, key, default):
    v = spec.options.get(key, default)
    return default if v is None else v


def _bloch_config(spec: ScanSpec):
    nu = float(_number("bloch_nu", spec.options["bloch_nu"]))
    extent = int(_number("bloch_extent", _opt(spec, "bloch_extent", 40)))
    spacing = int(_number("bloch_spacing", _opt(spec, "bloch_spacing", 4)))
    jmax = int(_number("bloch_jmax", _opt(spec, "bloch_jmax", 2 * extent)))
    kind = str(_opt(spec, "bloch_initial", "comb"))
    n = spec.params.n_atoms
    if kind == "comb":
        pop = comb_populations(extent, spacing, n)
    elif kind == "single":
        pop = np.array([n])
    elif kind == "homogeneous":
        pop = np.full(2 * extent + 1, n / (2 * extent + 1))
    else:
        raise ConfigError(f"bloch_initial: unknown {kind!r}")
    return BlochConfig.from_populations(nu, 2 * math.pi, pop, j_max=jmax)


def _inputs(spec: ScanSpec, xs, ys):
    """Resolve every physical input on the (x, y) mesh, in SI/radian units."""
    d = derive(spec.params)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    vals = dict(FIXED_DEFAULTS)
    vals.update(spec.fixed)
    vals[spec.x.name] = X
    vals[spec.y.name] = Y
    g = d.gamma
    have = {k for k in ("delta_c", "delta_a") if k in vals}
    if have == {"delta_c", "delta_a"}:
        dc, da = vals["delta_c"] * g, vals["delta_a"] * g
    elif "delta_c" in vals:
        dc = vals["delta_c"] * g
        da = dc - vals["delta_ca"] * g
    elif "delta_a" in vals:
        da = vals["delta_a"] * g
        dc = da + vals["delta_ca"] * g
    else:
        raise ConfigError("need delta_c or delta_a (axis or fixed value)")
    shape = X.shape
    base_sp = float(_number("site_phase", _opt(spec, "site_phase", math.pi)))
    delta_lat = vals["delta_lat"] * 2 * math.pi * d.fsr_ang
    n_sites = spec.params.n_sites
    if "time" in (spec.x.name, spec.y.name) or "bloch_nu" in spec.options:
        n_sites = 2 * _bloch_config(spec).j_max + 1
    z0 = vals.get("z0_phase", antinode_phase(n_sites))
    out = dict(dc=np.broadcast_to(dc, shape), da=np.broadcast_to(da, shape),
               delta_lat=np.broadcast_to(delta_lat, shape),
               sp=np.broadcast_to(lattice_site_phase(delta_lat, spec.params.lambda_lat, base_sp), shape),
               z0=np.broadcast_to(z0, shape),
               cav=np.broadcast_to(vals["cav_offset"] * math.pi, shape),
               time=np.broadcast_to(vals["time"], shape),
               eta_minus=vals["eta_minus"], n_sites=n_sites, base_sp=base_sp)
    return d, out


def _kzbar(spec, d) -> float:
    if "kzbar" in spec.options:
        return float(_number("kzbar", spec.options["kzbar"]))
    return d.zbar * d.k


def _populations(spec, times):
    cfg = _bloch_config(spec)
    uniq, inv = np.unique(times, return_inverse=True)
    pops = np.array([evolve_populations(cfg, t * cfg.period) for t in uniq])
    return pops[inv.reshape(times.shape)]


def _evaluate_odm(spec: ScanSpec, d, v):
    n = spec.params.n_atoms
    kzbar = _kzbar(spec, d)
    weights = None
    if "bloch_nu" in spec.options:
        weights = _populations(spec, v["time"])
    b0, bp = bunching_grid(v["n_sites"], v["sp"], v["z0"], kzbar, weights)
    eta = d.eta
    drive = DriveConfig(v["dc"], v["da"], eta, v["eta_minus"] * eta)
    if spec.geometry is Geometry.LINEAR:
        s = spectra_odm(steady_linear(d, drive, b0, n), drive, d, Geometry.LINEAR)
        res = {"T": s.T, "R": s.R, "A": s.A}
    else:
        s = spectra_odm(steady_ring(d, drive, bp, n), drive, d, Geometry.RING)
        res = s._asdict()
    return res


def _group_eval(keys, fn, shape):
    """Evaluate ``fn(key_value, mask)`` once per distinct value of ``keys``."""
    uniq, inv = np.unique(keys, return_inverse=True)
    inv = inv.reshape(shape)
    results = {}
    for i, u in enumerate(uniq):
        mask = inv == i
        part = fn(u, mask)
        for name, arr in part.items():
            results.setdefault(name, np.zeros(shape))[mask] = arr
    return results


def _evaluate_tmm(spec: ScanSpec, d, v):
    p = spec.params
    kzbar = _kzbar(spec, d)
    n_ss = int(_number("n_ss", _opt(spec, "n_ss", 30)))
    bloch = "bloch_nu" in spec.options
    shape = v["dc"].shape

    def one(time_value, mask):
        weights = None
        n_sites = v["n_sites"]
        if bloch:
            weights = tuple(_populations(spec, np.array([time_value]))[0])
        sl = (lambda a: a[mask])
        if spec.geometry is Geometry.LINEAR:
            lat = LatticeConfig(n_sites, v["base_sp"], sl(v["z0"]), kzbar, weights)
            lay = CavityLayout.from_params(p.updated(n_sites=n_sites), lat, n_ss=n_ss,
                                           thermal=kzbar > 0, cav_offset_phase=sl(v["cav"]))
            s = spectrum_point_linear(lay, TmmDrive(sl(v["dc"]), sl(v["da"]), sl(v["delta_lat"])))
            return s._asdict()
        lat = LatticeConfig(n_sites, v["base_sp"], sl(v["z0"]), kzbar, weights)
        lay = RingLayout.from_params(p.updated(n_sites=n_sites), lat, n_ss=n_ss,
                                     thermal=kzbar > 0)
        s = ring_spectrum(lay, RingDrive(sl(v["dc"]), sl(v["da"]), sl(v["delta_lat"]),
                                         1.0, v["eta_minus"]))
        return s._asdict()

    keys = v["time"] if bloch else np.zeros(shape)
    return _group_eval(keys, one, shape)


def _evaluate(spec: ScanSpec, xs, ys) -> dict:
    d, v = _inputs(spec, xs, ys)
    if spec.model == "odm":
        res = _evaluate_odm(spec, d, v)
    else:
        res = _evaluate_tmm(spec, d, v)
    return {c: np.asarray(res[c], dtype=float) for c in spec.channels}


def run_scan(spec: ScanSpec, threads: int = 1) -> SpectrumGrid:
    """Evaluate the grid in fixed-size x blocks; ``threads`` only changes scheduling."""
    xs, ys = spec.x.values, spec.y.values
    blocks = [xs[i:i + CHUNK] for i in range(0, xs.size, CHUNK)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: _evaluate(spec, b, ys), blocks))
    else:
        parts = [_evaluate(spec, b, ys) for b in blocks]
    chans = {c: np.concatenate([p[c] for p in parts], axis=0) for c in spec.channels}
    for c, arr in chans.items():
        if not np.all(np.isfinite(arr)):
            raise FloatingPointError(f"non-finite values in channel {c}")
    return SpectrumGrid(spec.x.name, spec.y.name, xs, ys, chans, spec.header())


# --------------------------------------------------------------------------
# CSV

def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_table(path, columns, data, header: dict):
    """``# key = value`` provenance lines, a header row, then ``%.17g`` rows."""
    lines = [f"# {k} = {_fmt(v)}" for k, v in header.items()]
    lines.append(",".join(columns))
    data = np.asarray(data, dtype=float)
    for row in data:
        lines.append(",".join("%.17g" % x for x in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def grid_rows(grid: SpectrumGrid) -> np.ndarray:
    X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
    cols = [X.ravel(), Y.ravel()] + [grid.channels[c].ravel() for c in grid.channels]
    return np.column_stack(cols)


def write_grid_csv(path, grid: SpectrumGrid):
    write_table(path, [grid.x_name, grid.y_name, *grid.channels], grid_rows(grid), grid.header)


def read_header(path) -> dict:
    """Provenance block of a CSV written by :func:`write_table`."""
    lines = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            lines.append(line[1:].strip())
    return parse_config_text("\n".join(lines))


def read_grid_csv(path) -> SpectrumGrid:
    header = read_header(path)
    text = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines()
            if not ln.startswith("#")]
    cols = text[0].split(",")
    data = np.array([[float(x) for x in ln.split(",")] for ln in text[1:] if ln])
    xs = np.unique(data[:, 0])
    ys = np.unique(data[:, 1])
    shape = (xs.size, ys.size)
    chans = {c: data[:, i + 2].reshape(shape) for i, c in enumerate(cols[2:])}
    return SpectrumGrid(cols[0], cols[1], xs, ys, chans, header)


# --------------------------------------------------------------------------
# model comparison

class ChannelDiff(NamedTuple):
    max_abs: float
    mean_abs: float
    x_at_max: float
    y_at_max: float


def compare_models(spec: ScanSpec, threads: int = 1):
    """Run both models on the same grid and report per-channel differences."""
    common = ("T", "R", "A") if spec.geometry is Geometry.LINEAR else RING_CHANNELS
    chans = tuple(c for c in spec.channels if c in common) or common
    g_odm = run_scan(spec.updated(model="odm", channels=chans), threads)
    g_tmm = run_scan(spec.updated(model="tmm", channels=chans), threads)
    report = {}
    for c in chans:
        diff = np.abs(g_odm.channels[c] - g_tmm.channels[c])
        i, j = np.unravel_index(int(np.argmax(diff)), diff.shape)
        report[c] = ChannelDiff(float(diff.max()), float(diff.mean()),
                                float(g_odm.x[i]), float(g_odm.y[j]))
    return report, g_odm, g_tmm


# --------------------------------------------------------------------------
# cavity as a filter

class FilterResult(NamedTuple):
    grids: list
    summed: SpectrumGrid
    free: SpectrumGrid | None


def filter_experiment(spec: ScanSpec, n_offsets: int, r_mir: float, threads: int = 1,
                      with_free: bool = True) -> FilterResult:
    """Spectra for cavity lengths ``L + (n/n_offsets) lambda_lat/2``, ``n = 1..n_offsets``.

    ``spec`` must be a linear TMM scan whose axes exclude ``cav_offset``.
    ``free`` is the same scan without mirrors.
    """
    if n_offsets < 1:
        raise ValueError("n_offsets must be >= 1")
    if spec.geometry is not Geometry.LINEAR:
        raise ConfigError("filter experiment is defined for the linear cavity")
    base = spec.updated(model="tmm", params=spec.params.updated(r_mir=r_mir),
                        channels=("T", "R", "phase"))
    grids = []
    for n in range(1, n_offsets + 1):
        fixed = dict(base.fixed, cav_offset=n / n_offsets)
        grids.append(run_scan(base.updated(fixed=fixed), threads))
    summed = {c: sum(g.channels[c] for g in grids) for c in ("T", "R")}
    first = grids[0]
    header = dict(first.header, n_offsets=n_offsets)
    total = SpectrumGrid(first.x_name, first.y_name, first.x, first.y, summed, header)
    free = None
    if with_free:
        free = run_scan(base.updated(params=spec.params.updated(r_mir=0.0)), threads)
    return FilterResult(grids, total, free)


def normalized_distance(a: np.ndarray, b: np.ndarray) -> float:
    """RMS distance between two maps each scaled to unit maximum."""
    a = a / np.max(np.abs(a))
    b = b / np.max(np.abs(b))
    return float(np.sqrt(np.mean((a - b) ** 2)))


# --------------------------------------------------------------------------
# free-space propagation through a bare stack

class FreeSpaceTable(NamedTuple):
    layer: np.ndarray
    intensity: np.ndarray
    transmission: np.ndarray
    beer: np.ndarray
    ohm: np.ndarray


def free_space_intensity(beta1: complex, n_sites: int, site_phase: float,
                         disordered: bool = False, seed: int = 0) -> FreeSpaceTable:
    """Intensity ``|a+ + a-|^2`` at each layer of a bare stack lit from the left.

    ``transmission[j]`` is the transmission of the first ``j+1`` layers alone.
    With ``disordered`` the gaps get independent uniform random phases from
    ``numpy.random.default_rng(seed)``.
    """
    if n_sites < 1:
        raise ValueError("n_sites must be >= 1")
    if disordered:
        gaps = np.random.default_rng(seed).uniform(0, 2 * math.pi, n_sites)
    else:
        gaps = np.full(n_sites, float(site_phase))
    layer = atomic_layer(beta1)
    partial = []
    m = Mat2.identity()
    for j in range(n_sites):
        m = layer @ propagation(gaps[j]) @ m
        partial.append(m)
    a_minus0 = -m.m21 / m.m22
    ap0, am0 = 1.0 + 0j, complex(a_minus0)
    inten = np.empty(n_sites)
    trans = np.empty(n_sites)
    for j, pm in enumerate(partial):
        # field just before layer j equals the field after layer j-1 plus one gap
        before = (propagation(gaps[j]) @ (partial[j - 1] if j else Mat2.identity()))
        ap, am = before.apply(ap0, am0)
        inten[j] = abs(ap + am) ** 2
        trans[j] = abs(s_from_t(pm, det=1.0).m11) ** 2
    t1 = abs(1 / (1 - 1j * beta1)) ** 2
    j = np.arange(1, n_sites + 1)
    beer = t1 ** j
    ohm = 1 / (1 - math.log(t1) * j)
    return FreeSpaceTable(j, inten, trans, beer, ohm)


def free_space_from_mapping(values: dict, disordered: bool | None = None) -> FreeSpaceTable:
    """:func:`free_space_intensity` for a config mapping.

    Keys: ``density_cm3`` (else the layer strength follows from ``n_atoms``
    and ``waist``), ``delta_a`` in units of gamma, ``delta_lat_gamma`` in
    units of gamma or ``delta_lat`` in units of ``2*pi*fsr_ang``,
    ``disordered`` (0/1) and ``seed``.
    """
    p = phys_from_mapping(resolve_units(values))
    d = derive(p)
    if "density_cm3" in values:
        strength = layer_strength_from_density(float(_number("density_cm3", values["density_cm3"])),
                                               p.lambda_a, p.lambda_lat)
    else:
        strength = d.n1 * abs(d.beta0)
    delta_a = float(_number("delta_a", values.get("delta_a", 0.0))) * p.gamma
    if "delta_lat_gamma" in values:
        delta_lat = float(_number("delta_lat_gamma", values["delta_lat_gamma"])) * p.gamma
    else:
        delta_lat = float(_number("delta_lat", values.get("delta_lat", 0.0))) * 2 * math.pi * p.fsr_ang
    beta1 = strength * complex(polarizability(delta_a, 0.0, p.gamma))
    sp = float(lattice_site_phase(delta_lat, p.lambda_lat))
    if disordered is None:
        disordered = bool(int(_number("disordered", values.get("disordered", 0))))
    seed = int(_number("seed", values.get("seed", 0)))
    return free_space_intensity(beta1, p.n_sites, sp, disordered, seed)


def write_free_space_csv(path, table: FreeSpaceTable, header: dict):
    write_table(path, ["layer", "intensity", "transmission", "beer", "ohm"],
                np.column_stack(table), header)


class ProfileResult(NamedTuple):
    profile: object
    correlation: float
    geometry: Geometry


def cavity_profile_from_mapping(values: dict, geometry=None) -> ProfileResult:
    """Intensity along the axis of a pumped cavity with a (thermal) lattice.

    Keys as for scans (``delta_c``, ``delta_a`` in gamma, ``delta_lat`` in
    ``2*pi*fsr_ang``) plus ``kzbar`` and ``n_ss``. ``correlation`` is the
    flux-drop versus local-intensity check.
    """
    from .ring import ring_profile
    from .tmm import intensity_profile, spont_check

    p = phys_from_mapping(resolve_units(values))
    if geometry is not None:
        p = p.updated(geometry=Geometry.parse(geometry))
    d = derive(p)
    g = p.gamma
    kzbar = float(_number("kzbar", values.get("kzbar", d.zbar * d.k)))
    n_ss = int(_number("n_ss", values.get("n_ss", 30)))
    dc = float(_number("delta_c", values.get("delta_c", 0.0))) * g
    da = float(_number("delta_a", values.get("delta_a", values.get("delta_c", 0.0)))) * g
    dl = float(_number("delta_lat", values.get("delta_lat", 0.0))) * 2 * math.pi * p.fsr_ang
    lat = LatticeConfig(p.n_sites, math.pi, antinode_phase(p.n_sites), kzbar)
    if p.geometry is Geometry.LINEAR:
        lay = CavityLayout.from_params(p, lat, n_ss=n_ss, thermal=kzbar > 0)
        prof = intensity_profile(lay, TmmDrive(dc, da, dl))
    else:
        lay = RingLayout.from_params(p, lat, n_ss=n_ss, thermal=kzbar > 0)
        prof = ring_profile(lay, RingDrive(dc, da, dl))
    return ProfileResult(prof, spont_check(prof), p.geometry)


# --------------------------------------------------------------------------
# resonance shift

class ShiftReport(NamedTuple):
    shift: float
    shift_mhz: float
    over_kappa: float
    n1_beta0: float


def resonance_shift_report(p: PhysParams) -> ShiftReport:
    """Cavity resonance shift ``fsr_ang * N1 * |beta0|`` caused by one lattice layer."""
    d = derive(p)
    n1b = d.n1 * abs(d.beta0)
    shift = d.fsr_ang * n1b
    return ShiftReport(shift, shift / (2 * math.pi) / 1e6, shift / d.kappa, n1b)
