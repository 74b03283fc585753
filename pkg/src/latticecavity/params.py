"""Physical constants, parameter sets and derived coupling quantities.

Unit rules used throughout the package:

* rates and detunings (``gamma``, ``kappa``, ``delta_*``) are angular
  frequencies in rad/s;
* the free spectral range ``fsr`` is an ordinary frequency in Hz and is
  converted with an explicit ``2*pi`` wherever it enters a rate formula
  (``fsr_ang = 2*pi*fsr``);
* the finesse obeys ``F = pi * fsr_ang / kappa``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

HBAR = 1.054571817e-34
KB = 1.380649e-23
C_LIGHT = 299792458.0
H_PLANCK = 2 * math.pi * HBAR

# Relative tolerance for over-determined gamma/kappa/fsr/finesse sets.
CONSISTENCY_RTOL = 1e-6


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


class Geometry(str, enum.Enum):
    LINEAR = "linear"
    RING = "ring"

    @classmethod
    def parse(cls, value) -> "Geometry":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ConfigError(f"unknown geometry {value!r}") from None


def mirror_finesse(rho: float) -> float:
    """Airy finesse ``pi*sqrt(rho)/(1-rho)`` for round-trip amplitude ``rho``.

    ``rho = 0`` (no mirrors) is clipped to 1e-12 so that a finite, huge
    ``kappa`` results.
    """
    if not 0 <= rho < 1:
        raise ConfigError(f"round-trip amplitude must lie in [0, 1), got {rho}")
    rho = max(rho, 1e-12)
    return math.pi * math.sqrt(rho) / (1 - rho)


@dataclass(frozen=True)
class PhysParams:
    """Experimental constants of one atom-cavity configuration.

    Any two of ``kappa``, ``fsr`` and ``finesse`` fix the third. If fewer
    than two are given and ``r_mir`` is set, the finesse is taken from the
    mirror reflectivities (round-trip amplitude ``r_mir*r_ls**2`` for the
    linear cavity, ``r_mir*r_ls`` for the ring). ``g`` optionally overrides
    the geometric coupling, in which case the waist is unused.
    """

    gamma: float = 2 * math.pi * 7.4e3
    kappa: float | None = 2 * math.pi * 3.4e6
    fsr: float | None = None
    finesse: float | None = 1500.0
    waist: float = 70e-6
    lambda_a: float = 689e-9
    lambda_lat: float = 689e-9
    n_atoms: float = 2e5
    n_sites: int = 300
    r_mir: float = 0.998
    r_ls: float = 1.0
    alpha_in: float = 1.0
    temp: float = 0.0
    v0: float = 0.0
    geometry: Geometry = Geometry.LINEAR
    g: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "geometry", Geometry.parse(self.geometry))
        object.__setattr__(self, "n_sites", int(self.n_sites))
        if not self.gamma > 0:
            raise ConfigError("gamma must be > 0")
        if not self.waist > 0:
            raise ConfigError("waist must be > 0")
        if self.n_sites < 1:
            raise ConfigError("n_sites must be >= 1")
        if self.n_atoms < 0:
            raise ConfigError("n_atoms must be >= 0")
        if not 0 <= self.r_mir <= 1:
            raise ConfigError("r_mir must lie in [0, 1]")
        if not 0 < self.r_ls <= 1:
            raise ConfigError("r_ls must lie in (0, 1]")
        if self.g is not None and self.g < 0:
            raise ConfigError("g must be >= 0")
        kappa, fsr, finesse = self._resolve_cavity()
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "fsr", fsr)
        object.__setattr__(self, "finesse", finesse)

    @property
    def round_trip_amplitude(self) -> float:
        if self.geometry is Geometry.RING:
            return self.r_mir * self.r_ls
        return self.r_mir * self.r_ls**2

    def _resolve_cavity(self):
        kappa, fsr, finesse = self.kappa, self.fsr, self.finesse
        given = sum(v is not None for v in (kappa, fsr, finesse))
        if given < 2:
            if finesse is None:
                finesse = mirror_finesse(self.round_trip_amplitude)
                given += 1
            if given < 2:
                raise ConfigError("need two of kappa, fsr, finesse (or r_mir)")
        for name, v in (("kappa", kappa), ("fsr", fsr), ("finesse", finesse)):
            if v is not None and not v > 0:
                raise ConfigError(f"{name} must be > 0")
        if kappa is None:
            kappa = math.pi * 2 * math.pi * fsr / finesse
        elif fsr is None:
            fsr = finesse * kappa / (2 * math.pi**2)
        elif finesse is None:
            finesse = math.pi * 2 * math.pi * fsr / kappa
        else:
            implied = math.pi * 2 * math.pi * fsr / kappa
            if abs(implied - finesse) > CONSISTENCY_RTOL * finesse:
                raise ConfigError(
                    f"kappa, fsr and finesse are inconsistent "
                    f"(finesse {finesse} vs implied {implied})")
        return float(kappa), float(fsr), float(finesse)

    @property
    def fsr_ang(self) -> float:
        return 2 * math.pi * self.fsr

    def updated(self, **changes) -> "PhysParams":
        """Copy with changes.

        Touching any of kappa/fsr/finesse resets the other two to what is
        given. Touching only the mirrors keeps ``fsr`` and re-derives the
        finesse from the reflectivities.
        """
        merged = self.as_dict()
        cav = ("kappa", "fsr", "finesse")
        if any(k in changes for k in cav):
            for k in cav:
                merged[k] = None
        elif "r_mir" in changes or "r_ls" in changes:
            merged["kappa"] = merged["finesse"] = None
        merged.update(changes)
        return PhysParams(**merged)

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.value if isinstance(v, Geometry) else v
        return out


@dataclass(frozen=True)
class DerivedParams:
    """Coupling quantities derived from :class:`PhysParams`."""

    g: float
    upsilon: float
    beta0: complex
    n1: float
    od: float
    eta: float
    zbar: float
    k: float
    gamma: float
    kappa: float
    fsr_ang: float
    finesse: float
    n_atoms: float
    geometry: Geometry = Geometry.LINEAR

    @property
    def cavity_beta0(self) -> float:
        """Resonant single-atom layer coefficient used inside the cavity TMM.

        Chosen so that the layer phase reproduces the ODM pole exactly:
        ``U_gamma = -m * fsr_ang * beta`` with ``m = 4`` for the standing
        wave of a linear cavity and ``m = 1`` for a running-wave ring.
        """
        m = 4.0 if self.geometry is Geometry.LINEAR else 1.0
        return 2 * self.g**2 / (self.gamma * m * self.fsr_ang)


def derive(p: PhysParams) -> DerivedParams:
    """Evaluate coupling strength, cooperativity, optical density and friends."""
    k = 2 * math.pi / p.lambda_a
    kw2 = (k * p.waist) ** 2
    if kw2 == 0:
        raise ConfigError("k^2 w^2 = 0: invalid geometry")
    fsr_ang = p.fsr_ang
    if p.g is None:
        beta_res = 6.0 / kw2
        g = 0.5 * math.sqrt(6 * p.gamma * fsr_ang / kw2)
    else:
        g = float(p.g)
        beta_res = 4 * g**2 / (fsr_ang * p.gamma)
    upsilon = 4 * g**2 / (p.kappa * p.gamma)
    if p.temp > 0:
        if p.v0 <= 0:
            raise ConfigError("v0 must be > 0 when temp > 0 (thermal width undefined)")
        zbar = math.sqrt(2 * KB * p.temp / p.v0) / k
    else:
        zbar = 0.0
    return DerivedParams(
        g=g,
        upsilon=upsilon,
        beta0=1j * beta_res,
        n1=p.n_atoms / p.n_sites,
        od=p.n_atoms * beta_res,
        eta=p.alpha_in * math.sqrt(p.kappa * fsr_ang),
        zbar=zbar,
        k=k,
        gamma=p.gamma,
        kappa=p.kappa,
        fsr_ang=fsr_ang,
        finesse=p.finesse,
        n_atoms=p.n_atoms,
        geometry=p.geometry,
    )


def u_gamma(d: DerivedParams, delta_a):
    """Single-photon light shift and scattering rate ``g^2/(delta_a + i*gamma/2)``."""
    return d.g**2 / (np.asarray(delta_a) + 0.5j * d.gamma)


def polarizability(delta_a, rabi=0.0, gamma=1.0):
    """Dimensionless polarizability in units of ``6*pi/k^3``.

    ``rabi > 0`` includes the static saturation correction.
    """
    x = 2 * np.asarray(delta_a) / gamma
    s = 2 * (np.asarray(rabi) / gamma) ** 2
    return (1j - x) / (1 + x * x + s)


def free_space_beta(d: DerivedParams, delta_a, rabi=0.0):
    """Single-atom reflection coefficient of an atom in a beam of waist w."""
    return d.beta0.imag * polarizability(delta_a, rabi, d.gamma)


def cavity_beta(d: DerivedParams, delta_a, rabi=0.0):
    """Single-atom layer coefficient for the cavity transfer matrices."""
    return d.cavity_beta0 * polarizability(delta_a, rabi, d.gamma)


def layer_strength_from_density(density_cm3: float, lambda_a: float,
                                lambda_lat: float) -> float:
    """Resonant reflection coefficient |N1*beta0| of one lattice layer.

    ``sigma0 * n * lambda_lat / 2`` with ``sigma0 = 3 lambda^2 / 2 pi``.
    """
    sigma0 = 3 * lambda_a**2 / (2 * math.pi)
    return sigma0 * density_cm3 * 1e6 * lambda_lat / 2


# --------------------------------------------------------------------------
# flat key = value configuration files

_PHYS_KEYS = {f.name for f in fields(PhysParams)}


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        raw[key] = value
    return raw


def read_config(path) -> dict[str, str]:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


def _number(key, value):
    if value is None or isinstance(value, (int, float)):
        return value
    s = str(value).strip()
    if s.lower() in ("none", ""):
        return None
    try:
        return float(s)
    except ValueError:
        raise ConfigError(f"{key}: not a number: {value!r}") from None


def resolve_units(raw: dict) -> dict:
    """Apply the ``_over_gamma`` suffix rule (values multiplied by gamma).

    Non-numeric values are passed through unchanged.
    """
    gamma = _number("gamma", raw.get("gamma")) or PhysParams.gamma
    out = {}
    for key, value in raw.items():
        if key.endswith("_over_gamma"):
            out[key[: -len("_over_gamma")]] = _number(key, value) * gamma
        else:
            out[key] = value
    return out


def phys_from_mapping(values: dict, base: PhysParams | None = None) -> PhysParams:
    """Build :class:`PhysParams` from a resolved mapping; extra keys ignored."""
    kw = {}
    for key in _PHYS_KEYS & values.keys():
        v = values[key]
        if key == "geometry":
            kw[key] = Geometry.parse(v)
        elif key == "n_sites":
            kw[key] = int(_number(key, v))
        else:
            kw[key] = _number(key, v)
    cav = {"kappa", "fsr", "finesse"}
    if base is None:
        if cav & kw.keys():
            # the cavity is given explicitly; unnamed members follow from it or the mirrors
            kw = {**{key: None for key in cav}, **kw}
        return PhysParams(**kw)
    merged = base.as_dict()
    if cav & kw.keys():
        for key in cav:
            merged[key] = None
    merged.update(kw)
    return PhysParams(**merged)
