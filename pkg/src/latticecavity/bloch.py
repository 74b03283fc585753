"""Wannier-Bloch oscillations of lattice populations and the cavity signals
they imprint through a time-dependent bunching parameter.

Times are in seconds, ``omega_blo`` is angular. Site indices ``j`` are
integers running over a symmetric range ``-j_max .. j_max``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import jv

from .bunching import LatticeConfig, bunching_weighted
from .odm import DriveConfig, spectra_odm, steady_linear, steady_ring
from .params import DerivedParams, Geometry


@dataclass(frozen=True)
class BlochConfig:
    """Initial amplitudes ``c0`` on sites ``-j_max .. j_max`` (length ``2*j_max+1``)."""

    nu: float
    omega_blo: float
    c0: tuple
    j_max: int

    def __post_init__(self):
        c = np.asarray(self.c0, dtype=complex)
        if c.shape != (2 * self.j_max + 1,):
            raise ValueError("c0 must have 2*j_max + 1 entries")
        if self.omega_blo <= 0:
            raise ValueError("omega_blo must be positive")
        if self.nu < 0:
            raise ValueError("nu must be non-negative")
        object.__setattr__(self, "c0", tuple(c.tolist()))

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.j_max, self.j_max + 1)

    @property
    def n_atoms(self) -> float:
        return float(np.sum(np.abs(self.c0) ** 2))

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega_blo

    @classmethod
    def from_populations(cls, nu, omega_blo, populations, j_max=None, n_atoms=None):
        """Real non-negative amplitudes from site populations, centred in the range."""
        pop = np.asarray(populations, dtype=float)
        if pop.size % 2 != 1:
            raise ValueError("populations need an odd number of sites")
        if np.any(pop < 0):
            raise ValueError("populations must be non-negative")
        half = pop.size // 2
        j_max = half if j_max is None else j_max
        if j_max < half:
            raise ValueError("j_max smaller than the populated range")
        full = np.zeros(2 * j_max + 1)
        full[j_max - half:j_max + half + 1] = pop
        if n_atoms is not None:
            full *= n_atoms / full.sum()
        return cls(nu, omega_blo, tuple(np.sqrt(full)), j_max)


def comb_populations(j_extent: int, spacing: int, n_atoms: float) -> np.ndarray:
    """Every ``spacing``-th site of ``-j_extent .. j_extent`` equally filled."""
    j = np.arange(-j_extent, j_extent + 1)
    pop = (j % spacing == 0).astype(float)
    return pop * n_atoms / pop.sum()


def single_site_populations(n_atoms: float) -> np.ndarray:
    return np.array([float(n_atoms)])


def evolution_operator(cfg: BlochConfig, t: float) -> np.ndarray:
    """Truncated evolution matrix ``U[j, j']`` on the configured range."""
    j = cfg.sites
    n = j[:, None] - j[None, :]
    wt = cfg.omega_blo * t
    phase = np.exp(1j * n * (math.pi - wt) / 2 - 1j * j[None, :] * wt)
    return phase * jv(n, 2 * cfg.nu * math.sin(wt / 2))


def bessel_margin(nu: float, tol: float = 1e-17) -> int:
    """Smallest order beyond which ``|J_n(x)| < tol`` for all ``|x| <= 2 nu``."""
    x = np.linspace(0, 2 * nu, 257)
    n = int(2 * nu)
    while np.max(np.abs(jv(n, x))) >= tol:
        n += 1
    return n


class Evolved(NamedTuple):
    populations: np.ndarray
    leak: float


def evolve(cfg: BlochConfig, t: float) -> Evolved:
    """Amplitudes after time ``t``; ``leak`` is the norm lost at the range edges."""
    c = evolution_operator(cfg, t) @ np.asarray(cfg.c0)
    pop = np.abs(c) ** 2
    n0 = cfg.n_atoms
    return Evolved(pop, float(1 - pop.sum() / n0) if n0 > 0 else 0.0)


def evolve_populations(cfg: BlochConfig, t: float) -> np.ndarray:
    return evolve(cfg, t).populations


def unitarity_error(cfg: BlochConfig, t: float, margin: int | None = None) -> float:
    """Largest deviation of ``U^dagger U`` from identity on interior columns.

    Columns within ``margin`` of the range edge are excluded because their
    Bessel tails are cut by the truncation.
    """
    margin = bessel_margin(cfg.nu) if margin is None else margin
    u = evolution_operator(cfg, t)
    keep = np.abs(cfg.sites) <= cfg.j_max - margin
    if not keep.any():
        raise ValueError("range too small for the requested margin")
    sub = u[:, keep]
    g = sub.conj().T @ sub
    return float(np.max(np.abs(g - np.eye(g.shape[0]))))


class MonitorTrace(NamedTuple):
    t_over_tblo: np.ndarray
    b0: np.ndarray
    b_plus: np.ndarray
    n_eff: np.ndarray
    T_plus: np.ndarray
    T_minus: np.ndarray
    leak: np.ndarray


def monitor_timeseries(cfg: BlochConfig, lattice: LatticeConfig, d: DerivedParams,
                       drive: DriveConfig, geometry, times) -> MonitorTrace:
    """Bunching and cavity transmission while the populations oscillate.

    ``lattice`` supplies ``site_phase`` and ``z0_phase``; its ``n_sites`` must
    equal the Bloch range. ``N_eff`` is ``N*b0`` (linear) or ``N*|b+|`` (ring).
    """
    geometry = Geometry.parse(geometry)
    if lattice.n_sites != cfg.sites.size:
        raise ValueError("lattice n_sites must match the Bloch site range")
    n = cfg.n_atoms
    rows = []
    for t in np.asarray(times, dtype=float):
        ev = evolve(cfg, t)
        w = ev.populations
        if w.sum() <= 0:
            raise ValueError("no atoms left in range")
        wb = bunching_weighted(LatticeConfig(lattice.n_sites, lattice.site_phase,
                                             lattice.z0_phase, 0.0, tuple(w)), n_total=n)
        if geometry is Geometry.LINEAR:
            st = steady_linear(d, drive, wb.b0, n)
            tp = spectra_odm(st, drive, d, geometry).T
            tm = 0.0
            neff = wb.n_eff0
        else:
            st = steady_ring(d, drive, wb.b_plus, n)
            sp = spectra_odm(st, drive, d, geometry)
            tp, tm = sp.T_plus, sp.T_minus
            neff = abs(wb.n_eff_plus)
        rows.append((t / cfg.period, wb.b0, wb.b_plus, neff, float(tp), float(tm), ev.leak))
    cols = list(zip(*rows))
    return MonitorTrace(*(np.asarray(c) for c in cols))


def write_monitor_csv(path, trace: MonitorTrace, geometry, header=None):
    """CSV with columns ``t_over_Tblo, b0_or_abs_bplus, N_eff, T_plus, T_minus``."""
    from .scan import write_table
    geometry = Geometry.parse(geometry)
    b = trace.b0 if geometry is Geometry.LINEAR else np.abs(trace.b_plus)
    data = np.column_stack([trace.t_over_tblo, b, trace.n_eff, trace.T_plus, trace.T_minus])
    write_table(path, ["t_over_Tblo", "b0_or_abs_bplus", "N_eff", "T_plus", "T_minus"],
                data, header or {})
