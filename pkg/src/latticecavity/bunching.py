"""Atomic bunching parameters b0 and b+- for lattice-bound atoms.

Phases are dimensionless: a site sits at ``kz_j = j*site_phase + z0_phase``
with ``j`` running over ``(1-N_s)/2 ... (N_s-1)/2`` (half-integers for even
``N_s``). Direct summation is the reference implementation; the closed
Dirichlet-kernel forms are kept for cross-checks only.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np


class Bunching(NamedTuple):
    b0: float
    b_plus: complex

    @property
    def b_minus(self) -> complex:
        return self.b_plus.conjugate()


class WeightedBunching(NamedTuple):
    b0: float
    b_plus: complex
    n_eff0: float
    n_eff_plus: complex

    @property
    def b_minus(self) -> complex:
        return self.b_plus.conjugate()


def site_indices(n_sites: int) -> np.ndarray:
    return np.arange(n_sites) - (n_sites - 1) / 2


def antinode_phase(n_sites: int) -> float:
    """Offset z0 that puts every site of a commensurate lattice at an antinode."""
    return (((n_sites - 1) / 2) * math.pi) % math.pi


def reduce_z0(z0_phase: float) -> float:
    """All bunching quantities depend on 2*z0 mod 2*pi only."""
    return float(np.mod(z0_phase, math.pi))


@dataclass(frozen=True)
class LatticeConfig:
    """Geometry of the atomic stack in phase units.

    ``weights`` are per-site populations ``|c_j|^2``; ``None`` means uniform
    ``n_atoms/n_sites``.
    """

    n_sites: int
    site_phase: float = math.pi
    z0_phase: float = 0.0
    kzbar: float = 0.0
    weights: tuple | None = None
    n_atoms: float | None = None

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("n_sites must be >= 1")
        if self.kzbar < 0:
            raise ValueError("kzbar must be >= 0")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (self.n_sites,):
                raise ValueError(
                    f"weights length {w.size} != n_sites {self.n_sites}")
            if np.any(w < 0):
                raise ValueError("weights must be non-negative")
            object.__setattr__(self, "weights", tuple(w.tolist()))
            if self.n_atoms is not None and not math.isclose(
                    w.sum(), self.n_atoms, rel_tol=1e-9):
                raise ValueError("weights must sum to n_atoms")

    @property
    def total(self) -> float:
        if self.weights is not None:
            return float(sum(self.weights))
        return float(self.n_atoms if self.n_atoms is not None else self.n_sites)

    def positions(self) -> np.ndarray:
        return site_indices(self.n_sites) * self.site_phase + self.z0_phase

    def weight_array(self) -> np.ndarray:
        if self.weights is None:
            return np.full(self.n_sites, self.total / self.n_sites)
        return np.asarray(self.weights, dtype=float)


def bunching_discrete(positions, weights=None) -> Bunching:
    """b0 = <cos^2 kz_j>, b+ = <exp(2i kz_j)> over the given phases."""
    kz = np.asarray(positions, dtype=float)
    if kz.size == 0:
        raise ValueError("empty position list")
    if weights is None:
        w = np.full(kz.shape, 1.0 / kz.size)
    else:
        w = np.asarray(weights, dtype=float)
        total = w.sum()
        if total <= 0:
            raise ValueError("weights sum to zero")
        w = w / total
    return Bunching(float(np.sum(w * np.cos(kz) ** 2)),
                    complex(np.sum(w * np.exp(2j * kz))))


def bunching_lattice(cfg: LatticeConfig) -> Bunching:
    """Uniformly filled cold lattice, by direct summation over sites."""
    return bunching_discrete(cfg.positions())


def dirichlet_ratio(n_sites: int, site_phase):
    """``sin(N_s*phi)/(N_s*sin(phi))`` with its limit at multiples of pi."""
    phi = np.asarray(site_phase, dtype=float)
    s = np.sin(phi)
    near = np.abs(s) < 1e-12
    safe = np.where(near, 1.0, s)
    ratio = np.sin(n_sites * phi) / (n_sites * safe)
    limit = np.cos(n_sites * phi) / np.cos(phi)
    return np.where(near, limit, ratio)


def bunching_closed_form(cfg: LatticeConfig) -> Bunching:
    """Dirichlet-kernel closed forms, exactly as usually printed.

    The b0 modulation term enters with the opposite sign to the direct
    sum (b0 = 1/2 + cos(2 z0) * ratio / 2); b+ agrees. Use
    :func:`bunching_lattice` for results.
    """
    r = float(dirichlet_ratio(cfg.n_sites, cfg.site_phase))
    b0 = 0.5 - 0.5 * math.cos(2 * cfg.z0_phase) * r
    bp = complex(np.exp(2j * cfg.z0_phase) * r)
    return Bunching(b0, bp)


def sinc_ratio(n_sites: int, site_phase):
    """Small-detuning approximation ``sinc(N_s*(pi - phi))`` (unnormalized sinc)."""
    return np.sinc(n_sites * (np.pi - np.asarray(site_phase)) / np.pi)


def debye_waller(kzbar) -> float:
    return np.exp(-2.0 * np.asarray(kzbar) ** 2)


def bunching_thermal(cfg: LatticeConfig) -> Bunching:
    """Gaussian-smeared sites: cold result scaled by the Debye-Waller factor."""
    cold = bunching_weighted(cfg) if cfg.weights is not None else bunching_lattice(cfg)
    if cfg.kzbar == 0:
        return Bunching(cold.b0, cold.b_plus)
    dw = float(debye_waller(cfg.kzbar))
    return Bunching(0.5 + (cold.b0 - 0.5) * dw, cold.b_plus * dw)


def bunching_weighted(cfg: LatticeConfig, n_total: float | None = None) -> WeightedBunching:
    """Population-weighted bunching; normalized to ``n_total`` (default: sum of weights)."""
    w = cfg.weight_array()
    n = w.sum() if n_total is None else float(n_total)
    if n <= 0:
        raise ValueError("total atom number must be > 0")
    kz = cfg.positions()
    b0 = float(np.sum(w * np.cos(kz) ** 2) / n)
    bp = complex(np.sum(w * np.exp(2j * kz)) / n)
    return WeightedBunching(b0, bp, n * b0, n * bp)


def load_weights_csv(path) -> np.ndarray:
    """Single-column CSV of per-site populations (a non-numeric header is skipped)."""
    values = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            try:
                values.append(float(row[0]))
            except ValueError:
                if values:
                    raise
    return np.asarray(values)


def bunching_grid(n_sites: int, site_phase, z0_phase=0.0, kzbar=0.0, weights=None):
    """Vectorized ``(b0, b+)`` over broadcastable ``site_phase``/``z0_phase`` arrays.

    Thermal smearing enters through the Debye-Waller factor. ``weights``
    (per-site populations) may carry leading grid axes.
    """
    sp = np.asarray(site_phase, dtype=float)[..., None]
    z0 = np.asarray(z0_phase, dtype=float)[..., None]
    kz = site_indices(n_sites) * sp + z0
    if weights is None:
        w = np.full(n_sites, 1.0 / n_sites)
    else:
        w = np.asarray(weights, dtype=float)
        w = w / w.sum(axis=-1, keepdims=True)
    b0 = np.sum(w * np.cos(kz) ** 2, axis=-1)
    bp = np.sum(w * np.exp(2j * kz), axis=-1)
    dw = debye_waller(kzbar)
    return 0.5 + (b0 - 0.5) * dw, bp * dw
