"""Mean-field steady states of atoms coupled to one (linear) or two (ring)
cavity modes, and the resulting transmission/reflection/absorption.

All functions broadcast over array-valued detunings and pump rates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .params import DerivedParams, Geometry, u_gamma


class NonConvergenceError(RuntimeError):
    """Fixed-point iteration did not reach the residual threshold."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class DriveConfig:
    """Probe detunings (angular) and complex pump rates."""

    delta_c: object
    delta_a: object
    eta_plus: complex = 1.0
    eta_minus: complex = 0.0

    @property
    def delta_ca(self):
        return np.asarray(self.delta_c) - np.asarray(self.delta_a)

    def with_eta(self, eta_plus, eta_minus=0.0) -> "DriveConfig":
        return DriveConfig(self.delta_c, self.delta_a, eta_plus, eta_minus)


@dataclass(frozen=True)
class SteadyState:
    alpha_plus: np.ndarray
    alpha_minus: np.ndarray | None = None

    @property
    def alpha(self):
        return self.alpha_plus


class LinearSpectra(NamedTuple):
    T: np.ndarray
    R: np.ndarray
    A: np.ndarray


class RingSpectra(NamedTuple):
    T_plus: np.ndarray
    T_minus: np.ndarray
    R_plus: np.ndarray
    R_minus: np.ndarray
    A: np.ndarray


def _delta_kappa(d: DerivedParams, drive: DriveConfig):
    return np.asarray(drive.delta_c) + 1j * d.kappa


def steady_linear(d: DerivedParams, drive: DriveConfig, b0, n_atoms) -> SteadyState:
    """Low-saturation field ``alpha = i eta / (Delta_kappa - N U b0)``."""
    u = u_gamma(d, drive.delta_a)
    alpha = 1j * np.asarray(drive.eta_plus) / (
        _delta_kappa(d, drive) - n_atoms * u * np.asarray(b0))
    return SteadyState(alpha)


def steady_ring(d: DerivedParams, drive: DriveConfig, b_plus, n_atoms) -> SteadyState:
    """Low-saturation counter-propagating fields of a ring cavity."""
    u = u_gamma(d, drive.delta_a)
    nu = n_atoms * u
    bp = np.asarray(b_plus, dtype=complex)
    bm = np.conj(bp)
    diag = _delta_kappa(d, drive) - nu
    den = diag**2 - nu**2 * np.abs(bp) ** 2
    ep = np.asarray(drive.eta_plus, dtype=complex)
    em = np.asarray(drive.eta_minus, dtype=complex)
    ap = (1j * ep * diag + 1j * em * nu * bm) / den
    am = (1j * em * diag + 1j * ep * nu * bp) / den
    return SteadyState(ap, am)


def ring_modes(state: SteadyState, z0_phase=0.0):
    """Symmetric and antisymmetric combinations ``alpha+ +- alpha- exp(-2i z0)``."""
    rot = state.alpha_minus * np.exp(-2j * np.asarray(z0_phase))
    return state.alpha_plus + rot, state.alpha_plus - rot


def _weights(positions, weights):
    kz = np.asarray(positions, dtype=float)
    w = np.ones_like(kz) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != kz.shape:
        raise ValueError("weights and positions differ in shape")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    return kz, w


def _residual_linear(alpha, u, sat, dk, eta, c2, w):
    den = 1 + sat[..., None] * np.abs(alpha[..., None]) ** 2 * c2
    lhs = np.sum(-u[..., None] * alpha[..., None] * c2 * w / den, axis=-1)
    return lhs - (1j * eta - dk * alpha)


def _ring_sums(ap, am, sat, kz, w):
    e = np.exp(1j * kz)
    field = e * ap[..., None] + np.conj(e) * am[..., None]
    den = 1 + sat[..., None] * np.abs(field) ** 2
    s0 = np.sum(w / den, axis=-1)
    s_minus = np.sum(w * np.exp(-2j * kz) / den, axis=-1)
    s_plus = np.sum(w * np.exp(2j * kz) / den, axis=-1)
    return s0, s_minus, s_plus


def solve_nonlinear(d: DerivedParams, drive: DriveConfig, positions, weights=None,
                    geometry=Geometry.LINEAR, damping=0.5, max_iter=10_000,
                    rtol=1e-12) -> SteadyState:
    """Saturating mean-field equations for atoms at phases ``positions``.

    ``weights`` gives the number of atoms at each phase (default one).
    Damped fixed-point iteration starting from the linearized solution; the
    branch returned is the one continuously connected to it.
    """
    geometry = Geometry.parse(geometry)
    kz, w = _weights(positions, weights)
    n = w.sum()
    dk = np.asarray(_delta_kappa(d, drive), dtype=complex)
    u = np.asarray(u_gamma(d, drive.delta_a), dtype=complex)
    ep = np.asarray(drive.eta_plus, dtype=complex)
    em = np.asarray(drive.eta_minus, dtype=complex)
    shape = np.broadcast_shapes(dk.shape, u.shape, ep.shape, em.shape)
    dk, u, ep, em = (np.broadcast_to(x, shape).astype(complex) for x in (dk, u, ep, em))
    sat = 2 * np.abs(u) ** 2 / d.g**2 if d.g > 0 else np.zeros(shape)
    sat = np.asarray(sat, dtype=float)

    if geometry is Geometry.LINEAR:
        c2 = np.cos(kz) ** 2
        b0 = np.sum(w * c2) / n if n > 0 else 0.5
        alpha = steady_linear(d, drive.with_eta(ep), b0, n).alpha_plus
        alpha = np.broadcast_to(alpha, shape).astype(complex)
        scale = np.abs(ep) + d.kappa * np.abs(alpha)
        for _ in range(max_iter):
            den = 1 + sat[..., None] * np.abs(alpha[..., None]) ** 2 * c2
            s = np.sum(w * c2 / den, axis=-1)
            target = 1j * ep / (dk - u * s)
            alpha = (1 - damping) * alpha + damping * target
            res = np.abs(_residual_linear(alpha, u, sat, dk, ep, c2, w))
            scale = np.abs(ep) + d.kappa * np.abs(alpha)
            if np.all(res <= rtol * scale):
                return SteadyState(alpha)
        raise NonConvergenceError("linear-cavity fixed point did not converge",
                                  float(np.max(res / np.maximum(scale, 1e-300))))

    bp = np.sum(w * np.exp(2j * kz)) / n if n > 0 else 0.0
    lin = steady_ring(d, DriveConfig(drive.delta_c, drive.delta_a, ep, em), bp, n)
    ap = np.broadcast_to(lin.alpha_plus, shape).astype(complex)
    am = np.broadcast_to(lin.alpha_minus, shape).astype(complex)
    for _ in range(max_iter):
        s0, s_m, s_p = _ring_sums(ap, am, sat, kz, w)
        a11 = dk - u * s0
        a12 = -u * s_m
        a21 = -u * s_p
        det = a11 * a11 - a12 * a21
        tp = (1j * ep * a11 - a12 * 1j * em) / det
        tm = (1j * em * a11 - a21 * 1j * ep) / det
        ap = (1 - damping) * ap + damping * tp
        am = (1 - damping) * am + damping * tm
        s0, s_m, s_p = _ring_sums(ap, am, sat, kz, w)
        rp = -u * (s0 * ap + s_m * am) - (1j * ep - dk * ap)
        rm = -u * (s0 * am + s_p * ap) - (1j * em - dk * am)
        res = np.hypot(np.abs(rp), np.abs(rm))
        scale = np.abs(ep) + np.abs(em) + d.kappa * np.hypot(np.abs(ap), np.abs(am))
        if np.all(res <= rtol * scale):
            return SteadyState(ap, am)
    raise NonConvergenceError("ring-cavity fixed point did not converge",
                              float(np.max(res / np.maximum(scale, 1e-300))))


def nonlinear_residual(d: DerivedParams, drive: DriveConfig, state: SteadyState,
                       positions, weights=None, geometry=Geometry.LINEAR):
    """Absolute residual of the saturating equations, by direct substitution."""
    geometry = Geometry.parse(geometry)
    kz, w = _weights(positions, weights)
    dk = _delta_kappa(d, drive)
    u = np.asarray(u_gamma(d, drive.delta_a), dtype=complex)
    sat = np.asarray(2 * np.abs(u) ** 2 / d.g**2)
    if geometry is Geometry.LINEAR:
        return np.abs(_residual_linear(np.asarray(state.alpha_plus), u, sat, dk,
                                       np.asarray(drive.eta_plus), np.cos(kz) ** 2, w))
    ap, am = np.asarray(state.alpha_plus), np.asarray(state.alpha_minus)
    e = np.exp(1j * kz)
    den = 1 + sat[..., None] * np.abs(e * ap[..., None] + np.conj(e) * am[..., None]) ** 2
    lp = np.sum(-u[..., None] * (ap[..., None] + np.exp(-2j * kz) * am[..., None]) * w / den, -1)
    lm = np.sum(-u[..., None] * (am[..., None] + np.exp(2j * kz) * ap[..., None]) * w / den, -1)
    rp = lp - (1j * drive.eta_plus - dk * ap)
    rm = lm - (1j * drive.eta_minus - dk * am)
    return np.hypot(np.abs(rp), np.abs(rm))


def spectra_odm(state: SteadyState, drive: DriveConfig, d: DerivedParams,
                geometry=Geometry.LINEAR):
    """Transmission, reflection and absorption normalized to the + pump."""
    geometry = Geometry.parse(geometry)
    ep = np.asarray(drive.eta_plus, dtype=complex)
    if np.any(ep == 0):
        raise ValueError("eta_plus must be nonzero for spectra")
    if geometry is Geometry.LINEAR:
        x = d.kappa * np.asarray(state.alpha_plus) / ep
        t = np.abs(x) ** 2
        r = np.abs(1 - x) ** 2
        return LinearSpectra(t, r, 1 - t - r)
    em = np.asarray(drive.eta_minus, dtype=complex)
    xp = d.kappa * np.asarray(state.alpha_plus) / ep
    xm = d.kappa * np.asarray(state.alpha_minus) / ep
    tp, tm = np.abs(xp) ** 2, np.abs(xm) ** 2
    rp = np.abs(1 - xp) ** 2
    rm = np.abs(em / ep - xm) ** 2
    inp = 1 + np.abs(em / ep) ** 2
    return RingSpectra(tp, tm, rp, rm, inp - tp - tm - rp - rm)


def spectrum(d: DerivedParams, drive: DriveConfig, b0=1.0, b_plus=1.0, n_atoms=None,
             geometry=None):
    """Convenience: linearized steady state followed by :func:`spectra_odm`."""
    geometry = Geometry.parse(geometry or d.geometry)
    n = d.n_atoms if n_atoms is None else n_atoms
    if geometry is Geometry.LINEAR:
        st = steady_linear(d, drive, b0, n)
    else:
        st = steady_ring(d, drive, b_plus, n)
    return spectra_odm(st, drive, d, geometry)
