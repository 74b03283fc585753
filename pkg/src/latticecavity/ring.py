"""Transfer-matrix model of a three-mirror ring cavity containing a lattice.

Points on the unrolled round trip: (1) just behind the input coupler,
then a free segment ``d``, the lossy third mirror, a segment ``a``, the
lattice, a segment ``a`` up to the output coupler at (4)/(5), and a last
segment ``d`` back to (6) in front of the input coupler. The clockwise
round-trip phase is ``Delta_c/fsr_ang``, shared equally by the four free
segments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .bunching import LatticeConfig, site_indices
from .params import PhysParams, derive, polarizability
from .tmm import (AmpPair, IntensityProfile, Mat2, SingularConversionError, atomic_layer,
                  lattice_site_phase, lattice_stack, loss, propagation, thermal_sublayers)


class DegenerateCavityError(SingularConversionError):
    """The intracavity solution matrix is singular."""


@dataclass(frozen=True)
class RingDrive:
    delta_c: object
    delta_a: object
    delta_lat: object = 0.0
    in_plus: complex = 1.0
    in_minus: complex = 0.0


@dataclass(frozen=True)
class RingLayout:
    """Ring cavity geometry. Couplers take intensity reflectivities."""

    lattice: LatticeConfig | None
    beta_res: float
    n_atoms: float
    gamma: float
    fsr_ang: float
    r_ic: float
    r_hr: float
    r_ls: float = 1.0
    lambda_a: float = 689e-9
    lambda_lat: float = 689e-9
    thermal: bool = False
    n_ss: int = 30
    rabi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.r_ic < 1.0:
            raise ValueError("r_ic must lie in [0, 1)")
        if not 0.0 <= self.r_hr < 1.0:
            raise ValueError("r_hr must lie in [0, 1)")
        if not 0.0 < self.r_ls <= 1.0:
            raise ValueError("r_ls must lie in (0, 1]")

    @classmethod
    def from_params(cls, p: PhysParams, lattice: LatticeConfig | None = None,
                    **kw) -> "RingLayout":
        """Both couplers get ``r_mir``; the third mirror is lossless unless
        ``r_ls`` says otherwise."""
        d = derive(p.updated(geometry="ring")) if p.geometry.value != "ring" else derive(p)
        if lattice is None:
            lattice = LatticeConfig(p.n_sites, kzbar=d.zbar * d.k)
        kw.setdefault("thermal", lattice.kzbar > 0)
        return cls(lattice, d.cavity_beta0, p.n_atoms, d.gamma, d.fsr_ang, p.r_mir,
                   p.r_mir, r_ls=p.r_ls, lambda_a=p.lambda_a, lambda_lat=p.lambda_lat, **kw)

    def updated(self, **changes) -> "RingLayout":
        return replace(self, **changes)

    @property
    def amps(self):
        """Amplitude coefficients ``(r_ic, t_ic, r_hr, t_hr)``."""
        return (math.sqrt(self.r_ic), math.sqrt(1 - self.r_ic),
                math.sqrt(self.r_hr), math.sqrt(1 - self.r_hr))

    @property
    def k(self) -> float:
        return 2 * math.pi / self.lambda_a

    @property
    def n1(self) -> float:
        if self.lattice is None:
            return 0.0
        return self.n_atoms / self.lattice.n_sites

    def beta1(self, delta_a):
        return self.n1 * self.beta_res * polarizability(delta_a, self.rabi, self.gamma)

    def site_phase(self, delta_lat):
        base = math.pi if self.lattice is None else self.lattice.site_phase
        return lattice_site_phase(delta_lat, self.lambda_lat, base)

    def segment_phases(self, drive: RingDrive):
        """Phases of the segments ``d``, ``a`` (before), ``a`` (after), ``d``."""
        quarter = np.asarray(drive.delta_c) / (4 * self.fsr_ang)
        sp = self.site_phase(drive.delta_lat)
        if self.lattice is None:
            return quarter, quarter, quarter, quarter, sp, 0
        n_s = self.lattice.n_sites
        j0 = site_indices(n_s)[0]
        # point (1) sits at a node of the symmetric standing wave
        geo = (j0 - 1) * sp + self.lattice.z0_phase + math.pi / 2
        return quarter, geo + quarter, quarter - geo - n_s * sp, quarter, sp, n_s


def _stack(layout: RingLayout, drive: RingDrive, sp):
    if layout.lattice is None:
        return Mat2.identity()
    return lattice_stack(layout.lattice, layout.beta1(drive.delta_a), sp,
                         layout.thermal, layout.n_ss)


def transfer_1_to_4(layout: RingLayout, drive: RingDrive) -> Mat2:
    d1, a1, a2, _, sp, _ = layout.segment_phases(drive)
    m = loss(layout.r_ls, 1) @ propagation(d1)
    return propagation(a2) @ _stack(layout, drive, sp) @ propagation(a1) @ m


def output_coupler(layout: RingLayout) -> Mat2:
    """Intracavity passage (4)->(5): reflection at the output coupler."""
    r_hr = layout.amps[2]
    if r_hr == 0:
        raise SingularConversionError("output coupler without reflection")
    return loss(r_hr, -1)


def roundtrip(layout: RingLayout, drive: RingDrive) -> Mat2:
    """Round-trip transfer matrix from point (1) to point (6)."""
    d2 = layout.segment_phases(drive)[3]
    return propagation(d2) @ output_coupler(layout) @ transfer_1_to_4(layout, drive)


def y_matrix(rt: Mat2, r_ic: float, t_ic: float, det_rt=1.0) -> Mat2:
    """Map from incident amplitudes to the amplitudes at point (1).

    ``det_rt`` is the determinant of ``rt``, exactly 1 for chains of the
    elements used here; it is substituted analytically because the entries
    of a thick absorbing stack are too large for a numerical determinant.
    """
    den = _den(rt, r_ic, det_rt)
    if np.any(den == 0) or not np.all(np.isfinite(den)):
        raise DegenerateCavityError("singular intracavity matrix")
    # inverse of [[1 + r R11, r R12], [R21, r + R22]] / t_ic
    return Mat2(t_ic * (r_ic + rt.m22) / den, -t_ic * r_ic * rt.m12 / den,
                -t_ic * rt.m21 / den, t_ic * (1 + r_ic * rt.m11) / den)


def _pick(factored, bound_f, expanded, bound_e):
    """Choose between two forms that agree when ``det(rt) = det_rt``.

    The bounds estimate how entry rounding propagates into each form. The
    factored one keeps precision for weak coupling near resonance, the
    expanded one for thick stacks whose entries are large.
    """
    return np.where(bound_f < bound_e, factored, expanded)


def _den(rt: Mat2, r_ic: float, det_rt):
    # (r + R22)(1 + r R11) - r R12 R21 with R11 R22 - R12 R21 = det_rt
    a, b = r_ic + rt.m22, 1 + r_ic * rt.m11
    c = r_ic * rt.m12 * rt.m21
    m11, m22 = np.abs(rt.m11), np.abs(rt.m22)
    return _pick(a * b - c, m22 * np.abs(b) + r_ic * m11 * np.abs(a) + np.abs(c),
                 r_ic * (1 + det_rt) + r_ic**2 * rt.m11 + rt.m22,
                 r_ic**2 * m11 + m22 + 2 * r_ic)


def x_matrix(rt: Mat2, r_ic: float, t_ic: float, det_rt=1.0) -> Mat2:
    """Reflection matrix in closed form (no differencing near resonance)."""
    r11, r12, r21, r22 = rt.m11, rt.m12, rt.m21, rt.m22
    a11, a22 = np.abs(r11), np.abs(r22)
    den = _den(rt, r_ic, det_rt)
    c = r12 * r21
    # (r + R11)(r + R22) - R12 R21 and (1 + r R11)(1 + r R22) - r^2 R12 R21
    p, q = r_ic + r11, r_ic + r22
    n11 = _pick(p * q - c, a11 * np.abs(q) + np.abs(p) * a22 + np.abs(c),
                r_ic**2 + r_ic * (r11 + r22) + det_rt, r_ic * (a11 + a22) + r_ic**2 + 1)
    p, q = 1 + r_ic * r11, 1 + r_ic * r22
    n22 = _pick(p * q - r_ic**2 * c, r_ic * (a11 * np.abs(q) + np.abs(p) * a22) + r_ic**2 * np.abs(c),
                1 + r_ic * (r11 + r22) + r_ic**2 * det_rt, r_ic * (a11 + a22) + 1 + r_ic**2)
    return Mat2(n11 / den, t_ic**2 * r12 / den, -t_ic**2 * r21 / den, n22 / den)


class RingOutputs(NamedTuple):
    out: AmpPair
    rfl: AmpPair


def ring_outputs(layout: RingLayout, drive: RingDrive) -> RingOutputs:
    """Transmitted amplitudes behind the output coupler and reflected ones."""
    r_ic, t_ic, r_hr, t_hr = layout.amps
    if r_hr == 0:
        raise SingularConversionError("output extraction needs r_hr > 0")
    t14 = transfer_1_to_4(layout, drive)
    d2 = layout.segment_phases(drive)[3]
    tail = propagation(d2) @ output_coupler(layout)
    rt = tail @ t14
    # T14 Y = tail^-1 rt Y, with rt Y reduced through det(rt) = 1 so nothing cancels
    den = _den(rt, r_ic, 1.0)
    if np.any(den == 0) or not np.all(np.isfinite(den)):
        raise DegenerateCavityError("singular intracavity matrix")
    rty = Mat2(t_ic * (r_ic * rt.m11 + 1) / den, t_ic * rt.m12 / den,
               t_ic * r_ic * rt.m21 / den, t_ic * (rt.m22 + r_ic) / den)
    a4p, a4m = (tail.inv() @ rty).apply(drive.in_plus, drive.in_minus)
    out = AmpPair(t_hr * a4p, -t_hr / r_hr * a4m)
    rp, rm = x_matrix(rt, r_ic, t_ic).apply(drive.in_plus, drive.in_minus)
    return RingOutputs(out, AmpPair(rp, rm))


class RingTmmSpectrum(NamedTuple):
    T_plus: np.ndarray
    T_minus: np.ndarray
    R_plus: np.ndarray
    R_minus: np.ndarray
    A: np.ndarray


def ring_spectrum(layout: RingLayout, drive: RingDrive) -> RingTmmSpectrum:
    """Powers normalized to the + input, matching the ODM ring convention."""
    o = ring_outputs(layout, drive)
    norm = np.abs(drive.in_plus) ** 2
    if np.any(norm == 0):
        raise ValueError("in_plus must be nonzero")
    tp = np.abs(o.out.a_plus) ** 2 / norm
    tm = np.abs(o.out.a_minus) ** 2 / norm
    rp = np.abs(o.rfl.a_plus) ** 2 / norm
    rm = np.abs(o.rfl.a_minus) ** 2 / norm
    inp = 1 + np.abs(drive.in_minus) ** 2 / norm
    return RingTmmSpectrum(tp, tm, rp, rm, inp - tp - tm - rp - rm)


def empty_ring_transmission(r_ic: float, r_hr: float, r_ls: float, round_trip_phase):
    """Closed-form transmission of the empty ring for one-sided pumping."""
    rho = math.sqrt(r_ic * r_hr) * r_ls
    return (1 - r_ic) * (1 - r_hr) * r_ls**2 / np.abs(
        1 - rho * np.exp(1j * np.asarray(round_trip_phase))) ** 2


# --------------------------------------------------------------------------
# intracavity fields

def _elements(layout: RingLayout, drive: RingDrive):
    if np.ndim(drive.delta_c) or np.ndim(drive.delta_a) or np.ndim(drive.delta_lat):
        raise ValueError("field evaluation needs a single drive point")
    k = layout.k
    d1, a1, a2, d2, sp, n_s = layout.segment_phases(drive)
    base = layout.segment_phases(RingDrive(0.0, drive.delta_a, drive.delta_lat))
    sp = float(sp)

    def free(phase, base_phase):
        length = float(np.mod(base_phase, 2 * math.pi)) / k
        return ("free", propagation(phase), length, 0.0, float(phase))

    els = [free(d1, base[0]), ("loss", loss(layout.r_ls, 1), 0.0, 0.0, 0.0)]
    lat = layout.lattice
    if lat is None:
        els += [free(a1, base[1]), free(a2, base[2])]
    else:
        beta1 = layout.beta1(drive.delta_a)
        scale = np.ones(n_s)
        if lat.weights is not None:
            w = lat.weight_array()
            scale = w / w.mean()
        if layout.thermal:
            offsets, w_sub = thermal_sublayers(lat.kzbar, sp, layout.n_ss)
        else:
            offsets, w_sub = np.zeros(1), np.ones(1)
        step = sp / len(offsets)
        lead = sp + offsets[0]
        tail = step - sp - offsets[0]
        els.append(free(a1 + lead, base[1] + lead))
        for j in range(n_s):
            for i, wi in enumerate(w_sub):
                if j or i:
                    els.append(("free", propagation(step), step / k, 0.0, step))
                wl = scale[j] * wi
                els.append(("sheet", atomic_layer(beta1 * wl), 0.0, wl, 0.0))
        els.append(free(a2 + tail, base[2] + tail))
    els += [("mirror", output_coupler(layout), 0.0, 0.0, 0.0), free(d2, base[3])]
    return els


def _start(layout: RingLayout, drive: RingDrive):
    r_ic, t_ic, _, _ = layout.amps
    y = y_matrix(roundtrip(layout, drive), r_ic, t_ic)
    return y.apply(drive.in_plus, drive.in_minus)


def ring_profile(layout: RingLayout, drive: RingDrive) -> IntensityProfile:
    """Fields after every element of the unrolled round trip, starting at (1)."""
    ap, am = _start(layout, drive)
    z = 0.0
    rows = [(0.0, ap, am, 0.0)]
    for kind, m, length, weight, _ in _elements(layout, drive):
        ap, am = m.apply(ap, am)
        z += length
        rows.append((z, ap, am, weight))
    zs = np.array([r[0] for r in rows])
    aps = np.array([complex(r[1]) for r in rows])
    ams = np.array([complex(r[2]) for r in rows])
    w = np.array([r[3] for r in rows])
    return IntensityProfile(zs, np.abs(aps) ** 2, np.abs(ams) ** 2, np.abs(aps + ams) ** 2,
                            np.abs(aps) ** 2 - np.abs(ams) ** 2, w,
                            complex(layout.beta1(drive.delta_a)))


def ring_field_at(layout: RingLayout, drive: RingDrive, z: float) -> AmpPair:
    """Amplitudes at ``z`` (metres along the unrolled round trip from (1))."""
    els = _elements(layout, drive)
    total = sum(e[2] for e in els)
    if z < 0 or z > total * (1 + 1e-12):
        raise ValueError(f"z = {z} outside the round trip [0, {total}]")
    ap, am = _start(layout, drive)
    if z == 0:
        return AmpPair(complex(ap), complex(am))
    pos = 0.0
    for kind, m, length, _, phase in els:
        if kind == "free" and length > 0 and pos + length > z:
            ap, am = propagation(phase * (z - pos) / length).apply(ap, am)
            break
        ap, am = m.apply(ap, am)
        pos += length
    return AmpPair(complex(ap), complex(am))
