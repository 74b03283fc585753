"""Transfer-matrix model of a 1D optical lattice inside a linear cavity.

Field amplitudes are pairs ``(a_plus, a_minus)`` of right- and left-moving
waves. A transfer matrix maps the pair on the left of an element to the
pair on its right; a scattering matrix maps incoming to outgoing waves.

Phase bookkeeping: the round-trip phase of the cavity is ``Delta_c/fsr_ang``
(so a single pass carries half of it). Lattice periods carry the exact
geometric phase ``site_phase*(1 + Delta_lat/omega_lat)``; the free segments
between mirrors and lattice absorb the rest so that the empty cavity stays
resonant at ``Delta_c = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from .bunching import LatticeConfig, site_indices
from .params import C_LIGHT, PhysParams, derive, polarizability

TRANSFER = "transfer"
SCATTERING = "scattering"


class SingularConversionError(ArithmeticError):
    """Partial inversion hit a zero pivot."""


class DegenerateProfileError(ValueError):
    """Correlation requested on a profile without variance."""


@dataclass(frozen=True)
class Mat2:
    """2x2 complex matrix whose entries may be broadcastable arrays.

    Products are written out entrywise so results do not depend on how a
    grid is chunked.
    """

    m11: object
    m12: object
    m21: object
    m22: object
    role: str = TRANSFER

    @classmethod
    def identity(cls, role=TRANSFER) -> "Mat2":
        return cls(1.0 + 0j, 0j, 0j, 1.0 + 0j, role)

    def __matmul__(self, o: "Mat2") -> "Mat2":
        return Mat2(self.m11 * o.m11 + self.m12 * o.m21,
                    self.m11 * o.m12 + self.m12 * o.m22,
                    self.m21 * o.m11 + self.m22 * o.m21,
                    self.m21 * o.m12 + self.m22 * o.m22, self.role)

    def det(self):
        return self.m11 * self.m22 - self.m12 * self.m21

    def inv(self) -> "Mat2":
        dt = self.det()
        return Mat2(self.m22 / dt, -self.m12 / dt, -self.m21 / dt, self.m11 / dt,
                    self.role)

    def apply(self, a_plus, a_minus):
        return (self.m11 * a_plus + self.m12 * a_minus,
                self.m21 * a_plus + self.m22 * a_minus)

    def power(self, n: int) -> "Mat2":
        if n < 0:
            raise ValueError("negative power")
        result = Mat2.identity(self.role)
        base = self
        while n:
            if n & 1:
                result = base @ result
            n >>= 1
            if n:
                base = base @ base
        return result

    def to_array(self) -> np.ndarray:
        """Entries stacked on the last two axes."""
        m = np.broadcast_arrays(*(np.asarray(x, dtype=complex)
                                  for x in (self.m11, self.m12, self.m21, self.m22)))
        return np.stack([np.stack(m[:2], -1), np.stack(m[2:], -1)], -2)

    @classmethod
    def from_array(cls, a, role=TRANSFER) -> "Mat2":
        a = np.asarray(a, dtype=complex)
        return cls(a[..., 0, 0], a[..., 0, 1], a[..., 1, 0], a[..., 1, 1], role)


def _partial_inverse(m: Mat2, role: str, det=None) -> Mat2:
    pivot = np.asarray(m.m22)
    if np.any(pivot == 0) or not np.all(np.isfinite(pivot)):
        raise SingularConversionError("zero pivot in partial inversion")
    det = m.det() if det is None else det
    return Mat2(det / m.m22, m.m12 / m.m22, -m.m21 / m.m22, 1.0 / m.m22, role)


def s_from_t(t: Mat2, det=None) -> Mat2:
    """Scattering form of a transfer matrix.

    Pass ``det`` when it is known exactly (1 for any chain of the elements
    below): for thick absorbing stacks the entries grow so large that the
    numerical determinant is pure rounding noise.
    """
    return _partial_inverse(t, SCATTERING, det)


def t_from_s(s: Mat2, det=None) -> Mat2:
    return _partial_inverse(s, TRANSFER, det)


# --------------------------------------------------------------------------
# elements

def propagation(phase) -> Mat2:
    """Free propagation by the optical phase ``k*z``."""
    e = np.exp(1j * np.asarray(phase))
    return Mat2(e, 0j, 0j, 1.0 / e)


def beamsplitter_s(r_amp: float) -> Mat2:
    r_amp = _check_amp(r_amp)
    t = math.sqrt(1 - r_amp**2)
    return Mat2(t, -r_amp, r_amp, t, SCATTERING)


def beamsplitter_t(r_amp: float) -> Mat2:
    """Lossless mirror of amplitude reflectivity ``r_amp``."""
    r_amp = _check_amp(r_amp)
    t = math.sqrt(1 - r_amp**2)
    if t == 0:
        raise SingularConversionError("perfect mirror has no transfer matrix")
    return Mat2(1 / t + 0j, -r_amp / t + 0j, -r_amp / t + 0j, 1 / t + 0j)


def _check_amp(r_amp):
    r_amp = float(r_amp)
    if not 0.0 <= r_amp <= 1.0:
        raise ValueError(f"amplitude reflectivity {r_amp} outside [0, 1]")
    return r_amp


def loss(r_ls: float, sign: int = 1) -> Mat2:
    """Extra reflection with amplitude ``r_ls``; ``sign=-1`` adds a pi phase."""
    if not 0.0 < r_ls <= 1.0:
        raise ValueError("r_ls must lie in (0, 1]")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return Mat2(sign * r_ls + 0j, 0j, 0j, sign / r_ls + 0j)


def atomic_layer(beta1) -> Mat2:
    """Thin sheet of atoms with layer coefficient ``beta1``."""
    ib = 1j * np.asarray(beta1)
    return Mat2(1 + ib, ib, -ib, 1 - ib)


def layer_transmission(beta1):
    """Forward amplitude transmission ``1/(1 - i beta1)`` of a single sheet."""
    return s_from_t(atomic_layer(beta1), det=1.0).m11


# --------------------------------------------------------------------------
# lattice stacks

def lattice_site_phase(delta_lat, lambda_lat: float, base: float = math.pi):
    """Optical phase between neighbouring sites for probe detuning ``delta_lat``."""
    omega_lat = 2 * math.pi * C_LIGHT / lambda_lat
    return base * (1 + np.asarray(delta_lat) / omega_lat)


def thermal_sublayers(kzbar: float, site_phase: float, n_ss: int):
    """Offsets (in phase, relative to the site) and weights of the sublayers.

    Weights follow a Gaussian of rms ``kzbar`` wrapped onto one period and
    sum to one, so each period carries exactly its nominal atom number.
    """
    h = n_ss // 2
    offsets = (np.arange(n_ss) - h) * site_phase / n_ss
    if kzbar == 0:
        w = (np.arange(n_ss) == h).astype(float)
    else:
        images = np.arange(-3, 4)[:, None] * site_phase
        w = np.exp(-((offsets[None, :] + images) ** 2) / (2 * kzbar**2)).sum(0)
        w /= w.sum()
    return offsets, w


def lattice_stack(cfg: LatticeConfig, beta1, site_phase=None, thermal: bool = False,
                  n_ss: int = 30) -> Mat2:
    """Transfer matrix ``[A P(site_phase)]^N_s`` of the stack.

    ``beta1`` is the coefficient of one full layer (may be an array over a
    grid). ``site_phase`` overrides ``cfg.site_phase``. With ``thermal``,
    every period is split into ``n_ss`` sublayers sharing ``beta1`` with
    Gaussian weights; sublayer centres are arranged so that the site itself
    sits where the cold layer would be.
    Per-site ``cfg.weights`` scale ``beta1`` by ``weight/mean weight``.
    """
    sp = cfg.site_phase if site_phase is None else site_phase
    if cfg.n_sites == 0:
        return Mat2.identity()
    scale = None
    if cfg.weights is not None:
        w = cfg.weight_array()
        scale = w / w.mean() if w.sum() > 0 else w
    if not thermal:
        if scale is None:
            return (atomic_layer(beta1) @ propagation(sp)).power(cfg.n_sites)
        m = Mat2.identity()
        for s in scale:
            m = atomic_layer(beta1 * s) @ propagation(sp) @ m
        return m
    offsets, w_sub = thermal_sublayers(cfg.kzbar, np.mean(sp), n_ss)
    step = propagation(np.asarray(sp) / n_ss)
    shift = (n_ss - n_ss // 2 - 1) * np.asarray(sp) / n_ss
    if scale is None:
        period = Mat2.identity()
        for wi in w_sub:
            period = atomic_layer(beta1 * wi) @ step @ period
        core = period.power(cfg.n_sites)
    else:
        core = Mat2.identity()
        for s in scale:
            for wi in w_sub:
                core = atomic_layer(beta1 * wi * s) @ step @ core
    return propagation(-shift) @ core @ propagation(shift)


# --------------------------------------------------------------------------
# linear cavity

@dataclass(frozen=True)
class TmmDrive:
    delta_c: object
    delta_a: object
    delta_lat: object = 0.0


@dataclass(frozen=True)
class CavityLayout:
    """Linear cavity with an optical lattice between its mirrors.

    ``r_mir1``/``r_mir2`` are intensity reflectivities, ``r_ls`` an extra
    single-pass amplitude factor. ``beta_res`` is the resonant single-atom
    layer coefficient; the detuning dependence comes from the polarizability.
    ``cav_offset_phase`` detunes the empty cavity by a single-pass phase,
    ``length_offset`` (metres) adds ``k*dL`` and ``insert_phase`` models a
    phase plate adding that phase per round trip.
    """

    lattice: LatticeConfig | None
    beta_res: float
    n_atoms: float
    gamma: float
    fsr_ang: float
    r_mir1: float
    r_mir2: float
    r_ls: float = 1.0
    ls_sign: int = 1
    lambda_a: float = 689e-9
    lambda_lat: float = 689e-9
    thermal: bool = False
    n_ss: int = 30
    rabi: float = 0.0
    cav_offset_phase: float = 0.0
    split: float = 0.5
    insert_phase: float = 0.0
    length_offset: float = 0.0

    def __post_init__(self):
        for name in ("r_mir1", "r_mir2"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name} must lie in [0, 1)")
        if not 0.0 <= self.split <= 1.0:
            raise ValueError("split must lie in [0, 1]")

    @classmethod
    def from_params(cls, p: PhysParams, lattice: LatticeConfig | None = None,
                    free_space: bool = False, **kw) -> "CavityLayout":
        d = derive(p)
        if lattice is None:
            lattice = LatticeConfig(p.n_sites, kzbar=d.zbar * d.k)
        beta = d.beta0.imag if free_space else d.cavity_beta0
        r = 0.0 if free_space else p.r_mir
        kw.setdefault("thermal", lattice.kzbar > 0)
        return cls(lattice, beta, p.n_atoms, d.gamma, d.fsr_ang, r, r,
                   r_ls=p.r_ls, lambda_a=p.lambda_a, lambda_lat=p.lambda_lat, **kw)

    def updated(self, **changes) -> "CavityLayout":
        return replace(self, **changes)

    @property
    def k(self) -> float:
        return 2 * math.pi / self.lambda_a

    @property
    def n1(self) -> float:
        if self.lattice is None or self.lattice.n_sites == 0:
            return 0.0
        return self.n_atoms / self.lattice.n_sites

    def beta1(self, delta_a):
        """Coefficient of one full layer at probe detuning ``delta_a``."""
        return self.n1 * self.beta_res * polarizability(delta_a, self.rabi, self.gamma)

    def site_phase(self, delta_lat):
        base = math.pi if self.lattice is None else self.lattice.site_phase
        return lattice_site_phase(delta_lat, self.lambda_lat, base)

    def segment_phases(self, drive: TmmDrive):
        """Single-pass phases of the free segments before and after the lattice."""
        sp = self.site_phase(drive.delta_lat)
        pass_phase = np.asarray(drive.delta_c) / (2 * self.fsr_ang)
        if self.lattice is None or self.lattice.n_sites == 0:
            n_s, geo = 0, 0.0
        else:
            n_s = self.lattice.n_sites
            j0 = site_indices(n_s)[0]
            # mirror 1 sits at a node: layer phase from the mirror is kz_j + pi/2
            geo = (j0 - 1) * sp + self.lattice.z0_phase + math.pi / 2
        phi1 = geo + self.split * pass_phase
        phi2 = (pass_phase + self.cav_offset_phase + self.k * self.length_offset
                - phi1 - n_s * sp)
        return phi1, phi2, sp


def _mirror_amp(r_int: float) -> float:
    return math.sqrt(r_int)


def assemble_linear(layout: CavityLayout, drive: TmmDrive):
    """Total transfer and scattering matrices from input to output port."""
    phi1, phi2, sp = layout.segment_phases(drive)
    m = beamsplitter_t(_mirror_amp(layout.r_mir1))
    m = propagation(phi1) @ m
    if layout.lattice is not None and layout.lattice.n_sites > 0:
        stack = lattice_stack(layout.lattice, layout.beta1(drive.delta_a), sp,
                              layout.thermal, layout.n_ss)
        m = stack @ m
    m = propagation(phi2) @ m
    if layout.insert_phase:
        m = propagation(layout.insert_phase / 2) @ m
    if layout.r_ls != 1.0 or layout.ls_sign != 1:
        m = loss(layout.r_ls, layout.ls_sign) @ m
    m = beamsplitter_t(_mirror_amp(layout.r_mir2)).inv() @ m
    return m, s_from_t(m, det=1.0)


class LinearTmmSpectrum(NamedTuple):
    T: np.ndarray
    R: np.ndarray
    A: np.ndarray
    phase: np.ndarray


def spectrum_point_linear(layout: CavityLayout, drive: TmmDrive) -> LinearTmmSpectrum:
    """Transmission, reflection, absorption and output phase for one-sided pumping."""
    _, s = assemble_linear(layout, drive)
    t = np.abs(s.m11) ** 2
    r = np.abs(s.m21) ** 2
    return LinearTmmSpectrum(t, r, 1 - t - r, np.angle(s.m11))


def airy_transmission(r1: float, r2: float, round_trip_phase, r_ls: float = 1.0):
    """Closed-form Fabry-Perot transmission for intensity reflectivities r1, r2."""
    a1, a2 = math.sqrt(r1), math.sqrt(r2)
    num = (1 - r1) * (1 - r2) * r_ls**2
    return num / np.abs(1 - a1 * a2 * r_ls**2 * np.exp(1j * np.asarray(round_trip_phase))) ** 2


# --------------------------------------------------------------------------
# intracavity fields

@dataclass(frozen=True)
class AmpPair:
    a_plus: complex
    a_minus: complex

    @property
    def total(self) -> complex:
        return self.a_plus + self.a_minus

    @property
    def flux(self) -> float:
        return abs(self.a_plus) ** 2 - abs(self.a_minus) ** 2


def _elements(layout: CavityLayout, drive: TmmDrive):
    """Element sequence ``(kind, matrix, length, weight, phase)`` for one drive point.

    Free-segment lengths are the ``Delta_c = 0`` optical phases reduced to
    one wavelength, so ``z`` coordinates resolve the lattice structure.
    """
    if np.ndim(drive.delta_c) or np.ndim(drive.delta_a) or np.ndim(drive.delta_lat):
        raise ValueError("field evaluation needs a single drive point")
    k = layout.k
    phi1, phi2, sp = layout.segment_phases(drive)
    b1, b2, _ = layout.segment_phases(TmmDrive(0.0, drive.delta_a, drive.delta_lat))
    sp = float(sp)

    def free(phase, base_phase):
        length = float(np.mod(base_phase, 2 * math.pi)) / k
        return ("free", propagation(phase), length, 0.0, float(phase))

    els = [("mirror", beamsplitter_t(_mirror_amp(layout.r_mir1)), 0.0, 0.0, 0.0)]
    lat = layout.lattice
    if lat is None or lat.n_sites == 0:
        els.append(free(phi1, b1))
        els.append(free(phi2, b2))
    else:
        beta1 = layout.beta1(drive.delta_a)
        scale = np.ones(lat.n_sites)
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
        els.append(free(phi1 + lead, b1 + lead))
        for j in range(lat.n_sites):
            for i, wi in enumerate(w_sub):
                if j or i:
                    els.append(("free", propagation(step), step / k, 0.0, step))
                wl = scale[j] * wi
                els.append(("sheet", atomic_layer(beta1 * wl), 0.0, wl, 0.0))
        els.append(free(phi2 + tail, b2 + tail))
    if layout.insert_phase:
        els.append(("insert", propagation(layout.insert_phase / 2), 0.0, 0.0, 0.0))
    if layout.r_ls != 1.0 or layout.ls_sign != 1:
        els.append(("loss", loss(layout.r_ls, layout.ls_sign), 0.0, 0.0, 0.0))
    els.append(("mirror", beamsplitter_t(_mirror_amp(layout.r_mir2)).inv(), 0.0, 0.0, 0.0))
    return els


class IntensityProfile(NamedTuple):
    z: np.ndarray
    abs_ap2: np.ndarray
    abs_am2: np.ndarray
    abs_sum2: np.ndarray
    flux: np.ndarray
    density_weight: np.ndarray
    beta1: complex


def _walk(layout: CavityLayout, drive: TmmDrive):
    els = _elements(layout, drive)
    t_tot = Mat2.identity()
    for e in els:
        t_tot = e[1] @ t_tot
    a_in = (1.0 + 0j, complex(-t_tot.m21 / t_tot.m22))
    return els, a_in


def intensity_profile(layout: CavityLayout, drive: TmmDrive) -> IntensityProfile:
    """Fields just after every element inside the cavity (unit input amplitude).

    Rows are emitted after the input mirror and after each free segment or
    sheet; ``density_weight`` is the relative atom number of the sheet just
    passed (zero for free segments).
    """
    els, (ap, am) = _walk(layout, drive)
    z = 0.0
    rows = []
    for kind, m, length, weight, _ in els[:-1]:
        ap, am = m.apply(ap, am)
        z += length
        rows.append((z, ap, am, weight))
    zs = np.array([r[0] for r in rows])
    aps = np.array([complex(r[1]) for r in rows])
    ams = np.array([complex(r[2]) for r in rows])
    w = np.array([r[3] for r in rows])
    return IntensityProfile(zs * 1.0, np.abs(aps) ** 2, np.abs(ams) ** 2,
                            np.abs(aps + ams) ** 2, np.abs(aps) ** 2 - np.abs(ams) ** 2,
                            w, complex(layout.beta1(drive.delta_a)))


def cavity_length(layout: CavityLayout, drive: TmmDrive) -> float:
    """Reduced geometric length used for ``z`` coordinates."""
    return float(sum(e[2] for e in _elements(layout, drive)))


def field_at(layout: CavityLayout, drive: TmmDrive, z: float) -> AmpPair:
    """Counter-propagating amplitudes at ``z`` (metres from the input mirror)."""
    els, (ap, am) = _walk(layout, drive)
    total = sum(e[2] for e in els)
    if z < 0 or z > total * (1 + 1e-12):
        raise ValueError(f"z = {z} outside the cavity [0, {total}]")
    pos = 0.0
    for kind, m, length, _, phase in els[:-1]:
        if kind == "free" and length > 0 and pos + length > z:
            # the actual phase of a segment scales with the fraction crossed
            ap, am = propagation(phase * (z - pos) / length).apply(ap, am)
            break
        ap, am = m.apply(ap, am)
        pos += length
    return AmpPair(complex(ap), complex(am))


def spont_check(profile: IntensityProfile, beta1: complex | None = None) -> float:
    """Correlation between flux drops across sheets and local ``n |E|^2``.

    A lossy sheet removes exactly ``2 Im(beta) |E|^2`` of flux, so the
    statistic is 1 for any absorbing stack with varying intensity.
    """
    idx = np.nonzero(profile.density_weight > 0)[0]
    if idx.size < 3:
        raise DegenerateProfileError("need at least three atomic sheets")
    drop = profile.flux[idx - 1] - profile.flux[idx]
    overlap = profile.density_weight[idx] * profile.abs_sum2[idx]
    if np.std(drop) == 0 or np.std(overlap) == 0:
        raise DegenerateProfileError("flux drops or overlaps have zero variance")
    return float(np.corrcoef(drop, overlap)[0, 1])


def write_profile_csv(path, profile: IntensityProfile, lambda_a: float, header=None):
    from .scan import write_table
    cols = ["z_over_lambda", "abs_ap2", "abs_am2", "abs_sum2", "flux", "density_weight"]
    data = np.column_stack([profile.z / lambda_a, profile.abs_ap2, profile.abs_am2,
                            profile.abs_sum2, profile.flux, profile.density_weight])
    write_table(path, cols, data, header or {})


# --------------------------------------------------------------------------
# length retuning

class RetuneResult(NamedTuple):
    delta_l: float
    transmission: float
    flat: bool


def retune_length(layout: CavityLayout, drive: TmmDrive, n_coarse: int = 1000) -> RetuneResult:
    """Cavity length offset in ``[0, lambda/2)`` that maximizes transmission.

    A coarse scan brackets the maximum, bounded Brent refinement polishes it.
    """
    half = layout.lambda_a / 2
    step = half / n_coarse

    def trans(dl):
        return spectrum_point_linear(layout.updated(length_offset=dl), drive).T

    grid = np.arange(n_coarse) * step
    values = np.asarray(trans(grid))
    if np.ptp(values) <= 1e-12 * max(values.max(), 1e-300):
        return RetuneResult(0.0, float(values[0]), True)
    i = int(np.argmax(values))
    res = minimize_scalar(lambda x: -float(trans(x)), method="bounded",
                          bounds=(grid[i] - step, grid[i] + step),
                          options={"xatol": 1e-12 * half})
    dl, best = float(res.x), float(-res.fun)
    if best < values[i]:
        dl, best = float(grid[i]), float(values[i])
    return RetuneResult(float(np.mod(dl, half)), best, False)
