import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from latticecavity.bunching import (LatticeConfig, antinode_phase, bunching_closed_form,
                                    bunching_discrete, bunching_grid, bunching_lattice,
                                    bunching_thermal, bunching_weighted, debye_waller,
                                    dirichlet_ratio, load_weights_csv, reduce_z0, sinc_ratio)


def test_perfect_bunching():
    b = bunching_discrete(np.zeros(5))
    assert b.b0 == 1 and b.b_plus == 1


def test_two_site_hand_sum():
    b = bunching_discrete([0.0, math.pi / 2])
    assert b.b0 == pytest.approx(0.5, abs=1e-15)
    assert abs(b.b_plus) < 1e-15


def test_homogeneous_limit():
    b = bunching_discrete(np.linspace(0, math.pi, 100000, endpoint=False))
    assert b.b0 == pytest.approx(0.5, abs=1e-9)
    assert abs(b.b_plus) < 1e-9


def test_empty_positions():
    with pytest.raises(ValueError):
        bunching_discrete([])


@pytest.mark.parametrize("n", [1, 2, 299, 300])
def test_commensurate_lattice(n):
    b = bunching_lattice(LatticeConfig(n, math.pi, antinode_phase(n)))
    assert b.b0 == pytest.approx(1, abs=1e-12)
    assert abs(b.b_plus - 1) < 1e-12
    b = bunching_lattice(LatticeConfig(n, math.pi, antinode_phase(n) + math.pi / 2))
    assert b.b0 == pytest.approx(0, abs=1e-12)
    assert abs(b.b_plus + 1) < 1e-12


def test_sinc_limit_near_commensurate():
    for n in (10, 300, 1000):
        for eps in (1e-6, 1e-5, 1e-4):
            sp = math.pi * (1 + eps)
            direct = bunching_lattice(LatticeConfig(n, sp, antinode_phase(n)))
            assert abs(abs(direct.b_plus) - abs(sinc_ratio(n, sp))) < 1e-6


@settings(max_examples=200)
@given(n=st.integers(1, 400), sp=st.floats(0.0, 2 * math.pi), z0=st.floats(-10, 10))
def test_closed_form_magnitude(n, sp, z0):
    k = round(sp / math.pi)
    if abs(sp - k * math.pi) < 1e-3:
        return
    cfg = LatticeConfig(n, sp, z0)
    assert abs(abs(bunching_lattice(cfg).b_plus) - abs(bunching_closed_form(cfg).b_plus)) < 1e-9


@settings(max_examples=200)
@given(n=st.integers(1, 300), sp=st.floats(0.0, 2 * math.pi), z0=st.floats(-10, 10),
       kz=st.floats(0, 3))
def test_bounds_and_conjugate(n, sp, z0, kz):
    b = bunching_thermal(LatticeConfig(n, sp, z0, kz))
    assert -1e-12 <= b.b0 <= 1 + 1e-12
    assert abs(b.b_plus) <= 1 + 1e-12
    assert b.b_minus == b.b_plus.conjugate()


def test_z0_quotient():
    cfg = LatticeConfig(50, 3.0, 0.3)
    shifted = LatticeConfig(50, 3.0, 0.3 + math.pi)
    a, b = bunching_lattice(cfg), bunching_lattice(shifted)
    assert a.b0 == pytest.approx(b.b0, abs=1e-12)
    assert abs(a.b_plus - b.b_plus) < 1e-12
    assert 0 <= reduce_z0(7.0) < math.pi


def test_dirichlet_limit_parity():
    # the ratio's limit at phi = pi depends on the parity of N_s
    assert dirichlet_ratio(4, math.pi) == pytest.approx(-1)
    assert dirichlet_ratio(5, math.pi) == pytest.approx(1)


def test_thermal_examples():
    cfg = LatticeConfig(300, math.pi * (1 + 1e-3), 0.2)
    cold = bunching_lattice(cfg)
    assert bunching_thermal(cfg) == cold
    hot = bunching_thermal(LatticeConfig(300, cfg.site_phase, 0.2, 50.0))
    assert hot.b0 == pytest.approx(0.5, abs=1e-12) and abs(hot.b_plus) < 1e-12
    warm = bunching_thermal(LatticeConfig(300, cfg.site_phase, 0.2, 0.2))
    assert abs(warm.b_plus) / abs(cold.b_plus) == pytest.approx(math.exp(-0.08), rel=1e-12)
    assert math.exp(-0.08) == pytest.approx(0.9231, abs=1e-4)


def _quadrature(cfg):
    """Overlap integrals over Gaussian sites of rms ``kzbar`` (phase units)."""
    s = cfg.kzbar
    b0 = bp = 0.0
    for kz in cfg.positions():
        lo, hi = kz - 10 * s, kz + 10 * s

        def dens(x):
            return math.exp(-((x - kz) ** 2) / (2 * s * s)) / (math.sqrt(2 * math.pi) * s)

        b0 += quad(lambda x: dens(x) * math.cos(x) ** 2, lo, hi, epsabs=1e-13)[0]
        bp += (quad(lambda x: dens(x) * math.cos(2 * x), lo, hi, epsabs=1e-13)[0]
               + 1j * quad(lambda x: dens(x) * math.sin(2 * x), lo, hi, epsabs=1e-13)[0])
    n = cfg.n_sites
    return b0 / n, bp / n


@pytest.mark.parametrize("kz", [0.05, 0.1, 0.2, 0.3])
def test_debye_waller_against_quadrature(kz):
    cfg = LatticeConfig(7, math.pi * 1.01, 0.3, kz)
    b0, bp = _quadrature(cfg)
    th = bunching_thermal(cfg)
    assert abs(th.b0 - b0) < 1e-4
    assert abs(th.b_plus - bp) < 1e-4


def test_weighted_examples():
    n = 81
    cfg = LatticeConfig(n, 2.0, 0.4)
    uni = bunching_weighted(LatticeConfig(n, 2.0, 0.4, weights=tuple(np.ones(n))))
    ref = bunching_lattice(cfg)
    assert uni.b0 == pytest.approx(ref.b0, abs=1e-14)
    assert abs(uni.b_plus - ref.b_plus) < 1e-14
    w = np.zeros(n)
    w[n // 2] = 7.0
    single = bunching_weighted(LatticeConfig(n, 1.234, 0.0, weights=tuple(w)))
    assert single.b0 == pytest.approx(1) and abs(single.b_plus - 1) < 1e-14
    assert single.n_eff0 == pytest.approx(7.0)


def test_weighted_comb_brute_force():
    j = np.arange(-40, 41)
    w = (j % 4 == 0).astype(float) * 1000
    sp = math.pi / 4
    b = bunching_weighted(LatticeConfig(81, sp, 0.0, weights=tuple(w)))
    brute0 = sum(wi * math.cos(ji * sp) ** 2 for ji, wi in zip(j, w)) / w.sum()
    brutep = sum(wi * np.exp(2j * ji * sp) for ji, wi in zip(j, w)) / w.sum()
    assert b.b0 == pytest.approx(brute0, abs=1e-14)
    assert abs(b.b_plus - brutep) < 1e-14


def test_weight_validation():
    with pytest.raises(ValueError):
        LatticeConfig(3, weights=(1.0, 2.0))
    with pytest.raises(ValueError):
        LatticeConfig(2, weights=(1.0, -2.0))
    with pytest.raises(ValueError):
        LatticeConfig(2, weights=(1.0, 2.0), n_atoms=4.0)


def test_grid_matches_scalar():
    sp = np.linspace(3.0, 3.3, 7)
    z0 = np.linspace(0, 1, 7)
    b0, bp = bunching_grid(60, sp[:, None], z0[None, :], 0.2)
    for i in range(7):
        for j in range(7):
            ref = bunching_thermal(LatticeConfig(60, sp[i], z0[j], 0.2))
            assert b0[i, j] == pytest.approx(ref.b0, abs=1e-13)
            assert abs(bp[i, j] - ref.b_plus) < 1e-13


def test_load_weights(tmp_path):
    path = tmp_path / "w.csv"
    path.write_text("population\n1\n2.5\n\n3\n", encoding="utf-8")
    assert list(load_weights_csv(path)) == [1.0, 2.5, 3.0]


def test_debye_waller_value():
    assert debye_waller(0.0) == 1.0
