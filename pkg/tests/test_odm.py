import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from latticecavity.odm import (DriveConfig, NonConvergenceError, nonlinear_residual,
                               ring_modes, solve_nonlinear, spectra_odm, spectrum,
                               steady_linear, steady_ring)
from latticecavity.params import Geometry, PhysParams, derive, u_gamma

GAMMA = 2 * math.pi * 7.4e3


def params(**kw):
    p = PhysParams(kappa=None, finesse=None, fsr=1.6234e9, g=GAMMA, **kw)
    return derive(p)


def test_empty_cavity_lorentzian():
    d = params()
    dc = np.linspace(-5, 5, 41) * d.kappa
    st_ = steady_linear(d, DriveConfig(dc, dc, 1.0), 1.0, 0.0)
    assert np.allclose(st_.alpha, 1j / (dc + 1j * d.kappa), rtol=1e-14, atol=0)
    sp = spectrum(d, DriveConfig(np.array([-d.kappa, 0.0, d.kappa]), 0.0), n_atoms=0.0)
    assert np.allclose(sp.T, [0.5, 1.0, 0.5], atol=1e-14)
    assert sp.R[1] == pytest.approx(0, abs=1e-14) and sp.A[1] == pytest.approx(0, abs=1e-14)


def test_direct_formula():
    d = params()
    n = 5e5
    for x in (-3.0, 0.0, 0.7, 20.0):
        dc = x * GAMMA
        alpha = steady_linear(d, DriveConfig(dc, dc, 2.0), 1.0, n).alpha
        u = d.g**2 / (dc + 0.5j * GAMMA)
        assert abs(alpha - 2j / (dc + 1j * d.kappa - n * u)) < 1e-14 * abs(alpha)


@pytest.mark.parametrize("n", [1e3, 1e4, 1e5])
def test_normal_mode_peaks(n):
    d = dataclasses.replace(params(), gamma=0.0)
    split = d.g * math.sqrt(n)
    step = split / 400
    dc = (np.arange(-1200, 1200) + 0.5) * step
    a = np.abs(steady_linear(d, DriveConfig(dc, dc), 1.0, n).alpha) ** 2
    left = dc[np.argmax(np.where(dc < 0, a, -1))]
    right = dc[np.argmax(np.where(dc > 0, a, -1))]
    assert abs(right - split) <= step and abs(left + split) <= step


@settings(max_examples=100)
@given(re=st.floats(-10, 10), im=st.floats(-10, 10), x=st.floats(-50, 50))
def test_linear_in_pump(re, im, x):
    c = complex(re, im)
    d = params()
    dc = x * GAMMA
    a1 = steady_linear(d, DriveConfig(dc, dc, 1.0), 0.8, 1e4).alpha
    ac = steady_linear(d, DriveConfig(dc, dc, c), 0.8, 1e4).alpha
    assert abs(ac - c * a1) <= 1e-12 * (abs(c * a1) + 1e-300)


def test_ring_without_bunching_decouples():
    d = params()
    dc = np.linspace(-20, 20, 9) * GAMMA
    s = steady_ring(d, DriveConfig(dc, dc - 3 * GAMMA, 1.0, 0.0), 0.0, 1e5)
    assert np.all(s.alpha_minus == 0)
    u = u_gamma(d, dc - 3 * GAMMA)
    assert np.allclose(s.alpha_plus, 1j / (dc + 1j * d.kappa - 1e5 * u), rtol=1e-13)


def test_ring_symmetric_pump():
    d = params()
    dc = np.linspace(-20, 20, 9) * GAMMA
    s = steady_ring(d, DriveConfig(dc, dc, 1.0, 1.0), 1.0, 1e5)
    assert np.allclose(s.alpha_plus, s.alpha_minus, rtol=1e-13, atol=0)


def test_ring_modes_factorize():
    d = params()
    n = 1e5
    dc = np.linspace(-900, 900, 37) * GAMMA
    drive = DriveConfig(dc, dc, 1.0, 0.0)
    sym, anti = ring_modes(steady_ring(d, drive, 1.0, n))
    u = u_gamma(d, dc)
    dk = dc + 1j * d.kappa
    assert np.allclose(sym, 1j / (dk - 2 * n * u), rtol=1e-11)
    assert np.allclose(anti, 1j / dk, rtol=1e-11)


def test_ring_spectra_balance_without_atoms():
    d = params()
    dc = np.linspace(-3, 3, 13) * d.kappa
    for em in (0.0, 1.0, 0.3j):
        sp = spectrum(d, DriveConfig(dc, dc, 1.0, em), b_plus=0.5, n_atoms=0.0,
                      geometry="ring")
        assert np.allclose(sp.A, 0, atol=1e-13)


def test_nonlinear_linear_limit():
    d = params()
    kz = np.linspace(0, 2 * math.pi, 40, endpoint=False)
    dc = np.linspace(-30, 30, 13) * GAMMA
    eta = 1e-6 * d.kappa
    drive = DriveConfig(dc, dc - GAMMA, eta)
    nl = solve_nonlinear(d, drive, kz, np.full(kz.size, 2500.0))
    lin = steady_linear(d, drive, np.mean(np.cos(kz) ** 2), 1e5)
    assert np.allclose(nl.alpha, lin.alpha, rtol=1e-8, atol=0)
    drive = DriveConfig(dc, dc - GAMMA, eta, 0.5 * eta)
    nl = solve_nonlinear(d, drive, kz, np.full(kz.size, 2500.0), geometry="ring")
    lin = steady_ring(d, drive, np.mean(np.exp(2j * kz)), 1e5)
    assert np.allclose(nl.alpha_plus, lin.alpha_plus, rtol=1e-8, atol=0)
    assert np.allclose(nl.alpha_minus, lin.alpha_minus, rtol=1e-8, atol=1e-8 * np.abs(lin.alpha_plus))


def test_nonlinear_empty_cavity():
    d = params()
    drive = DriveConfig(0.3 * d.kappa, 0.0, 50 * d.kappa)
    nl = solve_nonlinear(d, drive, [0.0], [0.0])
    assert abs(nl.alpha - 50j / (0.3 + 1j)) < 1e-9 * abs(nl.alpha)


@pytest.mark.parametrize("geometry", ["linear", "ring"])
def test_nonlinear_residual_single_atom(geometry):
    d = params()
    drive = DriveConfig(0.5 * GAMMA, 0.0, 3 * d.kappa)
    nl = solve_nonlinear(d, drive, [0.0], geometry=geometry)
    scale = abs(drive.eta_plus)
    assert float(nonlinear_residual(d, drive, nl, [0.0], geometry=geometry)) < 1e-10 * scale
    # saturation matters at this drive
    lin = steady_linear(d, drive, 1.0, 1.0).alpha
    if geometry == "linear":
        assert abs(nl.alpha - lin) > 1e-3 * abs(lin)


def test_nonconvergence_reports_residual():
    d = params()
    drive = DriveConfig(0.0, 0.0, 100 * d.kappa)
    with pytest.raises(NonConvergenceError) as info:
        solve_nonlinear(d, drive, [0.0], [1e6], max_iter=1)
    assert info.value.residual > 0


def test_spectra_require_pump():
    d = params()
    s = steady_linear(d, DriveConfig(0.0, 0.0, 1.0), 1.0, 1.0)
    with pytest.raises(ValueError):
        spectra_odm(s, DriveConfig(0.0, 0.0, 0.0), d)


def test_empty_resonance_spectra():
    d = params()
    sp = spectrum(d, DriveConfig(0.0, 0.0, 1.0), n_atoms=0.0)
    assert sp == pytest.approx((1.0, 0.0, 0.0), abs=1e-15)


@settings(max_examples=100)
@given(x=st.floats(-100, 100), xa=st.floats(-100, 100), b0=st.floats(0, 1),
       n=st.floats(0, 1e6))
def test_linear_energy_balance(x, xa, b0, n):
    d = params()
    sp = spectrum(d, DriveConfig(x * GAMMA, xa * GAMMA), b0=b0, n_atoms=n)
    assert sp.T >= 0 and sp.R >= 0
    assert sp.A >= -1e-12
    assert sp.T + sp.R + sp.A == pytest.approx(1, abs=1e-12)


def test_geometry_enum():
    assert Geometry.parse("Ring") is Geometry.RING
