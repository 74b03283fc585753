import math

import numpy as np
import pytest
from scipy.special import jv

from latticecavity.bloch import (BlochConfig, bessel_margin, comb_populations, evolution_operator,
                                 evolve, monitor_timeseries, single_site_populations,
                                 unitarity_error)
from latticecavity.bunching import LatticeConfig
from latticecavity.odm import DriveConfig
from latticecavity.params import PhysParams, derive

OMEGA = 2 * math.pi


def config(pop, nu=8.0, j_max=80):
    return BlochConfig.from_populations(nu, OMEGA, pop, j_max=j_max)


def test_identity_at_zero():
    u = evolution_operator(config(single_site_populations(1.0)), 0.0)
    assert np.max(np.abs(u - np.eye(u.shape[0]))) == 0


def test_refocus_after_period():
    cfg = config(comb_populations(40, 4, 2e6))
    u = evolution_operator(cfg, cfg.period)
    assert np.max(np.abs(u - np.eye(u.shape[0]))) < 1e-12
    assert np.max(np.abs(evolve(cfg, cfg.period).populations - np.abs(cfg.c0) ** 2)) < 1e-9 * 2e6


def test_bessel_sum_rule():
    n = np.arange(-200, 201)
    assert abs(np.sum(jv(n, 16.0) ** 2) - 1) < 1e-14
    cfg = config(single_site_populations(1.0))
    u = evolution_operator(cfg, 0.5 * cfg.period)
    keep = np.abs(cfg.sites) <= cfg.j_max - bessel_margin(8.0)
    norms = np.sum(np.abs(u[:, keep]) ** 2, axis=0)
    assert np.max(np.abs(norms - 1)) < 1e-12


@pytest.mark.parametrize("nu", [1.0, 8.0, 16.0])
def test_unitarity_over_period(nu):
    cfg = config(single_site_populations(1.0), nu=nu, j_max=100)
    errs = [unitarity_error(cfg, t) for t in np.linspace(0, cfg.period, 100)]
    assert max(errs) < 1e-9


def test_homogeneous_lattice_is_stationary():
    cfg = config(np.ones(161), j_max=80)
    inner = np.abs(cfg.sites) <= 80 - bessel_margin(8.0)
    for t in np.linspace(0, 1, 11):
        pop = evolve(cfg, t * cfg.period).populations
        assert np.max(np.abs(pop[inner] - 1)) < 1e-12


def test_single_site_spreading():
    cfg = config(single_site_populations(1.0))
    pop = evolve(cfg, 0.5 * cfg.period).populations
    j = cfg.sites
    # envelope ends where the Bessel argument 2*nu = 16 is reached
    assert pop[np.abs(j) > 25].sum() < 1e-7
    edge = np.max(np.abs(j[pop > 1e-2]))
    assert 15 <= edge <= 18
    assert evolve(cfg, 0.5 * cfg.period).leak < 1e-12


def test_population_conservation():
    cfg = config(comb_populations(40, 4, 2e6))
    for t in np.linspace(0, 2, 41) * cfg.period:
        ev = evolve(cfg, t)
        assert abs(ev.populations.sum() - 2e6) < 1e-9 * 2e6
        assert abs(ev.leak) < 1e-9


def test_validation():
    with pytest.raises(ValueError):
        BlochConfig(1.0, OMEGA, (1.0, 1.0), 1)
    with pytest.raises(ValueError):
        BlochConfig.from_populations(1.0, OMEGA, [1.0, 2.0])
    with pytest.raises(ValueError):
        BlochConfig.from_populations(1.0, 0.0, [1.0])


def ring_monitor(pop, site_phase=math.pi / 4, nu=8.0, times=None, j_max=80):
    cfg = config(pop, nu=nu, j_max=j_max)
    p = PhysParams(kappa=None, finesse=None, fsr=1.6234e9, g=2 * math.pi * 7.4e3,
                   n_atoms=cfg.n_atoms, geometry="ring")
    d = derive(p)
    lat = LatticeConfig(cfg.sites.size, site_phase, 0.0)
    drive = DriveConfig(0.0, 0.0, d.eta)
    times = np.linspace(0, 2, 201) * cfg.period if times is None else times
    return cfg, monitor_timeseries(cfg, lat, d, drive, "ring", times)


def test_monitor_periodic():
    cfg, tr = ring_monitor(comb_populations(40, 4, 2e6))
    half = 100
    for name in ("b0", "n_eff", "T_plus", "T_minus"):
        a = getattr(tr, name)
        scale = max(np.max(np.abs(a)), 1e-300)
        assert np.max(np.abs(a[:half + 1] - a[half:])) <= 1e-6 * scale
    assert np.max(np.abs(tr.b_plus[:half + 1] - tr.b_plus[half:])) <= 1e-6


def test_monitor_revivals():
    _, tr = ring_monitor(comb_populations(40, 4, 2e6))
    # the comb dephases between refocusing instants
    assert tr.T_minus[0] > 100 * np.min(tr.T_minus)
    assert tr.T_minus[100] == pytest.approx(tr.T_minus[0], rel=1e-6)


def test_dense_homogeneous_comb_is_nearly_constant():
    # only the interior of a finite comb is stationary; the edges spread over
    # about 2 nu sites, so the traces vary at a level set by edge/total atoms
    spread = []
    for extent in (40, 160):
        _, tr = ring_monitor(np.ones(2 * extent + 1), site_phase=math.pi * 0.9,
                             times=np.linspace(0, 1, 21), j_max=extent + 30)
        assert np.max(tr.leak) < 1e-9
        spread.append(np.ptp(tr.T_plus) / np.max(tr.T_plus))
    assert spread[1] < spread[0] < 1e-3


def test_no_backscatter_without_bunching():
    # equal populations on sites 0 and 2 with pi/4 spacing: b+ = (1 + exp(i pi)) / 2 = 0
    pop = np.zeros(5)
    pop[2] = pop[4] = 1e6
    _, tr = ring_monitor(pop, times=[0.0])
    assert abs(tr.b_plus[0]) < 1e-15
    assert tr.T_minus[0] < 1e-20
