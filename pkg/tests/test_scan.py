import math

import numpy as np
import pytest

from latticecavity.params import ConfigError, PhysParams, derive
from latticecavity.presets import PRESETS, preset, preset_params, preset_text
from latticecavity.scan import (compare_models, filter_experiment, free_space_from_mapping,
                                free_space_intensity, normalized_distance, read_grid_csv,
                                read_header, resonance_shift_report, run_scan, spec_from_mapping,
                                write_grid_csv)
from latticecavity.tmm import airy_transmission, lattice_site_phase


def small(name, **over):
    v = preset(name)
    v.update({k: str(x) for k, x in over.items()})
    return v


def test_presets_parse():
    for name in PRESETS:
        assert preset_params(name).gamma > 0
        assert "=" in preset_text(name)
    with pytest.raises(ConfigError):
        preset("nope")


def test_two_by_two_empty_cavity():
    spec = spec_from_mapping(small("fig3a", n_atoms=0, x_range="-1,1", x_points=2,
                                   y_range="0,1", y_points=2))
    d = derive(spec.params)
    g = run_scan(spec)
    lorentz = d.kappa**2 / ((np.array([-1.0, 1.0]) * d.gamma) ** 2 + d.kappa**2)
    assert np.allclose(g.channels["T"], lorentz[:, None], rtol=1e-14, atol=0)
    tmm = run_scan(spec.updated(model="tmm"))
    phase = np.array([-1.0, 1.0]) * d.gamma / d.fsr_ang
    airy = airy_transmission(spec.params.r_mir, spec.params.r_mir, phase)
    # the lattice phase bookkeeping adds rounding of order 1e-13 rad per pass
    assert np.allclose(tmm.channels["T"], airy[:, None], rtol=0, atol=1e-10)


@pytest.mark.parametrize("model", ["odm", "tmm"])
def test_csv_bytes_independent_of_threads(tmp_path, model):
    spec = spec_from_mapping(small("fig3a", x_points=41, y_points=5, model=model))
    paths = []
    for threads in (1, 3):
        path = tmp_path / f"g{threads}.csv"
        write_grid_csv(path, run_scan(spec, threads))
        paths.append(path)
    again = tmp_path / "again.csv"
    write_grid_csv(again, run_scan(spec, 1))
    assert paths[0].read_bytes() == paths[1].read_bytes() == again.read_bytes()


@pytest.mark.parametrize("name", ["fig3a", "fig4a", "fig6"])
def test_header_round_trip(tmp_path, name):
    over = dict(x_points=21, y_points=3)
    spec = spec_from_mapping(small(name, **over))
    path = tmp_path / "grid.csv"
    grid = run_scan(spec)
    write_grid_csv(path, grid)
    back = read_grid_csv(path)
    again = run_scan(spec_from_mapping(read_header(path)))
    for c in grid.channels:
        assert np.array_equal(again.channels[c], grid.channels[c])
        assert np.array_equal(back.channels[c], grid.channels[c])


def test_time_axis_needs_bloch():
    v = small("fig6")
    del v["bloch_nu"]
    with pytest.raises(ConfigError):
        spec_from_mapping(v)


def test_cav_offset_linear_only():
    with pytest.raises(ConfigError):
        spec_from_mapping(small("fig4a", y_axis="cav_offset", y_range="0,1"))


def test_missing_scan_key():
    v = small("fig3a")
    del v["x_range"]
    with pytest.raises(ConfigError):
        spec_from_mapping(v)


@pytest.mark.parametrize("geometry", ["linear", "ring"])
def test_compare_without_atoms(geometry):
    # near resonance both models give the same empty cavity
    spec = spec_from_mapping(small("fig3a", n_atoms=0, x_range="-10,10", x_points=81,
                                   y_points=5, geometry=geometry))
    report, _, _ = compare_models(spec)
    assert max(r.max_abs for r in report.values()) < 1e-10


def test_compare_without_atoms_full_window():
    # far out the single-mode Lorentzian and the Airy function part ways at
    # order (detuning/fsr)^2; the difference is exactly that closed form
    spec = spec_from_mapping(small("fig3a", n_atoms=0, x_points=401, y_points=5))
    _, g_odm, g_tmm = compare_models(spec)
    d = derive(spec.params)
    dc = g_odm.x * d.gamma
    lorentz = d.kappa**2 / (dc**2 + d.kappa**2)
    airy = airy_transmission(spec.params.r_mir, spec.params.r_mir, dc / d.fsr_ang)
    diff = g_odm.channels["T"] - g_tmm.channels["T"]
    assert np.max(np.abs(diff - (lorentz - airy)[:, None])) < 1e-10
    assert np.max(np.abs(diff)) < 1e-6


def ridges(t_row, x):
    """Positions of the largest maximum on each side of zero."""
    left = x[np.argmax(np.where(x < 0, t_row, -1))]
    right = x[np.argmax(np.where(x > 0, t_row, -1))]
    return left, right


def test_fig3_ridge_separation_shrinks():
    g = run_scan(spec_from_mapping(preset("fig3a")))
    t = g.channels["T"]
    seps = [np.subtract(*ridges(t[:, j], g.x)[::-1]) for j in range(g.y.size)]
    mid = g.y.size // 2
    assert seps[mid] == max(seps)
    assert seps[0] < seps[mid] and seps[-1] < seps[mid]
    # half-way outwards the separation is already reduced
    assert seps[mid + 25] < seps[mid] and seps[mid - 25] < seps[mid]


def test_fig5_avoided_crossing():
    g = run_scan(spec_from_mapping(preset("fig5")))
    t = g.channels["T"]
    row = t[:, int(np.argmin(np.abs(g.y)))]
    left, right = ridges(row, g.x)
    step = g.x[1] - g.x[0]
    assert abs(left + right) <= step
    assert right > 2 * step


def test_filter_single_offset_without_mirrors():
    spec = spec_from_mapping(small("fig11", x_points=21, y_points=5))
    res = filter_experiment(spec, 1, 0.0)
    assert np.array_equal(res.summed.channels["T"], res.grids[0].channels["T"])
    assert np.allclose(res.grids[0].channels["T"], res.free.channels["T"], rtol=0, atol=1e-12)


def test_filter_offsets_and_checks():
    spec = spec_from_mapping(small("fig11", x_points=9, y_points=3))
    res = filter_experiment(spec, 3, 0.8, with_free=False)
    assert len(res.grids) == 3 and res.free is None
    assert res.summed.header["n_offsets"] == 3
    with pytest.raises(ValueError):
        filter_experiment(spec, 0, 0.8)
    with pytest.raises(ConfigError):
        filter_experiment(spec.updated(geometry="ring"), 2, 0.8)


def test_normalized_distance():
    a = np.arange(6.0).reshape(2, 3)
    assert normalized_distance(a, 3 * a) == 0
    assert normalized_distance(a, -a) > 0


def test_free_space_without_atoms():
    t = free_space_from_mapping(small("fig8a", density_cm3=0))
    assert np.max(np.abs(t.intensity - 1)) < 1e-12
    assert np.max(np.abs(t.transmission - 1)) < 1e-12


def test_disordered_stack_follows_beer():
    t = free_space_from_mapping(preset("fig8a"), disordered=True)
    rel = (t.transmission - t.beer) / t.beer
    assert np.sqrt(np.mean(rel**2)) < 0.05
    again = free_space_from_mapping(preset("fig8a"), disordered=True)
    assert np.array_equal(again.intensity, t.intensity)
    other = free_space_from_mapping(dict(preset("fig8a"), seed="7"), disordered=True)
    assert not np.array_equal(other.intensity, t.intensity)


@pytest.mark.parametrize("name", ["fig8a", "fig8b"])
def test_free_space_oscillation_period(name):
    v = preset(name)
    t = free_space_from_mapping(v)
    y = np.log(t.intensity)
    j = t.layer
    res = y - np.polyval(np.polyfit(j, y, 2), j)
    spec = np.abs(np.fft.rfft(res))
    k = int(np.argmax(spec[1:])) + 1
    gamma = preset_params(name).gamma
    delta = float(lattice_site_phase(float(v["delta_lat_gamma"]) * gamma, 689e-9)) - math.pi
    # two counter-propagating waves dephase by pi after pi/delta layers
    assert abs(k - j.size * abs(delta) / math.pi) <= 1
    assert spec[k] > 10 * np.median(spec[1:])


def test_free_space_references():
    b = 0.01 + 0.03j
    t = free_space_intensity(b, 50, math.pi)
    t1 = abs(1 / (1 - 1j * b)) ** 2
    assert t.beer[0] == pytest.approx(t1)
    # 1/(1 + c j) with c fixed by the initial slope of t1**j
    assert np.allclose(t.ohm, 1 / (1 - math.log(t1) * t.layer), rtol=1e-14)
    with pytest.raises(ValueError):
        free_space_intensity(b, 0, math.pi)


def test_resonance_shift_oracle():
    p = PhysParams()
    rep = resonance_shift_report(p)
    k = 2 * math.pi / p.lambda_a
    expected = p.fsr * (p.n_atoms / p.n_sites) * 6 / (k**2 * p.waist**2) * 2 * math.pi
    assert rep.shift == pytest.approx(expected, rel=1e-12)
    assert rep.over_kappa == pytest.approx(expected / p.kappa, rel=1e-12)
    assert resonance_shift_report(p.updated(n_atoms=0)).shift == 0
