"""Named parameter sets for the standard figures, as flat config mappings.

Every preset is a ``dict[str, str]`` in the same format a config file
produces (detunings ``delta_c``, ``delta_a``, ``delta_ca`` in units of gamma,
``delta_lat`` in units of ``2*pi*fsr_ang``, ``delta_lat_gamma`` in units of
gamma), so ``spec_from_mapping(preset("fig3a"))`` and
``latticecavity spectrum --config fig3a.cfg`` are interchangeable.
"""

from __future__ import annotations

import math

from .params import ConfigError, PhysParams, phys_from_mapping, resolve_units

GAMMA = 2 * math.pi * 7.4e3
FSR_HZ = 1.6234e9

APPARATUS = {
    "gamma": repr(GAMMA),
    "kappa": repr(2 * math.pi * 3.4e6),
    "finesse": "1500",
    "waist": "70e-6",
    "lambda_a": "689e-9",
    "lambda_lat": "689e-9",
    "n_atoms": "2e5",
    "n_sites": "300",
    "r_mir": "0.998",
}

# mirrors fix the finesse, the free spectral range is the apparatus one
_COMPARE = {k: v for k, v in APPARATUS.items() if k not in ("kappa", "finesse")}
_COMPARE["fsr"] = repr(FSR_HZ)

_FIG3 = dict(_COMPARE, n_atoms="5e5", g_over_gamma="1", model="odm", geometry="linear",
             x_axis="delta_c", x_range="-1500,1500", x_points="401",
             y_axis="delta_lat", y_range="-150,150", y_points="101", delta_ca="0")

_FIG7 = dict(_FIG3, g_over_gamma="10", r_mir="0.9", x_range="-8000,8000", x_points="16001")

_FIG11 = dict(_FIG7, model="tmm", x_axis="delta_c", x_range="-100,100", x_points="401",
              y_axis="delta_lat", y_range="-1000,1000", y_points="201")

PRESETS = {
    "apparatus": dict(APPARATUS),
    "fig3a": dict(_FIG3),
    "fig3d": dict(_FIG3, z0_phase=repr(math.pi / 2)),
    "fig4a": dict(_FIG3, geometry="ring", eta_minus="1"),
    "fig4d": dict(_FIG3, geometry="ring", eta_minus="0"),
    "fig5": dict(_COMPARE, g_over_gamma="1", model="odm", geometry="linear",
                 x_axis="delta_a", x_range="-1500,1500", x_points="601",
                 y_axis="delta_ca", y_range="-1500,1500", y_points="301",
                 delta_lat="200"),
    "fig6": dict(_COMPARE, g_over_gamma="1", n_atoms="2e6", model="odm", geometry="ring",
                 x_axis="time", x_range="0,2", x_points="401",
                 y_axis="delta_c", y_range="-1500,1500", y_points="3", delta_ca="0",
                 bloch_nu="8", bloch_extent="40", bloch_spacing="4", bloch_jmax="80",
                 bloch_initial="comb", site_phase=repr(math.pi / 4)),
    "fig7": dict(_FIG7),
    "fig7_ring": dict(_FIG7, geometry="ring", eta_minus="0", x_range="-12000,12000",
                      x_points="24001"),
    "fig8a": dict(APPARATUS, delta_a="0.2", density_cm3="1e11", delta_lat_gamma="2e8"),
    "fig8b": dict(APPARATUS, delta_a="0.2", density_cm3="1e11", delta_lat_gamma="5e9"),
    "fig9": dict(APPARATUS, n_sites="200", n_ss="30", kzbar=repr(math.pi / 8),
                 delta_lat="400", delta_c="5", delta_a="5",
                 r_mir="0.9", geometry="linear"),
    "fig10": dict(APPARATUS, n_sites="200", n_ss="30", kzbar=repr(math.pi / 8),
                  delta_lat="400", delta_c="5", delta_a="5",
                  r_mir="0.9", geometry="ring"),
    "fig11": dict(_FIG11),
    "fig12": dict(_FIG11, r_mir="0.8"),
}

for _name in ("fig8a", "fig8b", "fig9", "fig10"):
    # these set the cavity through the mirrors alone
    PRESETS[_name].pop("kappa", None)
    PRESETS[_name].pop("finesse", None)
    PRESETS[_name]["fsr"] = repr(FSR_HZ)


def preset(name: str) -> dict:
    """Copy of a named preset mapping."""
    try:
        return dict(PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; known: {', '.join(sorted(PRESETS))}") from None


def preset_params(name: str) -> PhysParams:
    return phys_from_mapping(resolve_units(preset(name)))


def preset_text(name: str) -> str:
    """Config-file rendering of a preset."""
    return "".join(f"{k} = {v}\n" for k, v in preset(name).items())
