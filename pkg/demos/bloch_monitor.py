"""Watching Wannier-Bloch oscillations through the back-scattered light.

A comb of every fourth site spreads and refocuses once per Bloch period.
Its bunching, and with it the light scattered into the reverse ring mode,
revives at each refocus.
"""

import math

import numpy as np

from latticecavity.bloch import monitor_timeseries
from latticecavity.bunching import LatticeConfig
from latticecavity.odm import DriveConfig
from latticecavity.params import derive
from latticecavity.presets import preset
from latticecavity.scan import _bloch_config, spec_from_mapping

spec = spec_from_mapping(preset("fig6"))
cfg = _bloch_config(spec)
d = derive(spec.params)
lattice = LatticeConfig(cfg.sites.size, math.pi / 4, 0.0)
times = np.linspace(0, 2, 17) * cfg.period
trace = monitor_timeseries(cfg, lattice, d, DriveConfig(0.0, 0.0, d.eta), "ring", times)

print("t/T_blo   |b+|      T_plus    T_minus")
for row in zip(trace.t_over_tblo, np.abs(trace.b_plus), trace.T_plus, trace.T_minus):
    print("{:6.3f}  {:.2e}  {:.2e}  {:.2e}".format(*row))
