"""The cavity as a path filter for Bragg reflections.

A nearly transparent cavity shows the free-space reflection band. At 80%
mirrors each cavity length passes only some reflection paths; summing
spectra over more lengths brings the free-space map back.
"""

import numpy as np

from latticecavity.presets import preset
from latticecavity.scan import filter_experiment, normalized_distance, spec_from_mapping

band = filter_experiment(spec_from_mapping(preset("fig11")), 1, 0.001, with_free=False).grids[0]
r = band.channels["R"]
print("delta_lat   R > 0.5 span (Gamma)")
for j in range(0, band.y.size, 20):
    idx = np.nonzero(r[:, j] > 0.5)[0]
    span = band.x[idx[-1]] - band.x[idx[0]] if idx.size else 0.0
    print(f"{band.y[j]:9.0f} {span:10.1f}")

spec = spec_from_mapping(preset("fig12"))
free = None
for n in (1, 2, 3, 7, 14):
    res = filter_experiment(spec, n, 0.8, with_free=free is None)
    free = free or res.free
    d = normalized_distance(res.summed.channels["T"], free.channels["T"])
    print(f"{n:2d} cavity lengths: distance of the summed map to free space {d:.3f}")
