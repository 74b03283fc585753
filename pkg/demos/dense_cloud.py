"""Where the two models part ways: a dense cloud in a low-finesse cavity.

With g = 10 Gamma and 90% mirrors the transfer-matrix spectrum grows extra
resonances close to the bare cavity line that the single-mode model lacks.
"""

import numpy as np

from latticecavity.presets import preset
from latticecavity.scan import compare_models, spec_from_mapping

spec = spec_from_mapping(dict(preset("fig7"), y_range="-120,-120", y_points="2"))
report, odm, tmm = compare_models(spec)
x = odm.x
t_odm = odm.channels["T"][:, 0]
t_tmm = tmm.channels["T"][:, 0]

ridge = x[np.argmax(np.where(x > 0, t_odm, -1))]
print(f"single-mode normal modes at +-{ridge:.0f} Gamma")
peaks = np.nonzero((t_tmm[1:-1] > t_tmm[:-2]) & (t_tmm[1:-1] >= t_tmm[2:]) & (t_tmm[1:-1] > 1e-2))[0] + 1
print("transfer-matrix maxima (Gamma, T):")
for i in peaks:
    print(f"  {x[i]:8.0f}  {t_tmm[i]:.3f}")
print(f"max |dT| = {report['T'].max_abs:.3f}")
