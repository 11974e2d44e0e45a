"""The normalized conformal form along a path that crosses the irregular
fibre over the pole p1: first differences stay flat through the crossing."""

import numpy as np

from minitwistor.segre import default_surface
from minitwistor.weyl import hole_smoothness_report

S = default_surface()
rep = hole_smoothness_report(S, which=1)
taus = np.array(rep["taus"])
diffs = np.array(rep["firstDifferences"])
mid = int(np.argmin(np.abs(taus)))
for k in range(mid - 4, mid + 4):
    print(f"  tau {taus[k]:+.3f} -> {taus[k + 1]:+.3f}   |delta G| = {diffs[k]:.5f}")
print(f"jump ratio {rep['jumpRatio']:.3f} (crossing step / interior median)")
print(f"second-difference convergence order {rep['richardsonOrder']:.3f}")
