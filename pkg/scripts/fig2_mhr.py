"""Susceptibility and single-particle MHR of a short chain just above criticality."""

import numpy as np

from _common import run

_, chi = run("chi-freq", "xy_fig2.yaml")
_, m = run("mhr", "xy_fig2.yaml")
print(f"max |chi| = {np.max(np.hypot(chi['re_chi'], chi['im_chi'])):.4g}")
print(f"MHR range [{m['mhr'].min():.4g}, {m['mhr'].max():.4g}]")
