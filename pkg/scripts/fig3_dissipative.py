"""Response of the N = 100 chain to a purely dissipative perturbation."""

import numpy as np

from _common import run

_, chi = run("chi-freq", "xy_fig3.yaml", "--jobs", "4")
i = np.argmax(np.abs(chi["im_chi"]))
print(f"largest |Im chi| = {abs(chi['im_chi'][i]):.4g} at omega = {chi['omega'][i]:.3f}")
