"""Total-sz susceptibility of the critical N = 200 chain near the band edge."""

import numpy as np

from _common import run
from openresponse.quasifree import build_xy_chain, critical_field

_, d = run("chi-freq", "xy_fig1.yaml", "--jobs", "4")
omega0 = 2 * np.max(build_xy_chain(200, 0.8, critical_field(0.8), (0.3, 0.1, 0.3, 0.2))
                    .eigenvalues().imag)
im = d["im_chi"]
s = np.sign(np.diff(im))
ext = d["omega"][1:-1][s[:-1] * s[1:] < 0]
print(f"2 max Im lambda = {omega0:.5f}")
near = ext[np.argmin(np.abs(ext - omega0))]
print(f"nearest local extremum of Im chi at {near:.5f} "
      f"(relative offset {abs(near - omega0) / omega0:.2e})")
