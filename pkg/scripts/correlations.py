"""Connected zz correlators of the NESS at and above the critical field."""

import numpy as np

from _common import run
from openresponse.quasifree import (build_xy_chain, correlation_length, critical_field,
                                    ness_zz_correlations)

_, d = run("correlations", "xy_correlations.yaml")
r, c = d["r"], d["zz_connected"]
w = r >= 5
print(f"h = h_c: power-law exponent {np.polyfit(np.log(r[w]), np.log(np.abs(c[w])), 1)[0]:.3f}")

h = critical_field(0.8) + 0.2
off = ness_zz_correlations(build_xy_chain(200, 0.8, h, (0.3, 0.1, 0.3, 0.2)), 60, 40)
sel = w & (np.abs(off) > 1e-13 * np.max(np.abs(off)))
rate = -np.polyfit(r[sel], np.log(np.abs(off[sel])), 1)[0]
print(f"h = h_c + 0.2: decay rate {rate:.3f} over r = 5..{int(r[sel][-1])}, "
      f"1/xi = {1 / correlation_length(0.8, h):.3f}")
