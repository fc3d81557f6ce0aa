"""Closed-form Davies qubit response, MHR of the thermal qubit and absorbed power."""

import numpy as np

from _common import run

_, t = run("chi-time", "davies_qubit.yaml")
_, f = run("chi-freq", "davies_qubit.yaml")
_, p = run("power", "davies_qubit.yaml")
_, m = run("mhr", "thermal_qubit_mhr.yaml")
print(f"chi(0) = {t['chi'][0]:.6g}, max |chi_hat| = {np.max(np.hypot(f['re_chi'], f['im_chi'])):.4g}")
print(f"power range [{p['power'].min():.4g}, {p['power'].max():.4g}] (negative: the Davies state is population inverted)")
print(f"thermal-qubit MHR at omega = {m['omega'][-1]:g}: {m['mhr'][-1]:.6g}")
