"""Liouvillian gap against chain length at and above the critical field."""

from _common import run

header, _ = run("gap-scaling", "xy_gap_scaling.yaml", "--jobs", "4")
for line in header:
    if "slope" in line:
        print(line[2:])
