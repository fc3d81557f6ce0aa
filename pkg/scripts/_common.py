"""Shared helpers: run a CLI command on a config and read the CSV back."""

import io
import os
import sys

import numpy as np

from openresponse.cli import main

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
RESULTS = os.path.join(ROOT, "results")


def run(command, config, *extra):
    """Run ``openresponse command`` and return (header lines, column dict)."""
    os.makedirs(RESULTS, exist_ok=True)
    out = os.path.join(RESULTS, f"{os.path.splitext(config)[0]}_{command}.csv")
    code = main([command, "--config", os.path.join(ROOT, "configs", config), "--out", out,
                 *extra])
    if code:
        sys.exit(code)
    with open(out) as fh:
        lines = fh.read().splitlines()
    header = [ln for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if not ln.startswith("#")]
    data = np.genfromtxt(io.StringIO("\n".join(body)), delimiter=",", names=True)
    print(f"wrote {os.path.relpath(out, ROOT)}")
    return header, data
