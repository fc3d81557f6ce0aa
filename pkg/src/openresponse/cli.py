"""Command-line front end: YAML config in, CSV sweep data out.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import datetime
import os
import sys
import tempfile
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import scipy

from . import __version__, lindblad, response
from .config import ConfigError, load_config
from .davies import chi_qubit_freq, chi_qubit_time
from .dephasing import chi_dephasing
from .quasifree import core as qf
from .quasifree import xychain

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
COMMANDS = ("chi-time", "chi-freq", "mhr", "gap-scaling", "spectrum", "correlations", "power")


class NumericalError(RuntimeError):
    pass


def _chunks(x, jobs):
    return [c for c in np.array_split(x, max(1, min(jobs, x.size))) if c.size]


def _parallel(fn, grid, jobs):
    """Evaluate ``fn`` on chunks of ``grid`` and concatenate in grid order."""
    parts = _chunks(np.asarray(grid), jobs)
    if jobs <= 1 or len(parts) == 1:
        return np.concatenate([np.atleast_1d(fn(p)) for p in parts])
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return np.concatenate([np.atleast_1d(r) for r in ex.map(fn, parts)])


def _require(cfg, attr, name):
    if getattr(cfg, attr) is None:
        raise ConfigError(f"{name}: block is required for this command")


def _require_response(cfg, observable=True):
    if cfg.kind == "xy_chain":
        return
    _require(cfg, "pert", "perturbation")
    if observable:
        _require(cfg, "A", "observable")


def _steady_state(cfg):
    if cfg.rho is not None:
        return cfg.rho
    ss = lindblad.steady_states(cfg.L0)
    if not ss.unique:
        raise NumericalError(f"steady state is not unique (kernel dimension {ss.kernel_dim}); "
                             "give model.rho explicitly")
    return ss.states[0]


def _epsilon(cfg, override):
    eps = override if override is not None else cfg.epsilon
    if cfg.kind == "xy_chain":
        return 0.0 if eps is None else eps
    if eps is None:
        return response.default_epsilon(cfg.L0)
    if eps == 0 and response.default_epsilon(cfg.L0) > 0:
        raise NumericalError("the generator has non-zero purely imaginary eigenvalues; "
                             "the resolvent needs epsilon > 0")
    return eps


def _ness(cfg):
    try:
        return qf.ness_covariance(cfg.qf0)
    except ValueError as exc:
        raise NumericalError(f"{exc}; with all rates zero the spectrum is purely imaginary "
                             "and epsilon > 0 with an explicit state would be needed") from None


def run_chi_time(cfg, args):
    _require(cfg, "t_grid", "time")
    _require_response(cfg)
    t = cfg.t_grid
    if cfg.kind == "xy_chain":
        vals = qf.chi_quasifree_time(cfg.qf0, cfg.qf1, _ness(cfg), cfg.A, t).values
    elif cfg.kind == "davies_qubit" and cfg.B is not None:
        vals = chi_qubit_time(cfg.qubit, cfg.A, cfg.B, t).values
    elif cfg.kind == "dephasing" and cfg.B is not None:
        vals = chi_dephasing(cfg.dephasing, cfg.rho, cfg.A, cfg.B, t).values
    else:
        vals = response.chi_time(cfg.L0, cfg.pert, _steady_state(cfg), cfg.A, t).values
    return ["t", "chi"], [t, vals], {}


def _chi_freq_values(cfg, args, A, eps):
    w = cfg.omega_grid
    if cfg.kind == "xy_chain":
        C0 = _ness(cfg)
        return _parallel(lambda g: qf.chi_quasifree_freq(cfg.qf0, cfg.qf1, C0, A, g, eps,
                                                         cfg.method).values,
                         w, args.jobs)
    if cfg.kind == "davies_qubit" and cfg.B is not None and eps == 0:
        return chi_qubit_freq(cfg.qubit, A, cfg.B, w).values
    rho = _steady_state(cfg)
    return _parallel(lambda g: response.chi_freq(cfg.L0, cfg.pert, rho, A, g, eps).values,
                     w, args.jobs)


def run_chi_freq(cfg, args):
    _require(cfg, "omega_grid", "frequency")
    _require_response(cfg)
    eps = _epsilon(cfg, args.epsilon)
    vals = _chi_freq_values(cfg, args, cfg.A, eps)
    return ["omega", "re_chi", "im_chi"], [cfg.omega_grid, vals.real, vals.imag], {"epsilon": eps}


def run_mhr(cfg, args):
    _require(cfg, "omega_grid", "frequency")
    _require_response(cfg, observable=False)
    eps = _epsilon(cfg, args.epsilon)
    w = cfg.omega_grid
    if cfg.kind == "xy_chain":
        C0 = _ness(cfg)
        vals = _parallel(lambda g: qf.single_particle_mhr(cfg.qf0, cfg.qf1, C0, g, eps),
                         w, args.jobs)
    else:
        rho = _steady_state(cfg)
        vals = _parallel(lambda g: response.mhr(cfg.L0, cfg.pert, rho, g, eps), w, args.jobs)
    return ["omega", "mhr"], [w, vals], {"epsilon": eps}


def run_power(cfg, args):
    _require(cfg, "omega_grid", "frequency")
    _require(cfg, "amplitude", "power")
    _require_response(cfg, observable=False)
    if cfg.B is None:
        raise ConfigError("perturbation: power needs a Hamiltonian perturbation B")
    eps = _epsilon(cfg, args.epsilon)
    if cfg.kind == "xy_chain":
        C0 = _ness(cfg)
        chi = _parallel(lambda g: qf.chi_quasifree_freq(cfg.qf0, cfg.qf1, C0, cfg.B, g, eps,
                                                        cfg.method).values,
                        cfg.omega_grid, args.jobs)
    else:
        rho = _steady_state(cfg)
        chi = _parallel(lambda g: response.chi_freq(cfg.L0, cfg.pert, rho, cfg.B, g,
                                                    eps).values, cfg.omega_grid, args.jobs)
    power = -0.5 * cfg.amplitude ** 2 * cfg.omega_grid * chi.imag
    return ["omega", "power"], [cfg.omega_grid, power], {"epsilon": eps,
                                                         "amplitude": cfg.amplitude}


def _gap_point(point, xy):
    N, h = point
    return qf.liouvillian_gap(xychain.build_xy_chain(N, xy["gamma"], h, xy["rates"]))


def run_gap_scaling(cfg, args):
    if cfg.kind != "xy_chain":
        raise ConfigError("model.kind: gap-scaling needs an xy_chain model")
    _require(cfg, "sweep", "sweep")
    sizes, hs = cfg.sweep["sizes"], cfg.sweep["h"]
    points = [(N, h) for h in hs for N in sizes]
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as ex:
            gaps = list(ex.map(lambda p: _gap_point(p, cfg.xy), points))
    else:
        gaps = [_gap_point(p, cfg.xy) for p in points]
    gaps = np.array(gaps)
    Ns = np.array([p[0] for p in points], dtype=float)
    Hs = np.array([p[1] for p in points])
    extra = {}
    for h in hs:
        sel = Hs == h
        if np.count_nonzero(sel) < 3:
            warnings.warn("fewer than 3 sizes: log-log slope omitted", RuntimeWarning)
            continue
        slope = np.polyfit(np.log(Ns[sel]), np.log(gaps[sel]), 1)[0]
        extra[f"slope(h={h:.17g})"] = slope
    return ["N", "h", "gap"], [Ns.astype(int), Hs, gaps], extra


def run_spectrum(cfg, args):
    if cfg.kind == "xy_chain":
        lam = cfg.qf0.eigenvalues()
        lam = lam[np.lexsort((lam.imag, -lam.real))]
    else:
        lam = lindblad.spectrum(cfg.L0)
    return ["re_lambda", "im_lambda"], [lam.real, lam.imag], {}


def run_correlations(cfg, args):
    if cfg.kind != "xy_chain":
        raise ConfigError("model.kind: correlations needs an xy_chain model")
    _require(cfg, "correlations", "correlations")
    n, r_max = cfg.correlations["site"], cfg.correlations["r_max"]
    vals = xychain.ness_zz_correlations(cfg.qf0, n, r_max, _ness(cfg))
    return ["r", "zz_connected"], [np.arange(1, r_max + 1), vals], {"site": n}


RUNNERS = {
    "chi-time": run_chi_time,
    "chi-freq": run_chi_freq,
    "mhr": run_mhr,
    "gap-scaling": run_gap_scaling,
    "spectrum": run_spectrum,
    "correlations": run_correlations,
    "power": run_power,
}


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % (x + 0.0)  # folds -0.0 into 0


def format_csv(command, cfg, columns, data, extra, timestamp=False):
    lines = [
        f"# openresponse {__version__} (numpy {np.__version__}, scipy {scipy.__version__})",
        f"# command: {command}",
        f"# model: {cfg.kind}",
        f"# config_sha256: {cfg.sha256}",
        f"# tolerances: steady={response.STEADY_TOL:g} kernel={lindblad.KERNEL_TOL:g} "
        f"cond_max={lindblad.COND_MAX:g}",
    ]
    for k, v in extra.items():
        lines.append(f"# {k}: {_fmt(v) if isinstance(v, (float, int, np.number)) else v}")
    if timestamp:
        lines.append(f"# timestamp: {datetime.datetime.now(datetime.timezone.utc).isoformat()}")
    lines.append(",".join(columns))
    n = len(data[0])
    if any(len(col) != n for col in data):
        raise NumericalError("internal error: columns of unequal length")
    for i in range(n):
        lines.append(",".join(_fmt(col[i]) for col in data))
    return "\n".join(lines) + "\n"


def _write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".openresponse-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_parser():
    p = argparse.ArgumentParser(prog="openresponse",
                                description="Linear response of Lindblad generators.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="YAML run configuration")
    p.add_argument("--out", help="output CSV (defaults to config 'output' or stdout)")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for sweeps")
    p.add_argument("--epsilon", type=float, default=None, help="resolvent regularisation")
    p.add_argument("--timestamp", action="store_true", help="add a timestamp to the header")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs: must be >= 1")
        if args.epsilon is not None and not (np.isfinite(args.epsilon) and args.epsilon >= 0):
            raise ConfigError("--epsilon: must be a finite non-negative number")
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"--config: {exc}") from None
        cfg = load_config(text)
        columns, data, extra = RUNNERS[args.command](cfg, args)
        out = format_csv(args.command, cfg, columns, data, extra, args.timestamp)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ValueError, ArithmeticError, np.linalg.LinAlgError,
            RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    path = args.out or cfg.raw.get("output")
    if path:
        _write_atomic(path, out)
    else:
        sys.stdout.write(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
