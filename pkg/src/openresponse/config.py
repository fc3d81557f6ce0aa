"""YAML run configurations for the command-line interface.

Everything is validated and turned into numerical objects by
:func:`load_config` before any computation starts. Unknown keys are errors.
"""

import hashlib
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import opcore
from .davies import DaviesQubit, davies_generator
from .dephasing import from_lindblad
from .lindblad import LindbladGenerator, build_superoperator
from .quasifree import xychain
from .quasifree.core import QuasiFreeGenerator, dissipative_part, hamiltonian_perturbation
from .response import Perturbation

MODEL_KINDS = ("lindblad", "davies_qubit", "dephasing", "xy_chain")
TOP_KEYS = {"model", "perturbation", "observable", "time", "frequency", "epsilon",
            "sweep", "correlations", "power", "output", "method"}


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


def _check_keys(block, allowed, where, required=()):
    if not isinstance(block, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(block).__name__}")
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {unknown}; allowed {sorted(allowed)}")
    missing = [k for k in required if k not in block]
    if missing:
        raise ConfigError(f"{where}: missing required key(s) {missing}")


def _number(x, where, positive=False, nonneg=False):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {x!r}")
    x = float(x)
    if not np.isfinite(x):
        raise ConfigError(f"{where}: must be finite")
    if positive and x <= 0:
        raise ConfigError(f"{where}: must be positive")
    if nonneg and x < 0:
        raise ConfigError(f"{where}: must be non-negative")
    return x


def _int(x, where, minimum=None):
    if isinstance(x, bool) or not isinstance(x, int):
        raise ConfigError(f"{where}: expected an integer, got {x!r}")
    if minimum is not None and x < minimum:
        raise ConfigError(f"{where}: must be >= {minimum}")
    return x


def _entry(x, where):
    if isinstance(x, str):
        try:
            return complex(x.replace(" ", ""))
        except ValueError:
            raise ConfigError(f"{where}: cannot parse {x!r} as a complex number") from None
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {x!r}")
    return complex(x)


def parse_operator(spec, where, dim=None):
    """A Pauli name (``sx``, ``sy``, ``sz``, ``sp``, ``sm``, ``id``) or a nested
    list whose entries are numbers or strings like ``"1-2j"``."""
    if isinstance(spec, str):
        if spec not in opcore.PAULI:
            raise ConfigError(f"{where}: unknown operator name {spec!r}; "
                              f"use one of {sorted(opcore.PAULI)} or a matrix")
        M = opcore.PAULI[spec].copy()
    elif isinstance(spec, list) and spec and all(isinstance(r, list) for r in spec):
        n = len(spec)
        if any(len(r) != n for r in spec):
            raise ConfigError(f"{where}: matrix must be square")
        M = np.array([[_entry(x, f"{where}[{i}][{j}]") for j, x in enumerate(r)]
                      for i, r in enumerate(spec)])
    else:
        raise ConfigError(f"{where}: expected an operator name or a square matrix")
    if dim is not None and M.shape[0] != dim:
        raise ConfigError(f"{where}: dimension {M.shape[0]} does not match model dimension {dim}")
    return M


def parse_grid(block, where):
    """``{start, stop, num}`` or ``{values: [...]}``."""
    if not isinstance(block, dict):
        raise ConfigError(f"{where}: expected a mapping")
    if "values" in block:
        _check_keys(block, {"values"}, where)
        vals = block["values"]
        if not isinstance(vals, list):
            raise ConfigError(f"{where}.values: expected a list")
        g = np.array([_number(v, f"{where}.values[{i}]") for i, v in enumerate(vals)])
    else:
        _check_keys(block, {"start", "stop", "num"}, where, ("start", "stop", "num"))
        num = _int(block["num"], f"{where}.num", 0)
        g = np.linspace(_number(block["start"], f"{where}.start"),
                        _number(block["stop"], f"{where}.stop"), num)
    if g.size == 0:
        raise ConfigError(f"{where}: grid is empty")
    if g.size > 1 and np.any(np.diff(g) <= 0):
        raise ConfigError(f"{where}: grid must be strictly increasing")
    return g


@dataclass
class RunConfig:
    """A fully validated configuration."""

    kind: str
    raw: dict
    sha256: str
    L0: np.ndarray = None
    rho: np.ndarray = None
    pert: object = None
    A: np.ndarray = None
    B: np.ndarray = None
    qubit: DaviesQubit = None
    dephasing: object = None
    qf0: QuasiFreeGenerator = None
    qf1: QuasiFreeGenerator = None
    xy: dict = field(default_factory=dict)
    t_grid: np.ndarray = None
    omega_grid: np.ndarray = None
    epsilon: float = None
    sweep: dict = None
    correlations: dict = None
    amplitude: float = None
    method: str = "linear"


def _lindblad_data(block, where):
    _check_keys(block, {"kind", "H", "jumps", "rho"}, where, ("kind", "H"))
    H = parse_operator(block["H"], f"{where}.H")
    d = H.shape[0]
    jumps = block.get("jumps", []) or []
    if not isinstance(jumps, list):
        raise ConfigError(f"{where}.jumps: expected a list of operators")
    Ls = [parse_operator(j, f"{where}.jumps[{i}]", d) for i, j in enumerate(jumps)]
    try:
        gen = LindbladGenerator(H, tuple(Ls))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    rho = None
    if "rho" in block:
        rho = parse_operator(block["rho"], f"{where}.rho", d)
        try:
            opcore.check_density_matrix(rho)
        except ValueError as exc:
            raise ConfigError(f"{where}.rho: {exc}") from None
    return gen, rho


def _xy_operator(spec, N, where):
    if spec == "total_sz":
        return xychain.total_sz_matrix(N)
    if isinstance(spec, dict):
        _check_keys(spec, {"sz"}, where, ("sz",))
        site = _int(spec["sz"], f"{where}.sz", 0)
        if site >= N:
            raise ConfigError(f"{where}.sz: site {site} outside chain of {N} sites")
        return xychain.sz_matrix(N, site)
    raise ConfigError(f"{where}: expected 'total_sz' or {{sz: site}}")


def _build_model(cfg, raw):
    model = raw.get("model")
    if model is None:
        raise ConfigError("model: block is required")
    if not isinstance(model, dict) or model.get("kind") not in MODEL_KINDS:
        raise ConfigError(f"model.kind: must be one of {list(MODEL_KINDS)}")
    kind = cfg.kind = model["kind"]
    pert = raw.get("perturbation", {"kind": "hamiltonian"})
    obs = raw.get("observable", {})
    _check_keys(pert, {"kind", "B", "H", "jumps"}, "perturbation", ("kind",))
    _check_keys(obs, {"A"}, "observable")

    if kind == "xy_chain":
        _check_keys(model, {"kind", "N", "gamma", "h", "h_offset", "rates"}, "model",
                    ("kind", "N", "gamma", "rates"))
        N = _int(model["N"], "model.N", 2)
        gamma = _number(model["gamma"], "model.gamma")
        if ("h" in model) == ("h_offset" in model):
            raise ConfigError("model: give exactly one of h or h_offset (relative to 1 - gamma^2)")
        h = (_number(model["h"], "model.h") if "h" in model
             else xychain.critical_field(gamma) + _number(model["h_offset"], "model.h_offset"))
        rates = model["rates"]
        if not isinstance(rates, list) or len(rates) != 4:
            raise ConfigError("model.rates: expected [G1L, G2L, G1R, G2R]")
        rates = [_number(r, f"model.rates[{i}]", nonneg=True) for i, r in enumerate(rates)]
        cfg.xy = {"N": N, "gamma": gamma, "h": h, "rates": rates}
        cfg.qf0 = xychain.build_xy_chain(N, gamma, h, rates)
        pk = pert["kind"]
        if pk == "hamiltonian":
            _check_keys(pert, {"kind", "B"}, "perturbation")
            cfg.B = _xy_operator(pert.get("B", "total_sz"), N, "perturbation.B")
            cfg.qf1 = hamiltonian_perturbation(cfg.B)
        elif pk == "dissipative":
            _check_keys(pert, {"kind"}, "perturbation")
            cfg.qf1 = dissipative_part(cfg.qf0)
        else:
            raise ConfigError("perturbation.kind: xy_chain supports 'hamiltonian' or 'dissipative'")
        cfg.A = _xy_operator(obs.get("A", "total_sz"), N, "observable.A")
        return

    if kind == "davies_qubit":
        _check_keys(model, {"kind", "Delta", "T", "b", "Gamma"}, "model",
                    ("kind", "Delta", "T", "b", "Gamma"))
        try:
            q = DaviesQubit(*(_number(model[k], f"model.{k}") for k in ("Delta", "T", "b", "Gamma")))
        except ValueError as exc:
            raise ConfigError(f"model: {exc}") from None
        cfg.qubit = q
        gen, cfg.rho = davies_generator(q), q.fixed_point
    else:
        gen, cfg.rho = _lindblad_data(model, "model")
        if kind == "dephasing":
            try:
                cfg.dephasing = from_lindblad(gen)
            except ValueError as exc:
                raise ConfigError(f"model: {exc}") from None
            if cfg.rho is None:
                cfg.rho = np.eye(gen.dim, dtype=complex) / gen.dim
    cfg.L0 = build_superoperator(gen)
    d = gen.dim
    if "observable" in raw:
        if "A" not in obs:
            raise ConfigError("observable.A: required for this model kind")
        cfg.A = parse_operator(obs["A"], "observable.A", d)
        if not opcore.is_hermitian(cfg.A):
            raise ConfigError("observable.A: must be hermitian")
    if "perturbation" not in raw:
        return
    pk = pert["kind"]
    if pk == "hamiltonian":
        _check_keys(pert, {"kind", "B"}, "perturbation", ("kind", "B"))
        cfg.B = parse_operator(pert["B"], "perturbation.B", d)
        if not opcore.is_hermitian(cfg.B):
            raise ConfigError("perturbation.B: must be hermitian")
        cfg.pert = Perturbation.hamiltonian(cfg.B)
    elif pk == "generator":
        _check_keys(pert, {"kind", "H", "jumps"}, "perturbation", ("kind", "H"))
        g1, _ = _lindblad_data(pert, "perturbation")
        if g1.dim != d:
            raise ConfigError("perturbation: dimension does not match the model")
        cfg.pert = Perturbation.generator(g1)
    else:
        raise ConfigError("perturbation.kind: must be 'hamiltonian' or 'generator'")


def load_config(text):
    """Parse YAML text into a :class:`RunConfig`, raising :class:`ConfigError`."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse YAML: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a mapping")
    _check_keys(raw, TOP_KEYS, "config")
    cfg = RunConfig(kind="", raw=raw, sha256=hashlib.sha256(text.encode()).hexdigest())
    _build_model(cfg, raw)
    if "time" in raw:
        cfg.t_grid = parse_grid(raw["time"], "time")
        if cfg.t_grid[0] < 0:
            raise ConfigError("time: grid must start at t >= 0")
    if "frequency" in raw:
        cfg.omega_grid = parse_grid(raw["frequency"], "frequency")
    if raw.get("epsilon") is not None:
        cfg.epsilon = _number(raw["epsilon"], "epsilon", nonneg=True)
    if "sweep" in raw:
        sw = raw["sweep"]
        _check_keys(sw, {"sizes", "h", "h_offsets"}, "sweep", ("sizes",))
        if not isinstance(sw["sizes"], list) or not sw["sizes"]:
            raise ConfigError("sweep.sizes: expected a non-empty list")
        sizes = [_int(n, f"sweep.sizes[{i}]", 2) for i, n in enumerate(sw["sizes"])]
        if "h" in sw and "h_offsets" in sw:
            raise ConfigError("sweep: give h or h_offsets, not both")
        key = "h_offsets" if "h_offsets" in sw else "h"
        hs = sw.get(key, [cfg.xy.get("h")] if key == "h" else None)
        if not isinstance(hs, list) or not hs:
            raise ConfigError(f"sweep.{key}: expected a non-empty list")
        hs = [_number(h, f"sweep.{key}[{i}]") for i, h in enumerate(hs)]
        if key == "h_offsets":
            hs = [xychain.critical_field(cfg.xy["gamma"]) + h for h in hs]
        cfg.sweep = {"sizes": sizes, "h": hs}
    if "correlations" in raw:
        c = raw["correlations"]
        _check_keys(c, {"site", "r_max"}, "correlations", ("site", "r_max"))
        cfg.correlations = {"site": _int(c["site"], "correlations.site", 0),
                            "r_max": _int(c["r_max"], "correlations.r_max", 1)}
        if cfg.kind == "xy_chain" and cfg.correlations["site"] + cfg.correlations["r_max"] >= cfg.xy["N"]:
            raise ConfigError("correlations: site + r_max runs beyond the chain")
    if "power" in raw:
        p = raw["power"]
        _check_keys(p, {"amplitude"}, "power", ("amplitude",))
        cfg.amplitude = _number(p["amplitude"], "power.amplitude", positive=True)
    if "method" in raw:
        if raw["method"] not in ("linear", "spectral"):
            raise ConfigError("method: must be 'linear' or 'spectral'")
        if cfg.kind != "xy_chain":
            raise ConfigError("method: only used by xy_chain models")
        cfg.method = raw["method"]
    if "output" in raw and not isinstance(raw["output"], str):
        raise ConfigError("output: expected a file path")
    return cfg
