"""Run configuration: schema, validation with field paths, and hashing.

Configs are JSON with a declared schema_version.  Validation returns the
full list of problems (one per field path) instead of stopping at the
first; parsing raises ConfigError when that list is non-empty.  Unknown
keys are rejected at every level so typos cannot silently change a run.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, fields

from .basis import DEFAULT_BASIS_CAP, LatticeParams
from .errors import ConfigError

SCHEMA_VERSION = 1

EXPERIMENTS = ("autocorr", "cbs", "rwm", "otoc", "spectra", "lyapunov")

__all__ = [
    "SCHEMA_VERSION",
    "EXPERIMENTS",
    "RunConfig",
    "AutocorrOptions",
    "CbsOptions",
    "RwmOptions",
    "OtocOptions",
    "SpectraOptions",
    "LyapunovOptions",
    "validate_config",
    "parse_config",
    "load_config",
    "config_hash",
]


# ---------------------------------------------------------------------------
# option blocks (one dataclass per experiment)


@dataclass(frozen=True)
class AutocorrOptions:
    center: tuple = ()          # coherent-state center, one (possibly complex) entry per site
    t_max: float = 15.0
    n_times: int = 151
    n_samples: int = 20_000     # phase-space ensemble size
    substeps: int = 4
    tol: float = 1e-9
    weight_floor: float = 0.0
    k_sigma: float = 5.0


@dataclass(frozen=True)
class CbsOptions:
    n_total: int = 0
    initial_state: tuple = ()
    phi_values: tuple = (0.0,)
    t_window: tuple = (20.0, 40.0)
    n_times: int = 81
    shell_width: float | None = None


@dataclass(frozen=True)
class RwmOptions:
    n_total: int = 0
    seed_state: tuple = ()
    ball_radius: int = 2
    eta: float = 1.5
    center: float | str = "median"
    q_max: int = 28
    n_mc_dos: int = 100_000
    compare_exact: bool = True


@dataclass(frozen=True)
class OtocOptions:
    center: tuple = ()
    sites: tuple = (0, 2)
    t_max: float = 47.5
    dt: float = 2.5
    times: tuple = ()   # explicit grid; overrides t_max/dt when non-empty
    tol: float = 1e-8
    method: str = "chebyshev"
    weight_floor: float = 7.5e-3
    k_sigma: float = 5.0
    fixed_point_guess: tuple = ()   # real/imag pairs; empty = use the center
    benettin_time: float = 300.0
    n_blocks: int = 10


@dataclass(frozen=True)
class SpectraOptions:
    n_total: int = 0
    n_realizations: int = 20
    eps_scale: float = 0.1
    tau_min: float = 0.01
    tau_max: float = 2.0
    dtau: float = 0.005
    smooth_band: float = 0.25
    smooth_ramp: float = 0.05
    sigma: float = 8.0
    trim: float = 0.05


@dataclass(frozen=True)
class LyapunovOptions:
    psi0: tuple = ()
    t_total: float = 300.0
    n_blocks: int = 10
    renorm_dt: float | None = None
    polish_fixed_point: bool = False


_OPTION_TYPES = {
    "autocorr": AutocorrOptions,
    "cbs": CbsOptions,
    "rwm": RwmOptions,
    "otoc": OtocOptions,
    "spectra": SpectraOptions,
    "lyapunov": LyapunovOptions,
}


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    lattice: LatticeParams
    options: object
    seed: int = 0
    threads: int = 1
    out: str | None = None
    raw: dict = field(default_factory=dict, compare=False)


# ---------------------------------------------------------------------------
# validation


_LATTICE_KEYS = {"L", "J", "U", "phi", "eps", "geometry"}
_TOP_KEYS = {"schema_version", "experiment", "lattice", "options", "seed", "threads", "out"}


def _is_num(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _complex_entries(value, path, errors):
    """Accept a list of numbers or [re, im] pairs; return a complex tuple."""
    out = []
    if not isinstance(value, (list, tuple)):
        errors.append(f"{path}: expected a list")
        return ()
    for k, item in enumerate(value):
        if _is_num(item):
            out.append(complex(item))
        elif (isinstance(item, (list, tuple)) and len(item) == 2
              and all(_is_num(u) for u in item)):
            out.append(complex(item[0], item[1]))
        else:
            errors.append(f"{path}[{k}]: expected number or [re, im] pair")
    return tuple(out)


def _check_lattice(d, errors):
    if not isinstance(d, dict):
        errors.append("lattice: expected an object")
        return None
    for k in set(d) - _LATTICE_KEYS:
        errors.append(f"lattice.{k}: unknown key")
    if "L" not in d:
        errors.append("lattice.L: missing")
    elif not isinstance(d["L"], int) or d["L"] < 2:
        errors.append("lattice.L: need an integer >= 2")
    for k in ("J", "U", "phi"):
        if k in d and not _is_num(d[k]):
            errors.append(f"lattice.{k}: expected a number")
    if "U" not in d:
        errors.append("lattice.U: missing")
    if "geometry" in d and d["geometry"] not in ("ring", "chain"):
        errors.append("lattice.geometry: must be 'ring' or 'chain'")
    if "eps" in d:
        if not isinstance(d["eps"], (list, tuple)) or not all(_is_num(e) for e in d["eps"]):
            errors.append("lattice.eps: expected a list of numbers")
        elif isinstance(d.get("L"), int) and len(d["eps"]) not in (0, d["L"]):
            errors.append(f"lattice.eps: length {len(d['eps'])} does not match L={d['L']}")
    if errors:
        return None
    try:
        return LatticeParams(
            L=d["L"], J=float(d.get("J", 1.0)), U=float(d["U"]),
            phi=float(d.get("phi", 0.0)), eps=tuple(d.get("eps", ())),
            geometry=d.get("geometry", "ring"),
        )
    except ValueError as exc:
        errors.append(f"lattice: {exc}")
        return None


def _check_options(experiment, d, errors):
    cls = _OPTION_TYPES[experiment]
    known = {f.name for f in fields(cls)}
    if not isinstance(d, dict):
        errors.append("options: expected an object")
        return None
    for k in set(d) - known:
        errors.append(f"options.{k}: unknown key for experiment '{experiment}'")
    kwargs = {}
    for f in fields(cls):
        if f.name not in d:
            continue
        v = d[f.name]
        if f.name in ("psi0", "fixed_point_guess") or (
            f.name == "center" and experiment in ("autocorr", "otoc")
        ):
            v = _complex_entries(v, f"options.{f.name}", errors)
        elif isinstance(v, list):
            v = tuple(v)
        kwargs[f.name] = v
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        errors.append(f"options: {exc}")
        return None


def _physics_report(experiment, lattice, options, errors):
    """Cheap sanity beyond types: capacity and window placement."""
    n_total = getattr(options, "n_total", None)
    if n_total is not None and n_total > 0 and lattice is not None:
        dim = math.comb(n_total + lattice.L - 1, lattice.L - 1)
        if dim > DEFAULT_BASIS_CAP:
            errors.append(
                f"options.n_total: basis dimension {dim} exceeds the cap {DEFAULT_BASIS_CAP}"
            )
    if experiment == "autocorr" and len(getattr(options, "center", ())) == 0:
        errors.append("options.center: missing coherent-state center")
    if experiment == "otoc":
        if len(getattr(options, "center", ())) == 0:
            errors.append("options.center: missing coherent-state center")
        grid = getattr(options, "times", ())
        if grid:
            vals = list(grid)
            if not all(isinstance(t, (int, float)) and t > 0 for t in vals):
                errors.append("options.times: entries must be positive numbers")
            elif any(b <= a for a, b in zip(vals, vals[1:])):
                errors.append("options.times: must be strictly increasing")
    if experiment == "lyapunov" and len(getattr(options, "psi0", ())) == 0:
        errors.append("options.psi0: missing initial field")
    if experiment == "cbs":
        if options is not None and (options.n_total <= 0 or not options.initial_state):
            errors.append("options: cbs needs n_total and initial_state")
        elif options is not None and lattice is not None:
            if len(options.initial_state) != lattice.L:
                errors.append("options.initial_state: length does not match lattice.L")
            elif sum(options.initial_state) != options.n_total:
                errors.append("options.initial_state: occupations do not sum to n_total")
    if experiment == "rwm" and options is not None and lattice is not None:
        if not options.seed_state:
            errors.append("options.seed_state: missing")
        elif len(options.seed_state) != lattice.L:
            errors.append("options.seed_state: length does not match lattice.L")
        elif options.n_total > 0 and sum(options.seed_state) != options.n_total:
            errors.append("options.seed_state: occupations do not sum to n_total")
        if isinstance(options.center, str) and options.center != "median":
            errors.append("options.center: must be a number or 'median'")
    if experiment == "spectra" and options is not None:
        if options.n_total <= 0:
            errors.append("options.n_total: missing particle number")
        if not 0.0 < options.tau_min < options.tau_max <= 4.0:
            errors.append("options: need 0 < tau_min < tau_max <= 4")


def validate_config(raw) -> list:
    """Full list of problems with field paths; empty means valid."""
    errors = []
    if not isinstance(raw, dict):
        return ["config: expected a JSON object"]
    for k in set(raw) - _TOP_KEYS:
        errors.append(f"{k}: unknown key")
    version = raw.get("schema_version")
    if version is None:
        errors.append("schema_version: missing")
    elif version != SCHEMA_VERSION:
        errors.append(f"schema_version: expected {SCHEMA_VERSION}, got {version!r}")
    experiment = raw.get("experiment")
    if experiment is None:
        errors.append("experiment: missing")
    elif experiment not in EXPERIMENTS:
        errors.append(f"experiment: unknown id {experiment!r}")
    if "seed" in raw and not isinstance(raw["seed"], int):
        errors.append("seed: expected an integer")
    if "threads" in raw and (not isinstance(raw["threads"], int) or raw["threads"] < 0):
        errors.append("threads: expected an integer >= 0")
    if "out" in raw and raw["out"] is not None and not isinstance(raw["out"], str):
        errors.append("out: expected a string path")
    lattice = _check_lattice(raw.get("lattice", {}), errors) if "lattice" in raw else None
    if "lattice" not in raw:
        errors.append("lattice: missing")
    options = None
    if experiment in EXPERIMENTS:
        options = _check_options(experiment, raw.get("options", {}), errors)
        if lattice is not None or options is not None:
            _physics_report(experiment, lattice, options, errors)
    return errors


def parse_config(raw) -> RunConfig:
    errors = validate_config(raw)
    if errors:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(errors))
    lattice = _check_lattice(raw["lattice"], [])
    options = _check_options(raw["experiment"], raw.get("options", {}), [])
    return RunConfig(
        experiment=raw["experiment"],
        lattice=lattice,
        options=options,
        seed=raw.get("seed", 0),
        threads=raw.get("threads", 1),
        out=raw.get("out"),
        raw=raw,
    )


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(raw)


def config_hash(raw) -> str:
    """sha256 over the canonical (sorted, compact) JSON encoding."""
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()
