"""Run configuration: INI files, CLI overrides, and validation.

A configuration fully determines a run; the manifest written next to the
outputs embeds the resolved configuration in the same schema, so any
output can be regenerated byte-identically by pointing the CLI at its
manifest.
"""

import configparser
import math
from dataclasses import dataclass, field, fields

from .assembly import BcMode
from .kernels import DispersalExp, Exponential, Gaussian, TruncatedGrowingExp


class ConfigError(ValueError):
    """Invalid configuration; carries a stable error code."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


# stable codes, one per rejected class
E_GRID = "grid_not_tiling"
E_TAU = "tau_not_dividing"
E_HORIZON = "horizon_exceeds_collar"
E_NEUMANN_INF = "neumann_infinite_horizon"
E_NEG_RATE = "negative_rate"
E_CASE = "unknown_case"
E_VALUE = "bad_value"


@dataclass
class RunConfig:
    mode: str = "single"            # mms | pulse | oracle | single
    bc: str = "neumann"             # dirichlet | neumann
    case: str | None = None
    levels: int = 5
    # domain
    omega_lo: float = -40.0
    omega_hi: float = 40.0
    collar: float = 5.0
    # kernel
    kernel_variant: str = "dispersal_exp"
    kernel_a: float = 3.0
    kernel_r: float = 5.0
    kernel_c: float = 0.5
    # physics
    d_u: float = 1.0
    d_v: float = 0.01
    f: float = 0.01
    kappa: float = 0.0977
    scale: str = "none"             # none | default | moment
    # grid / run
    h: float = 0.05
    tau: float = 0.01
    T: float = 1.0
    steady_tol: float = 1e-5
    max_steps: int = 500_000
    a_values: list = field(default_factory=lambda: [3.0, 5.0, 7.0, 9.0])
    local_reference: bool = True
    out: str = "out"
    dump_operators: bool = False

    def kernel(self):
        v = self.kernel_variant
        if v == "gaussian":
            return Gaussian()
        if v == "exponential":
            return Exponential()
        if v == "truncated_growing_exp":
            return TruncatedGrowingExp(self.kernel_c, self.kernel_r)
        if v == "dispersal_exp":
            return DispersalExp(self.kernel_a, self.kernel_r)
        raise ConfigError(E_VALUE, f"unknown kernel variant {v!r}")

    def bc_mode(self) -> BcMode:
        try:
            return BcMode(self.bc)
        except ValueError:
            raise ConfigError(E_VALUE, f"unknown boundary mode {self.bc!r}") from None


_SECTIONS = {
    "run": ["mode", "bc", "case", "levels", "T", "steady_tol", "max_steps",
            "scale", "a_values", "local_reference", "out", "dump_operators"],
    "domain": ["omega_lo", "omega_hi", "collar"],
    "kernel": ["kernel_variant", "kernel_a", "kernel_r", "kernel_c"],
    "params": ["d_u", "d_v", "f", "kappa"],
    "grid": ["h", "tau"],
}
_INI_KEYS = {  # config-file key -> dataclass field
    "variant": "kernel_variant", "a": "kernel_a", "r": "kernel_r",
    "c": "kernel_c",
}
_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name: str, raw: str):
    if name == "a_values":
        return [float(tok) for tok in raw.replace(",", " ").split()]
    if name in ("local_reference", "dump_operators"):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if name in ("levels", "max_steps"):
        return int(raw)
    if name in ("mode", "bc", "case", "scale", "out", "kernel_variant"):
        return raw.strip()
    return float(raw)


def read_config_file(path) -> dict:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    with open(path) as fh:
        parser.read_file(fh)
    values = {}
    for section, keys in _SECTIONS.items():
        if not parser.has_section(section):
            continue
        for raw_key, raw in parser.items(section):
            name = _INI_KEYS.get(raw_key, raw_key)
            if name not in keys:
                raise ConfigError(E_VALUE,
                                  f"unknown key {raw_key!r} in [{section}]")
            values[name] = _coerce(name, raw)
    return values


def make_config(file_values: dict | None = None, overrides: dict | None = None) -> RunConfig:
    """File values first, CLI overrides on top."""
    cfg = RunConfig()
    for source in (file_values or {}), (overrides or {}):
        for name, value in source.items():
            if value is None:
                continue
            setattr(cfg, name, value)
    return cfg


def _tiles(length: float, h: float) -> bool:
    if h <= 0 or length <= 0:
        return False
    n = round(length / h)
    return n >= 1 and abs(n * h - length) <= 1e-12 * max(length, 1.0)


def validate_config(cfg: RunConfig) -> RunConfig:
    """Cross-field validation; raises ConfigError with a stable code."""
    from .mms import MMS_CASES

    if cfg.mode not in ("mms", "pulse", "oracle", "single"):
        raise ConfigError(E_VALUE, f"unknown mode {cfg.mode!r}")
    if cfg.scale not in ("none", "default", "moment"):
        raise ConfigError(E_VALUE, f"unknown scale mode {cfg.scale!r}")
    if min(cfg.d_u, cfg.d_v, cfg.f, cfg.kappa) < 0:
        raise ConfigError(E_NEG_RATE, "diffusion/feed/kill rates must be nonnegative")

    if cfg.mode in ("mms", "oracle"):
        if cfg.case not in MMS_CASES:
            raise ConfigError(
                E_CASE, f"unknown case {cfg.case!r}; registered: "
                        f"{sorted(MMS_CASES)}")
        return cfg

    kernel = cfg.kernel()
    bc = cfg.bc_mode()
    if not _tiles(cfg.omega_hi - cfg.omega_lo, cfg.h):
        raise ConfigError(E_GRID, f"h={cfg.h} does not tile the domain "
                                  f"[{cfg.omega_lo}, {cfg.omega_hi}]")
    if cfg.collar > 0 and not _tiles(cfg.collar, cfg.h):
        raise ConfigError(E_GRID, f"h={cfg.h} does not tile the collar "
                                  f"of width {cfg.collar}")
    if bc == BcMode.NEUMANN:
        if not math.isfinite(kernel.horizon):
            raise ConfigError(E_NEUMANN_INF,
                              "Neumann volume constraints need a finite-horizon kernel")
        if kernel.horizon > cfg.collar:
            raise ConfigError(E_HORIZON,
                              f"kernel horizon {kernel.horizon} exceeds the collar "
                              f"width {cfg.collar}")
    if cfg.mode == "single":
        n = round(cfg.T / cfg.tau) if cfg.tau > 0 else 0
        if n < 0 or cfg.tau <= 0 or abs(n * cfg.tau - cfg.T) > 1e-9 * max(cfg.T, 1.0):
            raise ConfigError(E_TAU, f"tau={cfg.tau} does not divide T={cfg.T}")
    return cfg


def config_sections(cfg: RunConfig) -> dict:
    """Resolved configuration as INI sections (manifest embedding)."""
    out = {}
    for section, keys in _SECTIONS.items():
        body = {}
        for name in keys:
            value = getattr(cfg, name)
            if value is None:
                continue
            if name == "a_values":
                value = " ".join(f"{v:g}" for v in value)
            body[name] = str(value)
        out[section] = body
    return out
