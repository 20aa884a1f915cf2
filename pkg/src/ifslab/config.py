"""Run configuration: sectioned key-value files describing a system and the
experiment parameters.

Expressions (maps, potentials, stretches, test functions) are strings in the
mini-language; lists are separated by ';' since expressions may contain
commas.  Example:

    [system]
    interval = 0 1
    maps = x/2 ; (x + 1)/2
    potentials = 0.5 ; 0.5

    [run]
    seed = 0
    format = tabular
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from . import exprlang
from .funcs import ExprFunc
from .system import IfsSystem, SystemDefinitionError

__all__ = ["ConfigError", "RunConfig", "load_config"]


class ConfigError(ValueError):
    """A configuration file failed validation; message names the field."""


@dataclass
class RunConfig:
    interval: tuple = (0.0, 1.0)
    maps: list = field(default_factory=list)
    potentials: list = field(default_factory=list)
    stretches: list | None = None
    label: str = ""

    attractor_depth: int = 12
    attractor_resolution: float | None = None
    attractor_seeds: int = 33

    grid: int = 4096
    radius_iters: int = 120
    eigen_tol: float = 1e-13
    eigen_iters: int = 5000

    conditions_grid: int = 1025
    depth_k: int = 2

    converge_n_max: int = 48
    converge_functions: list = field(default_factory=lambda: ["x"])

    seed: int = 0
    format: str = "tabular"
    out_dir: str = "out"

    paper_example_p1: str = "0.5 + sqrt(x)/10"
    source_path: str = "<defaults>"

    def build_system(self):
        if not self.maps:
            raise ConfigError("system.maps: at least one map is required")
        try:
            return IfsSystem(self.interval, self.maps, self.potentials,
                             stretches=self.stretches, label=self.label)
        except SystemDefinitionError as exc:
            raise ConfigError(f"system: {exc}") from exc


_RANGES = {
    "attractor.depth": (1, 64),
    "attractor.seeds": (2, 100_000),
    "operator.grid": (2, 10_000_000),
    "operator.radius_iters": (10, 1_000_000),
    "operator.eigen_iters": (1, 10_000_000),
    "conditions.grid": (2, 100_000),
    "conditions.depth_k": (1, 24),
    "converge.n_max": (1, 100_000),
}


def _find_line(path, section, key):
    """Locate 'key' within 'section' in the raw file, for error messages."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError:
        return 0
    in_section = False
    for i, line in enumerate(lines, start=1):
        stripped = line.strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            in_section = stripped[1:-1].strip() == section
        elif in_section and stripped.split("=")[0].strip() == key:
            return i
    return 0


def _parse_exprs(raw, path, section, key):
    out = []
    for i, chunk in enumerate(part.strip() for part in raw.split(";")):
        if not chunk:
            raise ConfigError(f"{section}.{key}: empty expression at position {i}")
        try:
            out.append(ExprFunc(chunk))
        except exprlang.ParseError as exc:
            line = _find_line(path, section, key)
            raise ConfigError(
                f"{path}:{line}: {section}.{key}[{i}]: {exc.message} "
                f"(offset {exc.position})") from exc
    return out


def _get_int(cp, section, key, default):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key)
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{section}.{key}: expected an integer, got {raw!r}")
    rng = _RANGES.get(f"{section}.{key}")
    if rng and not rng[0] <= value <= rng[1]:
        raise ConfigError(f"{section}.{key}: {value} outside [{rng[0]}, {rng[1]}]")
    return value


def _get_float(cp, section, key, default, positive=False):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key)
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{section}.{key}: expected a number, got {raw!r}")
    if positive and not value > 0:
        raise ConfigError(f"{section}.{key}: must be positive, got {value}")
    return value


def load_config(path):
    """Parse and validate a config file into a :class:`RunConfig`."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cp.read_file(fh, source=str(path))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc

    cfg = RunConfig(source_path=str(path))

    if cp.has_section("system"):
        if cp.has_option("system", "interval"):
            parts = cp.get("system", "interval").split()
            if len(parts) != 2:
                raise ConfigError("system.interval: expected two numbers 'lo hi'")
            try:
                lo, hi = float(parts[0]), float(parts[1])
            except ValueError:
                raise ConfigError(f"system.interval: not numeric: {parts}")
            if not lo < hi:
                raise ConfigError(f"system.interval: need lo < hi, got {lo} {hi}")
            cfg.interval = (lo, hi)
        if cp.has_option("system", "maps"):
            cfg.maps = _parse_exprs(cp.get("system", "maps"), path, "system", "maps")
        if cp.has_option("system", "potentials"):
            cfg.potentials = _parse_exprs(cp.get("system", "potentials"),
                                          path, "system", "potentials")
        if cp.has_option("system", "stretches"):
            cfg.stretches = _parse_exprs(cp.get("system", "stretches"),
                                         path, "system", "stretches")
        cfg.label = cp.get("system", "label", fallback=cfg.label)
        if cfg.maps and len(cfg.potentials) != len(cfg.maps):
            raise ConfigError(
                f"system.potentials: {len(cfg.potentials)} potentials for "
                f"{len(cfg.maps)} maps")
        if cfg.stretches is not None and len(cfg.stretches) != len(cfg.maps):
            raise ConfigError(
                f"system.stretches: {len(cfg.stretches)} stretch functions for "
                f"{len(cfg.maps)} maps")

    cfg.attractor_depth = _get_int(cp, "attractor", "depth", cfg.attractor_depth)
    cfg.attractor_resolution = _get_float(cp, "attractor", "resolution",
                                          cfg.attractor_resolution, positive=True)
    cfg.attractor_seeds = _get_int(cp, "attractor", "seeds", cfg.attractor_seeds)

    cfg.grid = _get_int(cp, "operator", "grid", cfg.grid)
    cfg.radius_iters = _get_int(cp, "operator", "radius_iters", cfg.radius_iters)
    cfg.eigen_tol = _get_float(cp, "operator", "eigen_tol", cfg.eigen_tol,
                               positive=True)
    cfg.eigen_iters = _get_int(cp, "operator", "eigen_iters", cfg.eigen_iters)

    cfg.conditions_grid = _get_int(cp, "conditions", "grid", cfg.conditions_grid)
    cfg.depth_k = _get_int(cp, "conditions", "depth_k", cfg.depth_k)

    cfg.converge_n_max = _get_int(cp, "converge", "n_max", cfg.converge_n_max)
    if cp.has_option("converge", "functions"):
        cfg.converge_functions = [
            f.source for f in _parse_exprs(cp.get("converge", "functions"),
                                           path, "converge", "functions")]

    cfg.seed = _get_int(cp, "run", "seed", cfg.seed)
    fmt = cp.get("run", "format", fallback=cfg.format)
    if fmt not in ("tabular", "structured"):
        raise ConfigError(f"run.format: must be 'tabular' or 'structured', got {fmt!r}")
    cfg.format = fmt
    cfg.out_dir = cp.get("run", "out", fallback=cfg.out_dir)

    if cp.has_option("paper_example", "p1"):
        raw = cp.get("paper_example", "p1").strip()
        _parse_exprs(raw, path, "paper_example", "p1")  # validate
        cfg.paper_example_p1 = raw

    return cfg
