"""Line-based ``key = value`` configuration with ``[section]`` headers.

Grammar: blank lines and lines starting with ``#`` or ``;`` are ignored; a
section starts with ``[name]``; every other line is ``key = value``.  Four
sections are recognised (``scenario``, ``diagnostics``, ``rescaler``,
``output``), all optional.  Unknown sections or keys, duplicate keys and
malformed lines are errors.  Initial-condition parameters go in the scenario
section as ``params.<name> = value``.  Number lists are comma separated and
accept fractions (``1/2, 1/4``); mixed-norm specs are ``s:l`` pairs
(``7/4:10, 4:12/7``).
"""
from __future__ import annotations

import configparser
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction

from .exponents import ExponentError, as_fraction, is_admissible, is_feasible
from .scenarios import FORCINGS, INITIAL_CONDITIONS

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "DiagnosticsConfig",
    "RescalerConfig",
    "OutputConfig",
    "Config",
    "parse_config",
    "load_config",
    "DEFAULT_RADII",
    "DEFAULT_SPECS",
]

DEFAULT_RADII = (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8))
DEFAULT_SPECS = ((Fraction(7, 4), Fraction(10)), (Fraction(4), Fraction(12, 7)), (Fraction(3), Fraction(3)))


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.key = key


@dataclass(frozen=True)
class ScenarioConfig:
    rho_max: float = 1.0
    z_min: float = -1.0
    z_max: float = 1.0
    n_rho: int = 32
    n_z: int | None = None  # default 2 * n_rho * (z extent) / (2 rho_max)
    z_periodic: bool = False
    initial: str = "decaying_vortex"
    params: dict = field(default_factory=dict)
    dt: float | None = None  # None: largest stable step dividing the snapshot interval
    t_start: float = 0.0
    t_end: float = 0.25
    snapshot_interval: float | None = 0.005
    boundary: str = "stress-free"
    forcing: str | None = None
    no_swirl: bool = False
    seed: int = 0
    blowup_threshold: float = 1e6


@dataclass(frozen=True)
class DiagnosticsConfig:
    radii: tuple = DEFAULT_RADII
    specs: tuple = DEFAULT_SPECS
    b: float = 0.0
    t0: float | None = None  # None: last snapshot time
    monitor_r1: float | None = None
    cutoff_b: float | None = None
    cutoff_r: float | None = None
    cutoff_t0: float | None = None
    energy_safety: float = 2.0


@dataclass(frozen=True)
class RescalerConfig:
    r1: float = 0.5
    b: float = 0.0
    ratio: float = 1.1
    a: float = 1.0
    n_rho: int = 32
    n_time: int = 9
    convention: str = "axial"
    start_time: float | None = None
    alpha: float = 0.25
    transport_radii: tuple | None = None  # None: (a/2, a)


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"
    csv: bool = True
    json: bool = True
    snapshots: bool = True


@dataclass(frozen=True)
class Config:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    rescaler: RescalerConfig = field(default_factory=RescalerConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> dict:
        return json.loads(json.dumps(asdict(self), default=str, sort_keys=True))

    def digest(self) -> str:
        """sha256 of the canonical resolved configuration."""
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


# -- value parsers -------------------------------------------------------------

def _float(text: str) -> float:
    text = text.strip()
    try:
        value = float(Fraction(text)) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"expected a number, got {text!r}") from exc
    if not math.isfinite(value):
        raise ValueError(f"expected a finite number, got {text!r}")
    return value


def _opt_float(text: str):
    return None if text.strip().lower() in ("", "auto", "none") else _float(text)


def _int(text: str) -> int:
    try:
        return int(text.strip())
    except ValueError as exc:
        raise ValueError(f"expected an integer, got {text!r}") from exc


def _opt_int(text: str):
    return None if text.strip().lower() in ("", "auto", "none") else _int(text)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _str(text: str) -> str:
    return text.strip()


def _opt_str(text: str):
    t = text.strip()
    return None if t.lower() in ("", "none") else t


def _fractions(text: str) -> tuple:
    items = [p.strip() for p in text.split(",") if p.strip()]
    if not items:
        raise ValueError("empty list")
    try:
        return tuple(Fraction(p) for p in items)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"expected a list of numbers, got {text!r}") from exc


def _opt_fractions(text: str):
    return None if text.strip().lower() in ("", "auto", "none") else _fractions(text)


def _specs(text: str) -> tuple:
    out = []
    for item in (p.strip() for p in text.split(",")):
        if not item:
            continue
        parts = item.split(":")
        if len(parts) != 2:
            raise ValueError(f"mixed-norm spec {item!r} is not of the form s:l")
        try:
            s, l = as_fraction(parts[0].strip()), as_fraction(parts[1].strip())
        except (ExponentError, ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"mixed-norm spec {item!r}: {exc}") from exc
        out.append((s, l))
    if not out:
        raise ValueError("empty spec list")
    return tuple(out)


_SCHEMA = {
    "scenario": {
        "rho_max": _float, "z_min": _float, "z_max": _float, "n_rho": _int, "n_z": _opt_int,
        "z_periodic": _bool, "initial": _str, "dt": _opt_float, "t_start": _float, "t_end": _float,
        "snapshot_interval": _opt_float, "boundary": _str, "forcing": _opt_str, "no_swirl": _bool,
        "seed": _int, "blowup_threshold": _float,
    },
    "diagnostics": {
        "radii": _fractions, "specs": _specs, "b": _float, "t0": _opt_float, "monitor_r1": _opt_float,
        "cutoff_b": _opt_float, "cutoff_r": _opt_float, "cutoff_t0": _opt_float, "energy_safety": _float,
    },
    "rescaler": {
        "r1": _float, "b": _float, "ratio": _float, "a": _float, "n_rho": _int, "n_time": _int,
        "convention": _str, "start_time": _opt_float, "alpha": _float, "transport_radii": _opt_fractions,
    },
    "output": {"dir": _str, "csv": _bool, "json": _bool, "snapshots": _bool},
}
_CLASSES = {"scenario": ScenarioConfig, "diagnostics": DiagnosticsConfig, "rescaler": RescalerConfig,
            "output": OutputConfig}


def _key_lines(text: str) -> dict:
    """Map ``(section, key)`` to its line number for error messages."""
    out, section = {}, None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
        elif "=" in line and not line.startswith(("#", ";")):
            out[(section, line.split("=", 1)[0].strip().lower())] = n
    return out


def _validate_specs(specs, line):
    for s, l in specs:
        if not is_admissible(s, l):
            raise ConfigError(f"specs: ({s}, {l}) violates the interpolation admissibility condition "
                              f"3/s + 2/l - 3/2 >= max(1/2 - 1/s, 1/s - 1/6)", line, "specs")
        if not is_feasible(1 / s, 1 / l):
            raise ConfigError(f"specs: ({s}, {l}) is admissible but outside the feasible region "
                              f"(alpha1 >= 0, alpha2 >= 0, alpha3 > 1/3)", line, "specs")


def _validate_ladder(name, radii, line):
    if any(r <= 0 for r in radii):
        raise ConfigError(f"{name}: radii must be positive", line, name)
    ordered = sorted(radii, reverse=True)
    if any(b * 2 != a for a, b in zip(ordered, ordered[1:])):
        raise ConfigError(f"{name}: ladder {[str(r) for r in ordered]} is not dyadic", line, name)
    return tuple(ordered)


def parse_config(text: str) -> Config:
    """Parse and validate; raises ``ConfigError`` with the offending line or key."""
    parser = configparser.ConfigParser(delimiters=("=",), comment_prefixes=("#", ";"), inline_comment_prefixes=None,
                                       interpolation=None, strict=True, empty_lines_in_values=False,
                                       default_section="\x00defaults")
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"expected a [section] header, got {exc.line.strip()!r}", exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"syntax error, expected 'key = value': {line.strip()}", lineno) from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigError(str(exc).split(": ", 1)[-1], exc.lineno) from None
    lines = _key_lines(text)

    sections = {}
    for name in parser.sections():
        key = name.strip().lower()
        if key not in _SCHEMA:
            raise ConfigError(f"unknown section [{name}]; expected one of {sorted(_SCHEMA)}")
        schema = _SCHEMA[key]
        values: dict = {}
        params: dict = {}
        for opt, raw in parser.items(name):
            line = lines.get((key, opt))
            if key == "scenario" and opt.startswith("params."):
                try:
                    params[opt[len("params."):]] = _float(raw)
                except ValueError as exc:
                    raise ConfigError(f"{opt}: {exc}", line, opt) from None
                continue
            if opt not in schema:
                raise ConfigError(f"unknown key {opt!r} in [{key}]", line, opt)
            try:
                values[opt] = schema[opt](raw)
            except ValueError as exc:
                raise ConfigError(f"{opt}: {exc}", line, opt) from None
        if key == "scenario":
            values["params"] = params
        sections[key] = (values, lines)

    def build(key):
        values, _ = sections.get(key, ({}, {}))
        return _CLASSES[key](**values)

    sc, dg, rs, out = (build(k) for k in ("scenario", "diagnostics", "rescaler", "output"))

    def line_of(section, key):
        return lines.get((section, key))

    # scenario semantics
    if sc.initial not in INITIAL_CONDITIONS:
        raise ConfigError(f"initial: unknown initial condition {sc.initial!r}", line_of("scenario", "initial"), "initial")
    for name in sc.params:
        if name not in INITIAL_CONDITIONS[sc.initial]:
            raise ConfigError(f"params.{name}: initial condition {sc.initial!r} takes no such parameter",
                              line_of("scenario", f"params.{name}"), f"params.{name}")
    if sc.forcing is not None and sc.forcing not in FORCINGS:
        raise ConfigError(f"forcing: unknown forcing {sc.forcing!r}", line_of("scenario", "forcing"), "forcing")
    if sc.boundary != "stress-free":
        raise ConfigError("boundary: only 'stress-free' is supported", line_of("scenario", "boundary"), "boundary")
    if sc.rho_max <= 0 or sc.z_max <= sc.z_min:
        raise ConfigError("scenario: need rho_max > 0 and z_max > z_min", key="rho_max")
    if sc.n_rho < 4:
        raise ConfigError("n_rho must be at least 4", line_of("scenario", "n_rho"), "n_rho")
    if sc.t_end <= sc.t_start:
        raise ConfigError("t_end must exceed t_start", line_of("scenario", "t_end"), "t_end")
    if sc.snapshot_interval is not None:
        if sc.snapshot_interval <= 0:
            raise ConfigError("snapshot_interval must be positive", line_of("scenario", "snapshot_interval"),
                              "snapshot_interval")
        ratio = (sc.t_end - sc.t_start) / sc.snapshot_interval
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ConfigError("snapshot_interval must divide t_end - t_start",
                              line_of("scenario", "snapshot_interval"), "snapshot_interval")
    if sc.dt is not None and sc.dt <= 0:
        raise ConfigError("dt must be positive", line_of("scenario", "dt"), "dt")

    # diagnostics semantics
    _validate_specs(dg.specs, line_of("diagnostics", "specs"))
    dg = replace(dg, radii=_validate_ladder("radii", dg.radii, line_of("diagnostics", "radii")))
    if dg.energy_safety <= 0:
        raise ConfigError("energy_safety must be positive", line_of("diagnostics", "energy_safety"), "energy_safety")

    # rescaler semantics
    if not rs.ratio > 1:
        raise ConfigError("ratio must exceed 1", line_of("rescaler", "ratio"), "ratio")
    if rs.convention not in ("axial", "full"):
        raise ConfigError("convention must be 'axial' or 'full'", line_of("rescaler", "convention"), "convention")
    if not 0 < rs.alpha <= 1:
        raise ConfigError("alpha must lie in (0, 1]", line_of("rescaler", "alpha"), "alpha")
    if rs.a <= 0 or rs.r1 <= 0 or rs.n_rho < 4 or rs.n_time < 2:
        raise ConfigError("rescaler: need a > 0, r1 > 0, n_rho >= 4, n_time >= 2", key="a")
    if rs.transport_radii is not None:
        rs = replace(rs, transport_radii=_validate_ladder("transport_radii", rs.transport_radii,
                                                           line_of("rescaler", "transport_radii")))
    return Config(sc, dg, rs, out)


def load_config(path) -> Config:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
