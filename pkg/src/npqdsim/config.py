"""Config-file ingestion.

One YAML file with blocks {system, link, polarization, sweep, output}.
Rates and detunings are given in plain MHz and converted to angular units
(rad/us) exactly once, here.  Unknown keys anywhere are rejected, and every
diagnostic carries the dotted field path that caused it.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .applications import LinkParams
from .cavity import SystemParams, branch_amplitudes
from .polarization import BirefringenceModel


class ConfigError(ValueError):
    """Malformed or inconsistent configuration; message carries the field path."""


def _require_mapping(node, path):
    if not isinstance(node, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(node).__name__}")
    return node


def _reject_unknown(node: dict, known, path):
    unknown = sorted(set(node) - set(known))
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}: unknown key "
                          f"(known keys: {', '.join(sorted(known))})")


def _number(node, key, path, default=None):
    if key not in node:
        if default is None:
            raise ConfigError(f"{path}.{key}: missing required value")
        return default
    v = node[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {v!r}")
    return float(v)


def _reflection_value(node, key, path):
    """Branch reflection override: a real number or an [re, im] pair."""
    if key not in node or node[key] is None:
        return None
    v = node[key]
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if (isinstance(v, list) and len(v) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool)
                    for x in v)):
        return complex(v[0], v[1])
    raise ConfigError(f"{path}.{key}: expected a number or [re, im] pair, got {v!r}")


@dataclass(frozen=True)
class GridSpec:
    """Either an explicit list of values or a (start, stop, points) range."""

    values: tuple | None = None
    start: float = 0.0
    stop: float = 1.0
    points: int = 2
    spacing: str = "linear"

    def resolve(self) -> np.ndarray:
        if self.values is not None:
            return np.asarray(self.values, dtype=float)
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


def _grid(node, key, path) -> GridSpec:
    if key not in node:
        raise ConfigError(f"{path}.{key}: missing required grid")
    v = node[key]
    p = f"{path}.{key}"
    if isinstance(v, list):
        if not v or not all(isinstance(x, (int, float)) and not isinstance(x, bool)
                            for x in v):
            raise ConfigError(f"{p}: explicit grid must be a nonempty number list")
        return GridSpec(values=tuple(float(x) for x in v))
    v = _require_mapping(v, p)
    _reject_unknown(v, {"start", "stop", "points", "spacing"}, p)
    start = _number(v, "start", p)
    stop = _number(v, "stop", p)
    points = v.get("points", 50)
    if isinstance(points, bool) or not isinstance(points, int) or points < 1:
        raise ConfigError(f"{p}.points: expected a positive integer")
    spacing = v.get("spacing", "linear")
    if spacing not in ("linear", "log"):
        raise ConfigError(f"{p}.spacing: must be 'linear' or 'log'")
    if spacing == "log" and (start <= 0 or stop <= 0):
        raise ConfigError(f"{p}: log spacing needs positive start/stop")
    return GridSpec(start=start, stop=stop, points=points, spacing=spacing)


@dataclass(frozen=True)
class PolarizationSpec:
    theta_empty_deg: float
    r0: complex | None = None
    r1: complex | None = None

    def model(self, system: SystemParams) -> BirefringenceModel:
        """Birefringence model; branch reflections default to the cavity
        model evaluated at zero probe detuning."""
        r0 = self.r0 if self.r0 is not None else branch_amplitudes(system, 1).r
        r1 = self.r1 if self.r1 is not None else branch_amplitudes(system, 0).r
        return BirefringenceModel(theta_empty_deg=self.theta_empty_deg,
                                  r0=r0, r1=r1)


@dataclass(frozen=True)
class SweepSpec:
    alpha_sq: GridSpec
    detuning_mhz: GridSpec
    distance_km: GridSpec


@dataclass(frozen=True)
class OutputSpec:
    format: str = "csv"
    precision: int = 9


@dataclass(frozen=True)
class Config:
    system: SystemParams
    link: LinkParams
    polarization: PolarizationSpec
    sweep: SweepSpec
    output: OutputSpec
    sha256: str = ""


def _parse_system(node) -> SystemParams:
    path = "system"
    node = _require_mapping(node, path)
    known = {"g_mhz", "gamma_mhz", "kappa_r_mhz", "kappa_t_mhz", "kappa_m_mhz",
             "mu_fc", "delta_a_mhz", "delta_c_mhz", "p_dc", "p_spd"}
    _reject_unknown(node, known, path)
    try:
        return SystemParams.from_mhz(
            g_mhz=_number(node, "g_mhz", path),
            gamma_mhz=_number(node, "gamma_mhz", path),
            kappa_r_mhz=_number(node, "kappa_r_mhz", path),
            kappa_t_mhz=_number(node, "kappa_t_mhz", path),
            kappa_m_mhz=_number(node, "kappa_m_mhz", path),
            mu_fc=_number(node, "mu_fc", path),
            delta_a_mhz=_number(node, "delta_a_mhz", path, default=0.0),
            delta_c_mhz=_number(node, "delta_c_mhz", path, default=0.0),
            p_dc=_number(node, "p_dc", path, default=0.0),
            p_spd=_number(node, "p_spd", path, default=0.0))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_link(node) -> LinkParams:
    path = "link"
    node = _require_mapping(node, path)
    known = {"distance_km", "atten_db_per_km", "eta_ap", "eta_h",
             "c_fibre_km_s", "t_npqd_us", "p0a_given_1iq", "p1oq_given_0a",
             "p_dc", "l_npqd_km"}
    _reject_unknown(node, known, path)
    l_npqd = node.get("l_npqd_km")
    try:
        return LinkParams(
            distance_km=_number(node, "distance_km", path),
            atten_db_per_km=_number(node, "atten_db_per_km", path, default=4.0),
            eta_ap=_number(node, "eta_ap", path, default=0.5),
            eta_h=_number(node, "eta_h", path, default=0.11),
            c_fibre_km_s=_number(node, "c_fibre_km_s", path, default=2.0e5),
            t_npqd_us=_number(node, "t_npqd_us", path, default=10.0),
            p0a_given_1iq=_number(node, "p0a_given_1iq", path, default=0.45),
            p1oq_given_0a=_number(node, "p1oq_given_0a", path, default=0.523),
            p_dc=_number(node, "p_dc", path, default=0.033),
            l_npqd_km=None if l_npqd is None else _number(node, "l_npqd_km", path))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_polarization(node) -> PolarizationSpec:
    path = "polarization"
    node = _require_mapping(node, path)
    _reject_unknown(node, {"theta_empty_deg", "r0", "r1"}, path)
    return PolarizationSpec(
        theta_empty_deg=_number(node, "theta_empty_deg", path, default=42.0),
        r0=_reflection_value(node, "r0", path),
        r1=_reflection_value(node, "r1", path))


def _parse_sweep(node) -> SweepSpec:
    path = "sweep"
    node = _require_mapping(node, path)
    _reject_unknown(node, {"alpha_sq", "detuning_mhz", "distance_km"}, path)
    return SweepSpec(alpha_sq=_grid(node, "alpha_sq", path),
                     detuning_mhz=_grid(node, "detuning_mhz", path),
                     distance_km=_grid(node, "distance_km", path))


def _parse_output(node) -> OutputSpec:
    path = "output"
    node = _require_mapping(node, path)
    _reject_unknown(node, {"format", "precision"}, path)
    fmt = node.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"{path}.format: must be 'csv' or 'json'")
    precision = node.get("precision", 9)
    if isinstance(precision, bool) or not isinstance(precision, int) \
            or not 1 <= precision <= 17:
        raise ConfigError(f"{path}.precision: expected an integer in [1, 17]")
    return OutputSpec(format=fmt, precision=precision)


def parse_config(text: str) -> Config:
    try:
        root = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    root = _require_mapping(root, "<root>")
    _reject_unknown(root, {"system", "link", "polarization", "sweep", "output"},
                    "<root>")
    for block in ("system", "link", "sweep"):
        if block not in root:
            raise ConfigError(f"{block}: missing required section")
    return Config(
        system=_parse_system(root["system"]),
        link=_parse_link(root["link"]),
        polarization=_parse_polarization(root.get("polarization",
                                                  {"theta_empty_deg": 42.0})),
        sweep=_parse_sweep(root["sweep"]),
        output=_parse_output(root.get("output", {})),
        sha256=hashlib.sha256(text.encode()).hexdigest())


def load_config(path: str | Path) -> Config:
    return parse_config(Path(path).read_text())


def default_config_text() -> str:
    return (resources.files("npqdsim") / "data" / "default_config.yaml").read_text()


def load_default() -> Config:
    """The shipped default configuration (fitted device parameters)."""
    return parse_config(default_config_text())
