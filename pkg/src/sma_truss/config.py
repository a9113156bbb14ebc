"""Run configuration: INI-style sections, presets and ``key=value`` overrides."""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field
from typing import Any, Callable

from .constitutive import CUZNALNI, MaterialProperties, TrussGeometry
from .control import ControllerConfig
from .dynamics import TrussParams, nondimensionalize
from .engine import Scenario
from .fuzzy import DEFAULT_CENTERS


class ConfigError(ValueError):
    pass


def _parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_optional_float(text: str) -> float | None:
    text = text.strip()
    if text in ("", "none", "auto"):
        return None
    return float(text)


def _parse_int(text: str) -> int:
    return int(text.strip())


def _parse_float(text: str) -> float:
    return float(text.strip())


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.replace(";", ",").split(",") if part.strip())


def _parse_mode(text: str) -> str:
    value = text.strip().lower()
    if value not in ("nondimensional", "dimensional"):
        raise ValueError(f"mode must be 'nondimensional' or 'dimensional', got {text!r}")
    return value


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    if isinstance(value, tuple):
        return ", ".join(repr(v) for v in value)
    return repr(value)


# section -> key -> (parser, default)
SCHEMA: dict[str, dict[str, tuple[Callable[[str], Any], Any]]] = {
    "material": {
        "a1_mpa_per_k": (_parse_float, CUZNALNI.a1),
        "a2_mpa": (_parse_float, CUZNALNI.a2),
        "a3_mpa": (_parse_float, CUZNALNI.a3),
        "t_m_k": (_parse_float, CUZNALNI.T_M),
    },
    "geometry": {
        "l0_m": (_parse_float, 1.0),
        "phi0_deg": (_parse_float, 30.0),
        "area_m2": (_parse_float, 1.0e-4),
        "mass_kg": (_parse_float, 10.0),
        "damping_n_s_per_m": (_parse_float, 0.0),
    },
    "dynamics": {
        "mode": (_parse_mode, "nondimensional"),
        # nondimensional mode; blank alpha2/alpha3 are derived from [material]
        "theta": (_parse_float, 0.69),
        "xi": (_parse_float, 0.05),
        "gamma": (_parse_float, 0.020),
        "omega": (_parse_float, 0.5),
        "alpha2": (_parse_optional_float, None),
        "alpha3": (_parse_optional_float, None),
        "b": (_parse_float, 0.866),
        # dimensional mode
        "temperature_k": (_parse_float, 0.69 * CUZNALNI.T_M),
        "force_amplitude_n": (_parse_float, 0.0),
        "forcing_frequency_rad_s": (_parse_float, 0.0),
    },
    "controller": {
        "enabled": (_parse_bool, True),
        "n": (_parse_int, 2),
        "lambda": (_parse_float, 0.6),
        "alpha2_hat": (_parse_float, 100.0),
        "alpha3_hat": (_parse_float, 1.15e4),
        # blank: copy the plant value
        "theta_hat": (_parse_optional_float, None),
        "xi_hat": (_parse_optional_float, None),
        "b_hat": (_parse_optional_float, None),
    },
    "fuzzy": {
        "enabled": (_parse_bool, True),
        "centers": (_parse_floats, DEFAULT_CENTERS),
        "phi": (_parse_float, 2.0),
        "d_max": (_parse_float, 10.0),
    },
    "simulation": {
        "duration": (_parse_float, 1000.0),
        "x0": (_parse_float, 0.68),
        "y0": (_parse_float, 0.0),
        "setpoint": (_parse_float, 0.68),
        # blank: 1000 Omega / pi and 200 Omega / pi
        "plant_rate": (_parse_optional_float, None),
        "control_rate": (_parse_optional_float, None),
        "transient_fraction": (_parse_float, 0.5),
        "include_forcing": (_parse_bool, True),
        "blowup_limit": (_parse_float, 10.0),
    },
}

PRESETS: dict[str, dict[str, Any]] = {
    "uncontrolled": {("controller", "enabled"): False, ("fuzzy", "enabled"): False},
    "fl": {("fuzzy", "enabled"): False},
    "fuzzy-fl": {},
    # exact model, no excitation: the error must decay to zero
    "perfect-fl": {
        ("fuzzy", "enabled"): False,
        ("dynamics", "gamma"): 0.0,
        ("controller", "alpha2_hat"): CUZNALNI.a2 / (CUZNALNI.a1 * CUZNALNI.T_M),
        ("controller", "alpha3_hat"): CUZNALNI.a3 / (CUZNALNI.a1 * CUZNALNI.T_M),
        ("simulation", "x0"): 0.78,
        ("simulation", "include_forcing"): False,
    },
}


def default_values() -> dict[str, dict[str, Any]]:
    return {section: {key: default for key, (_, default) in keys.items()} for section, keys in SCHEMA.items()}


def resolve_key(key: str) -> tuple[str, str]:
    """Map ``section.key`` or an unambiguous bare ``key`` onto the schema."""
    if "." in key:
        section, name = key.split(".", 1)
        if section not in SCHEMA or name not in SCHEMA[section]:
            raise ConfigError(f"unknown config key {key!r}")
        return section, name
    hits = [section for section, keys in SCHEMA.items() if key in keys]
    if not hits:
        raise ConfigError(f"unknown config key {key!r}")
    if len(hits) > 1:
        options = ", ".join(f"{s}.{key}" for s in hits)
        raise ConfigError(f"ambiguous key {key!r}; use one of {options}")
    return hits[0], key


@dataclass
class RunConfig:
    preset: str | None = None
    values: dict[str, dict[str, Any]] = field(default_factory=default_values)

    @classmethod
    def from_preset(cls, name: str) -> "RunConfig":
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
        cfg = cls(preset=name)
        for (section, key), value in PRESETS[name].items():
            cfg.values[section][key] = value
        return cfg

    @classmethod
    def from_text(cls, text: str, base: "RunConfig | None" = None) -> "RunConfig":
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config: {exc}") from exc
        cfg = base if base is not None else cls()
        for section in parser.sections():
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]")
            for key, raw in parser.items(section):
                cfg.set(f"{section}.{key}", raw)
        return cfg

    @classmethod
    def load(cls, path, base: "RunConfig | None" = None) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read(), base)

    def set(self, key: str, raw: str) -> None:
        section, name = resolve_key(key)
        parse = SCHEMA[section][name][0]
        try:
            self.values[section][name] = parse(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {section}.{name}: {exc}") from exc

    def apply_override(self, assignment: str) -> None:
        if "=" not in assignment:
            raise ConfigError(f"override must look like key=value, got {assignment!r}")
        key, raw = assignment.split("=", 1)
        self.set(key.strip(), raw)

    def dump(self) -> str:
        out = io.StringIO()
        if self.preset:
            out.write(f"# preset: {self.preset}\n")
        for section, keys in self.values.items():
            out.write(f"[{section}]\n")
            for key, value in keys.items():
                out.write(f"{key} = {_fmt(value)}\n")
            out.write("\n")
        return out.getvalue()

    # -- conversion --------------------------------------------------------

    def material(self) -> MaterialProperties:
        v = self.values["material"]
        return MaterialProperties(v["a1_mpa_per_k"], v["a2_mpa"], v["a3_mpa"], v["t_m_k"])

    def geometry(self) -> TrussGeometry:
        v = self.values["geometry"]
        return TrussGeometry(
            L0=v["l0_m"],
            phi0=math.radians(v["phi0_deg"]),
            A=v["area_m2"],
            m=v["mass_kg"],
            c=v["damping_n_s_per_m"],
        )

    def truss_params(self) -> TrussParams:
        v = self.values["dynamics"]
        mat = self.material()
        if v["mode"] == "dimensional":
            return nondimensionalize(
                mat,
                self.geometry(),
                v["temperature_k"],
                v["force_amplitude_n"],
                v["forcing_frequency_rad_s"],
            )
        a1_T_M = mat.a1 * mat.T_M
        return TrussParams(
            theta=v["theta"],
            xi=v["xi"],
            gamma=v["gamma"],
            Omega=v["omega"],
            alpha2=v["alpha2"] if v["alpha2"] is not None else mat.a2 / a1_T_M,
            alpha3=v["alpha3"] if v["alpha3"] is not None else mat.a3 / a1_T_M,
            b=v["b"],
        )

    def controller(self, params: TrussParams) -> ControllerConfig | None:
        c = self.values["controller"]
        if not c["enabled"]:
            return None
        f = self.values["fuzzy"]
        return ControllerConfig(
            theta=c["theta_hat"] if c["theta_hat"] is not None else params.theta,
            xi=c["xi_hat"] if c["xi_hat"] is not None else params.xi,
            b=c["b_hat"] if c["b_hat"] is not None else params.b,
            alpha2_hat=c["alpha2_hat"],
            alpha3_hat=c["alpha3_hat"],
            lam=c["lambda"],
            n=c["n"],
            fuzzy_enabled=f["enabled"],
            phi=f["phi"],
            d_max=f["d_max"],
            centers=f["centers"],
        )

    def to_scenario(self) -> Scenario:
        try:
            params = self.truss_params()
            s = self.values["simulation"]
            return Scenario(
                params=params,
                controller=self.controller(params),
                x0=s["x0"],
                y0=s["y0"],
                duration=s["duration"],
                plant_rate=s["plant_rate"],
                control_rate=s["control_rate"],
                transient_fraction=s["transient_fraction"],
                setpoint=s["setpoint"],
                include_forcing=s["include_forcing"],
                blowup_limit=s["blowup_limit"],
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc
