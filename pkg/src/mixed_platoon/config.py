"""Run configuration: JSON file + ``--set key=value`` overrides, schema-checked.

Every section is optional in the file; missing keys take the Table 1 style
defaults below, so an empty ``{}`` reproduces the standard experiment grid.
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema

from .composition import Topology
from .frequency import FrequencyGrid, Scenario
from .lqr import LqrWeights
from .models import CaccParams, OvmParams, equilibrium_from_velocity
from .sim import SimConfig


class ConfigError(ValueError):
    pass


DEFAULTS: dict = {
    "ovm": {"alpha": 0.6, "beta": 0.9, "s_min": 2.0, "s_max": 32.0, "v_max": 30.0},
    "cacc": {"t_h": 1.0, "s_0": 2.0, "k_p": 0.45, "k_d": 0.25, "dt": 0.1},
    "lqr": {"q": 1.0, "r": 1.0},
    "analysis": {"n": 1000, "omega_lo": 1e-2, "omega_hi": 1e2, "n_freq": 2000, "step": 0.1},
    "sim": {
        "n": 100,
        "dt": 0.1,
        "t_end": 150.0,
        "v_star": 15.0,
        "accel_limit": 2.0,
        "vehicle_length": 5.0,
        "perturbation_scale": 1.0,
    },
    "simulate": {"topology": "MSL", "p": 0.2, "m_max": 6, "seed": 1},
    "scenarios": {
        "topologies": ["CACC", "MPF", "MSL"],
        "penetration_rates": [0.1, 0.2, 0.3, 0.4, 0.5],
        "mps": [4, 6, 8],
    },
    "seeds": list(range(10)),
    "workers": 1,
}

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_int = {"type": "integer"}
_topo = {"enum": [t.value for t in Topology]}


def _section(props: dict) -> dict:
    return {"type": "object", "properties": props, "additionalProperties": False}


SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "ovm": _section({k: _num for k in DEFAULTS["ovm"]}),
        "cacc": _section({k: _num for k in DEFAULTS["cacc"]}),
        "lqr": _section({"q": _pos, "r": _pos}),
        "analysis": _section(
            {"n": {"type": "integer", "minimum": 1}, "omega_lo": _pos, "omega_hi": _pos,
             "n_freq": {"type": "integer", "minimum": 2}, "step": _pos}
        ),
        "sim": _section(
            {"n": {"type": "integer", "minimum": 2}, "dt": _pos, "t_end": _pos, "v_star": _pos,
             "accel_limit": _pos, "vehicle_length": {"type": "number", "minimum": 0},
             "perturbation_scale": _num}
        ),
        "simulate": _section(
            {"topology": _topo, "p": {"type": "number", "minimum": 0, "maximum": 1},
             "m_max": {"type": "integer", "minimum": 2}, "seed": _int}
        ),
        "scenarios": _section(
            {
                "topologies": {"type": "array", "items": _topo},
                "penetration_rates": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}},
                "mps": {"type": "array", "items": {"type": "integer", "minimum": 2}},
            }
        ),
        "seeds": {"type": "array", "items": _int},
        "workers": {"type": "integer", "minimum": 1},
    },
}


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = val
    return out


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    if "," in text:
        return [_parse_value(part) for part in text.split(",") if part]
    return text


def apply_override(raw: dict, assignment: str) -> dict:
    """Apply ``section.key=value``; values are JSON, or comma lists of JSON/bare words."""
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not of the form key=value")
    key, text = assignment.split("=", 1)
    path = key.strip().split(".")
    value = _parse_value(text.strip())
    if isinstance(DEFAULTS.get(path[0]), list) or (
        len(path) == 2 and isinstance(DEFAULTS.get(path[0], {}).get(path[1]), list)
    ):
        if not isinstance(value, list):
            value = [value]
    out = copy.deepcopy(raw)
    node = out
    for part in path[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"{key!r} does not name a config section")
    node[path[-1]] = value
    return out


@dataclass(frozen=True)
class RunConfig:
    data: dict

    @classmethod
    def from_dict(cls, raw: dict, overrides=()) -> "RunConfig":
        for item in overrides:
            raw = apply_override(raw, item)
        try:
            jsonschema.validate(raw, SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"{where}: {exc.message}") from None
        cfg = cls(_merge(DEFAULTS, raw))
        try:
            sim = cfg.data["simulate"]
            cfg.sim_config(sim["topology"], sim["m_max"], sim["p"], sim["seed"])
            cfg.grid  # noqa: B018
            equilibrium_from_velocity(cfg.ovm, cfg.data["sim"]["v_star"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return cfg

    @classmethod
    def load(cls, path: str | Path | None = None, overrides=()) -> "RunConfig":
        raw = {}
        if path is not None:
            try:
                raw = json.loads(Path(path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(raw, overrides)

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True) + "\n"

    @property
    def ovm(self) -> OvmParams:
        return OvmParams(**self.data["ovm"])

    @property
    def cacc(self) -> CaccParams:
        return CaccParams(**self.data["cacc"])

    @property
    def weights(self) -> LqrWeights:
        return LqrWeights(r=self.data["lqr"]["r"], q_scale=self.data["lqr"]["q"])

    @property
    def grid(self) -> FrequencyGrid:
        a = self.data["analysis"]
        return FrequencyGrid(a["omega_lo"], a["omega_hi"], a["n_freq"])

    @property
    def seeds(self) -> list[int]:
        return list(self.data["seeds"])

    def scenario_cells(self):
        """(topology, M, p) triples sorted by topology, M, p."""
        sc = self.data["scenarios"]
        return [
            (Topology(t), m, p)
            for t in sorted(set(sc["topologies"]))
            for m in sorted(set(sc["mps"]))
            for p in sorted(set(sc["penetration_rates"]))
        ]

    def scenario(self, topology, m_max: int, p: float) -> Scenario:
        return Scenario(topology, p, m_max, self.data["analysis"]["n"], self.ovm, self.cacc, self.weights,
                        self.data["sim"]["v_star"])

    def sim_config(self, topology, m_max: int, p: float, seed: int) -> SimConfig:
        s = self.data["sim"]
        return SimConfig(
            n=s["n"], p=p, m_max=m_max, topology=Topology(topology), seed=seed, dt=s["dt"],
            t_end=s["t_end"], v_star=s["v_star"], accel_limit=s["accel_limit"],
            vehicle_length=s["vehicle_length"], perturbation_scale=s["perturbation_scale"],
            ovm=self.ovm, cacc=self.cacc, weights=self.weights,
        )
