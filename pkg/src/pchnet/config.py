"""Experiment configuration: YAML files plus ``key=value`` overrides."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from pathlib import Path
from typing import Any

import yaml

from .network import NetworkSpec
from .simulator import ConfigError, SimConfig
from .workload import WorkloadSpec

# keys that are not simulator fields
EXTRA_DEFAULTS: dict[str, Any] = {
    "omegas": [0.005, 0.01, 0.02, 0.04, 0.08, 0.16, 0.32, 0.64, 1.28, 2.56],
    "solver": "both",  # exact | greedy | both
    "ablate": {
        "path_kind": ["edw", "eds", "ksp", "heuristic"],
        "k": [1, 3, 5],
        "scheduler": ["fifo", "lifo", "spf", "edf"],
        "seeds": [0, 1, 2],
        "mode": "axes",  # axes varies one factor at a time; full takes the product
    },
}


def parse_override(text: str) -> tuple[str, Any]:
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not key=value")
    key, raw = text.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError(f"override {text!r} has an empty key")
    return key, yaml.safe_load(raw) if raw.strip() else None


def _known(key: str) -> bool:
    head, _, rest = key.partition(".")
    if head in ("network", "workload"):
        cls = NetworkSpec if head == "network" else WorkloadSpec
        return rest in {f.name for f in dataclasses.fields(cls)}
    if head == "ablate":
        return rest in EXTRA_DEFAULTS["ablate"]
    return not rest and (head in {f.name for f in dataclasses.fields(SimConfig)} or head in EXTRA_DEFAULTS)


def apply_overrides(raw: dict, overrides: list[str]) -> dict:
    out = json.loads(json.dumps(raw))
    for text in overrides:
        key, value = parse_override(text)
        if not _known(key):
            raise ConfigError(f"unknown config key {key!r}")
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    return out


def load_raw(path: str | Path | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file {p} not found")
    data = yaml.safe_load(p.read_text()) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"config file {p} must hold a mapping")
    for key, value in data.items():
        if isinstance(value, dict) and key in ("network", "workload", "ablate"):
            for sub in value:
                if not _known(f"{key}.{sub}"):
                    raise ConfigError(f"unknown config key {key}.{sub!r}")
        elif not _known(key):
            raise ConfigError(f"unknown config key {key!r}")
    return data


def _build(cls, data: dict):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


@dataclasses.dataclass
class Experiment:
    sim: SimConfig
    extra: dict

    def resolved(self) -> dict:
        return {"sim": dataclasses.asdict(self.sim), "extra": self.extra}

    def config_hash(self) -> str:
        blob = json.dumps(self.resolved(), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()


def build_experiment(raw: dict, seed: int | None = None) -> Experiment:
    data = dict(raw)
    extra = json.loads(json.dumps(EXTRA_DEFAULTS))
    for key in list(data):
        if key in EXTRA_DEFAULTS:
            value = data.pop(key)
            if key == "ablate":
                extra["ablate"].update(value or {})
            else:
                extra[key] = value
    net = _build(NetworkSpec, {"nodes": 100, "candidates": 10, **(data.pop("network", None) or {})})
    wl = _build(WorkloadSpec, data.pop("workload", None) or {})
    if seed is not None:
        data["seed"] = seed
        net.seed = seed
    sim = _build(SimConfig, {"network": net, "workload": wl, **data})
    if isinstance(net.edges, list):
        net.edges = [tuple(e) for e in net.edges]
    try:
        net.validate()
        wl.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    sim.validate()
    return Experiment(sim, extra)


def load_experiment(path=None, overrides=(), seed: int | None = None) -> Experiment:
    return build_experiment(apply_overrides(load_raw(path), list(overrides)), seed)
