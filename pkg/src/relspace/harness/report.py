"""Experiment configuration and CSV reports."""
from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass, field

COLUMNS = ("experiment", "metric", "variant", "key", "seed", "value", "config_hash")


class ConfigError(ValueError):
    pass


def parse_config(text: str) -> dict[str, str]:
    """``key=value`` lines; blank lines and ``#`` comments are ignored."""
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"line {n}: expected key=value, got {line!r}")
        out[key.strip()] = value.strip()
    return out


def resolve(name: str, defaults: dict, config: dict | None) -> dict:
    """Typed parameters for experiment ``name``.

    Keys may be given bare or prefixed with ``name.``; keys prefixed with
    another experiment's name are ignored, anything else unknown is an
    error.
    """
    params = dict(defaults)
    for key, raw in (config or {}).items():
        prefix, dot, bare = key.rpartition(".")
        if dot and prefix != name:
            continue
        if bare not in defaults:
            if dot:
                raise ConfigError(f"unknown {name} parameter {bare!r}")
            continue
        params[bare] = _coerce(bare, raw, defaults[bare])
    return params


def _coerce(key, raw, default):
    if not isinstance(raw, str):
        return raw
    try:
        if isinstance(default, bool):
            if raw.lower() not in ("true", "false", "1", "0"):
                raise ValueError(raw)
            return raw.lower() in ("true", "1")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            kind = type(default[0]) if default else str
            return tuple(kind(x) for x in raw.split(",") if x.strip())
    except ValueError as e:
        raise ConfigError(f"bad value for {key}: {raw!r}") from e
    return raw


def config_hash(params: dict) -> str:
    text = ";".join(f"{k}={params[k]!r}" for k in sorted(params))
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


@dataclass
class ExperimentReport:
    name: str
    params: dict
    seed: int
    rows: list = field(default_factory=list)  # (metric, variant, key, value)
    plans: list = field(default_factory=list)  # per-trial plan records
    timing: list = field(default_factory=list)  # wall-clock notes, kept out of the CSV

    @property
    def config_hash(self) -> str:
        return config_hash(self.params)

    def add(self, metric: str, variant: str, key, value) -> None:
        self.rows.append((metric, variant, str(key), value))

    def value(self, metric: str, variant: str = "", key="") -> float:
        for m, v, k, val in self.rows:
            if m == metric and v == variant and k == str(key):
                return val
        raise KeyError((metric, variant, key))

    def values(self, metric: str, variant: str = "") -> list:
        return [val for m, v, k, val in self.rows if m == metric and v == variant]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        h = self.config_hash
        for metric, variant, key, value in self.rows:
            w.writerow((self.name, metric, variant, key, self.seed, fmt(value), h))
        return buf.getvalue()
