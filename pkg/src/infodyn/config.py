"""Experiment configuration files (YAML) and their validation.

A config has a fixed top level::

    schema_version: 1
    kind: decohere
    seed: 7
    threads: 0          # optional
    output: {dir: out}  # optional
    params: {...}       # kind-specific, see infodyn.experiments

Validation collects every violation, each prefixed with the dotted path of
the offending field, before anything runs.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import yaml

SCHEMA_VERSION = 1
U64_MAX = 2**64 - 1

_MISSING = object()


class ConfigError(Exception):
    """Raised with the full list of violations."""

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


class Section:
    """Typed access to one mapping of a config, recording violations."""

    def __init__(self, data: Any, path: str, errors: list[str]):
        self.path = path
        self.errors = errors
        if not isinstance(data, dict):
            self.fail("", "must be a mapping")
            data = {}
        self.data = data
        self.seen: set[str] = set()

    def where(self, name: str) -> str:
        return f"{self.path}.{name}" if self.path and name else (self.path or name)

    def fail(self, name: str, message: str) -> None:
        self.errors.append(f"{self.where(name)}: {message}")

    def has(self, name: str) -> bool:
        return name in self.data

    def _raw(self, name: str, default):
        self.seen.add(name)
        if name in self.data:
            return self.data[name]
        if default is _MISSING:
            self.fail(name, "is required")
        return default

    def number(self, name: str, default=_MISSING, check: Callable[[float], bool] | None = None, rule: str = ""):
        v = self._raw(name, default)
        if v is None or v is _MISSING:
            return None
        if not _is_number(v):
            self.fail(name, "must be a number")
            return None
        if check is not None and not check(v):
            self.fail(name, f"must be {rule}")
            return None
        return float(v)

    def integer(self, name: str, default=_MISSING, lo: int | None = None, hi: int | None = None):
        v = self._raw(name, default)
        if v is None or v is _MISSING:
            return None
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail(name, "must be an integer")
            return None
        if (lo is not None and v < lo) or (hi is not None and v > hi):
            bounds = f">= {lo}" if hi is None else f"in [{lo}, {hi}]"
            self.fail(name, f"must be {bounds}")
            return None
        return v

    def numbers(self, name: str, default=_MISSING, check: Callable[[float], bool] | None = None, rule: str = ""):
        v = self._raw(name, default)
        if v is None or v is _MISSING:
            return None
        if not isinstance(v, list) or not v or not all(_is_number(x) for x in v):
            self.fail(name, "must be a non-empty list of numbers")
            return None
        if check is not None:
            bad = [k for k, x in enumerate(v) if not check(x)]
            if bad:
                self.fail(f"{name}[{bad[0]}]", f"must be {rule}")
                return None
        return [float(x) for x in v]

    def matrix(self, name: str, default=_MISSING):
        v = self._raw(name, default)
        if v is None or v is _MISSING:
            return None
        ok = isinstance(v, list) and v and all(
            isinstance(r, list) and len(r) == len(v) and all(_is_number(x) for x in r) for r in v
        )
        if not ok:
            self.fail(name, "must be a square matrix given as a list of equal-length rows")
            return None
        return [[float(x) for x in r] for r in v]

    def string(self, name: str, default=_MISSING, choices: tuple[str, ...] | None = None):
        v = self._raw(name, default)
        if v is None or v is _MISSING:
            return None
        if not isinstance(v, str) or (choices and v not in choices):
            self.fail(name, f"must be one of {list(choices)}" if choices else "must be a string")
            return None
        return v

    def section(self, name: str, required: bool = True) -> Section | None:
        v = self._raw(name, _MISSING if required else None)
        if v is None or v is _MISSING:
            return None
        return Section(v, self.where(name), self.errors)

    def finish(self) -> None:
        for key in self.data:
            if key not in self.seen:
                self.fail(str(key), "unknown field")


@dataclass
class ExperimentConfig:
    kind: str
    seed: int
    params: dict[str, Any]
    threads: int = 1
    out_dir: str | None = None
    schema_version: int = SCHEMA_VERSION
    config_hash: str = ""
    built: dict[str, Any] = field(default_factory=dict)


def load_yaml(path: str | Path) -> tuple[Any, bytes]:
    raw = Path(path).read_bytes()
    try:
        return yaml.safe_load(raw), raw
    except yaml.YAMLError as exc:
        raise ConfigError([f"config: not valid YAML ({exc})"]) from exc


def parse_config(data: Any, raw: bytes = b"", seed_override: int | None = None) -> ExperimentConfig:
    """Validate a parsed config; raises :class:`ConfigError` listing every violation."""
    from .experiments import KINDS

    errors: list[str] = []
    top = Section(data, "", errors)
    version = top.integer("schema_version")
    if version is not None and version != SCHEMA_VERSION:
        top.fail("schema_version", f"unsupported version {version}; expected {SCHEMA_VERSION}")
    kind = top.string("kind", choices=tuple(KINDS))
    seed = top.integer("seed", lo=0, hi=U64_MAX)
    if seed_override is not None:
        seed = seed_override
    threads = top.integer("threads", default=1, lo=0)
    out_dir = None
    output = top.section("output", required=False)
    if output is not None:
        out_dir = output.string("dir", default=None)
        output.finish()
    params = top.section("params")
    built: dict[str, Any] = {}
    if params is not None and kind is not None:
        built = KINDS[kind].validate(params)
        params.finish()
    top.finish()
    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(
        kind=kind,
        seed=seed,
        params=dict(data["params"]),
        threads=threads,
        out_dir=out_dir,
        schema_version=version,
        config_hash=hashlib.sha256(raw).hexdigest(),
        built=built,
    )


def load_config(path: str | Path, seed_override: int | None = None) -> ExperimentConfig:
    data, raw = load_yaml(path)
    return parse_config(data, raw, seed_override)
