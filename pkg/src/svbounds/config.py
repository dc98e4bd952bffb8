"""Experiment configuration, hashing and run manifests."""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .catalog import CatalogError, function_catalog
from .ensembles import CLASSES, MODES
from .modulus import Modulus, ModulusError

__all__ = ["ConfigError", "ExperimentConfig", "RunManifest", "config_hash", "parse_list", "COMMANDS"]

COMMANDS = (
    "check-partition",
    "decompose",
    "verify-upper",
    "verify-bernstein",
    "converse",
    "lower-bound",
    "line-transfer",
    "report",
)

# fields that do not change report bytes
_UNHASHED = ("out", "dump", "config")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def parse_list(value, cast=float, name: str = "value") -> list:
    """Accept ``"1,2,4"``, a scalar or a JSON list."""
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        items = list(value)
    elif isinstance(value, str):
        items = [v for v in value.replace(" ", "").split(",") if v]
    else:
        items = [value]
    try:
        return [cast(v) for v in items]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {name} list {value!r}") from exc


def _int_like(v) -> int:
    f = float(v)
    if f != int(f):
        raise ValueError(f"{v!r} is not an integer")
    return int(f)


@dataclass
class ExperimentConfig:
    """Validated parameters of one command run.

    Values not covered by a named field (e.g. ``K`` for ``lower-bound``)
    live in ``extra``.
    """

    command: str
    kind: str | None = None
    dims: list = field(default_factory=list)
    ps: list = field(default_factory=list)
    l_policy: object = "full"
    js: list = field(default_factory=lambda: [0])
    modulus: Modulus | None = None
    functions: list = field(default_factory=list)
    trials: int = 0
    seed: int | None = None
    out: str | None = None
    cap: float = 100.0
    extra: dict = field(default_factory=dict)

    SEEDED = ("verify-upper", "verify-bernstein")

    @classmethod
    def from_mapping(cls, command: str, data: dict) -> "ExperimentConfig":
        """Normalise and validate a flat mapping of option names to values."""
        if command not in COMMANDS:
            raise ConfigError(f"unknown command {command!r}")
        data = {k.replace("-", "_"): v for k, v in data.items() if v is not None}
        cfg = cls(command)
        cfg.kind = data.pop("kind", data.pop("class", None))
        cfg.dims = parse_list(data.pop("dim", data.pop("dims", None)), _int_like, "dim")
        cfg.ps = parse_list(data.pop("p", data.pop("ps", None)), float, "p")
        l_raw = data.pop("l", data.pop("l_policy", "full"))
        cfg.l_policy = "full" if l_raw in ("full", ["full"]) else parse_list(l_raw, _int_like, "l")
        js = data.pop("j", data.pop("js", None))
        cfg.js = parse_list(js, _int_like, "j") if js is not None else [0]
        om = data.pop("omega", data.pop("modulus", None))
        try:
            if isinstance(om, dict):
                cfg.modulus = Modulus.from_dict(om)
            elif om is not None:
                cfg.modulus = Modulus.parse(str(om))
        except (ModulusError, ValueError, KeyError) as exc:
            raise ConfigError(f"bad modulus {om!r}: {exc}") from exc
        f = data.pop("f", data.pop("functions", None))
        if f is not None:
            cfg.functions = [f] if isinstance(f, str) else list(f)
        if "trials" in data:
            cfg.trials = data.pop("trials")
        if "seed" in data:
            cfg.seed = data.pop("seed")
        cfg.out = data.pop("out", None)
        if "cap" in data:
            cfg.cap = data.pop("cap")
        cfg.extra = data
        cfg.validate()
        return cfg

    def validate(self) -> None:
        try:
            self.trials = _int_like(self.trials)
            self.cap = float(self.cap)
            if self.seed is not None:
                self.seed = _int_like(self.seed)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        if self.command in self.SEEDED and self.seed is None:
            raise ConfigError(f"{self.command} requires --seed")
        if self.command == "converse" and self.extra.get("random") and self.seed is None:
            raise ConfigError("converse --random requires --seed")
        if self.trials < 0:
            raise ConfigError("trials must be nonnegative")
        if self.kind is not None and self.kind not in CLASSES:
            raise ConfigError(f"unknown operator class {self.kind!r}; choose from {', '.join(CLASSES)}")
        if any(d < 1 for d in self.dims):
            raise ConfigError("dimensions must be positive")
        if any(p < 1 for p in self.ps):
            raise ConfigError("Schatten exponents must be >= 1")
        if any(j < 0 for j in self.js):
            raise ConfigError("j must be nonnegative")
        if self.l_policy != "full" and any(l < 0 for l in self.l_policy):
            raise ConfigError("l must be nonnegative")
        if not self.cap > 0:
            raise ConfigError("cap must be positive")
        modes = self.extra.get("modes")
        if modes is not None:
            modes = parse_list(modes, str, "modes")
            bad = [m for m in modes if m not in MODES]
            if bad:
                raise ConfigError(f"unknown perturbation modes {bad}")
            self.extra["modes"] = modes
        for name in self.functions:
            try:
                function_catalog(name)
            except CatalogError as exc:
                raise ConfigError(str(exc)) from exc
        if self.command in ("verify-upper", "verify-bernstein"):
            if self.kind is None:
                raise ConfigError(f"{self.command} requires --class")
            if not self.dims:
                raise ConfigError(f"{self.command} requires --dim")
            if not self.ps:
                self.ps = [2.0]
        if self.command == "verify-upper" and self.modulus is None:
            raise ConfigError("verify-upper requires --omega")
        if self.command in ("lower-bound", "line-transfer") and self.modulus is None:
            raise ConfigError(f"{self.command} requires --omega")

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "class": self.kind,
            "dims": list(self.dims),
            "ps": list(self.ps),
            "l": self.l_policy if self.l_policy == "full" else list(self.l_policy),
            "js": list(self.js),
            "modulus": self.modulus.to_dict() if self.modulus is not None else None,
            "functions": list(self.functions),
            "trials": self.trials,
            "seed": self.seed,
            "out": self.out,
            "cap": self.cap,
            "extra": dict(sorted(self.extra.items())),
        }

    def hash(self) -> str:
        return config_hash(self.to_dict())


def config_hash(data: dict) -> str:
    """sha256 of the canonical JSON of ``data`` minus output locations."""
    clean = {k: v for k, v in data.items() if k not in _UNHASHED}
    if isinstance(clean.get("extra"), dict):
        clean["extra"] = {k: v for k, v in clean["extra"].items() if k not in _UNHASHED}
    blob = json.dumps(clean, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def _file_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@dataclass
class RunManifest:
    config: dict
    version: str
    exit_status: int = 0
    outputs: list = field(default_factory=list)
    timestamp: str = field(default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"))
    message: str = ""

    @property
    def config_hash(self) -> str:
        return config_hash(self.config)

    def add_output(self, path) -> None:
        self.outputs.append(os.fspath(path))

    def to_dict(self) -> dict:
        outs = []
        for p in self.outputs:
            path = Path(p)
            outs.append({"path": p, "sha256": _file_digest(path) if path.is_file() else None})
        return {
            "config_hash": self.config_hash,
            "config": self.config,
            "tool_version": self.version,
            "timestamp": self.timestamp,
            "exit_status": self.exit_status,
            "message": self.message,
            "outputs": outs,
        }

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True, default=str) + "\n")
        return path
