"""CLI configuration: store files, working directories and service ports."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class ConfigError(ValueError):
    """The config file is missing or names a missing key."""


_REQUIRED = ("dkg_file", "pkg_file", "staging_dir", "derived_dir", "key_dir")


@dataclass(frozen=True)
class CliConfig:
    dkg_file: Path
    pkg_file: Path
    staging_dir: Path
    derived_dir: Path
    key_dir: Path
    decision_log: Path
    dkg_port: int = 8131
    pkg_port: int = 8132
    control_port: int = 8130
    seed: int | None = None

    @staticmethod
    def load(path: Path) -> "CliConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        for key in _REQUIRED:
            if key not in raw:
                raise ConfigError(f"missing config key: {key}")
        base = path.parent

        def p(key: str, default: str | None = None) -> Path:
            value = raw.get(key, default)
            candidate = Path(value)
            return candidate if candidate.is_absolute() else base / candidate

        return CliConfig(
            dkg_file=p("dkg_file"),
            pkg_file=p("pkg_file"),
            staging_dir=p("staging_dir"),
            derived_dir=p("derived_dir"),
            key_dir=p("key_dir"),
            decision_log=p("decision_log", "decisions.jsonl"),
            dkg_port=int(raw.get("dkg_port", 8131)),
            pkg_port=int(raw.get("pkg_port", 8132)),
            control_port=int(raw.get("control_port", 8130)),
            seed=raw.get("seed"),
        )
