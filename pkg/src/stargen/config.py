"""Backend settings from a ``stargen.toml``-style key/value file plus
``STARGEN_``-prefixed environment overrides.

The file format is deliberately flat: one ``key = value`` per line, ``#``
comments, optional quotes around values. Credentials are referenced by the
name of an environment variable (``api_key_env``), never stored inline.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping

from .proposer import (
    DEFAULT_ATTEMPTS, DEFAULT_TIMEOUT_S, HttpBackend, MockBackend, VlmBackend,
    bundled_fixtures_dir,
)

ENV_PREFIX = "STARGEN_"
DEFAULT_CONFIG_NAME = "stargen.toml"


@dataclass
class BackendSettings:
    backend: str = "mock"          # "mock" or "http"
    endpoint_url: str = ""
    model: str = ""
    api_key_env: str = ""          # name of the env var holding the credential
    timeout_s: float = DEFAULT_TIMEOUT_S
    retries: int = DEFAULT_ATTEMPTS
    fixtures_dir: str = ""         # mock backend fixture directory


def parse_kv_text(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("["):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        value = value.strip()
        if value and value[0] in "\"'" and value[-1] == value[0] and len(value) >= 2:
            value = value[1:-1]
        values[key.strip()] = value
    return values


def load_settings(path: str | Path | None = None,
                  env: Mapping[str, str] | None = None) -> BackendSettings:
    env = os.environ if env is None else env
    raw: dict[str, str] = {}
    if path is not None and Path(path).exists():
        raw.update(parse_kv_text(Path(path).read_text(encoding="utf-8")))
    settings = BackendSettings()
    for f in fields(BackendSettings):
        value = env.get(ENV_PREFIX + f.name.upper(), raw.get(f.name))
        if value is None:
            continue
        if f.type in ("float", float):
            setattr(settings, f.name, float(value))
        elif f.type in ("int", int):
            setattr(settings, f.name, int(value))
        else:
            setattr(settings, f.name, value)
    return settings


def build_backend(settings: BackendSettings,
                  env: Mapping[str, str] | None = None) -> VlmBackend:
    env = os.environ if env is None else env
    if settings.backend == "mock":
        fixtures = Path(settings.fixtures_dir) if settings.fixtures_dir \
            else bundled_fixtures_dir()
        return MockBackend(fixtures_dir=fixtures)
    if settings.backend == "http":
        if not settings.endpoint_url:
            raise ValueError("http backend requires endpoint_url")
        api_key = env.get(settings.api_key_env) if settings.api_key_env else None
        return HttpBackend(
            endpoint=settings.endpoint_url,
            model=settings.model,
            api_key=api_key,
            timeout_s=settings.timeout_s,
            attempts=settings.retries,
        )
    raise ValueError(f"unknown backend kind {settings.backend!r}")
