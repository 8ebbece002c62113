"""Canonical JSON forms used across file formats.

Documents (manifests, reports, chart data) serialize with sorted keys,
2-space indentation, ``\\n`` line endings and a trailing newline, so equal
values always produce identical bytes. Log events use the compact one-line
form plus a truncated SHA-256 checksum.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

CHECK_FIELD = "check"
_CHECK_LEN = 12


def canonical_dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def canonical_bytes(obj: Any) -> bytes:
    return canonical_dumps(obj).encode("utf-8")


def canonical_line(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def event_checksum(event: dict) -> str:
    """Checksum of an event dict, ignoring any embedded checksum field."""
    payload = {k: v for k, v in event.items() if k != CHECK_FIELD}
    return sha256_hex(canonical_line(payload).encode("utf-8"))[:_CHECK_LEN]


def seal_event(event: dict) -> dict:
    sealed = dict(event)
    sealed[CHECK_FIELD] = event_checksum(event)
    return sealed


def verify_event(event: dict) -> bool:
    return event.get(CHECK_FIELD) == event_checksum(event)
