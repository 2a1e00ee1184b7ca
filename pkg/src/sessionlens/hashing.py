"""Canonical JSON hashing for params and content digests."""

from __future__ import annotations

import hashlib
import json
import math
from typing import Any

from .errors import InvalidInputError


def _check_canonical(obj: Any) -> None:
    # json.dumps(allow_nan=False) also rejects these, but raising ourselves
    # gives a stable message instead of json's ValueError.
    if isinstance(obj, float) and not math.isfinite(obj):
        raise InvalidInputError(f"non-canonical value: {obj!r}")
    if isinstance(obj, dict):
        for k, v in obj.items():
            if not isinstance(k, str):
                raise InvalidInputError(f"non-canonical value: non-string key {k!r}")
            _check_canonical(v)
    elif isinstance(obj, (list, tuple)):
        for v in obj:
            _check_canonical(v)
    elif obj is not None and not isinstance(obj, (str, int, float, bool)):
        raise InvalidInputError(f"non-canonical value: {type(obj).__name__}")


def canonical_json(obj: Any) -> str:
    """Serialize ``obj`` with sorted keys and minimal separators.

    Equal mappings serialize to equal strings regardless of insertion
    order. NaN and infinities are rejected: they have no canonical JSON
    form and would silently break digest equality.
    """
    _check_canonical(obj)
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def canonical_hash(obj: Any) -> str:
    """Hex SHA-256 of the canonical JSON encoding of ``obj``."""
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def digest_bytes(data: bytes) -> str:
    """Hex SHA-256 of raw bytes (used for media content digests)."""
    return hashlib.sha256(data).hexdigest()


def digest_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
