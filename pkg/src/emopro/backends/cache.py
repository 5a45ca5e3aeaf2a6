"""Content-addressed cache for backend responses.

Keys are derived from the role, model id, and the canonical JSON form of
the request payload, so a byte-identical request never travels the wire
twice. Entries are immutable once written; writes go through a temp file
plus atomic rename so concurrent processes can share one cache directory.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .roles import BackendRole

logger = logging.getLogger(__name__)


def canonical_json(value: Any) -> bytes:
    """Serialize with sorted keys and no whitespace; the cache-key form."""
    return json.dumps(
        value, sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def request_key(role: BackendRole, model_id: str, payload: dict) -> str:
    digest = hashlib.sha256()
    digest.update(role.value.encode("utf-8"))
    digest.update(b"\x00")
    digest.update(model_id.encode("utf-8"))
    digest.update(b"\x00")
    digest.update(canonical_json(payload))
    return digest.hexdigest()


@dataclass(frozen=True)
class CacheRecord:
    key: str
    role: BackendRole
    path: Path
    size_bytes: int
    created_at: float


class RequestCache:
    """File-per-entry response cache rooted at a directory."""

    def __init__(self, root: Path | str) -> None:
        self.root = Path(root)

    def entry_path(self, role: BackendRole, key: str) -> Path:
        # Two-level fanout keeps directory listings manageable.
        return self.root / role.value / key[:2] / key

    def get(self, role: BackendRole, key: str) -> bytes | None:
        path = self.entry_path(role, key)
        try:
            return path.read_bytes()
        except FileNotFoundError:
            return None

    def put(self, role: BackendRole, key: str, value: bytes) -> Path:
        path = self.entry_path(role, key)
        if path.exists():
            # Entries are immutable; first write wins.
            return path
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.parent / f".{key}.{uuid.uuid4().hex}.tmp"
        tmp.write_bytes(value)
        os.replace(tmp, path)
        logger.debug("cached %s response under %s", role.value, key[:12])
        return path

    def record(self, role: BackendRole, key: str) -> CacheRecord | None:
        path = self.entry_path(role, key)
        try:
            stat = path.stat()
        except FileNotFoundError:
            return None
        return CacheRecord(
            key=key,
            role=role,
            path=path,
            size_bytes=stat.st_size,
            created_at=stat.st_mtime,
        )
