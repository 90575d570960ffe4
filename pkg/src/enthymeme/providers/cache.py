"""Content-addressed on-disk cache for provider responses.

Layout: one file per key under the cache directory, named by the
64-hex-digit key.  Each file is ``<sha256 of payload>\\n<payload>``; an
entry whose checksum does not match is treated as a miss.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import threading
from pathlib import Path

log = logging.getLogger(__name__)


def make_key(provider_id: str, operation: str, *inputs: object) -> str:
    """Hash of (provider id, operation, canonicalized inputs)."""
    canonical = json.dumps([provider_id, operation, list(inputs)], sort_keys=True,
                           ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class DiskCache:
    def __init__(self, directory: str | os.PathLike):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.Lock()

    def _path(self, key: str) -> Path:
        if len(key) != 64 or any(c not in "0123456789abcdef" for c in key):
            raise ValueError(f"cache keys are sha256 hex digests, got {key!r}")
        return self.directory / key

    def get(self, key: str) -> bytes | None:
        path = self._path(key)
        try:
            raw = path.read_bytes()
        except FileNotFoundError:
            return None
        header, sep, payload = raw.partition(b"\n")
        if not sep or header.decode("ascii", "replace") != hashlib.sha256(payload).hexdigest():
            log.warning("cache entry %s failed its checksum; treating as a miss", key)
            return None
        return payload

    def put(self, key: str, value: bytes) -> None:
        path = self._path(key)
        blob = hashlib.sha256(value).hexdigest().encode("ascii") + b"\n" + value
        with self._write_lock:
            fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=".tmp-")
            try:
                with os.fdopen(fd, "wb") as fh:
                    fh.write(blob)
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise

    def __contains__(self, key: str) -> bool:
        return self.get(key) is not None

