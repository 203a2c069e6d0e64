"""Versioned JSON persistence for memoized invariant values.

The file maps canonical bracket keys to exact rational strings.  Loading and
saving is byte-stable (keys sorted); a version mismatch refuses the file
outright rather than risking a silently corrupting merge.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .algebra import rat_from_str, rat_str
from .errors import CacheError
from .wdvv import MemoStore

FORMAT_VERSION = 1


@dataclass
class CacheFile:
    version: int = FORMAT_VERSION
    entries: dict = field(default_factory=dict)  # canonical key -> "p/q"

    @property
    def targets(self) -> list:
        return sorted({key.split("|", 1)[0] for key in self.entries})

    @classmethod
    def from_store(cls, store: MemoStore) -> "CacheFile":
        return cls(entries={k: rat_str(v) for k, v in store.items()})

    def merge_store(self, store: MemoStore) -> None:
        for k, v in store.items():
            self._put(k, rat_str(v))

    def merge_file(self, other: "CacheFile") -> None:
        for k, v in other.entries.items():
            self._put(k, v)

    def _put(self, key: str, value: str) -> None:
        old = self.entries.get(key)
        if old is not None and old != value:
            raise CacheError(f"conflicting cached values at {key}: {old} vs {value}")
        self.entries[key] = value

    def load_into(self, store: MemoStore) -> None:
        for k, v in sorted(self.entries.items()):
            store.insert(k, Fraction(rat_from_str(v)))

    def dumps(self) -> str:
        payload = {
            "format_version": self.version,
            "targets": self.targets,
            "entries": dict(sorted(self.entries.items())),
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str) -> "CacheFile":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CacheError(f"cache file is not valid JSON: {exc}") from exc
        version = payload.get("format_version")
        if version != FORMAT_VERSION:
            raise CacheError(
                f"cache format version {version!r} does not match {FORMAT_VERSION}; refusing"
            )
        entries = payload.get("entries", {})
        if not isinstance(entries, dict):
            raise CacheError("cache entries must be an object")
        return cls(version=version, entries=dict(entries))

    @classmethod
    def load(cls, path) -> "CacheFile":
        return cls.loads(Path(path).read_text(encoding="utf-8"))

    def stats(self) -> dict:
        return {
            "entries": len(self.entries),
            "targets": self.targets,
            "format_version": self.version,
        }
