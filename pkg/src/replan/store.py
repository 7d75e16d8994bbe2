"""Flat-JSON session store. Every object is a JSON document on disk; a
restart reloads the identical objects. Desk scale by design."""

from __future__ import annotations

import json
import os
import re
import threading
from typing import Iterator, Optional

_KINDS = ("instances", "plans", "scenarios", "repairs", "reports", "jobs")
_ID_RE = re.compile(r"^[a-z]+-(\d+)$")


class NotFound(KeyError):
    pass


class SessionStore:
    """Keyed JSON snapshots with generated ids, file-backed per kind."""

    def __init__(self, root: Optional[str] = None):
        self.root = root
        self._lock = threading.RLock()
        self._data: dict[str, dict[str, dict]] = {k: {} for k in _KINDS}
        self._counters: dict[str, int] = {k: 0 for k in _KINDS}
        if root:
            os.makedirs(root, exist_ok=True)
            self._load()

    def _load(self) -> None:
        for kind in _KINDS:
            d = os.path.join(self.root, kind)
            if not os.path.isdir(d):
                continue
            for fn in sorted(os.listdir(d)):
                if not fn.endswith(".json"):
                    continue
                obj_id = fn[:-5]
                with open(os.path.join(d, fn)) as fh:
                    self._data[kind][obj_id] = json.load(fh)
                m = _ID_RE.match(obj_id)
                if m:
                    self._counters[kind] = max(self._counters[kind], int(m.group(1)))

    def _persist(self, kind: str, obj_id: str) -> None:
        if not self.root:
            return
        d = os.path.join(self.root, kind)
        os.makedirs(d, exist_ok=True)
        tmp = os.path.join(d, f".{obj_id}.tmp")
        with open(tmp, "w") as fh:
            json.dump(self._data[kind][obj_id], fh, indent=2)
        os.replace(tmp, os.path.join(d, f"{obj_id}.json"))

    def put(self, kind: str, obj: dict, obj_id: Optional[str] = None) -> str:
        with self._lock:
            if obj_id is None:
                self._counters[kind] += 1
                prefix = kind.rstrip("s")
                obj_id = f"{prefix}-{self._counters[kind]:04d}"
            self._data[kind][obj_id] = obj
            self._persist(kind, obj_id)
            return obj_id

    def get(self, kind: str, obj_id: str) -> dict:
        with self._lock:
            try:
                return self._data[kind][obj_id]
            except KeyError:
                raise NotFound(f"{kind}/{obj_id}")

    def has(self, kind: str, obj_id: str) -> bool:
        with self._lock:
            return obj_id in self._data[kind]

    def ids(self, kind: str) -> list[str]:
        with self._lock:
            return sorted(self._data[kind])

    def update(self, kind: str, obj_id: str, obj: dict) -> None:
        with self._lock:
            if obj_id not in self._data[kind]:
                raise NotFound(f"{kind}/{obj_id}")
            self._data[kind][obj_id] = obj
            self._persist(kind, obj_id)
