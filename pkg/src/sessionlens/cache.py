"""Content-addressed result cache with execution counting and in-flight dedup.

Each CacheKey maps to one directory holding the byte-exact outputs of a
single execution plus a meta file. The meta file is written last and acts
as the commit marker: a crash mid-persist leaves no visible entry, so the
next run simply executes again. Concurrent callers of the same key
coalesce onto one execution.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .model import CacheKey
from .storage import atomic_write, dump_json


@dataclass
class CachedOutput:
    """One named byte payload of an execution.

    ``variant`` is a stream variant for stream outputs, or ``"blob"`` for
    intermediate model artifacts that are not streams themselves.
    """

    name: str
    variant: str
    unit: str | None
    data: bytes


class ResultCache:
    """Disk-backed cache keyed by CacheKey tokens."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._inflight: dict[str, threading.Event] = {}
        self._errors: dict[str, BaseException] = {}
        self.total_executions = 0  # process-wide invocation count, for tests

    def _dir(self, key: CacheKey) -> Path:
        return self.root / key.token

    def _meta_path(self, key: CacheKey) -> Path:
        return self._dir(key) / "meta.json"

    def executions(self, key: CacheKey) -> int:
        """Completed executions recorded for this key (0 if never run)."""
        path = self._meta_path(key)
        if not path.exists():
            return 0
        return int(json.loads(path.read_text("utf-8")).get("executions", 0))

    def get(self, key: CacheKey) -> list[CachedOutput] | None:
        path = self._meta_path(key)
        if not path.exists():
            return None
        meta = json.loads(path.read_text("utf-8"))
        outputs = []
        for row in meta["outputs"]:
            data = (self._dir(key) / "outputs" / row["file"]).read_bytes()
            outputs.append(CachedOutput(name=row["name"], variant=row["variant"],
                                        unit=row.get("unit"), data=data))
        return outputs

    def get_or_run(self, key: CacheKey,
                   runner: Callable[[], list[CachedOutput]]) -> list[CachedOutput]:
        """Return cached outputs, executing ``runner`` once on a miss.

        Concurrent calls with the same key block until the first caller
        finishes and then read its persisted bytes; a runner failure
        caches nothing and re-raises in every coalesced caller.
        """
        while True:
            with self._lock:
                cached = self.get(key)
                if cached is not None:
                    return cached
                event = self._inflight.get(key.token)
                if event is None:
                    event = threading.Event()
                    self._inflight[key.token] = event
                    self._errors.pop(key.token, None)  # stale failure from a prior attempt
                    owner = True
                else:
                    owner = False
            if not owner:
                event.wait()
                err = self._errors.get(key.token)
                if err is not None:
                    raise err
                continue  # re-check the cache now that the owner committed
            try:
                self.total_executions += 1
                outputs = runner()
                self._persist(key, outputs)
                return outputs
            except BaseException as exc:
                with self._lock:
                    self._errors[key.token] = exc
                raise
            finally:
                with self._lock:
                    self._inflight.pop(key.token, None)
                event.set()

    def _persist(self, key: CacheKey, outputs: list[CachedOutput]) -> None:
        out_dir = self._dir(key) / "outputs"
        out_dir.mkdir(parents=True, exist_ok=True)
        rows = []
        for i, out in enumerate(outputs):
            fname = f"{i:03d}-{out.name}".replace("/", "_")
            atomic_write(out_dir / fname, out.data)
            rows.append({"name": out.name, "variant": out.variant,
                         "unit": out.unit, "file": fname})
        prior = self.executions(key)
        meta = {"key": {"recording_digest": key.recording_digest,
                        "model_id": key.model_id,
                        "model_version": key.model_version,
                        "params_digest": key.params_digest},
                "executions": prior + 1, "outputs": rows}
        atomic_write(self._meta_path(key), dump_json(meta))
