#!/usr/bin/env python3
"""Reference external filter: a deterministic stub emotion classifier.

Speaks the engine's plugin protocol end-to-end (config in, descriptor +
events + progress out, line-delimited JSON) without any real inference:
labels follow a fixed cycle and probabilities come from a seeded hash, so
identical configs always produce byte-identical output. A wrapper around
a real classifier would keep this file's structure and replace
``classify_window``.

Run standalone:  echo '{"type":"config",...}' | python3 emotion_stub.py
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

LABEL_CYCLE = ("neutral", "happy", "neutral", "surprised")

DESCRIPTOR = {
    "type": "descriptor",
    "name": "emotion-stub",
    "model_id": "emotion-stub",
    "model_version": "1",
    "outputs": [{"stream": "emotion", "variant": "event", "unit": None}],
}


def emit(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")
    sys.stdout.flush()


def classify_window(index: int, seed: int) -> tuple[str, float]:
    """Deterministic (label, probability) for one window.

    The probability is a uniform-ish value in [0, 1] derived from a
    cryptographic hash of (window index, seed): stable across platforms
    and Python versions, unlike the builtin hash().
    """
    label = LABEL_CYCLE[index % len(LABEL_CYCLE)]
    digest = hashlib.sha256(f"{index}:{seed}".encode("utf-8")).digest()
    p = int.from_bytes(digest[:4], "big") / 0xFFFFFFFF
    return label, round(p, 6)


def run_stub(config: dict) -> int:
    paths = config.get("recording_paths") or {}
    if not paths:
        emit({"type": "error", "message": "missing recording path"})
        return 1
    for path in paths.values():
        if not Path(path).exists():
            emit({"type": "error", "message": f"missing recording path: {path}"})
            return 1

    params = config.get("params") or {}
    window_ms = int(params.get("window_ms", 1000))
    hop_ms = int(params.get("hop_ms", window_ms))
    seed = int(params.get("seed", 0))
    t0 = int(config.get("t0_ms", 0))
    t1 = int(config.get("t1_ms", 0))

    emit(DESCRIPTOR)

    starts = list(range(t0, t1, hop_ms)) if t1 > t0 else []
    quarters = {max(1, round(len(starts) * q / 4)): q / 4 for q in (1, 2, 3, 4)}
    for k, start in enumerate(starts):
        label, p = classify_window(k, seed)
        emit({"type": "event", "t0_ms": start, "t1_ms": min(start + window_ms, t1),
              "label": label, "p": p})
        if (k + 1) in quarters:
            emit({"type": "progress", "fraction": quarters[k + 1]})
    if not starts:
        emit({"type": "progress", "fraction": 1.0})
    emit({"type": "done"})
    return 0


def main() -> int:
    line = sys.stdin.readline()
    try:
        config = json.loads(line)
    except json.JSONDecodeError:
        emit({"type": "error", "message": "config is not valid JSON"})
        return 1
    if config.get("type") != "config":
        emit({"type": "error", "message": "expected a config message"})
        return 1
    return run_stub(config)


if __name__ == "__main__":
    sys.exit(main())
