"""External filter plugins: process lifecycle and wire protocol.

A plugin is any executable speaking line-delimited JSON on stdin/stdout:

1. host -> plugin: ``{"type":"config","recording_paths":{...},"params":{...},"t0_ms":...,"t1_ms":...}``
2. plugin -> host: ``{"type":"descriptor","name":...,"model_id":...,"model_version":...,"outputs":[{"stream":...,"variant":...,"unit":...}]}``
3. plugin -> host, repeated: ``{"type":"sample",...}`` | ``{"type":"event","t0_ms":...,"t1_ms":...,"label":...,"p":...}`` | ``{"type":"progress","fraction":...}``
4. plugin -> host, terminal: ``{"type":"done"}`` | ``{"type":"error","message":...}``

Exit code 0 is required after ``done``. Plugins read media from the paths
in the config themselves; nothing heavy crosses the pipe. Every emitted
record is validated before the engine persists anything.
"""

from __future__ import annotations

import json
import math
import queue
import shutil
import subprocess
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from .errors import PluginError
from .model import EventSpan, Record, Sample

HANDSHAKE_TIMEOUT_S = 10.0
MESSAGE_TIMEOUT_S = 300.0
STDERR_TAIL_CHARS = 2000


@dataclass
class PluginOutputDecl:
    stream: str
    variant: str
    unit: str | None = None


@dataclass
class PluginDescriptor:
    name: str
    model_id: str
    model_version: str
    outputs: list[PluginOutputDecl] = field(default_factory=list)


@dataclass
class PluginRun:
    """Everything a completed plugin run produced."""

    descriptor: PluginDescriptor
    records: dict[str, list[Record]] = field(default_factory=dict)
    progress: list[float] = field(default_factory=list)


def resolve_command(command: list[str]) -> None:
    """Registration-time check that the plugin executable exists."""
    if not command:
        raise PluginError("plugin not found: empty command")
    exe = command[0]
    if shutil.which(exe) is None and not Path(exe).exists():
        raise PluginError(f"plugin not found: {exe}")


class _LineReader:
    """Background reader so protocol reads can time out without blocking."""

    def __init__(self, pipe):
        self._queue: queue.Queue[str | None] = queue.Queue()
        self._thread = threading.Thread(target=self._pump, args=(pipe,), daemon=True)
        self._thread.start()

    def _pump(self, pipe):
        try:
            for line in pipe:
                self._queue.put(line)
        except ValueError:
            pass  # pipe closed under us
        self._queue.put(None)

    def next_line(self, timeout: float) -> str | None:
        try:
            return self._queue.get(timeout=timeout)
        except queue.Empty:
            raise TimeoutError


def _parse_message(line: str, line_no: int) -> dict[str, Any]:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise PluginError(f"malformed message at line {line_no}: {exc.msg}") from exc
    if not isinstance(obj, dict) or "type" not in obj:
        raise PluginError(f"malformed message at line {line_no}: missing type")
    return obj


def _validate_record(obj: dict[str, Any], line_no: int, duration_ms: int) -> Record:
    kind = obj["type"]
    try:
        if kind == "sample":
            rec: Record = Sample(t_ms=int(obj["t_ms"]), value=float(obj["value"]),
                                 voiced=obj.get("voiced"))
            t0, t1 = rec.t_ms, rec.t_ms
            if not math.isfinite(rec.value):
                raise PluginError(
                    f"plugin emitted invalid sample at line {line_no}: non-finite value")
        else:
            rec = EventSpan(t0_ms=int(obj["t0_ms"]), t1_ms=int(obj["t1_ms"]),
                            label=str(obj["label"]), probability=float(obj["p"]))
            t0, t1 = rec.t0_ms, rec.t1_ms
            if not (0.0 <= rec.probability <= 1.0) or not math.isfinite(rec.probability):
                raise PluginError(
                    f"invalid probability {obj['p']} at line {line_no}")
            if not rec.label:
                raise PluginError(f"empty label at line {line_no}")
    except (KeyError, TypeError, ValueError) as exc:
        raise PluginError(f"malformed message at line {line_no}: {exc}") from exc
    if t0 > t1 or t0 < 0 or t1 > duration_ms:
        raise PluginError(
            f"plugin emitted invalid sample at line {line_no}: "
            f"timestamps [{t0},{t1}] outside [0,{duration_ms}]")
    return rec


def host_plugin(command: list[str], recording_paths: dict[str, str],
                params: dict[str, Any], duration_ms: int,
                t0_ms: int = 0, t1_ms: int | None = None,
                handshake_timeout_s: float = HANDSHAKE_TIMEOUT_S,
                message_timeout_s: float = MESSAGE_TIMEOUT_S,
                expected_identity: tuple[str, str] | None = None,
                on_progress: Callable[[float], None] | None = None,
                on_record: Callable[[str, Record], None] | None = None) -> PluginRun:
    """Run one plugin process to completion and collect validated output.

    Parameters
    ----------
    command : list of str
        Argv of the plugin executable.
    recording_paths : dict
        Recording id -> media path handed to the plugin in the config.
    params : dict
        Filter params, forwarded verbatim (cache-keyed upstream).
    duration_ms : int
        Recording duration; emitted timestamps must stay inside it.
    t0_ms, t1_ms : int
        Analysis range given to the plugin (defaults to the whole recording).
    expected_identity : (model_id, model_version), optional
        When given, the descriptor must match; cache keys were derived
        from the registered identity before the process ever ran.
    on_progress, on_record : callables, optional
        Streaming hooks; ``on_record(stream_name, record)`` fires after
        validation, in emission order.

    Raises
    ------
    PluginError
        Handshake timeout, malformed or invalid messages, plugin-reported
        error, or nonzero exit. The message carries a stderr tail when the
        process wrote one.
    """
    try:
        proc = subprocess.Popen(command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                stderr=subprocess.PIPE, text=True, bufsize=1)
    except OSError as exc:
        raise PluginError(f"plugin not found: {command[0]} ({exc})") from exc

    stderr_chunks: list[str] = []
    stderr_thread = threading.Thread(
        target=lambda: stderr_chunks.extend(proc.stderr), daemon=True)
    stderr_thread.start()
    reader = _LineReader(proc.stdout)

    def stderr_tail() -> str:
        stderr_thread.join(timeout=1.0)
        text = "".join(stderr_chunks)[-STDERR_TAIL_CHARS:]
        return f"; stderr: {text.strip()}" if text.strip() else ""

    def fail(message: str) -> PluginError:
        if proc.poll() is None:
            proc.kill()
        proc.wait()
        return PluginError(message + stderr_tail())

    config = {"type": "config", "recording_paths": recording_paths, "params": params,
              "t0_ms": t0_ms, "t1_ms": duration_ms if t1_ms is None else t1_ms}
    try:
        proc.stdin.write(json.dumps(config, sort_keys=True) + "\n")
        proc.stdin.flush()
    except (BrokenPipeError, OSError):
        raise fail("plugin closed stdin during handshake")

    try:
        first = reader.next_line(handshake_timeout_s)
    except TimeoutError:
        raise fail(f"plugin handshake timeout after {handshake_timeout_s:g}s")
    if first is None:
        raise fail("plugin exited before sending a descriptor")

    line_no = 1
    msg = _parse_message(first, line_no)
    if msg.get("type") != "descriptor":
        raise fail(f"malformed message at line {line_no}: expected descriptor")
    try:
        descriptor = PluginDescriptor(
            name=str(msg["name"]), model_id=str(msg["model_id"]),
            model_version=str(msg["model_version"]),
            outputs=[PluginOutputDecl(stream=str(o["stream"]), variant=str(o["variant"]),
                                      unit=o.get("unit")) for o in msg["outputs"]])
    except (KeyError, TypeError) as exc:
        raise fail(f"malformed message at line {line_no}: bad descriptor: {exc}")
    if not descriptor.outputs:
        raise fail("plugin descriptor declares no outputs")
    if expected_identity is not None and \
            (descriptor.model_id, descriptor.model_version) != expected_identity:
        raise fail(
            f"plugin descriptor mismatch: got ({descriptor.model_id}, "
            f"{descriptor.model_version}), registered {expected_identity}")

    run = PluginRun(descriptor=descriptor,
                    records={o.stream: [] for o in descriptor.outputs})
    default_stream = descriptor.outputs[0].stream
    last_progress = 0.0
    done = False
    while True:
        try:
            line = reader.next_line(message_timeout_s)
        except TimeoutError:
            raise fail(f"plugin message timeout after {message_timeout_s:g}s")
        if line is None:
            break
        line_no += 1
        if not line.strip():
            continue
        try:
            msg = _parse_message(line, line_no)
            mtype = msg["type"]
            if mtype == "done":
                done = True
            elif mtype == "error":
                raise PluginError(f"plugin error: {msg.get('message', '')}")
            elif mtype == "progress":
                frac = float(msg.get("fraction", -1))
                if not (0.0 <= frac <= 1.0) or not math.isfinite(frac):
                    raise PluginError(f"malformed message at line {line_no}: bad fraction")
                last_progress = max(last_progress, frac)  # feed stays monotone
                run.progress.append(last_progress)
                if on_progress:
                    on_progress(last_progress)
            elif mtype in ("sample", "event"):
                rec = _validate_record(msg, line_no, duration_ms)
                name = str(msg.get("stream", default_stream))
                if name not in run.records:
                    raise PluginError(
                        f"malformed message at line {line_no}: undeclared stream {name!r}")
                run.records[name].append(rec)
                if on_record:
                    on_record(name, rec)
            else:
                raise PluginError(f"malformed message at line {line_no}: "
                                  f"unknown type {mtype!r}")
        except PluginError as exc:
            raise fail(str(exc))
        if done:
            break

    code = proc.wait()
    if not done:
        raise PluginError(f"plugin exited with code {code} before done" + stderr_tail())
    if code != 0:
        raise PluginError(f"plugin exited with code {code} after done" + stderr_tail())
    stderr_thread.join(timeout=1.0)
    return run
