"""Client for the out-of-process pretrained-encoder bridge.

The bridge is a separate program spoken to over stdin/stdout with
newline-delimited JSON frames ``{"kind", "id", "payload"}``.  Frames larger
than a threshold are sent length-prefixed as ``#<nbytes>\\n<json>\\n``; the
reader accepts both forms.  Every request id gets exactly one terminal
response; ``progress`` frames may precede a ``finetune_response``.

Frame payloads:

- hello            -> {"protocol": 1, "encoder": ..., "dim": 768}
- encode_request   -> {"texts": [...], "model": optional handle}
  encode_response  -> {"rows": [[768 floats], ...]}
- finetune_request -> {"train": {"texts", "classes"}, "holdout": {...} | null,
                       "hyperparams": {...}}
  progress         -> {"epoch": int, "train_loss": float, "holdout_loss": float | null}
  finetune_response-> {"handle": str, "head": {"W": [[...]], "c": [...]},
                       "trace": [...], "epochs_run": int}
- error            -> {"code": str, "message": str}
- shutdown         -> {}

The primary never requires the bridge: everything here raises
``BridgeUnavailableError`` when the configured command cannot be started,
and ``BridgeCrashError`` when a running bridge dies mid-conversation.
"""

from __future__ import annotations

import json
import subprocess
from typing import IO, Sequence

import numpy as np

PROTOCOL_VERSION = 1
LINE_FRAME_LIMIT = 1 << 20  # larger frames go length-prefixed

ENCODER_DIM = 768


class BridgeError(RuntimeError):
    pass


class BridgeUnavailableError(BridgeError):
    """The bridge process could not be started at all."""


class BridgeCrashError(BridgeError):
    """The bridge process died or sent garbage mid-conversation."""


class BridgeRemoteError(BridgeError):
    """The bridge answered with an error frame."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


def write_frame(stream: IO[bytes], kind: str, frame_id: int, payload: dict) -> None:
    body = json.dumps({"kind": kind, "id": frame_id, "payload": payload}).encode("utf-8")
    if len(body) > LINE_FRAME_LIMIT:
        stream.write(b"#%d\n" % len(body) + body + b"\n")
    else:
        stream.write(body + b"\n")
    stream.flush()


def read_frame(stream: IO[bytes]) -> dict | None:
    line = stream.readline()
    if not line:
        return None
    if line.startswith(b"#"):
        try:
            nbytes = int(line[1:].strip())
        except ValueError:
            raise BridgeCrashError(f"malformed length prefix: {line[:40]!r}") from None
        body = stream.read(nbytes)
        if len(body) != nbytes:
            raise BridgeCrashError("truncated length-prefixed frame")
        stream.readline()  # trailing newline
    else:
        body = line
    try:
        frame = json.loads(body)
    except json.JSONDecodeError:
        raise BridgeCrashError(f"malformed frame: {body[:80]!r}") from None
    if not isinstance(frame, dict) or "kind" not in frame:
        raise BridgeCrashError("frame missing kind")
    return frame


class BridgeClient:
    """Serializes requests to one bridge subprocess and matches responses."""

    def __init__(self, command: Sequence[str], timeout: float = 300.0):
        self.command = list(command)
        self.timeout = timeout
        self._next_id = 0
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
            )
        except OSError as exc:
            raise BridgeUnavailableError(f"cannot start bridge {self.command!r}: {exc}") from exc
        hello = self._read_or_crash()
        if hello.get("kind") != "hello":
            raise BridgeCrashError(f"expected hello frame, got {hello.get('kind')!r}")
        proto = hello.get("payload", {}).get("protocol")
        if proto != PROTOCOL_VERSION:
            raise BridgeError(f"protocol version mismatch: bridge speaks {proto!r}")
        self.hello = hello["payload"]

    def _read_or_crash(self) -> dict:
        assert self._proc.stdout is not None
        frame = read_frame(self._proc.stdout)
        if frame is None:
            code = self._proc.poll()
            raise BridgeCrashError(f"bridge closed its stdout (exit status {code})")
        return frame

    def _request(self, kind: str, payload: dict, on_progress=None) -> dict:
        if self._proc.poll() is not None:
            raise BridgeCrashError(f"bridge already exited with status {self._proc.returncode}")
        self._next_id += 1
        frame_id = self._next_id
        assert self._proc.stdin is not None
        try:
            write_frame(self._proc.stdin, kind, frame_id, payload)
        except BrokenPipeError as exc:
            raise BridgeCrashError("bridge stdin closed") from exc
        while True:
            frame = self._read_or_crash()
            if frame.get("id") != frame_id:
                raise BridgeCrashError(f"response id {frame.get('id')} != request id {frame_id}")
            if frame["kind"] == "progress":
                if on_progress is not None:
                    on_progress(frame["payload"])
                continue
            if frame["kind"] == "error":
                p = frame.get("payload", {})
                raise BridgeRemoteError(p.get("code", "unknown"), p.get("message", ""))
            return frame

    def encode(self, texts: Sequence[str], model: str | None = None) -> np.ndarray:
        """Batch encode; row i corresponds to text i, always 768 wide."""
        frame = self._request("encode_request", {"texts": list(texts), "model": model})
        if frame["kind"] != "encode_response":
            raise BridgeCrashError(f"expected encode_response, got {frame['kind']!r}")
        rows = np.array(frame["payload"]["rows"], dtype=float)
        if rows.size == 0:
            return rows.reshape(0, ENCODER_DIM)
        if rows.shape != (len(texts), ENCODER_DIM):
            raise BridgeCrashError(f"bad encode response shape {rows.shape}")
        return rows

    def finetune(
        self,
        train_texts: Sequence[str],
        train_classes: Sequence[int],
        holdout_texts: Sequence[str] | None = None,
        holdout_classes: Sequence[int] | None = None,
        hyperparams: dict | None = None,
        on_progress=None,
    ) -> dict:
        payload = {
            "train": {"texts": list(train_texts), "classes": [int(c) for c in train_classes]},
            "holdout": None
            if holdout_texts is None
            else {
                "texts": list(holdout_texts),
                "classes": [int(c) for c in holdout_classes or []],
            },
            "hyperparams": hyperparams or {},
        }
        frame = self._request("finetune_request", payload, on_progress=on_progress)
        if frame["kind"] != "finetune_response":
            raise BridgeCrashError(f"expected finetune_response, got {frame['kind']!r}")
        return frame["payload"]

    def shutdown(self) -> None:
        if self._proc.poll() is None:
            try:
                self._next_id += 1
                assert self._proc.stdin is not None
                write_frame(self._proc.stdin, "shutdown", self._next_id, {})
            except (BrokenPipeError, OSError):
                pass
            try:
                self._proc.wait(timeout=10)
            except subprocess.TimeoutExpired:
                self._proc.kill()

    def __enter__(self) -> "BridgeClient":
        return self

    def __exit__(self, *exc) -> None:
        self.shutdown()
