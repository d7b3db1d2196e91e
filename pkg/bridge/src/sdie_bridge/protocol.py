"""Frame encoding shared by every bridge conversation.

One JSON object per line: ``{"kind", "id", "payload"}``.  Frames larger
than ``LINE_FRAME_LIMIT`` are written length-prefixed as
``#<nbytes>\\n<json>\\n`` so huge encode responses never fight with line
buffering; readers accept both forms transparently.
"""

from __future__ import annotations

import json
from typing import IO

PROTOCOL_VERSION = 1
LINE_FRAME_LIMIT = 1 << 20


class FrameError(ValueError):
    pass


def write_frame(stream: IO[bytes], kind: str, frame_id: int, payload: dict) -> None:
    body = json.dumps({"kind": kind, "id": frame_id, "payload": payload}).encode("utf-8")
    if len(body) > LINE_FRAME_LIMIT:
        stream.write(b"#%d\n" % len(body) + body + b"\n")
    else:
        stream.write(body + b"\n")
    stream.flush()


def read_frame(stream: IO[bytes]) -> dict | None:
    """Next frame, or None at end of stream."""
    line = stream.readline()
    if not line:
        return None
    if line.startswith(b"#"):
        try:
            nbytes = int(line[1:].strip())
        except ValueError:
            raise FrameError(f"malformed length prefix: {line[:40]!r}") from None
        body = stream.read(nbytes)
        if len(body) != nbytes:
            raise FrameError("truncated length-prefixed frame")
        stream.readline()
    else:
        body = line
    try:
        frame = json.loads(body)
    except json.JSONDecodeError:
        raise FrameError(f"malformed frame: {body[:80]!r}") from None
    if not isinstance(frame, dict) or "kind" not in frame:
        raise FrameError("frame missing kind")
    return frame
