"""Bridge client transport behavior; no bridge process is required."""

import io
import sys

import pytest

from sdiekit.stage2.bridge import (
    BridgeClient,
    BridgeCrashError,
    BridgeUnavailableError,
    read_frame,
    write_frame,
)


def test_frame_roundtrip():
    buffer = io.BytesIO()
    write_frame(buffer, "encode_request", 5, {"texts": ["a"]})
    buffer.seek(0)
    frame = read_frame(buffer)
    assert frame == {"kind": "encode_request", "id": 5, "payload": {"texts": ["a"]}}


def test_large_frame_length_prefixed():
    buffer = io.BytesIO()
    write_frame(buffer, "encode_response", 1, {"rows": [[1.5] * 768] * 300})
    assert buffer.getvalue().startswith(b"#")
    buffer.seek(0)
    assert len(read_frame(buffer)["payload"]["rows"]) == 300


def test_read_frame_eof():
    assert read_frame(io.BytesIO(b"")) is None


def test_malformed_frame_raises_crash_error():
    with pytest.raises(BridgeCrashError, match="malformed"):
        read_frame(io.BytesIO(b"definitely not json\n"))


def test_missing_command_distinguished_from_crash():
    with pytest.raises(BridgeUnavailableError):
        BridgeClient(["/no/such/bridge-binary"])


def test_garbage_speaker_is_a_crash():
    with pytest.raises(BridgeCrashError):
        BridgeClient([sys.executable, "-c", "print('garbage')"])


def test_immediate_exit_is_a_crash():
    with pytest.raises(BridgeCrashError, match="exit status"):
        BridgeClient([sys.executable, "-c", "raise SystemExit(0)"])
