import io

import pytest

from sdie_bridge.protocol import LINE_FRAME_LIMIT, FrameError, read_frame, write_frame


def roundtrip(kind, frame_id, payload):
    buffer = io.BytesIO()
    write_frame(buffer, kind, frame_id, payload)
    buffer.seek(0)
    return read_frame(buffer)


def test_line_frame_roundtrip():
    frame = roundtrip("hello", 0, {"protocol": 1})
    assert frame == {"kind": "hello", "id": 0, "payload": {"protocol": 1}}


def test_large_frame_uses_length_prefix():
    payload = {"rows": [[0.123456789] * 768 for _ in range(300)]}
    buffer = io.BytesIO()
    write_frame(buffer, "encode_response", 3, payload)
    raw = buffer.getvalue()
    assert raw.startswith(b"#")
    assert len(raw) > LINE_FRAME_LIMIT
    buffer.seek(0)
    frame = read_frame(buffer)
    assert frame["id"] == 3
    assert len(frame["payload"]["rows"]) == 300
    assert frame["payload"]["rows"][0][0] == 0.123456789


def test_read_eof_returns_none():
    assert read_frame(io.BytesIO(b"")) is None


def test_multiple_frames_in_sequence():
    buffer = io.BytesIO()
    write_frame(buffer, "a", 1, {})
    write_frame(buffer, "b", 2, {})
    buffer.seek(0)
    assert read_frame(buffer)["kind"] == "a"
    assert read_frame(buffer)["kind"] == "b"
    assert read_frame(buffer) is None


def test_malformed_json_raises():
    with pytest.raises(FrameError, match="malformed frame"):
        read_frame(io.BytesIO(b"not json\n"))


def test_bad_length_prefix_raises():
    with pytest.raises(FrameError, match="length prefix"):
        read_frame(io.BytesIO(b"#abc\n"))


def test_truncated_prefixed_frame_raises():
    with pytest.raises(FrameError, match="truncated"):
        read_frame(io.BytesIO(b"#100\n{}"))


def test_frame_without_kind_raises():
    with pytest.raises(FrameError, match="kind"):
        read_frame(io.BytesIO(b'{"id": 1}\n'))
