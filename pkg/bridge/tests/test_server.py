"""Protocol conversations against the real subprocess."""

import subprocess
import sys

import numpy as np
import pytest

from sdie_bridge.protocol import read_frame, write_frame

BRIDGE_CMD = [sys.executable, "-m", "sdie_bridge"]


@pytest.fixture()
def bridge():
    proc = subprocess.Popen(BRIDGE_CMD, stdin=subprocess.PIPE, stdout=subprocess.PIPE)
    hello = read_frame(proc.stdout)
    yield proc, hello
    if proc.poll() is None:
        write_frame(proc.stdin, "shutdown", 99, {})
        proc.wait(timeout=30)


def request(proc, kind, frame_id, payload):
    write_frame(proc.stdin, kind, frame_id, payload)
    frames = []
    while True:
        frame = read_frame(proc.stdout)
        assert frame is not None, "bridge closed stdout mid-request"
        frames.append(frame)
        if frame["kind"] != "progress":
            return frames


def test_handshake(bridge):
    _, hello = bridge
    assert hello["kind"] == "hello"
    assert hello["payload"]["protocol"] == 1
    assert hello["payload"]["dim"] == 768
    assert hello["payload"]["encoder"] == "builtin"


def test_encode_batch_of_three(bridge):
    proc, _ = bridge
    frames = request(proc, "encode_request", 1, {"texts": ["a", "b pump", "c d e"]})
    assert frames[-1]["kind"] == "encode_response"
    assert frames[-1]["id"] == 1
    rows = np.array(frames[-1]["payload"]["rows"])
    assert rows.shape == (3, 768)


def test_encode_empty_batch(bridge):
    proc, _ = bridge
    frames = request(proc, "encode_request", 2, {"texts": []})
    assert frames[-1]["payload"]["rows"] == []


def test_encode_same_text_identical_rows(bridge):
    proc, _ = bridge
    frames = request(proc, "encode_request", 3, {"texts": ["pump trip", "pump trip"]})
    rows = frames[-1]["payload"]["rows"]
    assert rows[0] == rows[1]


def test_unknown_kind_gets_error_frame(bridge):
    proc, _ = bridge
    frames = request(proc, "dance_request", 4, {})
    assert frames[-1]["kind"] == "error"
    assert frames[-1]["payload"]["code"] == "bad_kind"
    # the session survives an error
    frames = request(proc, "encode_request", 5, {"texts": ["still alive"]})
    assert frames[-1]["kind"] == "encode_response"


def test_bad_model_handle_is_bad_request(bridge):
    proc, _ = bridge
    frames = request(proc, "encode_request", 6, {"texts": ["x"], "model": "m404"})
    assert frames[-1]["kind"] == "error"
    assert frames[-1]["payload"]["code"] == "bad_request"


def test_finetune_streams_increasing_progress(bridge):
    proc, _ = bridge
    texts = ["valve isolation", "bus breaker", "grid offsite", "badge audit"] * 3
    classes = [0, 1, 2, 3] * 3
    frames = request(
        proc,
        "finetune_request",
        7,
        {
            "train": {"texts": texts, "classes": classes},
            "holdout": None,
            "hyperparams": {"max_epochs": 3, "learning_rate": 1e-4, "seed": 0},
        },
    )
    progress = [f for f in frames if f["kind"] == "progress"]
    terminal = frames[-1]
    assert terminal["kind"] == "finetune_response"
    assert [p["payload"]["epoch"] for p in progress] == [1, 2, 3]
    assert all(p["id"] == 7 for p in progress)
    payload = terminal["payload"]
    assert payload["epochs_run"] == 3
    assert len(payload["head"]["W"]) == 768
    assert len(payload["head"]["c"]) == 4
    assert payload["hyperparams"]["dropout_rate"] == 0.3

    # the returned handle serves later encode requests
    frames = request(proc, "encode_request", 8, {"texts": ["x"], "model": payload["handle"]})
    assert frames[-1]["kind"] == "encode_response"


def test_shutdown_exits_cleanly():
    proc = subprocess.Popen(BRIDGE_CMD, stdin=subprocess.PIPE, stdout=subprocess.PIPE)
    hello = read_frame(proc.stdout)
    assert hello["kind"] == "hello"
    write_frame(proc.stdin, "shutdown", 1, {})
    assert proc.wait(timeout=30) == 0


def test_eof_exits_cleanly():
    proc = subprocess.Popen(BRIDGE_CMD, stdin=subprocess.PIPE, stdout=subprocess.PIPE)
    read_frame(proc.stdout)
    proc.stdin.close()
    assert proc.wait(timeout=30) == 0
