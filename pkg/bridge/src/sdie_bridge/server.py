"""Request loop: stdin frames in, stdout frames out.

Kinds handled:

- ``encode_request``   {"texts": [...], "model": handle | null}
    -> ``encode_response`` {"rows": [[768 floats], ...]}
- ``finetune_request`` {"train": {"texts", "classes"},
                        "holdout": {"texts", "classes"} | null,
                        "hyperparams": {...}}
    -> one ``progress`` frame per epoch, then ``finetune_response``
       {"handle", "head": {"W", "c"}, "trace", "epochs_run",
        "early_stop_epoch", "hyperparams"}
- ``shutdown``         -> the process exits.

Any failure answers an ``error`` frame {"code", "message"} for the same
request id: ``bad_request`` for validation problems, ``internal``
otherwise.  A ``hello`` frame announcing the protocol version, encoder
source, and output dimension is emitted before the first request is read.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .model import ENCODER_DIM, BridgeEncoder
from .protocol import PROTOCOL_VERSION, FrameError, read_frame, write_frame

log = logging.getLogger("sdie_bridge")


def serve(encoder: BridgeEncoder, stdin, stdout) -> int:
    write_frame(
        stdout,
        "hello",
        0,
        {"protocol": PROTOCOL_VERSION, "encoder": encoder.source, "dim": ENCODER_DIM},
    )
    while True:
        try:
            frame = read_frame(stdin)
        except FrameError as exc:
            write_frame(stdout, "error", 0, {"code": "bad_frame", "message": str(exc)})
            continue
        if frame is None:
            return 0
        kind = frame["kind"]
        frame_id = frame.get("id", 0)
        payload = frame.get("payload") or {}
        if kind == "shutdown":
            return 0
        try:
            if kind == "encode_request":
                rows = encoder.encode(
                    list(payload.get("texts", [])), handle=payload.get("model")
                )
                write_frame(
                    stdout, "encode_response", frame_id, {"rows": rows.tolist()}
                )
            elif kind == "finetune_request":
                train = payload.get("train") or {}
                holdout = payload.get("holdout") or None

                def on_progress(record):
                    write_frame(stdout, "progress", frame_id, record)

                result = encoder.finetune(
                    list(train.get("texts", [])),
                    [int(c) for c in train.get("classes", [])],
                    holdout_texts=list(holdout["texts"]) if holdout else None,
                    holdout_classes=[int(c) for c in holdout.get("classes", [])]
                    if holdout
                    else None,
                    hyperparams=payload.get("hyperparams") or {},
                    progress=on_progress,
                )
                write_frame(
                    stdout,
                    "finetune_response",
                    frame_id,
                    {
                        "handle": result.handle,
                        "head": {
                            "W": result.head_weight.tolist(),
                            "c": result.head_bias.tolist(),
                        },
                        "trace": result.trace,
                        "epochs_run": result.epochs_run,
                        "early_stop_epoch": result.early_stop_epoch,
                        "hyperparams": result.hyperparams,
                    },
                )
            else:
                write_frame(
                    stdout,
                    "error",
                    frame_id,
                    {"code": "bad_kind", "message": f"unknown frame kind: {kind!r}"},
                )
        except (ValueError, KeyError, TypeError) as exc:
            write_frame(stdout, "error", frame_id, {"code": "bad_request", "message": str(exc)})
        except Exception as exc:  # noqa: BLE001 - the peer gets a frame, not a stack trace
            log.exception("request %s failed", frame_id)
            write_frame(stdout, "error", frame_id, {"code": "internal", "message": str(exc)})


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="sdie-bridge", description=__doc__)
    parser.add_argument("--checkpoint", help="saved encoder weights to serve")
    parser.add_argument("--seed", type=int, default=0, help="init seed for the builtin encoder")
    args = parser.parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="bridge: %(message)s")
    encoder = BridgeEncoder(checkpoint=args.checkpoint, seed=args.seed)
    log.info("serving %s (dim %d)", encoder.source, ENCODER_DIM)
    return serve(encoder, sys.stdin.buffer, sys.stdout.buffer)


if __name__ == "__main__":
    sys.exit(main())
