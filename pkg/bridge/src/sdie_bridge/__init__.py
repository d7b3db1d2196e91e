"""Stdio bridge exposing a 768-wide bidirectional transformer encoder.

The process reads newline-delimited JSON frames on stdin and answers on
stdout; see ``protocol.py`` for the framing and ``server.py`` for the
request kinds.  It is deliberately independent of the pipeline package
that talks to it: the wire protocol is the only shared surface.
"""

from .model import ENCODER_DIM, BridgeEncoder, FinetuneResult
from .protocol import PROTOCOL_VERSION, read_frame, write_frame

__all__ = [
    "ENCODER_DIM",
    "BridgeEncoder",
    "FinetuneResult",
    "PROTOCOL_VERSION",
    "read_frame",
    "write_frame",
]

__version__ = "0.1.0"
