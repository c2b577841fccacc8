"""PDX1 framing shared by the external client and the reference stub.

All integers are little-endian u32 and all samples little-endian float32.

* handshake (server -> client): ``b"PDX1"`` then ``num_classes``
* request: ``len`` then payload ``width, height, width*height*3 samples``
* response: ``len`` then ``num_classes`` probabilities
"""

import struct

import numpy as np

from ..errors import ProtocolError

MAGIC = b"PDX1"
_U32 = struct.Struct("<I")


def read_exact(stream, n):
    chunks = []
    remaining = n
    while remaining:
        chunk = stream.read(remaining)
        if not chunk:
            raise EOFError(f"stream closed with {remaining} of {n} bytes outstanding")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def encode_handshake(num_classes):
    return MAGIC + _U32.pack(num_classes)


def decode_handshake(data):
    if len(data) != 8 or data[:4] != MAGIC:
        raise ProtocolError(f"bad handshake {data!r}")
    return _U32.unpack(data[4:])[0]


def encode_request(pixels):
    pixels = np.asarray(pixels)
    height, width = pixels.shape[:2]
    payload = _U32.pack(width) + _U32.pack(height) + pixels.astype("<f4", copy=False).tobytes()
    return _U32.pack(len(payload)) + payload


def decode_request(payload):
    if len(payload) < 8:
        raise ProtocolError("request payload shorter than its header")
    width, height = _U32.unpack(payload[:4])[0], _U32.unpack(payload[4:8])[0]
    body = payload[8:]
    if len(body) != 12 * width * height:
        raise ProtocolError(f"request for {width}x{height} carries {len(body)} sample bytes")
    return np.frombuffer(body, dtype="<f4").reshape(height, width, 3)


def encode_response(probs):
    body = np.asarray(probs, dtype="<f4").tobytes()
    return _U32.pack(len(body)) + body


def read_frame(stream):
    length = _U32.unpack(read_exact(stream, 4))[0]
    return read_exact(stream, length)
