"""Length-prefixed JSON wire format shared by all transports.

Numbers travel as exact decimal strings (or num/den strings for rational
values), never as binary floats, so byte-level reproducibility holds across
transports and platforms.
"""

from __future__ import annotations

import base64
import json
import struct
from dataclasses import dataclass
from fractions import Fraction

from .. import paillier, symtag
from ..errors import TransportError
from ..numerics import Scaled, Vec

PROTOCOL_VERSION = 1
MAX_FRAME = 64 * 1024 * 1024

KINDS = {
    "QueryEncRequest",
    "QueryEncResponseZhu",
    "QueryEncResponseVsknn",
    "KnnRequest",
    "KnnResponse",
    "FakeQueryError",
}


@dataclass(frozen=True)
class WireMessage:
    kind: str
    scheme: str
    body: dict
    version: int = PROTOCOL_VERSION

    def __post_init__(self):
        if self.kind not in KINDS:
            raise TransportError(f"unknown message kind {self.kind!r}")


# -- exact scalar codecs ----------------------------------------------------


def exact_to_str(x) -> str:
    if isinstance(x, Scaled):
        return str(x)
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return str(x)
    raise TypeError(f"cannot encode {type(x).__name__} on the wire")


def str_to_exact(s: str):
    if "/" in s:
        num, _, den = s.partition("/")
        return Fraction(int(num), int(den))
    return Scaled.from_decimal(s)


def vec_to_wire(v) -> list:
    return [exact_to_str(x) for x in v]


def vec_from_wire(items) -> Vec:
    return Vec(str_to_exact(s) for s in items)


def pk_to_wire(pk: paillier.PublicKey) -> dict:
    return {"n": format(pk.n, "x"), "g": format(pk.g, "x")}


def pk_from_wire(obj) -> paillier.PublicKey:
    pk = paillier.PublicKey.from_n(int(obj["n"], 16))
    if pk.g != int(obj["g"], 16):
        raise TransportError("public key generator mismatch")
    return pk


def ct_to_wire(c: paillier.Ciphertext) -> str:
    return format(c.value, "x")


def ct_from_wire(s: str, pk: paillier.PublicKey) -> paillier.Ciphertext:
    return paillier.Ciphertext(value=int(s, 16), pk=pk)


def tag_to_wire(tag: symtag.Tag) -> str:
    return base64.b64encode(tag.blob).decode("ascii")


def tag_from_wire(s: str) -> symtag.Tag:
    return symtag.Tag(blob=base64.b64decode(s))


# -- framing ----------------------------------------------------------------


def encode_message(msg: WireMessage) -> bytes:
    obj = {
        "kind": msg.kind,
        "scheme": msg.scheme,
        "version": msg.version,
        "body": msg.body,
    }
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


def decode_message(data: bytes) -> WireMessage:
    try:
        obj = json.loads(data.decode())
        return WireMessage(
            kind=obj["kind"],
            scheme=obj["scheme"],
            body=obj["body"],
            version=obj["version"],
        )
    except (ValueError, KeyError, UnicodeDecodeError) as exc:
        raise TransportError(f"malformed message: {exc}") from None


def write_frame(sock, msg: WireMessage) -> None:
    payload = encode_message(msg)
    sock.sendall(struct.pack(">I", len(payload)) + payload)


def _recv_exact(sock, count: int) -> bytes:
    chunks = []
    while count:
        chunk = sock.recv(count)
        if not chunk:
            raise TransportError("connection closed mid-frame")
        chunks.append(chunk)
        count -= len(chunk)
    return b"".join(chunks)


def read_frame(sock) -> WireMessage:
    header = _recv_exact(sock, 4)
    (length,) = struct.unpack(">I", header)
    if length > MAX_FRAME:
        raise TransportError(f"frame of {length} bytes exceeds limit")
    return decode_message(_recv_exact(sock, length))
