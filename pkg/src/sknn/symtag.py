"""Block-cipher tags over query check vectors.

The data owner and cloud server share a 128-bit key.  The owner seals each
query's secret check vector into an opaque tag; the server opens the tag and
compares against the check vector it recovers from the query itself.  AES-GCM
is used so that forged or corrupted tags fail authentication loudly instead
of decrypting to garbage.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .numerics import Scaled, Vec, as_scaled

KEY_BYTES = 16
NONCE_BYTES = 12
_MAGIC = b"CV1"


class BadTag(Exception):
    """Tag is malformed, forged, or sealed under a different key."""


@dataclass(frozen=True)
class TagKey:
    key_bytes: bytes

    def __post_init__(self):
        if len(self.key_bytes) != KEY_BYTES:
            raise ValueError(f"tag key must be {KEY_BYTES} bytes")

    @classmethod
    def generate(cls, rng=None) -> "TagKey":
        if rng is None:
            return cls(os.urandom(KEY_BYTES))
        return cls(rng.getrandbits(KEY_BYTES * 8).to_bytes(KEY_BYTES, "big"))


@dataclass(frozen=True)
class Tag:
    blob: bytes


def encode_check_vector(v) -> bytes:
    """Canonical bytes for a vector of Scaled values.

    Entries are canonical (mantissa, scale_exp) pairs, so vector equality
    holds exactly when the encodings are byte-equal.
    """
    parts = [_MAGIC, struct.pack(">I", len(v))]
    for e in v:
        e = as_scaled(e)
        mant = e.mantissa
        width = (mant.bit_length() + 8) // 8 or 1
        raw = mant.to_bytes(width, "big", signed=True)
        parts.append(struct.pack(">HH", e.scale_exp, len(raw)))
        parts.append(raw)
    return b"".join(parts)


def decode_check_vector(data: bytes) -> Vec:
    try:
        if data[: len(_MAGIC)] != _MAGIC:
            raise ValueError("bad magic")
        off = len(_MAGIC)
        (count,) = struct.unpack_from(">I", data, off)
        off += 4
        entries = []
        for _ in range(count):
            scale_exp, width = struct.unpack_from(">HH", data, off)
            off += 4
            mant = int.from_bytes(data[off : off + width], "big", signed=True)
            off += width
            entries.append(Scaled(mant, scale_exp))
        if off != len(data):
            raise ValueError("trailing bytes")
        return Vec(entries)
    except (struct.error, ValueError, IndexError) as exc:
        raise BadTag(f"malformed check vector payload: {exc}") from None


def seal(key: TagKey, check_vec, rng=None) -> Tag:
    """Seal a check vector; a fresh nonce makes repeated seals distinct."""
    nonce = (
        os.urandom(NONCE_BYTES)
        if rng is None
        else rng.getrandbits(NONCE_BYTES * 8).to_bytes(NONCE_BYTES, "big")
    )
    ct = AESGCM(key.key_bytes).encrypt(nonce, encode_check_vector(check_vec), None)
    return Tag(blob=nonce + ct)


def open_tag(key: TagKey, tag: Tag) -> Vec:
    """Authenticated open; raises BadTag on any forgery or corruption."""
    blob = tag.blob
    if len(blob) < NONCE_BYTES + 16:
        raise BadTag("tag too short")
    try:
        payload = AESGCM(key.key_bytes).decrypt(blob[:NONCE_BYTES], blob[NONCE_BYTES:], None)
    except InvalidTag:
        raise BadTag("authentication failed") from None
    return decode_check_vector(payload)
