"""Passphrase-protected key files and encrypted-database persistence."""

from __future__ import annotations

import base64
import json
import os

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.scrypt import Scrypt

from .. import aspe, symtag, vsknn, zhu
from ..numerics import Mat, Perm, as_scaled
from .wire import vec_from_wire, vec_to_wire

_SCRYPT_N = 2 ** 14
_SCRYPT_R = 8
_SCRYPT_P = 1


class BadPassphrase(Exception):
    pass


class CorruptFile(Exception):
    pass


# -- key (de)serialization ---------------------------------------------------


def _mat_to_json(m: Mat):
    return [[str(e) for e in row] for row in m.rows]


def _mat_from_json(rows) -> Mat:
    return Mat(tuple(as_scaled(e) for e in row) for row in rows)


def key_to_jsonable(key):
    if isinstance(key, aspe.AspeKey):
        return {"kind": "aspe", "matrix": _mat_to_json(key.m)}
    if isinstance(key, zhu.ZhuKey):
        return {
            "kind": "zhu_data",
            "d": key.d,
            "c": key.c,
            "eps": key.eps,
            "matrix": _mat_to_json(key.m),
            "perm": list(key.perm.mapping),
            "s_vec": vec_to_wire(key.s_vec),
            "tau": vec_to_wire(key.tau),
        }
    if isinstance(key, vsknn.VerifyKey):
        return {
            "kind": "verify",
            "l": key.l,
            "w": _mat_to_json(key.w),
            "tag_key": key.tag_key.key_bytes.hex(),
        }
    raise TypeError(f"cannot serialize key of type {type(key).__name__}")


def key_from_jsonable(obj):
    kind = obj.get("kind")
    if kind == "aspe":
        m = _mat_from_json(obj["matrix"])
        return aspe.AspeKey(m=m, m_inv=m.inverse())
    if kind == "zhu_data":
        return zhu.ZhuKey(
            m=_mat_from_json(obj["matrix"]),
            perm=Perm(obj["perm"]),
            s_vec=vec_from_wire(obj["s_vec"]),
            tau=vec_from_wire(obj["tau"]),
            d=obj["d"],
            c=obj["c"],
            eps=obj["eps"],
        )
    if kind == "verify":
        return vsknn.VerifyKey(
            tag_key=symtag.TagKey(bytes.fromhex(obj["tag_key"])),
            w=_mat_from_json(obj["w"]),
            l=obj["l"],
        )
    raise CorruptFile(f"unknown key kind {kind!r}")


# -- passphrase-encrypted container ------------------------------------------


def _derive(passphrase: str, salt: bytes) -> bytes:
    kdf = Scrypt(salt=salt, length=32, n=_SCRYPT_N, r=_SCRYPT_R, p=_SCRYPT_P)
    return kdf.derive(passphrase.encode())


def keystore_save(path, payload: dict, passphrase: str) -> None:
    """Encrypt a JSON-able payload (key material) under a passphrase."""
    salt = os.urandom(16)
    nonce = os.urandom(12)
    plaintext = json.dumps(payload, sort_keys=True).encode()
    blob = AESGCM(_derive(passphrase, salt)).encrypt(nonce, plaintext, None)
    container = {
        "format": "sknn-keystore-v1",
        "kdf": {
            "salt": base64.b64encode(salt).decode(),
            "n": _SCRYPT_N,
            "r": _SCRYPT_R,
            "p": _SCRYPT_P,
        },
        "nonce": base64.b64encode(nonce).decode(),
        "blob": base64.b64encode(blob).decode(),
    }
    with open(path, "w") as fh:
        json.dump(container, fh, indent=1)


def keystore_load(path, passphrase: str) -> dict:
    try:
        with open(path) as fh:
            container = json.load(fh)
        if container.get("format") != "sknn-keystore-v1":
            raise CorruptFile("not a keystore file")
        salt = base64.b64decode(container["kdf"]["salt"])
        nonce = base64.b64decode(container["nonce"])
        blob = base64.b64decode(container["blob"])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise CorruptFile(f"unreadable keystore: {exc}") from None
    try:
        plaintext = AESGCM(_derive(passphrase, salt)).decrypt(nonce, blob, None)
    except InvalidTag:
        raise BadPassphrase("wrong passphrase or tampered keystore") from None
    try:
        return json.loads(plaintext.decode())
    except ValueError as exc:
        raise CorruptFile(f"corrupt keystore payload: {exc}") from None


# -- encrypted database files --------------------------------------------------


def save_encrypted_db(path, scheme: str, enc_db) -> None:
    if scheme == "aspe":
        points = [{"id": pid, "vec": vec_to_wire(v)} for pid, v in enc_db]
    else:
        points = [{"id": pt.id, "vec": vec_to_wire(pt.vec)} for pt in enc_db]
    with open(path, "w") as fh:
        json.dump({"scheme": scheme, "points": points}, fh)


def load_encrypted_db(path):
    try:
        with open(path) as fh:
            obj = json.load(fh)
        scheme = obj["scheme"]
        if scheme == "aspe":
            db = [
                (entry["id"], vec_from_wire(entry["vec"]))
                for entry in obj["points"]
            ]
        else:
            db = [
                zhu.ZhuEncPoint.from_vec(entry["id"], vec_from_wire(entry["vec"]))
                for entry in obj["points"]
            ]
        return scheme, db
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise CorruptFile(f"unreadable encrypted database: {exc}") from None
