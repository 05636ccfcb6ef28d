"""Party state machines (owner / query user / cloud server) and transports.

The same message objects drive an in-process exchange and a TCP socket
exchange; the in-process transport still round-trips every message through
the byte encoding so both paths exercise identical serialization.
"""

from __future__ import annotations

import random
import socket
import socketserver
import threading

from .. import aspe, paillier, vsknn, zhu
from ..errors import FakeQuery, TransportError
from ..numerics import Vec, as_scaled
from . import wire
from .dataset import Dataset
from .wire import WireMessage

SCHEMES = ("aspe", "zhu", "vsknn")


def encrypt_dataset(scheme: str, key, ds: Dataset, rng):
    """Encrypt every point of a dataset for the given scheme's server."""
    if scheme == "aspe":
        return [(pid, aspe.encrypt_point(key, p)) for pid, p in ds.points]
    if scheme in ("zhu", "vsknn"):
        return [
            zhu.encrypt_point(key, p, rng, point_id=pid) for pid, p in ds.points
        ]
    raise ValueError(f"unknown scheme {scheme!r}")


class DataOwnerService:
    """Answers cooperative query-encryption requests."""

    def __init__(self, scheme: str, data_key, verify_key=None, rng=None):
        if scheme not in ("zhu", "vsknn"):
            raise ValueError("owner service serves the zhu and vsknn schemes")
        if scheme == "vsknn" and verify_key is None:
            raise ValueError("vsknn owner needs the shared verify key")
        self.scheme = scheme
        self.data_key = data_key
        self.verify_key = verify_key
        self.rng = rng if rng is not None else random.SystemRandom()

    def handle(self, msg: WireMessage) -> WireMessage:
        if msg.kind != "QueryEncRequest" or msg.scheme != self.scheme:
            raise TransportError(f"owner cannot serve {msg.kind}/{msg.scheme}")
        pk = wire.pk_from_wire(msg.body["pk"])
        request = zhu.QueryRequest(
            pk=pk,
            enc_dims=tuple(
                wire.ct_from_wire(s, pk) for s in msg.body["enc_dims"]
            ),
            scale_q=int(msg.body["scale_q"]),
        )
        if self.scheme == "zhu":
            resp = zhu.query_step2(self.data_key, request, rng=self.rng)
            return WireMessage(
                kind="QueryEncResponseZhu",
                scheme="zhu",
                body={
                    "a_vec": [wire.ct_to_wire(c) for c in resp.a_vec],
                    "scale_meta": resp.scale_meta,
                },
            )
        b_vec, tag, scale_meta = vsknn.respond_query(
            self.data_key, self.verify_key, request, rng=self.rng
        )
        return WireMessage(
            kind="QueryEncResponseVsknn",
            scheme="vsknn",
            body={
                "b_vec": [wire.ct_to_wire(c) for c in b_vec],
                "tag": wire.tag_to_wire(tag),
                "scale_meta": scale_meta,
            },
        )


class CloudService:
    """Stores the encrypted database and answers kNN requests."""

    def __init__(self, scheme: str, enc_db, verify_key=None):
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}")
        if scheme == "vsknn" and verify_key is None:
            raise ValueError("vsknn server needs the shared verify key")
        self.scheme = scheme
        self.enc_db = enc_db
        self.verify_key = verify_key

    def handle(self, msg: WireMessage) -> WireMessage:
        if msg.kind != "KnnRequest" or msg.scheme != self.scheme:
            raise TransportError(f"server cannot serve {msg.kind}/{msg.scheme}")
        k = int(msg.body["k"])
        token = msg.body["token"]
        if self.scheme == "aspe":
            ids = aspe.knn(self.enc_db, wire.vec_from_wire(token["q_enc"]), k)
        elif self.scheme == "zhu":
            q_enc = zhu.ZhuEncQuery(vec=wire.vec_from_wire(token["q_enc"]))
            ids = zhu.knn(self.enc_db, q_enc, k)
        else:
            tok = vsknn.QueryToken(
                q_tilde=wire.vec_from_wire(token["q_tilde"]),
                tag=wire.tag_from_wire(token["tag"]),
                scale_meta=int(token["scale_meta"]),
            )
            try:
                ids = vsknn.knn(self.enc_db, tok, k, self.verify_key)
            except FakeQuery as exc:
                return WireMessage(
                    kind="FakeQueryError",
                    scheme="vsknn",
                    body={"reason": str(exc)},
                )
        return WireMessage(kind="KnnResponse", scheme=self.scheme, body={"ids": ids})


class LocalTransport:
    """In-process exchange that still round-trips through the byte codec."""

    def __init__(self, service):
        self.service = service

    def exchange(self, msg: WireMessage) -> WireMessage:
        request = wire.decode_message(wire.encode_message(msg))
        reply = self.service.handle(request)
        return wire.decode_message(wire.encode_message(reply))


class SocketTransport:
    """One TCP connection per exchange."""

    def __init__(self, host: str, port: int, timeout: float = 30.0):
        self.host = host
        self.port = port
        self.timeout = timeout

    def exchange(self, msg: WireMessage) -> WireMessage:
        try:
            with socket.create_connection(
                (self.host, self.port), timeout=self.timeout
            ) as sock:
                wire.write_frame(sock, msg)
                return wire.read_frame(sock)
        except OSError as exc:
            raise TransportError(f"socket exchange failed: {exc}") from exc


class _FrameHandler(socketserver.BaseRequestHandler):
    def handle(self):
        while True:
            try:
                msg = wire.read_frame(self.request)
            except TransportError:
                return
            try:
                reply = self.server.service.handle(msg)
            except Exception:
                return
            wire.write_frame(self.request, reply)


class _Server(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


class PartyServer:
    """Serves one party's service on a TCP port (thread per connection)."""

    def __init__(self, service, host: str = "127.0.0.1", port: int = 0):
        self._server = _Server((host, port), _FrameHandler)
        self._server.service = service
        self._thread = None

    @property
    def address(self):
        return self._server.server_address

    def transport(self) -> SocketTransport:
        host, port = self.address
        return SocketTransport(host, port)

    def start(self) -> "PartyServer":
        self._thread = threading.Thread(
            target=self._server.serve_forever, daemon=True
        )
        self._thread.start()
        return self

    def stop(self):
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def wait(self):
        """Block until the server thread exits (Ctrl-C to stop)."""
        while self._thread is not None and self._thread.is_alive():
            self._thread.join(1)

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()


class SessionResult:
    """kNN ids plus the raw server response for byte-level comparisons."""

    def __init__(self, ids, response: WireMessage):
        self.ids = ids
        self.response = response
        self.response_bytes = wire.encode_message(response)


def run_session(
    scheme: str,
    q,
    k: int,
    *,
    cs,
    do=None,
    aspe_key=None,
    rng=None,
    bits: int = paillier.DEFAULT_KEY_BITS,
) -> SessionResult:
    """Full query flow: encrypt the query (cooperatively where the scheme
    demands it), submit to the cloud server, return the kNN ids."""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    rng = rng if rng is not None else random.SystemRandom()
    q = Vec(as_scaled(x) for x in q)

    if scheme == "aspe":
        if aspe_key is None:
            raise ValueError("aspe sessions need the key (single-entity scheme)")
        q_enc = aspe.encrypt_query(aspe_key, q, rng=rng)
        token = {"q_enc": wire.vec_to_wire(q_enc)}
    else:
        if do is None:
            raise ValueError(f"{scheme} sessions need an owner transport")
        session, request = zhu.query_step1(q, bits=bits, rng=rng)
        req_msg = WireMessage(
            kind="QueryEncRequest",
            scheme=scheme,
            body={
                "pk": wire.pk_to_wire(request.pk),
                "enc_dims": [wire.ct_to_wire(c) for c in request.enc_dims],
                "scale_q": request.scale_q,
            },
        )
        reply = do.exchange(req_msg)
        if scheme == "zhu":
            if reply.kind != "QueryEncResponseZhu":
                raise TransportError(f"unexpected owner reply {reply.kind}")
            resp = zhu.QueryResponse(
                a_vec=tuple(
                    wire.ct_from_wire(s, request.pk) for s in reply.body["a_vec"]
                ),
                scale_meta=int(reply.body["scale_meta"]),
            )
            q_enc = zhu.query_step3(session, resp)
            token = {"q_enc": wire.vec_to_wire(q_enc.vec)}
        else:
            if reply.kind != "QueryEncResponseVsknn":
                raise TransportError(f"unexpected owner reply {reply.kind}")
            tok = vsknn.finish_query(
                session,
                [wire.ct_from_wire(s, request.pk) for s in reply.body["b_vec"]],
                wire.tag_from_wire(reply.body["tag"]),
                int(reply.body["scale_meta"]),
            )
            token = {
                "q_tilde": wire.vec_to_wire(tok.q_tilde),
                "tag": wire.tag_to_wire(tok.tag),
                "scale_meta": tok.scale_meta,
            }

    knn_reply = cs.exchange(
        WireMessage(kind="KnnRequest", scheme=scheme, body={"k": k, "token": token})
    )
    if knn_reply.kind == "FakeQueryError":
        raise FakeQuery(knn_reply.body.get("reason", "rejected"))
    if knn_reply.kind != "KnnResponse":
        raise TransportError(f"unexpected server reply {knn_reply.kind}")
    return SessionResult(ids=list(knn_reply.body["ids"]), response=knn_reply)
