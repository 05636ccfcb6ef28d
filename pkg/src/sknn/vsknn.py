"""Verifiable secure-kNN scheme with server-side query checking.

Same point layout and comparison operator as the zhu module, with two fixes
that restore query controllability:

* the random c-vector in the query layout is NOT multiplied by the per-query
  blind, so the returned vector's slots no longer share a common factor and
  the GCD extraction comes up empty;
* the owner appends a secret per-query check vector, pushes the result
  through a second matrix shared with the cloud server, and seals the check
  vector into a block-cipher tag.  The server inverts the second matrix and
  accepts the query only if the recovered tail equals the opened tag,
  exactly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property

from . import paillier, symtag, zhu
from .errors import DecryptFailure, DimensionMismatch, FakeQuery, KTooLarge
from .numerics import Mat, Scaled, Vec, mat_random_invertible
from .zhu import QueryRequest, QuerySession, ZhuKey

DataKey = ZhuKey

CHECK_RANGE = (-1000, 1000)

encrypt_point = zhu.encrypt_point
decrypt_point = zhu.decrypt_point
encode_point = zhu.encode_point


@dataclass(frozen=True)
class VerifyKey:
    """Secret shared by owner and cloud server; never given to query users."""

    tag_key: symtag.TagKey
    w: Mat
    l: int

    def __post_init__(self):
        if self.l < 1:
            raise ValueError("check vector length must be >= 1")
        if self.w.n_rows != self.w.n_cols:
            raise DimensionMismatch("w must be square")

    @property
    def eta(self) -> int:
        return self.w.n_rows

    @property
    def n(self) -> int:
        return self.eta - self.l

    @cached_property
    def w_inv(self) -> Mat:
        return self.w.inverse()

    @cached_property
    def _w_int(self):
        scale = max(e.scale_exp for row in self.w.rows for e in row)
        mants = tuple(
            tuple(e.mantissa_at(scale) for e in row) for row in self.w.rows
        )
        return mants, scale


@dataclass(frozen=True)
class QueryToken:
    """What the query user submits to the cloud server."""

    q_tilde: Vec
    tag: symtag.Tag
    scale_meta: int


def keygen(d: int, c: int = 2, eps: int = 2, l: int = 2, rng=None,
           entry_range=(-1000, 1000), matrix_scale: int = 1):
    """Generate the owner's data key and the owner/server verify key."""
    rng = rng if rng is not None else random.SystemRandom()
    data_key = zhu.keygen(d, c, eps, rng, entry_range=entry_range,
                          matrix_scale=matrix_scale)
    eta = data_key.n + l
    w = mat_random_invertible(eta, rng, entry_range=entry_range,
                              scale_exp=matrix_scale)
    verify_key = VerifyKey(tag_key=symtag.TagKey.generate(rng), w=w, l=l)
    return data_key, verify_key


query_step1 = zhu.query_step1


def respond_query(
    data_key: ZhuKey,
    verify_key: VerifyKey,
    request: QueryRequest,
    rng=None,
    beta: int | None = None,
    r_vec=None,
    check_vec=None,
):
    """Owner side of the protocol (blinding, both matrix transforms, tag).

    Returns (b_vec, tag, scale_meta).  Unlike the zhu scheme the random
    c-vector rides unblinded, which is what stops the GCD extraction.
    """
    if len(request.enc_dims) != data_key.d:
        raise DimensionMismatch(
            f"{len(request.enc_dims)} encrypted dims, key expects {data_key.d}"
        )
    rng = rng if rng is not None else random.SystemRandom()
    if beta is None:
        beta = rng.randint(*zhu.BETA_RANGE)
    if beta <= 0:
        raise ValueError("beta must be a positive integer")
    if r_vec is None:
        r_vec = [rng.randint(*zhu.SECRET_RANGE) for _ in range(data_key.c)]
    if len(r_vec) != data_key.c:
        raise DimensionMismatch("r_vec must be c-dim")
    slots = zhu.blinded_slots(data_key, request, beta, r_vec,
                               scale_r_by_beta=False)
    m_mants, m_scale = data_key._m_int
    a_vec = zhu.homomorphic_matvec(m_mants, data_key.n, slots, request.pk, rng)
    inner_scale = m_scale + request.scale_q

    if check_vec is None:
        check_vec = Vec(
            Scaled(rng.randint(*CHECK_RANGE)) for _ in range(verify_key.l)
        )
    else:
        check_vec = Vec(Scaled(x) if isinstance(x, int) else x for x in check_vec)
    if len(check_vec) != verify_key.l:
        raise DimensionMismatch("check vector must be l-dim")
    tag = symtag.seal(verify_key.tag_key, check_vec, rng)

    unit = 10 ** inner_scale
    hat_slots = [("ct", a) for a in a_vec]
    hat_slots += [("pt", e.mantissa_at(0) * unit) for e in check_vec]
    w_mants, w_scale = verify_key._w_int
    b_vec = zhu.homomorphic_matvec(
        w_mants, verify_key.eta, hat_slots, request.pk, rng
    )
    return tuple(b_vec), tag, w_scale + inner_scale


def finish_query(session: QuerySession, b_vec, tag, scale_meta) -> QueryToken:
    """Query user decrypts the response into the submittable token."""
    try:
        ints = [paillier.dec(session.keypair, c) for c in b_vec]
    except paillier.PaillierError as exc:
        raise DecryptFailure(str(exc)) from exc
    return QueryToken(
        q_tilde=Vec(Scaled(v, scale_meta) for v in ints),
        tag=tag,
        scale_meta=scale_meta,
    )


def encrypt_query(
    data_key: ZhuKey,
    verify_key: VerifyKey,
    q,
    rng=None,
    bits: int = paillier.DEFAULT_KEY_BITS,
    beta: int | None = None,
    r_vec=None,
    check_vec=None,
) -> QueryToken:
    """Run the full four-step protocol in process."""
    rng = rng if rng is not None else random.SystemRandom()
    session, request = query_step1(q, bits=bits, rng=rng)
    b_vec, tag, scale_meta = respond_query(
        data_key, verify_key, request, rng=rng, beta=beta, r_vec=r_vec,
        check_vec=check_vec,
    )
    return finish_query(session, b_vec, tag, scale_meta)


def verify(verify_key: VerifyKey, token: QueryToken) -> Vec:
    """Check the verifiability condition; return the inner query on success.

    Inverts the shared matrix and requires the recovered tail to equal the
    opened tag exactly, coordinate by coordinate.  Any mismatch, malformed
    tag, or wrong length raises FakeQuery.
    """
    if len(token.q_tilde) != verify_key.eta:
        raise FakeQuery(f"token has {len(token.q_tilde)} slots, expected {verify_key.eta}")
    recovered = verify_key.w_inv.matvec(token.q_tilde)
    try:
        sealed = symtag.open_tag(verify_key.tag_key, token.tag)
    except symtag.BadTag as exc:
        raise FakeQuery(f"tag rejected: {exc}") from None
    if len(sealed) != verify_key.l:
        raise FakeQuery("tag opens to a wrong-length check vector")
    n = verify_key.n
    for got, want in zip(recovered[n:], sealed):
        if got != want:
            raise FakeQuery("check vector mismatch")
    return Vec(recovered[:n])


def knn(db, token: QueryToken, k: int, verify_key: VerifyKey):
    """Verify the token, then run the encrypted comparison scan."""
    q_inner = verify(verify_key, token)
    if k > len(db):
        raise KTooLarge(f"k={k} but database has {len(db)} points")
    scored = zhu.scan_scores(db, q_inner)
    scored.sort()
    return [pid for _, pid in scored[:k]]
