"""Blinded secure-kNN scheme with cooperative query encryption.

Extends the scalar-product idea of the aspe module: points are laid out as
pi(S_1 - 2p_1, ..., S_d - 2p_d, S_{d+1} + ||p||^2, tau, v) and pushed through
the inverse key matrix, while queries are built cooperatively so that the
data owner never sees the query and the query user never sees the key.  The
owner multiplies a fresh positive blind beta into every query slot, which is
exactly the weakness the attack module exploits.

Sign convention: a LARGER dot product between encrypted point and encrypted
query means the point is FARTHER from the query (opposite of aspe).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from . import paillier
from .errors import DecryptFailure, DimensionMismatch, KTooLarge, NormSlotMismatch
from .numerics import (
    InexactDivision,
    Mat,
    Perm,
    Scaled,
    Vec,
    as_scaled,
    dot,
    mat_random_invertible,
)

BETA_RANGE = (2, 2 ** 16)
SECRET_RANGE = (-1000, 1000)


@dataclass(frozen=True)
class ZhuKey:
    """Owner secret {M, pi, S, tau} plus the layout dimensions."""

    m: Mat
    perm: Perm
    s_vec: Vec
    tau: Vec
    d: int
    c: int
    eps: int

    def __post_init__(self):
        n = self.n
        if self.m.n_rows != n or self.m.n_cols != n:
            raise DimensionMismatch(f"matrix must be {n}x{n}")
        if len(self.perm) != n:
            raise DimensionMismatch(f"permutation must cover {n} slots")
        if len(self.s_vec) != self.d + 1 or len(self.tau) != self.c:
            raise DimensionMismatch("S must be (d+1)-dim and tau c-dim")
        object.__setattr__(self, "s_vec", Vec(as_scaled(x) for x in self.s_vec))
        object.__setattr__(self, "tau", Vec(as_scaled(x) for x in self.tau))

    @property
    def n(self) -> int:
        return (self.d + 1) + self.c + self.eps

    @cached_property
    def m_inv(self) -> Mat:
        return self.m.inverse()

    @cached_property
    def _m_int(self):
        """(mantissa rows, scale) with M[i][j] = mants[i][j] / 10**scale."""
        scale = max(e.scale_exp for row in self.m.rows for e in row)
        mants = tuple(
            tuple(e.mantissa_at(scale) for e in row) for row in self.m.rows
        )
        return mants, scale

    @cached_property
    def _m_inv_int(self):
        """(integer rows N, positive den D) with M^-1 = N / D."""
        return self.m.inverse_int()


@dataclass(frozen=True)
class ZhuEncPoint:
    """Encrypted point as stored at the cloud server.

    vec holds the exact rational coordinates; nums/den cache the same vector
    as integers over a common positive denominator for fast exact scans.
    """

    id: int
    vec: Vec
    nums: tuple = field(repr=False)
    den: int = field(repr=False)

    @classmethod
    def from_vec(cls, point_id: int, v: Vec) -> "ZhuEncPoint":
        nums, den = _vec_int_form(v)
        return cls(id=point_id, vec=v, nums=nums, den=den)


@dataclass(frozen=True)
class ZhuEncQuery:
    """Blinded encrypted query; scale_meta is the public protocol scale at
    which the decrypted integers were expressed (None for derived tokens)."""

    vec: Vec
    scale_meta: int | None = None


@dataclass(frozen=True)
class QueryRequest:
    """STEP 1 output: what the query user sends to the data owner."""

    pk: paillier.PublicKey
    enc_dims: tuple
    scale_q: int


@dataclass(frozen=True)
class QueryResponse:
    """STEP 2 output: blinded ciphertext vector plus public scale metadata."""

    a_vec: tuple
    scale_meta: int


@dataclass(frozen=True)
class QuerySession:
    """Query user's per-query state (secret key stays here)."""

    query: Vec
    scale_q: int
    keypair: paillier.PaillierKeypair


def _vec_int_form(v):
    """Express a vector of exact scalars as (integer tuple, positive den)."""
    fracs = [
        e.as_fraction() if isinstance(e, Scaled) else Fraction(e) for e in v
    ]
    den = 1
    for f in fracs:
        den = den * f.denominator // math.gcd(den, f.denominator)
    return tuple(int(f * den) for f in fracs), den


def keygen(
    d: int,
    c: int,
    eps: int,
    rng,
    entry_range=(-1000, 1000),
    matrix_scale: int = 1,
) -> ZhuKey:
    if min(d, c, eps) < 1:
        raise ValueError("d, c and eps must all be >= 1")
    n = (d + 1) + c + eps
    m = mat_random_invertible(n, rng, entry_range=entry_range, scale_exp=matrix_scale)
    perm = Perm.random(n, rng)
    s_vec = Vec(Scaled(rng.randint(*SECRET_RANGE)) for _ in range(d + 1))
    tau = Vec(Scaled(rng.randint(*SECRET_RANGE)) for _ in range(c))
    return ZhuKey(m=m, perm=perm, s_vec=s_vec, tau=tau, d=d, c=c, eps=eps)


def encode_point(key: ZhuKey, p, v_rand) -> Vec:
    """Permuted plaintext layout of a data point (before the matrix)."""
    if len(p) != key.d:
        raise DimensionMismatch(f"point has {len(p)} dims, key expects {key.d}")
    if len(v_rand) != key.eps:
        raise DimensionMismatch("per-point random vector must be eps-dim")
    norm_sq = Scaled(0)
    slots = []
    for i, x in enumerate(p):
        x = as_scaled(x)
        norm_sq = norm_sq + x * x
        slots.append(key.s_vec[i] - Scaled(2) * x)
    slots.append(key.s_vec[key.d] + norm_sq)
    slots.extend(key.tau)
    slots.extend(as_scaled(x) for x in v_rand)
    return key.perm.apply(Vec(slots))


def encrypt_point(key: ZhuKey, p, rng, point_id: int = 0) -> ZhuEncPoint:
    """Encrypt with a fresh eps-dim random vector, through the inverse matrix."""
    v_rand = Vec(Scaled(rng.randint(*SECRET_RANGE)) for _ in range(key.eps))
    pdot = encode_point(key, p, v_rand)
    inv_num, inv_den = key._m_inv_int
    scale = max(e.scale_exp for e in pdot)
    mants = [e.mantissa_at(scale) for e in pdot]
    n = key.n
    nums = tuple(
        sum(mants[i] * inv_num[i][j] for i in range(n)) for j in range(n)
    )
    den = inv_den * 10 ** scale
    vecq = Vec(Fraction(num, den) for num in nums)
    return ZhuEncPoint(id=point_id, vec=vecq, nums=nums, den=den)


def decrypt_point(key: ZhuKey, enc: ZhuEncPoint) -> Vec:
    """Recover the point; the norm slot doubles as a corruption check."""
    pdot = key.m.vecmat(enc.vec)
    raw = key.perm.inverse().apply(pdot)
    coords = []
    norm_sq = Fraction(0)
    for i in range(key.d):
        x = (key.s_vec[i] - raw[i]) / Fraction(2)
        coords.append(x)
        norm_sq += x * x
    if raw[key.d] != key.s_vec[key.d] + norm_sq:
        raise NormSlotMismatch("norm slot does not match recovered coordinates")
    try:
        return Vec(Scaled.from_fraction(x) for x in coords)
    except InexactDivision:
        raise NormSlotMismatch("recovered coordinates are not decimal values") from None


# -- cooperative query encryption ------------------------------------------


def query_step1(q, bits: int = paillier.DEFAULT_KEY_BITS, rng=None):
    """Query user encrypts each coordinate under a fresh Paillier key."""
    rng = rng if rng is not None else random.SystemRandom()
    q = Vec(as_scaled(x) for x in q)
    keypair = paillier.keygen(bits, rng)
    scale_q = max((e.scale_exp for e in q), default=0)
    cts = tuple(
        paillier.enc(keypair.pk, e.mantissa_at(scale_q), rng) for e in q
    )
    session = QuerySession(query=q, scale_q=scale_q, keypair=keypair)
    return session, QueryRequest(pk=keypair.pk, enc_dims=cts, scale_q=scale_q)


def blinded_slots(key: ZhuKey, request: QueryRequest, beta: int, r_vec, scale_r_by_beta: bool):
    """Permuted slot list of ('ct', Ciphertext) / ('pt', int mantissa) entries.

    Plain slots carry integer mantissas at the query's scale so that all n
    slots are commensurable inside the homomorphic matrix product.
    """
    unit = 10 ** request.scale_q
    slots = [("ct", paillier.hom_scale(ct, beta)) for ct in request.enc_dims]
    slots.append(("pt", beta * unit))
    for r in r_vec:
        r = as_scaled(r).to_int()
        slots.append(("pt", (beta * r if scale_r_by_beta else r) * unit))
    slots.extend(("pt", 0) for _ in range(key.eps))
    return key.perm.apply(slots)


def homomorphic_matvec(mants, rows, slots, pk, rng):
    """Apply an integer matrix to a mixed ciphertext/plaintext slot vector.

    Ciphertext slots are exponentiated by the matrix mantissa, plaintext
    slots are multiplied then folded into a single fresh encryption per row,
    and everything is combined additively.
    """
    out = []
    for i in range(rows):
        row = mants[i]
        acc_ct = None
        acc_pt = 0
        for coeff, (kind, val) in zip(row, slots):
            if kind == "ct":
                if coeff == 0:
                    continue
                term = paillier.hom_scale(val, coeff)
                acc_ct = term if acc_ct is None else paillier.hom_add(acc_ct, term)
            else:
                acc_pt += coeff * val
        enc_pt = paillier.enc(pk, acc_pt, rng)
        out.append(enc_pt if acc_ct is None else paillier.hom_add(acc_ct, enc_pt))
    return out


def query_step2(
    key: ZhuKey,
    request: QueryRequest,
    rng=None,
    beta: int | None = None,
    r_vec=None,
) -> QueryResponse:
    """Data owner blinds and matrix-transforms the encrypted query.

    beta and r_vec default to fresh random draws; tests may inject them.
    In this scheme the random c-vector is multiplied by beta as well.
    """
    if len(request.enc_dims) != key.d:
        raise DimensionMismatch(
            f"{len(request.enc_dims)} encrypted dims, key expects {key.d}"
        )
    rng = rng if rng is not None else random.SystemRandom()
    if beta is None:
        beta = rng.randint(*BETA_RANGE)
    if beta <= 0:
        raise ValueError("beta must be a positive integer")
    if r_vec is None:
        r_vec = [rng.randint(*SECRET_RANGE) for _ in range(key.c)]
    if len(r_vec) != key.c:
        raise DimensionMismatch("r_vec must be c-dim")
    slots = blinded_slots(key, request, beta, r_vec, scale_r_by_beta=True)
    mants, m_scale = key._m_int
    a_vec = homomorphic_matvec(mants, key.n, slots, request.pk, rng)
    return QueryResponse(a_vec=tuple(a_vec), scale_meta=m_scale + request.scale_q)


def query_step3(session: QuerySession, response: QueryResponse) -> ZhuEncQuery:
    """Query user decrypts each slot and divides out the public scale."""
    try:
        ints = [paillier.dec(session.keypair, c) for c in response.a_vec]
    except paillier.PaillierError as exc:
        raise DecryptFailure(str(exc)) from exc
    return ZhuEncQuery(
        vec=Vec(Scaled(v, response.scale_meta) for v in ints),
        scale_meta=response.scale_meta,
    )


def encrypt_query(
    key: ZhuKey,
    q,
    rng=None,
    bits: int = paillier.DEFAULT_KEY_BITS,
    beta: int | None = None,
    r_vec=None,
) -> ZhuEncQuery:
    """Run the full three-step protocol in process."""
    rng = rng if rng is not None else random.SystemRandom()
    session, request = query_step1(q, bits=bits, rng=rng)
    response = query_step2(key, request, rng=rng, beta=beta, r_vec=r_vec)
    return query_step3(session, response)


# -- comparison and kNN ------------------------------------------------------


def compare(px_enc: ZhuEncPoint, py_enc: ZhuEncPoint, q_enc: ZhuEncQuery) -> int:
    """-1 if px is nearer to the query, +1 if py is, 0 on an exact tie."""
    diff = dot(px_enc.vec, q_enc.vec) - dot(py_enc.vec, q_enc.vec)
    if diff > 0:
        return 1
    if diff < 0:
        return -1
    return 0


def scan_scores(db, q_vec):
    """Exact (score, id) pairs for every point; smaller score = nearer."""
    q_nums, q_den = _vec_int_form(q_vec)
    dens = {pt.den for pt in db}
    if len(dens) == 1:
        return [
            (sum(a * b for a, b in zip(pt.nums, q_nums)), pt.id) for pt in db
        ]
    return [
        (
            Fraction(sum(a * b for a, b in zip(pt.nums, q_nums)), pt.den * q_den),
            pt.id,
        )
        for pt in db
    ]


def knn(db, q_enc, k: int):
    """ids of the k nearest points under the encrypted comparison operator."""
    if k > len(db):
        raise KTooLarge(f"k={k} but database has {len(db)} points")
    q_vec = q_enc.vec if isinstance(q_enc, ZhuEncQuery) else q_enc
    scored = scan_scores(db, q_vec)
    scored.sort()
    return [pid for _, pid in scored[:k]]
