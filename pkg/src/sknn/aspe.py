"""Scalar-product-preserving baseline scheme (single-entity key holder).

Data points ride through an invertible matrix, queries through its inverse,
so dot products between encrypted points and encrypted queries reproduce the
plaintext comparison quantity.  Serves as the reference for the comparison
operator used by the richer schemes.

Sign convention here: a LARGER dot product means the point is NEARER to the
query (the opposite of the blinded schemes in zhu/vsknn).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property

from .errors import DimensionMismatch, KTooLarge, NonpositiveR
from .numerics import Mat, Scaled, Vec, as_scaled, dot, mat_random_invertible

MINUS_HALF = Scaled(-5, 1)


@dataclass(frozen=True)
class AspeKey:
    m: Mat
    m_inv: Mat = field(repr=False)

    @property
    def d(self) -> int:
        return self.m.n_rows - 1

    @cached_property
    def _m_int(self):
        scale = max(e.scale_exp for row in self.m.rows for e in row)
        mants = tuple(
            tuple(e.mantissa_at(scale) for e in row) for row in self.m.rows
        )
        return mants, scale


def keygen(d: int, rng, entry_range=(-1000, 1000), scale_exp: int = 1) -> AspeKey:
    m = mat_random_invertible(d + 1, rng, entry_range=entry_range, scale_exp=scale_exp)
    return AspeKey(m=m, m_inv=m.inverse())


def _norm_sq(p) -> Scaled:
    total = Scaled(0)
    for x in p:
        total = total + x * x
    return total


def encrypt_point(key: AspeKey, p) -> Vec:
    """(p_1 .. p_d, -0.5*||p||^2) times the key matrix."""
    if len(p) != key.d:
        raise DimensionMismatch(f"point has {len(p)} dims, key expects {key.d}")
    extended = [as_scaled(x) for x in p] + [MINUS_HALF * _norm_sq(p)]
    m_mants, m_scale = key._m_int
    scale = max(e.scale_exp for e in extended)
    mants = [e.mantissa_at(scale) for e in extended]
    n = key.d + 1
    return Vec(
        Scaled(sum(mants[i] * m_mants[i][j] for i in range(n)), scale + m_scale)
        for j in range(n)
    )


def encrypt_query(key: AspeKey, q, r=None, rng=None) -> Vec:
    """Inverse-matrix transform of (r*q_1 .. r*q_d, r) for random r > 0."""
    if len(q) != key.d:
        raise DimensionMismatch(f"query has {len(q)} dims, key expects {key.d}")
    if r is None:
        rng = rng if rng is not None else random.SystemRandom()
        r = Scaled(rng.randint(1, 2 ** 16))
    r = as_scaled(r)
    if r.sign() <= 0:
        raise NonpositiveR(f"r must be > 0, got {r}")
    extended = Vec([r * x for x in q] + [r])
    return key.m_inv.matvec(extended)


def compare(px_enc, py_enc, q_enc) -> int:
    """-1 if px is nearer to the query, +1 if py is, 0 on an exact tie."""
    diff = dot(px_enc, q_enc) - dot(py_enc, q_enc)
    if diff > 0:
        return -1
    if diff < 0:
        return 1
    return 0


def decrypt_point(key: AspeKey, p_enc) -> Vec:
    """Invert the transform and strip the norm slot."""
    extended = key.m_inv.vecmat(p_enc)
    return Vec(as_scaled(x) for x in extended[:-1])


def knn(enc_db, q_enc, k: int):
    """ids of the k nearest encrypted points; ties broken by ascending id.

    enc_db is a sequence of (id, encrypted point) pairs.
    """
    if k > len(enc_db):
        raise KTooLarge(f"k={k} but database has {len(enc_db)} points")
    scored = sorted((-dot(pe, q_enc), pid) for pid, pe in enc_db)
    return [pid for _, pid in scored[:k]]
