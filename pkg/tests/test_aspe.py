"""Scalar-product-preserving baseline: transforms, comparisons, kNN."""

import random

import pytest

from sknn import aspe
from sknn.errors import DimensionMismatch, KTooLarge, NonpositiveR
from sknn.numerics import Mat, Scaled, Vec, dot, vec


def identity_key(d):
    eye = Mat.identity(d + 1)
    return aspe.AspeKey(m=eye, m_inv=eye)


def ed_sq(a, b):
    return sum(((x - y) * (x - y) for x, y in zip(a, b)), Scaled(0))


def test_encrypt_zero_point_identity_key():
    key = identity_key(2)
    assert aspe.encrypt_point(key, vec(0, 0)) == vec(0, 0, 0)


def test_encrypt_point_layout_identity_key():
    key = identity_key(2)
    assert aspe.encrypt_point(key, vec(3, 4)) == vec(3, 4, "-12.5")


def test_encrypt_query_identity_key():
    key = identity_key(2)
    assert aspe.encrypt_query(key, vec(1, 0), r=Scaled(1)) == vec(1, 0, 1)


def test_nonpositive_r_rejected():
    key = identity_key(2)
    with pytest.raises(NonpositiveR):
        aspe.encrypt_query(key, vec(1, 0), r=Scaled(0))
    with pytest.raises(NonpositiveR):
        aspe.encrypt_query(key, vec(1, 0), r=Scaled(-3))


def test_dimension_mismatch():
    key = identity_key(2)
    with pytest.raises(DimensionMismatch):
        aspe.encrypt_point(key, vec(1, 2, 3))
    with pytest.raises(DimensionMismatch):
        aspe.encrypt_query(key, vec(1), r=Scaled(1))


def test_decrypt_round_trip():
    rng = random.Random(0)
    key = aspe.keygen(3, rng)
    for _ in range(3):
        p = Vec(Scaled(rng.randint(-10 ** 6, 10 ** 6), 3) for _ in range(3))
        assert aspe.decrypt_point(key, aspe.encrypt_point(key, p)) == p
    zero = vec(0, 0, 0)
    assert aspe.decrypt_point(key, aspe.encrypt_point(key, zero)) == zero


def test_norm_slot_recoverable():
    rng = random.Random(1)
    key = aspe.keygen(2, rng)
    p = vec("1.5", "-2")
    extended = key.m_inv.vecmat(aspe.encrypt_point(key, p))
    norm = sum((x * x for x in p), Scaled(0))
    assert extended[-1] == Scaled(-5, 1) * norm


def test_scalar_product_identity():
    # p_enc . q_enc == r * (p.q - 0.5||p||^2), the quantity driving comparisons
    rng = random.Random(2)
    for _ in range(25):
        d = rng.randint(1, 6)
        key = aspe.keygen(d, rng)
        p = Vec(Scaled(rng.randint(-100, 100), 1) for _ in range(d))
        q = Vec(Scaled(rng.randint(-100, 100), 1) for _ in range(d))
        r = Scaled(rng.randint(1, 1000))
        pe = aspe.encrypt_point(key, p)
        qe = aspe.encrypt_query(key, q, r=r)
        want = r * (dot(p, q) + Scaled(-5, 1) * dot(p, p))
        assert dot(pe, qe) == want.as_fraction()


def test_compare_against_plaintext_oracle():
    rng = random.Random(3)
    key = aspe.keygen(2, rng)
    q = vec(1, 1)
    qe = aspe.encrypt_query(key, q, rng=rng)
    px, py = vec(0, 0), vec(10, 10)
    assert aspe.compare(
        aspe.encrypt_point(key, px), aspe.encrypt_point(key, py), qe
    ) == -1
    for _ in range(200):
        px = Vec(Scaled(rng.randint(-50, 50)) for _ in range(2))
        py = Vec(Scaled(rng.randint(-50, 50)) for _ in range(2))
        got = aspe.compare(
            aspe.encrypt_point(key, px), aspe.encrypt_point(key, py), qe
        )
        dx, dy = ed_sq(px, q), ed_sq(py, q)
        want = -1 if dx < dy else (1 if dy < dx else 0)
        assert got == want


def test_compare_exact_tie():
    rng = random.Random(4)
    key = aspe.keygen(2, rng)
    qe = aspe.encrypt_query(key, vec(0, 0), rng=rng)
    pe1 = aspe.encrypt_point(key, vec(3, 4))
    pe2 = aspe.encrypt_point(key, vec(-5, 0))
    assert aspe.compare(pe1, pe2, qe) == 0


def test_query_point_is_nearest_to_itself():
    rng = random.Random(5)
    key = aspe.keygen(3, rng)
    q = vec(7, -2, 9)
    qe = aspe.encrypt_query(key, q, rng=rng)
    pq = aspe.encrypt_point(key, q)
    for _ in range(20):
        other = Vec(Scaled(rng.randint(-100, 100)) for _ in range(3))
        if other == q:
            continue
        assert aspe.compare(pq, aspe.encrypt_point(key, other), qe) == -1


def test_r_scaling_preserves_full_ordering():
    rng = random.Random(6)
    key = aspe.keygen(2, rng)
    db = []
    for i in range(30):
        p = Vec(Scaled(rng.randint(-100, 100)) for _ in range(2))
        db.append((i, aspe.encrypt_point(key, p)))
    q = vec(5, 5)
    qe1 = aspe.encrypt_query(key, q, r=Scaled(1))
    qe2 = aspe.encrypt_query(key, q, r=Scaled(91))
    assert aspe.knn(db, qe1, 30) == aspe.knn(db, qe2, 30)


def test_knn_matches_plaintext():
    rng = random.Random(7)
    for _ in range(100):
        d = rng.randint(1, 5)
        n = rng.randint(5, 60)
        k = rng.randint(1, min(10, n))
        key = aspe.keygen(d, rng)
        pts = [
            Vec(Scaled(rng.randint(-100, 100), 1) for _ in range(d))
            for _ in range(n)
        ]
        db = [(i, aspe.encrypt_point(key, p)) for i, p in enumerate(pts)]
        q = Vec(Scaled(rng.randint(-100, 100), 1) for _ in range(d))
        qe = aspe.encrypt_query(key, q, rng=rng)
        plain = sorted(
            range(n), key=lambda i: (ed_sq(pts[i], q).as_fraction(), i)
        )[:k]
        assert aspe.knn(db, qe, k) == plain


def test_knn_k_too_large():
    rng = random.Random(8)
    key = aspe.keygen(2, rng)
    db = [(0, aspe.encrypt_point(key, vec(1, 2)))]
    with pytest.raises(KTooLarge):
        aspe.knn(db, aspe.encrypt_query(key, vec(0, 0), rng=rng), 2)
