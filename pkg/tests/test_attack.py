"""Controllability break: blind extraction, basis tokens, forgery."""

import random

import pytest

from sknn import attack, vsknn, zhu
from sknn.errors import FakeQuery, ProtocolFailure
from sknn.numerics import AllZero, Mat, Perm, Scaled, Vec, dot, vec, vec_gcd

from conftest import TEST_BITS, decimal_vec


def make_factory(key, rng, params=None, counter=None):
    """Owner-side session runner; params optionally pins (beta, r) per query."""

    def factory(q):
        if counter is not None:
            counter["sessions"] = counter.get("sessions", 0) + 1
        beta = r_vec = None
        if params is not None:
            beta, r_vec = params[tuple(str(x) for x in q)]
        return zhu.encrypt_query(
            key, q, rng=rng, bits=TEST_BITS, beta=beta, r_vec=r_vec
        )

    return factory


def test_extract_beta_worked_example(worked_example):
    q_enc = decimal_vec(worked_example["q_enc"])
    assert attack.extract_beta(q_enc) == Scaled(worked_example["beta"])
    zero = worked_example["basis"]["zero"]
    assert attack.extract_beta(decimal_vec(zero["q_enc"])) == Scaled(zero["beta"])


def test_extract_beta_all_zero():
    with pytest.raises(AllZero):
        attack.extract_beta(vec(0, 0, 0))


def test_reduce_token_worked_example(worked_example):
    zero = worked_example["basis"]["zero"]
    assert attack.reduce_token(decimal_vec(zero["q_enc"])) == decimal_vec(
        zero["reduced"]
    )


def test_basis_and_forgery_worked_example(example_key, worked_example):
    rng = random.Random(0)
    basis_cfg = worked_example["basis"]
    params = {
        tuple(cfg["query"]): (cfg["beta"], cfg["r_vec"])
        for cfg in basis_cfg.values()
    }
    counter = {}
    basis = attack.acquire_basis(
        make_factory(example_key, rng, params, counter), worked_example["d"]
    )
    assert counter["sessions"] == 3
    assert basis.zero_token == decimal_vec(basis_cfg["zero"]["reduced"])
    assert basis.unit_tokens[0] == decimal_vec(basis_cfg["e1"]["reduced"])
    assert basis.unit_tokens[1] == decimal_vec(basis_cfg["e2"]["reduced"])

    forged = attack.forge_query(basis, decimal_vec(worked_example["forged"]["query"]))
    assert forged.vec == decimal_vec(worked_example["forged"]["vector"])


def test_forged_token_equals_owner_issued_token(example_key, worked_example):
    # the owner, choosing blind 1 and the induced random vector, would have
    # produced exactly the forged token
    rng = random.Random(1)
    forged_cfg = worked_example["forged"]
    q_enc = zhu.encrypt_query(
        example_key,
        decimal_vec(forged_cfg["query"]),
        rng=rng,
        bits=TEST_BITS,
        beta=1,
        r_vec=[forged_cfg["induced_r"]],
    )
    assert q_enc.vec == decimal_vec(forged_cfg["vector"])


def test_reduced_tokens_have_trivial_gcd(example_key, worked_example):
    rng = random.Random(2)
    params = {
        tuple(cfg["query"]): (cfg["beta"], cfg["r_vec"])
        for cfg in worked_example["basis"].values()
    }
    basis = attack.acquire_basis(
        make_factory(example_key, rng, params), worked_example["d"]
    )
    for token in (basis.zero_token,) + basis.unit_tokens:
        assert vec_gcd(token) == Scaled(1)


def test_forge_unit_query_reproduces_token():
    rng = random.Random(3)
    key = zhu.keygen(3, 2, 2, rng)
    basis = attack.acquire_basis(make_factory(key, rng), 3)
    for i in range(3):
        unit = Vec(Scaled(1 if j == i else 0) for j in range(3))
        assert attack.forge_query(basis, unit).vec == basis.unit_tokens[i]
    zero = Vec(Scaled(0) for _ in range(3))
    assert attack.forge_query(basis, zero).vec == basis.zero_token


def test_forged_knn_matches_plaintext():
    rng = random.Random(4)
    for d in (2, 3):
        key = zhu.keygen(d, 2, 2, rng)
        pts = [
            Vec(Scaled(rng.randint(-1000, 1000)) for _ in range(d))
            for _ in range(100)
        ]
        db = [zhu.encrypt_point(key, p, rng, point_id=i) for i, p in enumerate(pts)]
        basis = attack.acquire_basis(make_factory(key, rng), d)
        for _ in range(25):
            q = Vec(Scaled(rng.randint(-1000, 1000), 1) for _ in range(d))
            forged = attack.forge_query(basis, q)

            def dist(i):
                s = sum(((x - y) * (x - y) for x, y in zip(pts[i], q)), Scaled(0))
                return s.as_fraction()

            plain = sorted(range(100), key=lambda i: (dist(i), i))[:5]
            assert zhu.knn(db, forged, 5) == plain


def test_fractional_coordinates_forge_too():
    rng = random.Random(5)
    key = zhu.keygen(2, 1, 1, rng)
    basis = attack.acquire_basis(make_factory(key, rng), 2)
    q = vec("0.5", "-3.25")
    forged = attack.forge_query(basis, q)
    owner = zhu.encrypt_query(key, q, rng=rng, bits=TEST_BITS, beta=1, r_vec=[0])
    # both are blind-1 tokens for q differing only in the random c-slots,
    # which cancel between points: score differences agree exactly
    p1 = zhu.encrypt_point(key, vec(1, 1), rng)
    p2 = zhu.encrypt_point(key, vec(-2, 4), rng)
    assert (
        dot(p1.vec, forged.vec) - dot(p2.vec, forged.vec)
        == dot(p1.vec, owner.vec) - dot(p2.vec, owner.vec)
    )


def test_gcd_false_positive_mode_documented():
    # a key matrix whose rows share a factor inflates the extracted blind:
    # all mantissas of M.qdot are even, so the GCD returns 2*beta
    n = 5
    m = Mat(
        tuple(Scaled(2 * (1 if i == j else (i + j) % 3)) for j in range(n))
        for i in range(n)
    )
    assert m.det() != 0
    key = zhu.ZhuKey(
        m=m,
        perm=Perm.identity(n),
        s_vec=vec(1, 2, 3),
        tau=vec(4),
        d=2,
        c=1,
        eps=1,
    )
    rng = random.Random(6)
    q_enc = zhu.encrypt_query(
        key, vec(1, 3), rng=rng, bits=TEST_BITS, beta=5, r_vec=[7]
    )
    assert attack.extract_beta(q_enc) == Scaled(10)


def test_harness_heals_gcd_false_positives():
    # one poisoned session over-reduces; the trial harness (which knows the
    # session blind) detects the mismatch, counts it, and re-acquires
    rng = random.Random(7)
    key = zhu.keygen(2, 1, 1, rng)
    calls = {"n": 0}

    def factory(q):
        calls["n"] += 1
        beta = rng.randint(*zhu.BETA_RANGE)
        token = zhu.encrypt_query(key, q, rng=rng, bits=TEST_BITS, beta=beta)
        if calls["n"] == 2:  # simulate a shared factor in this one session
            token = zhu.ZhuEncQuery(vec=token.vec.scale(Scaled(3)))
        return token, beta

    report = attack.run_zhu_attack(factory, 2, trials=3, rng=rng)
    assert report["gcd_false_positives"] == 1
    assert report["sessions"] == 4  # 3 basis sessions + 1 retry
    assert report["successes"] == 3


def test_run_zhu_attack_with_oracle():
    rng = random.Random(8)
    key = zhu.keygen(2, 1, 1, rng)
    pts = [Vec(Scaled(rng.randint(-100, 100)) for _ in range(2)) for _ in range(40)]
    db = [zhu.encrypt_point(key, p, rng, point_id=i) for i, p in enumerate(pts)]

    def factory(q):
        beta = rng.randint(*zhu.BETA_RANGE)
        return zhu.encrypt_query(key, q, rng=rng, bits=TEST_BITS, beta=beta), beta

    def oracle(forged, q_plain):
        def dist(i):
            s = sum(
                ((x - y) * (x - y) for x, y in zip(pts[i], q_plain)), Scaled(0)
            )
            return s.as_fraction()

        plain = sorted(range(40), key=lambda i: (dist(i), i))[:5]
        return zhu.knn(db, forged, 5) == plain

    report = attack.run_zhu_attack(factory, 2, trials=10, rng=rng, knn_oracle=oracle)
    assert report["trials"] == 10
    assert report["successes"] == 10
    assert report["basis_time"] > 0
    assert report["mean_forge_time"] >= 0
    assert report["sessions"] >= 3


def test_acquire_basis_one_dimension_needs_two_sessions():
    rng = random.Random(20)
    key = zhu.keygen(1, 1, 1, rng)
    counter = {}
    basis = attack.acquire_basis(make_factory(key, rng, counter=counter), 1)
    assert counter["sessions"] == 2
    assert len(basis.unit_tokens) == 1


def test_acquire_basis_wraps_factory_failures():
    def broken(q):
        raise RuntimeError("owner offline")

    with pytest.raises(ProtocolFailure):
        attack.acquire_basis(broken, 2)


def test_vsknn_resists_the_same_playbook():
    rng = random.Random(9)
    data_key, verify_key = vsknn.keygen(2, rng=rng)

    def token_factory(q):
        beta = rng.randint(*zhu.BETA_RANGE)
        token = vsknn.encrypt_query(
            data_key, verify_key, q, rng=rng, bits=TEST_BITS, beta=beta
        )
        return token, beta

    report = attack.run_vsknn_attack(
        token_factory, lambda t: vsknn.verify(verify_key, t), 2, trials=20, rng=rng
    )
    assert report["forgeries_accepted"] == 0
    assert report["gcd_reveals_beta"] <= 1


def test_replayed_tag_with_combined_vector_rejected():
    rng = random.Random(10)
    data_key, verify_key = vsknn.keygen(2, rng=rng)
    t1 = vsknn.encrypt_query(data_key, verify_key, vec(1, 0), rng=rng, bits=TEST_BITS)
    t2 = vsknn.encrypt_query(data_key, verify_key, vec(0, 1), rng=rng, bits=TEST_BITS)
    combined = t1.q_tilde.scale(Scaled(3)) + t2.q_tilde.scale(Scaled(-2))
    with pytest.raises(FakeQuery):
        vsknn.verify(
            verify_key,
            vsknn.QueryToken(q_tilde=combined, tag=t1.tag, scale_meta=t1.scale_meta),
        )
