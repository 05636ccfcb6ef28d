"""Additive homomorphic cryptosystem: round trips and homomorphic laws."""

import random

import pytest

from sknn import paillier
from sknn.numerics import Scaled

from conftest import TEST_BITS


@pytest.fixture(scope="module")
def keypair():
    return paillier.keygen(TEST_BITS, random.Random(100))


def test_round_trip_seeded(keypair):
    rng = random.Random(0)
    c = paillier.enc(keypair.pk, 42, rng)
    assert paillier.dec(keypair, c) == 42


def test_round_trip_1024_bits():
    rng = random.Random(1)
    kp = paillier.keygen(1024, rng)
    assert kp.pk.n.bit_length() in (1023, 1024)
    for _ in range(10):
        m = rng.randint(-10 ** 12, 10 ** 12)
        assert paillier.dec(kp, paillier.enc(kp.pk, m, rng)) == m


def test_distinct_moduli():
    rng = random.Random(2)
    a = paillier.keygen(TEST_BITS, rng)
    b = paillier.keygen(TEST_BITS, rng)
    assert a.pk.n != b.pk.n


def test_keygen_rejects_small_keys():
    with pytest.raises(ValueError):
        paillier.keygen(128)


def test_zero_and_negative(keypair):
    rng = random.Random(3)
    assert paillier.dec(keypair, paillier.enc(keypair.pk, 0, rng)) == 0
    assert paillier.dec(keypair, paillier.enc(keypair.pk, -5, rng)) == -5


def test_scaled_plaintext_round_trip_at_production_scale(keypair):
    # value 13 expressed at the six-decimal production scale
    rng = random.Random(4)
    m = Scaled(13).mantissa_at(6)
    assert m == 13_000_000
    c = paillier.enc(keypair.pk, m, rng)
    assert Scaled(paillier.dec(keypair, c), 6) == Scaled(13)
    # a Scaled plaintext encrypts as its canonical mantissa
    c2 = paillier.enc(keypair.pk, Scaled.from_decimal("12.5"), rng)
    assert paillier.dec(keypair, c2) == 125


def test_plaintext_out_of_range(keypair):
    with pytest.raises(paillier.PlaintextOutOfRange):
        paillier.enc(keypair.pk, keypair.pk.n // 2 + 1)


def test_hom_add_simple(keypair):
    rng = random.Random(5)
    c = paillier.hom_add(
        paillier.enc(keypair.pk, 2, rng), paillier.enc(keypair.pk, 3, rng)
    )
    assert paillier.dec(keypair, c) == 5
    c = paillier.hom_add(
        paillier.enc(keypair.pk, 7, rng), paillier.enc(keypair.pk, 0, rng)
    )
    assert paillier.dec(keypair, c) == 7


def test_hom_add_random_pairs(keypair):
    rng = random.Random(6)
    for _ in range(100):
        m1 = rng.randint(-10 ** 9, 10 ** 9)
        m2 = rng.randint(-10 ** 9, 10 ** 9)
        c = paillier.hom_add(
            paillier.enc(keypair.pk, m1, rng), paillier.enc(keypair.pk, m2, rng)
        )
        assert paillier.dec(keypair, c) == m1 + m2


def test_hom_scale_worked_example(keypair):
    # exponentiating a ciphertext of 13 by the blind 131 gives 1703
    rng = random.Random(7)
    c = paillier.hom_scale(paillier.enc(keypair.pk, 13, rng), 131)
    assert paillier.dec(keypair, c) == 1703


def test_hom_scale_identity_and_negative(keypair):
    rng = random.Random(8)
    c = paillier.enc(keypair.pk, 7, rng)
    assert paillier.dec(keypair, paillier.hom_scale(c, 1)) == 7
    assert paillier.dec(keypair, paillier.hom_scale(c, -2)) == -14


def test_hom_scale_random(keypair):
    rng = random.Random(9)
    for _ in range(100):
        m = rng.randint(-10 ** 6, 10 ** 6)
        f = rng.randint(-10 ** 4, 10 ** 4)
        c = paillier.hom_scale(paillier.enc(keypair.pk, m, rng), f)
        assert paillier.dec(keypair, c) == f * m


def test_probabilistic_encryption(keypair):
    rng = random.Random(10)
    seen = {paillier.enc(keypair.pk, 99, rng).value for _ in range(100)}
    assert len(seen) == 100


def test_key_mismatch_detected():
    rng = random.Random(11)
    a = paillier.keygen(TEST_BITS, rng)
    b = paillier.keygen(TEST_BITS, rng)
    ca = paillier.enc(a.pk, 1, rng)
    cb = paillier.enc(b.pk, 1, rng)
    with pytest.raises(paillier.KeyMismatch):
        paillier.hom_add(ca, cb)
    with pytest.raises(paillier.KeyMismatch):
        paillier.dec(a, cb)
