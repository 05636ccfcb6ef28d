"""Sealed check-vector tags: round trips, freshness, and forgery rejection."""

import random

import pytest

from sknn import symtag
from sknn.numerics import Scaled, Vec, vec


@pytest.fixture()
def key():
    return symtag.TagKey.generate(random.Random(0))


def test_round_trip_zero_vector(key):
    c = vec(0, 0)
    assert symtag.open_tag(key, symtag.seal(key, c)) == c


def test_round_trip_random_vectors(key):
    rng = random.Random(1)
    for _ in range(50):
        c = Vec(Scaled(rng.randint(-1000, 1000), rng.randint(0, 6)) for _ in range(2))
        assert symtag.open_tag(key, symtag.seal(key, c, rng)) == c


def test_fresh_nonce_gives_distinct_tags(key):
    c = vec(7, -3)
    t1 = symtag.seal(key, c)
    t2 = symtag.seal(key, c)
    assert t1.blob != t2.blob
    assert symtag.open_tag(key, t1) == c
    assert symtag.open_tag(key, t2) == c


def test_random_bytes_rejected(key):
    rng = random.Random(2)
    for size in (0, 10, 28, 64):
        blob = rng.getrandbits(size * 8).to_bytes(size, "big") if size else b""
        with pytest.raises(symtag.BadTag):
            symtag.open_tag(key, symtag.Tag(blob=blob))


def test_wrong_key_rejected(key):
    other = symtag.TagKey.generate(random.Random(3))
    tag = symtag.seal(key, vec(1, 2))
    with pytest.raises(symtag.BadTag):
        symtag.open_tag(other, tag)


def test_truncated_and_bitflipped_tags_rejected(key):
    tag = symtag.seal(key, vec(1, 2))
    with pytest.raises(symtag.BadTag):
        symtag.open_tag(key, symtag.Tag(blob=tag.blob[:-1]))
    flipped = bytearray(tag.blob)
    flipped[-1] ^= 1
    with pytest.raises(symtag.BadTag):
        symtag.open_tag(key, symtag.Tag(blob=bytes(flipped)))


def test_tag_from_one_session_mismatches_other():
    rng = random.Random(4)
    key = symtag.TagKey.generate(rng)
    c1 = vec(5, 6)
    c2 = vec(5, 7)
    t1 = symtag.seal(key, c1, rng)
    assert symtag.open_tag(key, t1) != c2


def test_canonical_encoding_tracks_value_equality():
    # equal values encode identically no matter how they were constructed
    a = Vec([Scaled(5260, 1), Scaled(1, 0)])
    b = Vec([Scaled(526), Scaled.from_decimal("1.0")])
    assert a == b
    assert symtag.encode_check_vector(a) == symtag.encode_check_vector(b)
    c = Vec([Scaled(5261, 1), Scaled(1)])
    assert symtag.encode_check_vector(a) != symtag.encode_check_vector(c)


def test_decode_round_trip():
    v = vec(-1000, "0.000001")
    assert symtag.decode_check_vector(symtag.encode_check_vector(v)) == v
