"""Additive homomorphic Paillier cryptosystem.

Used only during cooperative query encryption: the query user encrypts its
coordinates, the data owner combines them homomorphically with its secret
matrix, and the query user decrypts the blinded result.  Plaintexts are
signed integers encoded as residues mod N with threshold N/2.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

import gmpy2

from .numerics import Scaled

DEFAULT_KEY_BITS = 1024
MIN_KEY_BITS = 512


class PaillierError(Exception):
    pass


class PlaintextOutOfRange(PaillierError):
    pass


class KeyMismatch(PaillierError):
    pass


def _fingerprint(n: int) -> str:
    return hashlib.sha256(n.to_bytes((n.bit_length() + 7) // 8, "big")).hexdigest()[:16]


@dataclass(frozen=True)
class PublicKey:
    n: int
    g: int
    n_sq: int = field(repr=False)
    fingerprint: str

    @classmethod
    def from_n(cls, n: int) -> "PublicKey":
        return cls(n=n, g=n + 1, n_sq=n * n, fingerprint=_fingerprint(n))


@dataclass(frozen=True)
class PrivateKey:
    lam: int = field(repr=False)
    mu: int = field(repr=False)


@dataclass(frozen=True)
class PaillierKeypair:
    pk: PublicKey
    sk: PrivateKey
    key_bits: int


@dataclass(frozen=True)
class Ciphertext:
    value: int
    pk: PublicKey = field(repr=False)

    @property
    def pk_fingerprint(self) -> str:
        return self.pk.fingerprint


def _random_prime(bits: int, rng) -> int:
    while True:
        cand = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
        p = int(gmpy2.next_prime(cand))
        if p.bit_length() == bits:
            return p


def keygen(bits: int = DEFAULT_KEY_BITS, rng=None) -> PaillierKeypair:
    """Generate a keypair with two distinct primes of bits/2 each."""
    if bits < MIN_KEY_BITS:
        raise ValueError(f"key size below {MIN_KEY_BITS} bits")
    rng = rng if rng is not None else random.SystemRandom()
    half = bits // 2
    p = _random_prime(half, rng)
    while True:
        q = _random_prime(half, rng)
        if q != p:
            break
    n = p * q
    lam = (p - 1) * (q - 1)
    mu = int(gmpy2.invert(lam, n))
    return PaillierKeypair(pk=PublicKey.from_n(n), sk=PrivateKey(lam=lam, mu=mu), key_bits=bits)


def _encode(pk: PublicKey, m) -> int:
    if isinstance(m, Scaled):
        m = m.mantissa
    if not isinstance(m, int):
        raise TypeError(f"plaintext must be int or Scaled, got {type(m).__name__}")
    if abs(m) >= pk.n // 2:
        raise PlaintextOutOfRange(f"|{m}| exceeds signed capacity of modulus")
    return m % pk.n


def enc(pk: PublicKey, m, rng=None) -> Ciphertext:
    """Encrypt a signed integer (or the mantissa of a Scaled)."""
    rng = rng if rng is not None else random.SystemRandom()
    m_res = _encode(pk, m)
    # g = n+1 so g^m = 1 + m*n (mod n^2)
    gm = (1 + m_res * pk.n) % pk.n_sq
    r = rng.randrange(1, pk.n)
    c = gm * int(gmpy2.powmod(r, pk.n, pk.n_sq)) % pk.n_sq
    return Ciphertext(value=c, pk=pk)


def dec(keypair: PaillierKeypair, c: Ciphertext) -> int:
    """Decrypt to a signed integer (values >= N/2 decode as value - N)."""
    pk = keypair.pk
    if c.pk_fingerprint != pk.fingerprint:
        raise KeyMismatch("ciphertext was produced under a different key")
    x = int(gmpy2.powmod(c.value, keypair.sk.lam, pk.n_sq))
    m = ((x - 1) // pk.n) * keypair.sk.mu % pk.n
    if m >= pk.n // 2:
        m -= pk.n
    return m


def hom_add(c1: Ciphertext, c2: Ciphertext) -> Ciphertext:
    """Ciphertext of m1 + m2 via modular multiplication."""
    if c1.pk_fingerprint != c2.pk_fingerprint:
        raise KeyMismatch("cannot combine ciphertexts under different keys")
    return Ciphertext(value=c1.value * c2.value % c1.pk.n_sq, pk=c1.pk)


def hom_scale(c: Ciphertext, f: int) -> Ciphertext:
    """Ciphertext of f * m via modular exponentiation; f may be negative.

    Negative factors exponentiate the modular inverse of the ciphertext,
    which equals using the exponent f mod N but stays cheap for small |f|.
    """
    if isinstance(f, Scaled):
        f = f.to_int()
    return Ciphertext(value=int(gmpy2.powmod(c.value, f, c.pk.n_sq)), pk=c.pk)
