"""Secure k-nearest-neighbor toolkit over exact arithmetic.

Three schemes for kNN over encrypted, outsourced data (a scalar-product
baseline, a cooperatively blinded variant, and a verifiable variant with
server-side query checking), the GCD-based controllability attack that
breaks the blinded variant, and a three-party protocol runtime with a
benchmark harness.  All scheme arithmetic is exact, so every comparison,
verification equality, and attack step is machine-checkable with zero
tolerance.
"""

from . import aspe, attack, errors, numerics, paillier, symtag, vsknn, zhu
from .numerics import Mat, Perm, Scaled, Vec, vec

__all__ = [
    "aspe",
    "attack",
    "errors",
    "numerics",
    "paillier",
    "symtag",
    "vsknn",
    "zhu",
    "Scaled",
    "Vec",
    "Mat",
    "Perm",
    "vec",
]

__version__ = "0.1.0"
