"""Query-controllability break against the blinded scheme.

The owner multiplies a fresh positive integer blind into every slot of the
encrypted query, so the GCD of the returned vector's mantissas recovers it.
Dividing it out yields a reusable token of the form M . qdot^T.  Tokens for
the zero query and the unit queries form a basis: any new query's token is a
plain linear combination of them, minted without the owner's participation.

The GCD can over-extract when the unblinded vector's mantissas already share
a factor (probability ~2^-n per session).  A consistent inflation is
harmless (kNN ordering is invariant under positive scaling of the query),
but a single over-reduced basis token corrupts forged combinations, so the
trial harness counts these events against the known session blinds and
re-acquires the affected token.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

from .errors import FakeQuery, ProtocolFailure
from .numerics import AllZero, Scaled, Vec, as_scaled, vec_gcd
from .zhu import ZhuEncQuery


@dataclass(frozen=True)
class BasisTokenSet:
    """Reduced tokens for the zero query and each unit query."""

    d: int
    zero_token: Vec
    unit_tokens: tuple

    def __post_init__(self):
        if len(self.unit_tokens) != self.d:
            raise ValueError("need one unit token per dimension")


def extract_beta(q_enc, scale: int | None = None) -> Scaled:
    """Recover the owner's per-query blind as the GCD across all slots.

    Mantissas are normalized at the public protocol scale when known (the
    scale metadata travels in clear), so blinds divisible by ten do not get
    partially absorbed into the decimal scale.  If the unblinded vector's
    mantissas already share a factor, the result is that multiple of the
    blind (the documented false-positive mode).
    """
    if isinstance(q_enc, ZhuEncQuery):
        if scale is None:
            scale = q_enc.scale_meta
        v = q_enc.vec
    else:
        v = q_enc
    entries = [as_scaled(e) for e in v]
    if scale is None:
        return vec_gcd(entries)
    if not entries or all(e.mantissa == 0 for e in entries):
        raise AllZero("all entries are zero")
    g = 0
    for e in entries:
        g = math.gcd(g, abs(e.mantissa_at(scale)))
    return Scaled(g, 0)


def reduce_token(q_enc, scale: int | None = None) -> Vec:
    """Divide the extracted blind out of an encrypted query."""
    beta = extract_beta(q_enc, scale=scale)
    v = q_enc.vec if isinstance(q_enc, ZhuEncQuery) else q_enc
    return Vec(e / beta for e in v)


def _unit_query(d: int, i: int) -> Vec:
    return Vec(Scaled(1 if j == i else 0) for j in range(d))


def acquire_basis(session_factory, d: int) -> BasisTokenSet:
    """Obtain reduced tokens for 0^d and e_1..e_d via d+1 protocol sessions.

    session_factory(query_vec) must run one full query-encryption exchange
    with the owner and return the resulting encrypted query.
    """
    try:
        zero = reduce_token(session_factory(Vec([Scaled(0)] * d)))
        units = tuple(
            reduce_token(session_factory(_unit_query(d, i))) for i in range(d)
        )
    except Exception as exc:
        raise ProtocolFailure(f"basis acquisition failed: {exc}") from exc
    return BasisTokenSet(d=d, zero_token=zero, unit_tokens=units)


def forge_query(basis: BasisTokenSet, q_new) -> ZhuEncQuery:
    """Mint a valid encrypted query as a linear combination of basis tokens.

    The combination q = sum_i q_i * e_i + (1 - sum_i q_i) * 0^d keeps the
    constant slot at 1, so the result is a well-formed token with blind 1.
    Coefficients are exact scalars, so fractional coordinates forge too.
    """
    coords = [as_scaled(x) for x in q_new]
    if len(coords) != basis.d:
        raise ValueError(f"query has {len(coords)} dims, basis covers {basis.d}")
    coeff_zero = Scaled(1) - sum(coords, Scaled(0))
    acc = basis.zero_token.scale(coeff_zero)
    for coord, token in zip(coords, basis.unit_tokens):
        acc = acc + token.scale(coord)
    return ZhuEncQuery(vec=acc)


def run_zhu_attack(
    session_factory,
    d: int,
    trials: int,
    rng,
    knn_oracle=None,
    max_fp_retries: int = 6,
):
    """Acquire a basis, then forge tokens for random queries.

    session_factory(query_vec) returns (encrypted_query, session_blind); the
    blind is harness knowledge used only to count GCD false positives, which
    are healed by re-running the affected session.  knn_oracle(forged_token,
    plain_query), when given, must return True when the forged token's kNN
    answer matches the plaintext answer.  Returns the CLI-facing report.
    """
    false_positives = 0
    sessions = 0

    def fetch_reduced(q):
        nonlocal false_positives, sessions
        for _ in range(max_fp_retries):
            q_enc, beta = session_factory(q)
            sessions += 1
            if extract_beta(q_enc) == Scaled(beta):
                return reduce_token(q_enc)
            false_positives += 1
        raise ProtocolFailure(
            f"GCD kept over-extracting across {max_fp_retries} sessions"
        )

    t0 = time.perf_counter()
    zero = fetch_reduced(Vec([Scaled(0)] * d))
    units = tuple(fetch_reduced(_unit_query(d, i)) for i in range(d))
    basis = BasisTokenSet(d=d, zero_token=zero, unit_tokens=units)
    basis_time = time.perf_counter() - t0

    successes = 0
    forge_seconds = 0.0
    for _ in range(trials):
        q_new = Vec(Scaled(rng.randint(-1000, 1000)) for _ in range(d))
        t1 = time.perf_counter()
        forged = forge_query(basis, q_new)
        forge_seconds += time.perf_counter() - t1
        if knn_oracle is None or knn_oracle(forged, q_new):
            successes += 1
    return {
        "scheme": "zhu",
        "dim": d,
        "trials": trials,
        "successes": successes,
        "mean_forge_time": forge_seconds / trials if trials else 0.0,
        "basis_time": basis_time,
        "sessions": sessions,
        "gcd_false_positives": false_positives,
    }


def run_vsknn_attack(token_factory, verify_fn, d: int, trials: int, rng):
    """Replay the same playbook against the verifiable scheme; must fail.

    token_factory(query_vec) returns (token, session_blind) from an honest
    exchange; verify_fn(token) raises FakeQuery on rejection.  The report
    counts how often the GCD reveals the session blind and how many forged
    tokens the server accepted (both should be ~zero).
    """
    from .vsknn import QueryToken

    gcd_hits = 0
    accepted = 0
    pool = []
    for _ in range(trials):
        q = Vec(Scaled(rng.randint(-1000, 1000)) for _ in range(d))
        token, beta = token_factory(q)
        try:
            if extract_beta(token.q_tilde, scale=token.scale_meta) == Scaled(beta):
                gcd_hits += 1
        except AllZero:
            pass
        pool.append(token)
        if len(pool) >= 2:
            a, b = rng.sample(pool, 2)
            lam = Scaled(rng.randint(2, 9))
            combined = a.q_tilde.scale(lam) + b.q_tilde.scale(Scaled(1) - lam)
            forged = QueryToken(
                q_tilde=combined, tag=a.tag, scale_meta=a.scale_meta
            )
            try:
                verify_fn(forged)
                accepted += 1
            except FakeQuery:
                pass
    return {
        "scheme": "vsknn",
        "dim": d,
        "trials": trials,
        "gcd_reveals_beta": gcd_hits,
        "forgeries_accepted": accepted,
    }
