"""Command-line interface: keygen, encrypt-db, serve, query, attack, bench.

Settings resolve as flags > SKNN_* environment variables > --config JSON
file > built-in defaults.
"""

from __future__ import annotations

import argparse
import getpass
import json
import os
import random
import sys

from . import aspe, attack, vsknn, zhu
from .numerics import Vec, as_scaled
from .runtime import bench, dataset, keystore, parties
from .runtime.parties import (
    CloudService,
    DataOwnerService,
    PartyServer,
    SocketTransport,
    run_session,
)


def _load_config(path):
    if not path:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _setting(args, name, config, default=None, cast=str):
    """flags > env > config file > default"""
    val = getattr(args, name.replace("-", "_"), None)
    if val is not None:
        return val
    env = os.environ.get("SKNN_" + name.replace("-", "_").upper())
    if env is not None:
        return cast(env)
    if name in config:
        return cast(config[name])
    return default


def _passphrase(args, config, confirm=False):
    pw = _setting(args, "passphrase", config)
    if pw is not None:
        return pw
    pw = getpass.getpass("keystore passphrase: ")
    if confirm and getpass.getpass("repeat passphrase: ") != pw:
        sys.exit("passphrases do not match")
    return pw


def _rng(seed):
    return random.Random(seed) if seed is not None else random.SystemRandom()


def _parse_query(text) -> Vec:
    return Vec(as_scaled(part.strip()) for part in text.split(","))


def _parse_endpoint(text):
    host, _, port = text.rpartition(":")
    return host or "127.0.0.1", int(port)


def _cmd_keygen(args, config):
    scheme = args.scheme
    rng = _rng(_setting(args, "seed", config, cast=int))
    pw = _passphrase(args, config)
    d = _setting(args, "d", config, cast=int)
    if d is None:
        sys.exit("--d is required")
    if scheme == "aspe":
        key = aspe.keygen(d, rng)
        payload = {"scheme": "aspe", "role": "client",
                   "keys": {"aspe": keystore.key_to_jsonable(key)}}
        keystore.keystore_save(args.out, payload, pw)
    elif scheme == "zhu":
        key = zhu.keygen(d, args.c, args.eps, rng)
        payload = {"scheme": "zhu", "role": "do",
                   "keys": {"data": keystore.key_to_jsonable(key)}}
        keystore.keystore_save(args.out, payload, pw)
    else:
        data_key, verify_key = vsknn.keygen(d, args.c, args.eps, args.l, rng)
        keystore.keystore_save(
            args.out,
            {"scheme": "vsknn", "role": "do",
             "keys": {"data": keystore.key_to_jsonable(data_key),
                      "verify": keystore.key_to_jsonable(verify_key)}},
            pw,
        )
        if args.cs_out:
            keystore.keystore_save(
                args.cs_out,
                {"scheme": "vsknn", "role": "cs",
                 "keys": {"verify": keystore.key_to_jsonable(verify_key)}},
                pw,
            )
    print(f"wrote {args.out}")


def _open_keys(path, pw):
    payload = keystore.keystore_load(path, pw)
    return payload, {
        name: keystore.key_from_jsonable(obj)
        for name, obj in payload["keys"].items()
    }


def _cmd_encrypt_db(args, config):
    pw = _passphrase(args, config)
    payload, keys = _open_keys(args.key, pw)
    scheme = payload["scheme"]
    ds = dataset.ingest_csv(getattr(args, "in"))
    rng = _rng(_setting(args, "seed", config, cast=int))
    key = keys["aspe"] if scheme == "aspe" else keys["data"]
    enc_db = parties.encrypt_dataset(scheme, key, ds, rng)
    keystore.save_encrypted_db(args.out, scheme, enc_db)
    print(f"encrypted {len(ds)} points -> {args.out}")


def _cmd_serve(args, config):
    pw = _passphrase(args, config)
    payload, keys = _open_keys(args.key, pw)
    scheme = payload["scheme"]
    if args.role == "do":
        service = DataOwnerService(
            scheme,
            keys["data"],
            verify_key=keys.get("verify"),
            rng=_rng(_setting(args, "seed", config, cast=int)),
        )
    else:
        if not args.db:
            sys.exit("--db is required for the cs role")
        db_scheme, enc_db = keystore.load_encrypted_db(args.db)
        if db_scheme != scheme:
            sys.exit(f"database is for scheme {db_scheme}, keys for {scheme}")
        service = CloudService(scheme, enc_db, verify_key=keys.get("verify"))
    server = PartyServer(service, host=args.host, port=args.port)
    server.start()
    host, port = server.address
    print(f"serving {scheme} {args.role} on {host}:{port}")
    try:
        server.wait()
    except KeyboardInterrupt:
        server.stop()


def _cmd_query(args, config):
    scheme = args.scheme
    q = _parse_query(args.q)
    rng = _rng(_setting(args, "seed", config, cast=int))
    cs = SocketTransport(*_parse_endpoint(args.cs))
    kwargs = {"cs": cs, "rng": rng, "bits": args.bits}
    if scheme == "aspe":
        pw = _passphrase(args, config)
        _, keys = _open_keys(args.key, pw)
        kwargs["aspe_key"] = keys["aspe"]
    else:
        if not args.do:
            sys.exit(f"--do host:port is required for {scheme}")
        kwargs["do"] = SocketTransport(*_parse_endpoint(args.do))
    result = run_session(scheme, q, args.k, **kwargs)
    print(json.dumps({"ids": result.ids}))


def _cmd_attack(args, config):
    rng = _rng(_setting(args, "seed", config, default=0, cast=int))
    d = args.dim
    if args.scheme == "zhu":
        key = zhu.keygen(d, args.c, args.eps, rng)
        ds = dataset.random_dataset(args.m, d, rng)
        enc_db = parties.encrypt_dataset("zhu", key, ds, rng)

        def factory(q):
            beta = rng.randint(*zhu.BETA_RANGE)
            return zhu.encrypt_query(key, q, rng=rng, bits=args.bits, beta=beta), beta

        def oracle(forged, q_plain):
            return zhu.knn(enc_db, forged, args.k) == dataset.plaintext_knn(
                ds, q_plain, args.k
            )

        report = attack.run_zhu_attack(
            factory, d, args.trials, rng, knn_oracle=oracle
        )
    else:
        data_key, verify_key = vsknn.keygen(d, args.c, args.eps, rng=rng)

        def token_factory(q):
            beta = rng.randint(*zhu.BETA_RANGE)
            token = vsknn.encrypt_query(
                data_key, verify_key, q, rng=rng, bits=args.bits, beta=beta
            )
            return token, beta

        report = attack.run_vsknn_attack(
            token_factory, lambda t: vsknn.verify(verify_key, t), d,
            args.trials, rng,
        )
    print(json.dumps(report, indent=1))


def _cmd_bench(args, config):
    overrides = {}
    if args.bits is not None:
        overrides["bits"] = args.bits
    if args.dims:
        overrides["dims"] = tuple(int(x) for x in args.dims.split(","))
    if args.points:
        overrides["point_counts"] = tuple(int(x) for x in args.points.split(","))
    if args.m is not None:
        overrides["m"] = args.m
    report = bench.run_figure(args.figure, seed=args.seed, out_dir=args.out,
                              **overrides)
    print(json.dumps(report.to_jsonable(), indent=1))


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="sknn",
        description="Secure kNN schemes, controllability attack, and benchmarks",
    )
    parser.add_argument("--config", help="JSON config file (lowest precedence)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate and store scheme keys")
    p.add_argument("--scheme", required=True, choices=parties.SCHEMES)
    p.add_argument("--d", type=int)
    p.add_argument("--c", type=int, default=2)
    p.add_argument("--eps", type=int, default=2)
    p.add_argument("--l", type=int, default=2)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--cs-out", help="separate keystore for the cloud server (vsknn)")
    p.add_argument("--passphrase")
    p.set_defaults(func=_cmd_keygen)

    p = sub.add_parser("encrypt-db", help="encrypt a CSV dataset")
    p.add_argument("--scheme", choices=parties.SCHEMES)
    p.add_argument("--in", required=True, dest="in")
    p.add_argument("--key", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--passphrase")
    p.set_defaults(func=_cmd_encrypt_db)

    p = sub.add_parser("serve", help="run a data-owner or cloud-server endpoint")
    p.add_argument("--role", required=True, choices=("do", "cs"))
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=0)
    p.add_argument("--key", required=True)
    p.add_argument("--db", help="encrypted database file (cs role)")
    p.add_argument("--seed", type=int)
    p.add_argument("--passphrase")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("query", help="run one kNN query against live endpoints")
    p.add_argument("--scheme", required=True, choices=parties.SCHEMES)
    p.add_argument("--q", required=True, help='query point, e.g. "13,97"')
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--do", help="data owner endpoint host:port")
    p.add_argument("--cs", required=True, help="cloud server endpoint host:port")
    p.add_argument("--key", help="keystore (aspe only)")
    p.add_argument("--bits", type=int, default=1024)
    p.add_argument("--seed", type=int)
    p.add_argument("--passphrase")
    p.set_defaults(func=_cmd_query)

    p = sub.add_parser("attack", help="run the controllability attack harness")
    p.add_argument("--scheme", required=True, choices=("zhu", "vsknn"))
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bits", type=int, default=512)
    p.add_argument("--c", type=int, default=2)
    p.add_argument("--eps", type=int, default=2)
    p.add_argument("--m", type=int, default=1000, help="database size for the oracle")
    p.add_argument("--k", type=int, default=5)
    p.set_defaults(func=_cmd_attack)

    p = sub.add_parser("bench", help="run one benchmark figure")
    p.add_argument("--figure", type=int, required=True, choices=sorted(bench.FIGURES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="directory for JSON/CSV series")
    p.add_argument("--bits", type=int)
    p.add_argument("--dims", help="comma list of dimensions, e.g. 2,10,25")
    p.add_argument("--points", help="comma list of point counts")
    p.add_argument("--m", type=int, help="fixed database size where applicable")
    p.set_defaults(func=_cmd_bench)

    args = parser.parse_args(argv)
    config = _load_config(args.config)
    return args.func(args, config)


if __name__ == "__main__":
    main()
