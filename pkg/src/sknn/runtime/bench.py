"""Desk-scale benchmark harness.

Reproduces the shape of the reference measurements (attack scaling, query
encryption, database encryption, server-side kNN with and without query
verification).  Absolute numbers are hardware-bound; the reports capture
trends and persist JSON + CSV series for plotting.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import random
import time
from dataclasses import dataclass, field

from .. import attack, vsknn, zhu
from .dataset import random_dataset
from .parties import encrypt_dataset

DEFAULT_DIMS = (2, 10, 25, 50, 100)
DEFAULT_POINT_COUNTS = (1_000, 10_000, 100_000)


@dataclass
class BenchSeries:
    label: str
    xs: list
    ys: list
    meta: dict = field(default_factory=dict)


@dataclass
class BenchReport:
    figure: int
    params: dict
    series: list

    def to_jsonable(self):
        return {
            "figure": self.figure,
            "params": self.params,
            "series": [
                {"label": s.label, "xs": s.xs, "ys": s.ys, "meta": s.meta}
                for s in self.series
            ],
        }

    def save(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        base = os.path.join(out_dir, f"figure{self.figure}")
        with open(base + ".json", "w") as fh:
            json.dump(self.to_jsonable(), fh, indent=1)
        with open(base + ".csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["figure", "series", "x", "seconds"])
            for s in self.series:
                for x, y in zip(s.xs, s.ys):
                    writer.writerow([self.figure, s.label, x, f"{y:.6f}"])
        return base


def linear_fit(xs, ys):
    """Least-squares line fit; returns slope, intercept and R^2."""
    n = len(xs)
    if n < 2:
        raise ValueError("need at least two samples")
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    sxx = sum((x - mean_x) ** 2 for x in xs)
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    syy = sum((y - mean_y) ** 2 for y in ys)
    slope = sxy / sxx
    intercept = mean_y - slope * mean_x
    r2 = 1.0 if syy == 0 else (sxy * sxy) / (sxx * syy)
    return {"slope": slope, "intercept": intercept, "r2": r2}


def _median_time(fn, repeats: int = 3) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    times.sort()
    return times[len(times) // 2]


def _ids_checksum(ids) -> str:
    return hashlib.sha256(",".join(map(str, ids)).encode()).hexdigest()[:12]


def bench_attack_scaling(dims=DEFAULT_DIMS, bits: int = 512, seed: int = 0,
                         c: int = 2, eps: int = 2) -> BenchReport:
    """Figure 2 analog: wall time to break one query per dimension count.

    Each timed run covers the d+1 basis-acquisition sessions (fresh Paillier
    instance per session, as the protocol prescribes) plus one forgery.
    """
    xs, ys = [], []
    for d in dims:
        rng = random.Random(seed * 7_000_003 + d)
        key = zhu.keygen(d, c, eps, rng)

        def factory(q, _key=key, _rng=rng):
            return zhu.encrypt_query(_key, q, rng=_rng, bits=bits)

        t0 = time.perf_counter()
        basis = attack.acquire_basis(factory, d)
        q_new = [rng.randint(-1000, 1000) for _ in range(d)]
        attack.forge_query(basis, q_new)
        ys.append(time.perf_counter() - t0)
        xs.append(d)
    fit = linear_fit(xs, ys)
    return BenchReport(
        figure=2,
        params={"bits": bits, "seed": seed, "c": c, "eps": eps},
        series=[BenchSeries(label="attack_time", xs=xs, ys=ys, meta={"fit": fit})],
    )


def bench_query_encryption(dims=DEFAULT_DIMS, bits: int = 1024, seed: int = 0,
                           c: int = 2, eps: int = 2, l: int = 2) -> BenchReport:
    """Figure 3 analog: one cooperative query encryption per dimension."""
    series = {label: BenchSeries(label=label, xs=[], ys=[]) for label in ("zhu", "vsknn")}
    for d in dims:
        rng = random.Random(seed * 7_000_003 + d + 1_000_000)
        data_key, verify_key = vsknn.keygen(d, c, eps, l, rng)
        q = [rng.randint(-1000, 1000) for _ in range(d)]
        t = _median_time(
            lambda: zhu.encrypt_query(data_key, q, rng=rng, bits=bits), repeats=1
        )
        series["zhu"].xs.append(d)
        series["zhu"].ys.append(t)
        t = _median_time(
            lambda: vsknn.encrypt_query(data_key, verify_key, q, rng=rng, bits=bits),
            repeats=1,
        )
        series["vsknn"].xs.append(d)
        series["vsknn"].ys.append(t)
    return BenchReport(
        figure=3,
        params={"bits": bits, "seed": seed, "c": c, "eps": eps, "l": l},
        series=list(series.values()),
    )


def bench_db_encryption_dims(dims=DEFAULT_DIMS, m: int = 2_000, seed: int = 0,
                             c: int = 2, eps: int = 2) -> BenchReport:
    """Figure 4 analog: database encryption time against dimension."""
    xs, ys = [], []
    for d in dims:
        rng = random.Random(seed * 7_000_003 + d + 2_000_000)
        key = zhu.keygen(d, c, eps, rng)
        ds = random_dataset(m, d, rng)
        t0 = time.perf_counter()
        encrypt_dataset("zhu", key, ds, rng)
        ys.append(time.perf_counter() - t0)
        xs.append(d)
    return BenchReport(
        figure=4,
        params={"m": m, "seed": seed},
        series=[BenchSeries(label="db_encryption", xs=xs, ys=ys)],
    )


def bench_db_encryption_points(point_counts=DEFAULT_POINT_COUNTS, d: int = 10,
                               seed: int = 0, c: int = 2, eps: int = 2) -> BenchReport:
    """Figure 5 analog: database encryption time against point count."""
    xs, ys = [], []
    rng = random.Random(seed * 7_000_003 + 3_000_000)
    key = zhu.keygen(d, c, eps, rng)
    for m in point_counts:
        ds = random_dataset(m, d, rng)
        t0 = time.perf_counter()
        encrypt_dataset("zhu", key, ds, rng)
        ys.append(time.perf_counter() - t0)
        xs.append(m)
    fit = linear_fit(xs, ys)
    return BenchReport(
        figure=5,
        params={"d": d, "seed": seed},
        series=[BenchSeries(label="db_encryption", xs=xs, ys=ys, meta={"fit": fit})],
    )


def bench_knn_dims(dims=(2, 10, 25), m: int = 2_000, k: int = 5, seed: int = 0,
                   bits: int = 512) -> BenchReport:
    """Figure 6 analog: server-side kNN time against dimension."""
    zhu_s = BenchSeries(label="zhu", xs=[], ys=[])
    vs_s = BenchSeries(label="vsknn", xs=[], ys=[])
    for d in dims:
        rng = random.Random(seed * 7_000_003 + d + 4_000_000)
        data_key, verify_key = vsknn.keygen(d, rng=rng)
        ds = random_dataset(m, d, rng)
        db = encrypt_dataset("zhu", data_key, ds, rng)
        q = [rng.randint(-1000, 1000) for _ in range(d)]
        zq = zhu.encrypt_query(data_key, q, rng=rng, bits=bits)
        vt = vsknn.encrypt_query(data_key, verify_key, q, rng=rng, bits=bits)
        zhu_s.xs.append(d)
        zhu_s.ys.append(_median_time(lambda: zhu.knn(db, zq, k)))
        vs_s.xs.append(d)
        vs_s.ys.append(_median_time(lambda: vsknn.knn(db, vt, k, verify_key)))
    return BenchReport(
        figure=6,
        params={"m": m, "k": k, "seed": seed, "bits": bits},
        series=[zhu_s, vs_s],
    )


def bench_knn_points(point_counts=DEFAULT_POINT_COUNTS, d: int = 10, k: int = 5,
                     seed: int = 0, bits: int = 512) -> BenchReport:
    """Figure 7 analog: server-side kNN time against point count.

    Also measures the verification step alone: it is the structural
    difference between the two schemes' server work and must stay flat in m.
    """
    rng = random.Random(seed * 7_000_003 + 5_000_000)
    data_key, verify_key = vsknn.keygen(d, rng=rng)
    zhu_s = BenchSeries(label="zhu", xs=[], ys=[])
    vs_s = BenchSeries(label="vsknn", xs=[], ys=[])
    ver_s = BenchSeries(label="vsknn_verify", xs=[], ys=[])
    for m in point_counts:
        ds = random_dataset(m, d, rng)
        db = encrypt_dataset("zhu", data_key, ds, rng)
        q = [rng.randint(-1000, 1000) for _ in range(d)]
        zq = zhu.encrypt_query(data_key, q, rng=rng, bits=bits)
        vt = vsknn.encrypt_query(data_key, verify_key, q, rng=rng, bits=bits)
        ids_z = zhu.knn(db, zq, k)
        ids_v = vsknn.knn(db, vt, k, verify_key)
        zhu_s.xs.append(m)
        zhu_s.ys.append(_median_time(lambda: zhu.knn(db, zq, k)))
        zhu_s.meta[f"ids_{m}"] = _ids_checksum(ids_z)
        vs_s.xs.append(m)
        vs_s.ys.append(_median_time(lambda: vsknn.knn(db, vt, k, verify_key)))
        vs_s.meta[f"ids_{m}"] = _ids_checksum(ids_v)
        ver_s.xs.append(m)
        ver_s.ys.append(
            _median_time(lambda: vsknn.verify(verify_key, vt), repeats=15)
        )
    return BenchReport(
        figure=7,
        params={"d": d, "k": k, "seed": seed, "bits": bits},
        series=[zhu_s, vs_s, ver_s],
    )


FIGURES = {
    2: bench_attack_scaling,
    3: bench_query_encryption,
    4: bench_db_encryption_dims,
    5: bench_db_encryption_points,
    6: bench_knn_dims,
    7: bench_knn_points,
}


def run_figure(figure: int, seed: int = 0, out_dir=None, **overrides) -> BenchReport:
    """Run one figure's benchmark; persist JSON + CSV when out_dir is given."""
    if figure not in FIGURES:
        raise ValueError(f"no benchmark for figure {figure}")
    report = FIGURES[figure](seed=seed, **overrides)
    if out_dir:
        report.save(out_dir)
    return report
