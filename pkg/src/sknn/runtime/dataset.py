"""Plaintext datasets: CSV ingestion, synthesis, and the exact kNN oracle."""

from __future__ import annotations

import csv
from dataclasses import dataclass

from ..errors import KTooLarge, ParseError
from ..numerics import Scaled, Vec

DEFAULT_SCALE = 6  # six decimal places, the default data precision


@dataclass(frozen=True)
class Dataset:
    """Plaintext table of d-dimensional points with unique integer ids."""

    points: tuple
    d: int

    def __post_init__(self):
        ids = [pid for pid, _ in self.points]
        if len(set(ids)) != len(ids):
            raise ParseError("duplicate point ids")
        for pid, p in self.points:
            if len(p) != self.d:
                raise ParseError(f"point {pid} has {len(p)} dims, expected {self.d}")

    def __len__(self):
        return len(self.points)


def random_dataset(m: int, d: int, rng, coord_range=(-1000, 1000),
                   scale: int = DEFAULT_SCALE) -> Dataset:
    """Uniform random points with `scale` decimal places."""
    lo, hi = coord_range
    unit = 10 ** scale
    pts = tuple(
        (i, Vec(Scaled(rng.randint(lo * unit, hi * unit), scale) for _ in range(d)))
        for i in range(m)
    )
    return Dataset(points=pts, d=d)


def ingest_csv(path, max_scale: int = DEFAULT_SCALE) -> Dataset:
    """Parse `id,x1..xd` rows; decimal values limited to max_scale places."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", row=1) from None
        if not header or header[0].strip() != "id" or len(header) < 2:
            raise ParseError("header must be id,x1..xd", row=1)
        d = len(header) - 1
        points = []
        seen = set()
        for rownum, row in enumerate(reader, start=2):
            if len(row) != d + 1:
                raise ParseError(
                    f"expected {d + 1} columns, got {len(row)}", row=rownum
                )
            try:
                pid = int(row[0])
            except ValueError:
                raise ParseError(f"bad id {row[0]!r}", row=rownum, col=1) from None
            if pid in seen:
                raise ParseError(f"duplicate id {pid}", row=rownum, col=1)
            seen.add(pid)
            coords = []
            for colnum, cell in enumerate(row[1:], start=2):
                try:
                    val = Scaled.from_decimal(cell)
                except ValueError:
                    raise ParseError(
                        f"bad decimal {cell!r}", row=rownum, col=colnum
                    ) from None
                if val.scale_exp > max_scale:
                    raise ParseError(
                        f"{cell!r} exceeds {max_scale} decimal places",
                        row=rownum,
                        col=colnum,
                    )
                coords.append(val)
            points.append((pid, Vec(coords)))
    return Dataset(points=tuple(points), d=d)


def export_csv(ds: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id"] + [f"x{i + 1}" for i in range(ds.d)])
        for pid, p in ds.points:
            writer.writerow([pid] + [str(x) for x in p])


def plaintext_knn(ds: Dataset, q, k: int):
    """Exact squared-Euclidean top-k; ties broken by ascending id.

    This is the ground truth every encrypted scheme is checked against, so
    it runs entirely in integer arithmetic at a common decimal scale.
    """
    if k > len(ds):
        raise KTooLarge(f"k={k} but dataset has {len(ds)} points")
    q = [x if isinstance(x, Scaled) else Scaled(x) for x in q]
    if len(q) != ds.d:
        raise ParseError(f"query has {len(q)} dims, dataset has {ds.d}")
    s = max(
        [e.scale_exp for e in q]
        + [e.scale_exp for _, p in ds.points for e in p]
    )
    qm = [x.mantissa_at(s) for x in q]
    scored = []
    for pid, p in ds.points:
        dist = 0
        for x, y in zip(p, qm):
            delta = x.mantissa_at(s) - y
            dist += delta * delta
        scored.append((dist, pid))
    scored.sort()
    return [pid for _, pid in scored[:k]]
