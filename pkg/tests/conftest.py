import json
import os

import pytest

from sknn.numerics import Mat, Perm, Scaled, Vec, as_scaled
from sknn.zhu import ZhuKey

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")

# tests run Paillier at the minimum size for speed; production default is 1024
TEST_BITS = 512


def load_worked_example():
    with open(os.path.join(DATA_DIR, "zhu_worked_example.json")) as fh:
        return json.load(fh)


def decimal_vec(items) -> Vec:
    return Vec(as_scaled(str(x)) for x in items)


@pytest.fixture(scope="session")
def worked_example():
    return load_worked_example()


@pytest.fixture(scope="session")
def example_matrix(worked_example) -> Mat:
    return Mat(
        tuple(Scaled.from_decimal(e) for e in row)
        for row in worked_example["matrix"]
    )


@pytest.fixture(scope="session")
def example_key(worked_example, example_matrix) -> ZhuKey:
    # S and tau are never exercised by the query-side fixture values
    return ZhuKey(
        m=example_matrix,
        perm=Perm.from_one_based(worked_example["perm_one_based"]),
        s_vec=decimal_vec([5, 7, 9]),
        tau=decimal_vec([4]),
        d=worked_example["d"],
        c=worked_example["c"],
        eps=worked_example["eps"],
    )
