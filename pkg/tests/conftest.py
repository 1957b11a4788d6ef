import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from skewfold import SkewProduct, analyze, estimate_R  # noqa: E402

WORKED = {
    "case2": ("z^3", "z^3*w^2 + z^5"),
    "case3": ("z^6", "z^3*w^2 + w^5"),
    "case4": ("z^5", "w^4 + z^2*w^3 + z^3*w"),
}
D_ONE = ("z^6", "z^3*w + w^2")


def build(p, q, eps=0.01):
    f = SkewProduct.from_text(p, q)
    plan = analyze(f)[0]
    return f, plan, estimate_R(f, plan, eps)


@pytest.fixture(scope="session")
def worked():
    return {name: build(*pq) for name, pq in WORKED.items()}


@pytest.fixture(scope="session")
def d_one():
    return build(*D_ONE)
