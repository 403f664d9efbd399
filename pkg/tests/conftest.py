import sys
import pathlib
import pytest

root = pathlib.Path(__file__).parent.parent
sys.path.append(str(root / "src"))

from pellmoments.arith import build_spf  # noqa: E402
from pellmoments.forms import assign_class_numbers  # noqa: E402
from pellmoments.pell import enumerate_run  # noqa: E402

# d, t, u for eps_d <= 10, hand-derived from t = 3..10
RUN10_TRIPLES = [
    (5, 3, 1),
    (8, 6, 2),
    (12, 4, 1),
    (21, 5, 1),
    (24, 10, 2),
    (32, 6, 1),
    (45, 7, 1),
    (60, 8, 1),
    (77, 9, 1),
    (96, 10, 1),
]


def brute_force_pell(d):
    """Smallest t > 2 with t^2 - d u^2 = 4, searched over u."""
    u = 1
    while True:
        n = d * u * u + 4
        t = int(n**0.5)
        for candidate in (t - 1, t, t + 1):
            if candidate > 2 and candidate * candidate == n:
                return candidate, u
        u += 1


@pytest.fixture(scope="session")
def spf_small():
    return build_spf(1000)


@pytest.fixture(scope="session")
def run10():
    return enumerate_run(10)


@pytest.fixture(scope="session")
def run200():
    return enumerate_run(200)


@pytest.fixture(scope="session")
def run2000():
    return enumerate_run(2000)


@pytest.fixture(scope="session")
def run2000_exact(run2000):
    return assign_class_numbers(run2000, mode="exact")
