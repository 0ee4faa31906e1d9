import random
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from cal.core import Distribution, DistributionClass, InstanceSpace, build_hypothesis_class

sys.path.insert(0, str(Path(__file__).parent))

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"


def thresholds(n):
    return build_hypothesis_class([[int(x >= t) for x in range(n)] for t in range(n + 1)])


def chain(n):
    return InstanceSpace(n, [None] + list(range(n - 1)))


def uniform_class(n):
    return DistributionClass.explicit([Distribution.uniform(n)])


def random_class(rng: random.Random, n: int, m: int, prune: bool = True):
    """Random distinct rows with at least one nonconstant column."""
    while True:
        rows = {tuple(rng.randint(0, 1) for _ in range(n)) for _ in range(m)}
        if len(rows) >= 2:
            return build_hypothesis_class(sorted(rows), prune=prune)


def random_distribution(rng: random.Random, n: int, zeros: bool = True) -> Distribution:
    w = [rng.randint(0 if zeros else 1, 4) for _ in range(n)]
    if sum(w) == 0:
        w[0] = 1
    return Distribution.from_weights(w)


def random_forest(rng: random.Random, n: int):
    parent = [None] + [rng.choice([None] + list(range(x))) if rng.random() < 0.2 else rng.randrange(x) for x in range(1, n)]
    return InstanceSpace(n, parent)


def tree_functions(order: InstanceSpace):
    """The VC-1 class of a tree order: the empty function and every root-path indicator."""
    rows = [[0] * order.n]
    for x in range(order.n):
        rows.append([int(order.precedes(y, x)) for y in range(order.n)])
    return build_hypothesis_class(rows)


@pytest.fixture
def rng():
    return random.Random(20240)


@pytest.fixture
def th8():
    return thresholds(8), uniform_class(8)


FRACTIONS = (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8))
