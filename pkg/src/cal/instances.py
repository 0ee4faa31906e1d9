"""Constructors for the standard small instances used in tests and examples."""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from .core import Distribution, HypothesisClass, InstanceSpace, build_hypothesis_class


def thresholds(n: int) -> HypothesisClass:
    """``f_t(x) = 1[x <= t]`` for ``t = -1..n-1``; row 0 is the all-zeros function."""
    return build_hypothesis_class([[int(x <= t) for x in range(n)] for t in range(-1, n)])


def chain_order(n: int) -> InstanceSpace:
    """The chain ``0 < 1 < ... < n-1`` with point 0 at the bottom."""
    return InstanceSpace(n, tuple([None] + list(range(n - 1))))


def initial_segment_class(order: InstanceSpace) -> HypothesisClass:
    """The zero function and ``x -> 1[x precedes z]`` for every point ``z``.

    On a chain this is exactly the threshold class.
    """
    rows = [[0] * order.n]
    for z in range(order.n):
        rows.append([int(order.precedes(x, z)) for x in range(order.n)])
    return build_hypothesis_class(rows)


def at_most_k_ones(n: int, k: int) -> HypothesisClass:
    rows = []
    for size in range(k + 1):
        for S in itertools.combinations(range(n), size):
            rows.append([int(x in S) for x in range(n)])
    return build_hypothesis_class(rows)


def powerset_class(n: int) -> HypothesisClass:
    return build_hypothesis_class([list(bits) for bits in itertools.product((0, 1), repeat=n)])


def intervals(n: int) -> HypothesisClass:
    """Indicators of discrete intervals ``[a, b]`` plus the empty set (VC dimension 2)."""
    rows = [[0] * n]
    for a in range(n):
        for b in range(a, n):
            rows.append([int(a <= x <= b) for x in range(n)])
    return build_hypothesis_class(rows)


def random_tree_order(rng: np.random.Generator, n: int) -> InstanceSpace:
    parent = [None] + [int(rng.integers(0, i)) for i in range(1, n)]
    return InstanceSpace(n, tuple(parent))


def random_class(rng: np.random.Generator, n: int, m: int, prune: bool = True) -> HypothesisClass:
    """Random boolean matrix, deduplicated; retried until pruning leaves a point."""
    while True:
        mat = rng.integers(0, 2, size=(m, n))
        rows = {tuple(r) for r in mat.tolist()}
        if len(rows) >= 2:
            return build_hypothesis_class(mat.tolist(), prune=prune)


def random_distribution(rng: np.random.Generator, n: int, max_weight: int = 4, allow_zero: bool = True) -> Distribution:
    low = 0 if allow_zero else 1
    while True:
        w = rng.integers(low, max_weight + 1, size=n)
        if w.sum() > 0:
            return Distribution.from_weights([Fraction(int(v)) for v in w])
