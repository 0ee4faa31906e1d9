"""Critical regions, levels and the halving label for adaptive adversaries.

The level of a dataset depends on it only through its version space, so all
recursions are memoized on version-space bitmasks. ``level(V)`` is the largest
``k`` for which the dataset lies in the k-th level set; -1 means ``V`` is empty.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

from .core import DistributionClass, HypothesisClass, InstanceSpace, bits, to_fraction, version_space
from .errors import InputError

__all__ = ["LevelContext", "k_of_eps", "tilde_k", "tilde_levels"]


class LevelContext:
    def __init__(self, F: HypothesisClass, U: DistributionClass, eps):
        if U.n != F.n:
            raise InputError("distribution class and hypothesis class disagree on n")
        self.F = F
        self.U = U
        self.eps = to_fraction(eps)
        if self.eps <= 0:
            raise InputError("eps must be positive")
        self.memo: dict[int, int] = {}
        self._point_levels: dict[int, tuple[int, ...]] = {}

    def mask(self, D: Iterable[tuple[int, int]] | int) -> int:
        return D if isinstance(D, int) else version_space(self.F, D)

    def point_levels(self, V: int) -> tuple[int, ...]:
        """For each point, the smaller of the levels of its two one-point extensions."""
        hit = self._point_levels.get(V)
        if hit is not None:
            return hit
        F = self.F
        out = []
        for x in range(F.n):
            a = V & F.with_label(x, 0)
            b = V & F.with_label(x, 1)
            # one side empty means the other is V itself; the minimum is -1 either way
            out.append(min(self.level_mask(a), self.level_mask(b)) if a and b else -1)
        out = tuple(out)
        self._point_levels[V] = out
        return out

    def level_mask(self, V: int) -> int:
        if V == 0:
            return -1
        hit = self.memo.get(V)
        if hit is not None:
            return hit
        if V & (V - 1) == 0:
            # a single function: no point has two realizable labels
            self.memo[V] = 0
            return 0
        levels = self.point_levels(V)
        k = 0
        top = max(levels)
        while k < top + 1:
            region = sum(1 << x for x, m in enumerate(levels) if m >= k)
            if self.U.sup_mass(region) >= self.eps:
                k += 1
            else:
                break
        self.memo[V] = k
        return k

    def level(self, D) -> int:
        return self.level_mask(self.mask(D))

    def critical_region_mask(self, V: int, k: int) -> int:
        if k < 1:
            raise InputError("critical regions are defined for k >= 1")
        if V == 0:
            return 0
        levels = self.point_levels(V)
        return sum(1 << x for x, m in enumerate(levels) if m >= k - 1)

    def critical_region(self, D, k: int) -> frozenset[int]:
        return frozenset(bits(self.critical_region_mask(self.mask(D), k)))

    def k_of_eps(self) -> int:
        return self.level_mask(self.F.full)

    def extension_levels(self, V: int, x: int) -> tuple[int, int]:
        F = self.F
        return self.level_mask(V & F.with_label(x, 0)), self.level_mask(V & F.with_label(x, 1))

    def argmax_label(self, V: int, x: int) -> int:
        """Label whose extension keeps the larger level; ties go to 1."""
        l0, l1 = self.extension_levels(V, x)
        return 0 if l0 > l1 else 1

    def halving_label(self, D, x: int) -> int:
        V = self.mask(D)
        k = self.level_mask(V)
        if k < 0:
            raise InputError("halving label needs a realizable dataset")
        y = self.argmax_label(V, x)
        kept = self.level_mask(V & self.F.with_label(x, y))
        assert kept >= k // 2, "halving guarantee violated"
        return y


def k_of_eps(F: HypothesisClass, U: DistributionClass, eps) -> int:
    return LevelContext(F, U, eps).k_of_eps()


def tilde_levels(order: InstanceSpace, U: DistributionClass, eps, max_k: int | None = None) -> list[frozenset[int]]:
    """Nonempty sets of the compressed recursion for tree orders, starting at all points.

    Set ``k`` holds the points whose strict descendants inside set ``k-1`` carry
    sup mass at least ``eps``. The list stops before the first empty set or
    after ``max_k + 1`` entries.
    """
    if not order.has_order:
        raise InputError("tilde levels need an ordered instance space")
    eps = to_fraction(eps)
    desc = [order.descendants_mask(x) for x in range(order.n)]
    current = (1 << order.n) - 1
    out = [frozenset(range(order.n))]
    while max_k is None or len(out) <= max_k:
        nxt = sum(1 << x for x in range(order.n) if U.sup_mass(desc[x] & current) >= eps)
        if nxt == 0:
            break
        out.append(frozenset(bits(nxt)))
        current = nxt
    return out


def tilde_k(order: InstanceSpace, U: DistributionClass, eps) -> int:
    return len(tilde_levels(order, U, eps)) - 1


def level_curve(F: HypothesisClass, U: DistributionClass, grid) -> list[tuple[Fraction, int]]:
    return [(to_fraction(e), k_of_eps(F, U, e)) for e in grid]
