"""Finite instance spaces, hypothesis classes and distribution classes.

Points are dense indices ``0..n-1``. Sets of points and sets of hypotheses are
both represented as Python ints used as bitmasks, which keeps version spaces
hashable and cheap to intersect. All probabilities here are exact
``fractions.Fraction`` values.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError

__all__ = [
    "Distribution",
    "DistributionClass",
    "EuclideanStream",
    "HypothesisClass",
    "InstanceSpace",
    "SmoothedToleranceSpec",
    "build_hypothesis_class",
    "bits",
    "mask_of",
    "rho_from_f_divergence",
    "sup_mass",
    "to_fraction",
    "version_space",
    "witness_distribution",
]


def to_fraction(value) -> Fraction:
    """Parse ints, Fractions and ``"p/q"`` strings. Floats are rejected."""
    if isinstance(value, bool):
        raise InputError(f"not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a rational: {value!r}") from exc
    raise InputError(f"not a rational: {value!r}")


def mask_of(points: Iterable[int]) -> int:
    out = 0
    for p in points:
        out |= 1 << int(p)
    return out


def bits(mask: int) -> list[int]:
    """Indices of the set bits of ``mask`` in increasing order."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def _as_mask(points) -> int:
    if isinstance(points, (int, np.integer)):
        return int(points)
    return mask_of(points)


@dataclass(frozen=True)
class InstanceSpace:
    """``n`` points with an optional forest order given by a parent array.

    ``x`` precedes ``y`` when ``x`` lies on the root path of ``y`` (inclusive).
    """

    n: int
    parent: tuple[int | None, ...] | None = None
    _paths: tuple[int, ...] = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise InputError("instance space needs n >= 1")
        if self.parent is None:
            return
        parent = tuple(None if p is None else int(p) for p in self.parent)
        if len(parent) != self.n:
            raise InputError("parent array length must equal n")
        paths = []
        for x in range(self.n):
            seen = 0
            y: int | None = x
            while y is not None:
                if not 0 <= y < self.n:
                    raise InputError(f"parent index out of range at point {x}")
                if seen >> y & 1:
                    raise InputError("parent array contains a cycle")
                seen |= 1 << y
                y = parent[y]
            paths.append(seen)
        object.__setattr__(self, "parent", parent)
        object.__setattr__(self, "_paths", tuple(paths))

    @property
    def has_order(self) -> bool:
        return self.parent is not None

    def _require_order(self):
        if self.parent is None:
            raise InputError("this operation needs an instance space with an order")

    def path_mask(self, x: int) -> int:
        """Bitmask of ``{y : y precedes x}``, including ``x``."""
        self._require_order()
        return self._paths[x]

    def precedes(self, x: int, y: int) -> bool:
        self._require_order()
        return bool(self._paths[y] >> x & 1)

    def comparable(self, x: int, y: int) -> bool:
        return self.precedes(x, y) or self.precedes(y, x)

    def descendants_mask(self, x: int) -> int:
        """Bitmask of the strict descendants of ``x``."""
        self._require_order()
        return mask_of(y for y in range(self.n) if y != x and self._paths[y] >> x & 1)

    def is_chain(self) -> bool:
        self._require_order()
        return all(self.comparable(x, y) for x, y in itertools.combinations(range(self.n), 2))

    def chain_sequence(self) -> list[int]:
        """Points of a chain order listed from the bottom up."""
        if not self.is_chain():
            raise InputError("order is not a chain")
        return sorted(range(self.n), key=lambda x: bin(self._paths[x]).count("1"))


@dataclass(frozen=True)
class HypothesisClass:
    """Finite class of boolean functions on ``n`` points, one row per function.

    ``point_index[j]`` is the column of the input matrix that became column
    ``j``; it differs from the identity only when pruning removed columns.
    """

    labels: tuple[tuple[int, ...], ...]
    point_index: tuple[int, ...]
    pruned: bool = False

    def __post_init__(self):
        m = len(self.labels)
        n = len(self.labels[0])
        rows = tuple(mask_of(j for j, v in enumerate(r) if v) for r in self.labels)
        ones = []
        for x in range(n):
            ones.append(mask_of(i for i in range(m) if self.labels[i][x]))
        full = (1 << m) - 1
        object.__setattr__(self, "_rows", rows)
        object.__setattr__(self, "_ones", tuple(ones))
        object.__setattr__(self, "_zeros", tuple(full & ~o for o in ones))

    @property
    def m(self) -> int:
        return len(self.labels)

    @property
    def n(self) -> int:
        return len(self.labels[0])

    @property
    def full(self) -> int:
        return (1 << self.m) - 1

    def row_mask(self, f: int) -> int:
        """Bitmask of the points where function ``f`` is 1."""
        return self._rows[f]

    def with_label(self, x: int, y: int) -> int:
        """Bitmask of the functions with ``f(x) == y``."""
        return self._ones[x] if y else self._zeros[x]

    def value(self, f: int, x: int) -> int:
        return self.labels[f][x]

    def disagreement_mask(self, f: int, g: int) -> int:
        return self._rows[f] ^ self._rows[g]

    def disagreement_region(self, V: int) -> int:
        """Points where at least two functions of the version space ``V`` differ."""
        out = 0
        for x in range(self.n):
            if V & self._ones[x] and V & self._zeros[x]:
                out |= 1 << x
        return out

    def matrix(self):
        return np.array(self.labels, dtype=np.int8)


def build_hypothesis_class(matrix, prune: bool = False) -> HypothesisClass:
    """Deduplicate rows (first occurrence wins) and optionally drop constant columns."""
    rows = [tuple(int(bool(v)) for v in r) for r in matrix]
    if not rows or not rows[0]:
        raise InputError("hypothesis matrix must be nonempty")
    if any(len(r) != len(rows[0]) for r in rows):
        raise InputError("hypothesis matrix rows have unequal lengths")
    seen = set()
    uniq = []
    for r in rows:
        if r not in seen:
            seen.add(r)
            uniq.append(r)
    keep = list(range(len(uniq[0])))
    if prune:
        keep = [j for j in keep if len({r[j] for r in uniq}) == 2]
        if not keep:
            raise InputError("pruning removed every point; the class has a single function")
        projected = []
        seen = set()
        for r in uniq:
            p = tuple(r[j] for j in keep)
            # distinct rows stay distinct: only constant columns were removed
            assert p not in seen
            seen.add(p)
            projected.append(p)
        uniq = projected
    return HypothesisClass(tuple(uniq), tuple(keep), pruned=prune)


def version_space(F: HypothesisClass, D: Iterable[tuple[int, int]], start: int | None = None) -> int:
    V = F.full if start is None else start
    for x, y in D:
        if not 0 <= x < F.n:
            raise InputError(f"point {x} out of range")
        V &= F.with_label(x, y)
    return V


@dataclass(frozen=True)
class Distribution:
    mass: tuple[Fraction, ...]

    def __post_init__(self):
        mass = tuple(to_fraction(v) for v in self.mass)
        if not mass:
            raise InputError("distribution needs at least one point")
        if any(v < 0 for v in mass):
            raise InputError("negative probability mass")
        if sum(mass) != 1:
            raise InputError(f"masses sum to {sum(mass)}, not 1")
        object.__setattr__(self, "mass", mass)

    @property
    def n(self) -> int:
        return len(self.mass)

    @classmethod
    def uniform(cls, n: int) -> Distribution:
        return cls(tuple(Fraction(1, n) for _ in range(n)))

    @classmethod
    def dirac(cls, n: int, x: int) -> Distribution:
        return cls(tuple(Fraction(int(i == x)) for i in range(n)))

    @classmethod
    def from_weights(cls, weights: Sequence[int | Fraction]) -> Distribution:
        w = [Fraction(v) for v in weights]
        total = sum(w)
        if total <= 0:
            raise InputError("weights must have positive total")
        return cls(tuple(v / total for v in w))

    @classmethod
    def mixture(cls, components: Sequence[Distribution]) -> Distribution:
        k = len(components)
        return cls(tuple(sum(c.mass[x] for c in components) / k for x in range(components[0].n)))

    def of(self, points) -> Fraction:
        """Mass of a point set given as a bitmask or an iterable of indices."""
        mask = _as_mask(points)
        total = Fraction(0)
        for x in bits(mask):
            total += self.mass[x]
        return total

    def support(self) -> int:
        return mask_of(x for x, v in enumerate(self.mass) if v > 0)

    def as_floats(self):
        return np.array([float(v) for v in self.mass])


KINDS = ("list", "smoothed", "dirac_all")


@dataclass(frozen=True)
class DistributionClass:
    """A distribution class with exact supremum-mass queries.

    ``kind`` is ``"list"`` (explicit members), ``"smoothed"`` (every
    distribution with density at most ``cap`` times ``base``) or
    ``"dirac_all"`` (all point masses on ``n`` points).
    """

    kind: str
    n: int
    members: tuple[Distribution, ...] = ()
    base: Distribution | None = None
    cap: Fraction | None = None
    mixture_cap: int = 3
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown distribution class kind {self.kind!r}")
        if self.mixture_cap < 1:
            raise InputError("mixture cap must be at least 1")
        if self.kind == "list":
            if not self.members:
                raise InputError("explicit distribution list must be nonempty")
            if any(mu.n != self.n for mu in self.members):
                raise InputError("member distributions must live on n points")
        elif self.kind == "smoothed":
            if self.base is None or self.cap is None:
                raise InputError("smoothed class needs a base and a ratio cap")
            object.__setattr__(self, "cap", to_fraction(self.cap))
            if self.cap < 1:
                raise InputError("ratio cap must be at least 1")
            if self.base.n != self.n:
                raise InputError("base distribution must live on n points")

    @classmethod
    def explicit(cls, members: Sequence[Distribution], mixture_cap: int = 3) -> DistributionClass:
        members = tuple(members)
        if not members:
            raise InputError("explicit distribution list must be nonempty")
        return cls("list", members[0].n, members=members, mixture_cap=mixture_cap)

    @classmethod
    def smoothed(cls, base: Distribution, cap, mixture_cap: int = 3) -> DistributionClass:
        return cls("smoothed", base.n, base=base, cap=to_fraction(cap), mixture_cap=mixture_cap)

    @classmethod
    def dirac_all(cls, n: int, mixture_cap: int = 3) -> DistributionClass:
        return cls("dirac_all", n, mixture_cap=mixture_cap)

    def sup_mass(self, points) -> Fraction:
        mask = _as_mask(points)
        hit = self._cache.get(mask)
        if hit is not None:
            return hit
        if mask == 0:
            value = Fraction(0)
        elif self.kind == "list":
            value = max(mu.of(mask) for mu in self.members)
        elif self.kind == "smoothed":
            value = min(Fraction(1), self.cap * self.base.of(mask))
        else:
            value = Fraction(1)
        self._cache[mask] = value
        return value

    def witness(self, points) -> Distribution:
        """A member of the class attaining ``sup_mass(points)``."""
        mask = _as_mask(points)
        if self.kind == "list":
            best = max(range(len(self.members)), key=lambda i: (self.members[i].of(mask), -i))
            return self.members[best]
        if self.kind == "dirac_all":
            return Distribution.dirac(self.n, bits(mask)[0] if mask else 0)
        mu0 = self.base
        b = mu0.of(mask)
        c = self.cap
        if b == 0:
            return mu0
        if c * b >= 1:
            return Distribution(tuple(mu0.mass[x] / b if mask >> x & 1 else Fraction(0) for x in range(self.n)))
        scale_off = (1 - c * b) / (1 - b)
        return Distribution(tuple(c * mu0.mass[x] if mask >> x & 1 else scale_off * mu0.mass[x] for x in range(self.n)))

    def contains(self, mu: Distribution) -> bool:
        if mu.n != self.n:
            return False
        if self.kind == "list":
            return mu in self.members
        if self.kind == "dirac_all":
            return sum(1 for v in mu.mass if v > 0) == 1
        return all(mu.mass[x] <= self.cap * self.base.mass[x] for x in range(self.n))

    def default_member(self) -> Distribution:
        """The member used wherever a construction allows an arbitrary choice."""
        if self.kind == "list":
            return self.members[0]
        if self.kind == "smoothed":
            return self.base
        return Distribution.dirac(self.n, 0)


def sup_mass(U: DistributionClass, B) -> Fraction:
    return U.sup_mass(B)


def witness_distribution(U: DistributionClass, B) -> Distribution:
    return U.witness(B)


@dataclass(frozen=True)
class SmoothedToleranceSpec:
    """A base measure with a nondecreasing step tolerance function.

    ``table`` holds ``(threshold, value)`` pairs with increasing thresholds.
    ``rho(x)`` is the value of the largest threshold not above ``x`` and 0 below
    the first threshold, so the limit at ``0+`` is ``zero_limit``.
    """

    base: Distribution | None
    table: tuple[tuple[Fraction, Fraction], ...]
    zero_limit: Fraction = Fraction(0)

    def __post_init__(self):
        table = tuple((to_fraction(t), to_fraction(v)) for t, v in self.table)
        for (t0, v0), (t1, v1) in zip(table, table[1:]):
            if not t0 < t1:
                raise InputError("tolerance thresholds must increase")
            if v1 < v0:
                raise InputError("tolerance values must be nondecreasing")
        object.__setattr__(self, "table", table)

    def rho(self, x) -> Fraction:
        x = to_fraction(x)
        out = Fraction(0)
        for t, v in self.table:
            if t <= x:
                out = v
            else:
                break
        return out

    def rho_inverse(self, eps) -> Fraction:
        """``sup{d in (0,1] : rho(d) < eps}`` for the step function."""
        eps = to_fraction(eps)
        for t, v in self.table:
            if v >= eps:
                return min(t, Fraction(1))
        return Fraction(1)


def rho_from_f_divergence(fprime: Sequence[tuple], sigma, grid: Sequence) -> SmoothedToleranceSpec:
    """Tolerance table ``rho(e) = min_a (a e + 1 / (sigma f'(a)))`` over tabulated slopes."""
    sigma = to_fraction(sigma)
    if sigma <= 0:
        raise InputError("sigma must be positive")
    pts = [(to_fraction(a), to_fraction(v)) for a, v in fprime]
    if not pts:
        raise InputError("empty derivative table")
    pts.sort()
    for (a0, v0), (a1, v1) in zip(pts, pts[1:]):
        if v1 < v0:
            raise InputError("f' table is not monotone")
    if any(a <= 0 or v <= 0 for a, v in pts):
        raise InputError("f' table needs positive slopes at positive arguments")
    eps_values = sorted({to_fraction(e) for e in grid})
    if any(e < 0 for e in eps_values):
        raise InputError("grid values must be nonnegative")
    table = [(e, min(a * e + 1 / (sigma * v) for a, v in pts)) for e in eps_values]
    return SmoothedToleranceSpec(None, tuple(table))


@dataclass(frozen=True)
class EuclideanStream:
    d: int
    points: tuple[tuple[float, ...], ...] = ()
    labels: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.points) != len(self.labels):
            raise InputError("points and labels differ in length")
        if any(len(p) != self.d for p in self.points):
            raise InputError("point dimension mismatch")
