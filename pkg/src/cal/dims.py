"""Dimension quantities for the oblivious theory.

Everything is exact: masses are Fractions and searches run over bitmask version
spaces with memoization. Interaction-tree searches are exponential in the worst
case and carry a budget on the number of distinct subproblems they expand.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .core import Distribution, DistributionClass, HypothesisClass, InstanceSpace, SmoothedToleranceSpec, bits, to_fraction
from .errors import CapExceededError, InputError
from .trees import InteractionTree, Plain, Relaxed, StrictEta, TreeNode

__all__ = [
    "DimensionReport",
    "PoolEntry",
    "covering_number",
    "eps_dimension",
    "littlestone_dimension",
    "node_pool",
    "packing_set",
    "region_dimension",
    "threshold_chain",
    "threshold_cut_levels",
    "threshold_dimension",
    "threshold_witness_measure",
    "vc_dimension",
]


def _popcount(mask: int) -> int:
    return bin(mask).count("1")


def vc_dimension(F: HypothesisClass) -> int:
    """Size of the largest shattered point set."""
    best = 0
    for size in range(1, F.n + 1):
        if 1 << size > F.m:
            break
        found = False
        for S in itertools.combinations(range(F.n), size):
            patterns = {tuple(F.labels[f][x] for x in S) for f in range(F.m)}
            if len(patterns) == 1 << size:
                found = True
                break
        if not found:
            break
        best = size
    return best


def littlestone_dimension(F: HypothesisClass, V: int | None = None) -> int:
    """Littlestone dimension of the version space ``V`` (default: all of ``F``); -1 if empty."""
    V = F.full if V is None else V

    @lru_cache(maxsize=None)
    def ldim(mask: int) -> int:
        if mask == 0:
            return -1
        if mask & (mask - 1) == 0:
            return 0
        best = 0
        bound = _popcount(mask).bit_length() - 1
        for x in range(F.n):
            a = mask & F.with_label(x, 0)
            b = mask & F.with_label(x, 1)
            if not a or not b:
                continue
            # both sides need at least 2^best functions to beat best
            if min(_popcount(a), _popcount(b)) < 1 << best:
                continue
            best = max(best, 1 + min(ldim(a), ldim(b)))
            if best >= bound:
                break
        return best

    return ldim(V)


def _distance_table(F: HypothesisClass, mu: Distribution) -> list[list[Fraction]]:
    out = [[Fraction(0)] * F.m for _ in range(F.m)]
    for f in range(F.m):
        for g in range(f + 1, F.m):
            d = mu.of(F.disagreement_mask(f, g))
            out[f][g] = out[g][f] = d
    return out


def covering_number(F: HypothesisClass, mu: Distribution, eps, mode: str = "exact", cap: int = 20) -> int:
    """Smallest set ``C`` of class members with every ``f`` within ``eps`` of some ``c`` in ``C``.

    ``mode="greedy"`` returns the greedy set-cover upper bound.
    """
    eps = to_fraction(eps)
    dist = _distance_table(F, mu)
    balls = [sum(1 << g for g in range(F.m) if dist[c][g] <= eps) for c in range(F.m)]
    greedy = _greedy_cover(F.full, balls)
    if mode == "greedy":
        return greedy
    if mode != "exact":
        raise InputError(f"unknown covering mode {mode!r}")
    if F.m > cap:
        raise CapExceededError(f"exact covering needs m <= {cap}, got {F.m}; use greedy mode")
    covers = [[c for c in range(F.m) if balls[c] >> f & 1] for f in range(F.m)]
    largest = max(_popcount(b) for b in balls)
    best = [greedy]

    def search(uncovered: int, used: int):
        if uncovered == 0:
            best[0] = min(best[0], used)
            return
        if used + -(-_popcount(uncovered) // largest) >= best[0]:
            return
        target = min(bits(uncovered), key=lambda f: len(covers[f]))
        options = sorted(covers[target], key=lambda c: -_popcount(balls[c] & uncovered))
        for c in options:
            search(uncovered & ~balls[c], used + 1)

    search(F.full, 0)
    return best[0]


def _greedy_cover(universe: int, balls: list[int]) -> int:
    uncovered = universe
    count = 0
    while uncovered:
        c = max(range(len(balls)), key=lambda i: (_popcount(balls[i] & uncovered), -i))
        uncovered &= ~balls[c]
        count += 1
    return count


def packing_set(F: HypothesisClass, mu: Distribution, eps) -> list[int]:
    """Greedy maximal set of functions with pairwise disagreement mass at least ``eps``."""
    eps = to_fraction(eps)
    chosen: list[int] = []
    for f in range(F.m):
        if all(mu.of(F.disagreement_mask(f, g)) >= eps for g in chosen):
            chosen.append(f)
    return chosen


@dataclass(frozen=True)
class PoolEntry:
    """A node distribution and the class members it mixes (uniform weights)."""

    distribution: Distribution
    components: tuple[int, ...]


def node_pool(U: DistributionClass, F: HypothesisClass | None = None) -> tuple[list[PoolEntry], bool]:
    """Candidate node distributions and whether they exhaust the mixture hull.

    For an explicit list the pool holds the members and their uniform mixtures
    of up to ``U.mixture_cap`` components. For Dirac classes it holds every
    point mass. For smoothed classes it holds the base and the witness of every
    pairwise disagreement region of ``F``.
    """
    if U.kind == "list":
        entries = []
        seen = set()
        for size in range(1, min(U.mixture_cap, len(U.members)) + 1):
            for combo in itertools.combinations(range(len(U.members)), size):
                mu = Distribution.mixture([U.members[i] for i in combo])
                if mu.mass not in seen:
                    seen.add(mu.mass)
                    entries.append(PoolEntry(mu, combo))
        return entries, len(U.members) == 1
    if U.kind == "dirac_all":
        return [PoolEntry(Distribution.dirac(U.n, x), (x,)) for x in range(U.n)], True
    entries = [PoolEntry(U.base, ())]
    seen = {U.base.mass}
    if F is not None:
        regions = sorted({F.disagreement_mask(f, g) for f in range(F.m) for g in range(f + 1, F.m)})
        for B in regions:
            mu = U.witness(B)
            if mu.mass not in seen:
                seen.add(mu.mass)
                entries.append(PoolEntry(mu, ()))
    return entries, False


@dataclass(frozen=True)
class DimensionReport:
    value: int
    certificate: InteractionTree | None
    exact: bool


class _BudgetExhausted(Exception):
    pass


class _TreeSearch:
    """Memoized existence search for Plain-style and Relaxed trees.

    ``exists(A, d)`` asks for a tree of depth ``d`` all of whose edge functions
    lie in the allowed mask ``A``. Ancestor closeness constraints are folded
    into ``A`` as the search descends, so the memo key is just ``(A, d)``.
    """

    def __init__(self, F: HypothesisClass, pool: list[PoolEntry], eps: Fraction, relaxed: bool, close: Fraction, budget: int):
        self.F = F
        self.pool = pool
        self.eps = eps
        self.relaxed = relaxed
        self.budget = budget
        self.expanded = 0
        self.memo: dict = {}
        m = F.m
        self.close = []
        self.far = []
        self.pairs = []
        for entry in pool:
            dist = _distance_table(F, entry.distribution)
            self.close.append([sum(1 << g for g in range(m) if dist[f][g] <= close) for f in range(m)])
            if relaxed:
                self.far.append([sum(1 << g for g in range(m) if dist[f][g] >= 2 * eps / 3) for f in range(m)])
            else:
                pairs = [(f, g) for f in range(m) for g in range(f + 1, m) if dist[f][g] >= eps]
                pairs.sort(key=lambda p: (-dist[p[0]][p[1]], p))
                self.pairs.append(pairs)

    def exists(self, A: int, d: int):
        if d == 0:
            return ()
        key = (A, d)
        if key in self.memo:
            return self.memo[key]
        if _popcount(A) < 1 << d:
            self.memo[key] = None
            return None
        self.expanded += 1
        if self.expanded > self.budget:
            raise _BudgetExhausted
        found = self._relaxed_step(A, d) if self.relaxed else self._plain_step(A, d)
        self.memo[key] = found
        return found

    def _plain_step(self, A: int, d: int):
        for p, pairs in enumerate(self.pairs):
            close = self.close[p]
            tried = set()
            for f0, f1 in pairs:
                if not (A >> f0 & 1 and A >> f1 & 1):
                    continue
                if d == 1:
                    return (p, f0, f1, A, A)
                A0 = A & close[f0]
                A1 = A & close[f1]
                key = (A0, A1) if A0 <= A1 else (A1, A0)
                if key in tried:
                    continue
                tried.add(key)
                if self.exists(A0, d - 1) is not None and self.exists(A1, d - 1) is not None:
                    return (p, f0, f1, A0, A1)
        return None

    def _relaxed_step(self, A: int, d: int):
        for p in range(len(self.pool)):
            close = self.close[p]
            far = self.far[p]
            tried = set()
            for f in bits(A):
                right = A & far[f]
                if not right:
                    continue
                if d == 1:
                    return (p, f, bits(right)[0], A, right)
                left = A & close[f]
                if (left, right) in tried:
                    continue
                tried.add((left, right))
                if self.exists(left, d - 1) is not None and self.exists(right, d - 1) is not None:
                    return (p, f, None, left, right)
        return None

    def build(self, A: int, d: int) -> InteractionTree:
        nodes = {}
        used: dict[int, int] = {}

        def fill(mask: int, depth: int, path: tuple):
            if depth == 0:
                return
            p, f0, f1, A0, A1 = self.memo[(mask, depth)]
            idx = used.setdefault(p, len(used))
            nodes[path] = TreeNode(idx, f0, f1)
            fill(A0, depth - 1, path + (0,))
            fill(A1, depth - 1, path + (1,))

        fill(A, d, ())
        pool = [None] * len(used)
        for p, idx in used.items():
            pool[idx] = self.pool[p].distribution
        return InteractionTree(d, self.F, tuple(pool), nodes)


def eps_dimension(
    F: HypothesisClass,
    U: DistributionClass,
    kind,
    max_depth: int | None = None,
    budget: int = 200_000,
    allowed: int | None = None,
) -> DimensionReport:
    """Deepest shattered tree found for ``kind`` (Plain or Relaxed) by exhaustive search.

    ``allowed`` restricts edge functions to a sub-mask of ``F``. The report is
    exact only when the node pool covers the mixture hull and the search
    proved that no deeper tree exists.
    """
    if isinstance(kind, Plain):
        relaxed, close = False, kind.eps / 3
    elif isinstance(kind, StrictEta):
        # validation-only kind in general; searched here with the eta radius
        relaxed, close = False, kind.eta
    elif isinstance(kind, Relaxed):
        relaxed, close = True, kind.eps / 3
    else:
        raise InputError("search supports Plain and Relaxed trees only")
    A = F.full if allowed is None else allowed & F.full
    if A == 0:
        return DimensionReport(0, InteractionTree(0, F, (), {}), False)
    pool, complete = node_pool(U, F)
    bound = _popcount(A).bit_length() - 1
    cap = bound if max_depth is None else min(max_depth, bound)
    search = _TreeSearch(F, pool, kind.eps, relaxed, close, budget)
    value = 0
    exhausted = True
    try:
        for d in range(1, cap + 1):
            if search.exists(A, d) is None:
                break
            value = d
        else:
            exhausted = cap == bound
    except _BudgetExhausted:
        exhausted = False
    tree = search.build(A, value) if value > 0 else InteractionTree(0, F, (), {})
    return DimensionReport(value, tree, complete and exhausted)


def region_dimension(F: HypothesisClass, U: DistributionClass, eps, max_depth: int | None = None) -> int:
    """Deepest region-restricted shattered tree, by exhaustive search.

    Only minimal regions inside each disagreement set need to be tried: a larger
    region never helps the node's own mass condition and only tightens the
    closeness conditions below it. Exponential; meant for instances of a few points.
    """
    eps = to_fraction(eps)
    pool, _ = node_pool(U, F)
    pools = [e.distribution for e in pool]
    cache: dict = {}

    def minimal_regions(p: int, D: int) -> list[int]:
        key = (p, D)
        if key in cache:
            return cache[key]
        mu = pools[p]
        pts = [x for x in bits(D) if mu.mass[x] > 0]
        out = []
        for size in range(1, len(pts) + 1):
            for S in itertools.combinations(pts, size):
                mass = sum(mu.mass[x] for x in S)
                if mass >= eps and all(mass - mu.mass[x] < eps for x in S):
                    out.append(sum(1 << x for x in S))
        cache[key] = out
        return out

    def ball(p: int, B: int, f: int, A: int) -> int:
        mu = pools[p]
        return sum(1 << g for g in bits(A) if mu.of(F.disagreement_mask(f, g) & B) <= eps / 3)

    memo: dict = {}

    def exists(A: int, d: int) -> bool:
        if d == 0:
            return True
        if _popcount(A) < 1 << d:
            return False
        key = (A, d)
        if key in memo:
            return memo[key]
        ok = False
        fs = bits(A)
        for p in range(len(pools)):
            for f0, f1 in itertools.combinations(fs, 2):
                for B in minimal_regions(p, F.disagreement_mask(f0, f1)):
                    if d == 1 or (exists(ball(p, B, f0, A), d - 1) and exists(ball(p, B, f1, A), d - 1)):
                        ok = True
                        break
                if ok:
                    break
            if ok:
                break
        memo[key] = ok
        return ok

    bound = F.m.bit_length() - 1
    cap = bound if max_depth is None else min(bound, max_depth)
    value = 0
    for d in range(1, cap + 1):
        if not exists(F.full, d):
            break
        value = d
    return value


def threshold_chain(order: InstanceSpace, U: DistributionClass, eps) -> list[int]:
    """Longest chain whose consecutive order-intervals each carry sup mass ``eps``.

    Among longest chains the lexicographically smallest one is returned.
    """
    if not order.has_order:
        raise InputError("threshold dimension needs an ordered instance space")
    eps = to_fraction(eps)
    n = order.n
    paths = [order.path_mask(x) for x in range(n)]

    @lru_cache(maxsize=None)
    def best(prev: int) -> tuple:
        below = paths[prev] if prev >= 0 else 0
        out: tuple = ()
        for x in range(n):
            if prev >= 0 and (x == prev or not paths[x] >> prev & 1):
                continue
            if U.sup_mass(paths[x] & ~below) < eps:
                continue
            cand = (x,) + best(x)
            if len(cand) > len(out) or (len(cand) == len(out) and cand < out):
                out = cand
        return out

    return list(best(-1))


def threshold_dimension(order: InstanceSpace, U: DistributionClass, eps) -> int:
    return len(threshold_chain(order, U, eps))


def _dyadic_levels(grid) -> int:
    values = sorted((to_fraction(e) for e in grid), reverse=True)
    expected = [Fraction(1, 2**n) for n in range(1, len(values) + 1)]
    if values != expected:
        raise InputError("grid must be {1/2, 1/4, ..., 2^-N}")
    return len(values)


def threshold_cut_levels(order: InstanceSpace, U: DistributionClass, grid) -> list[list[int]]:
    """Greedy cut points per dyadic level, extended until every charged point is a cut.

    Level ``n`` scans the chain from the bottom and cuts as soon as the gap since
    the previous cut carries sup mass ``2^-n``; gaps left uncut carry less.
    Levels past the grid are added until the last level cuts every point of
    positive sup mass, which is what makes the tolerance vanish at 0.
    """
    if not order.is_chain():
        raise InputError("the witness measure construction is implemented for chain orders only")
    seq = order.chain_sequence()
    N = _dyadic_levels(grid)
    charged = {x for x in seq if U.sup_mass(1 << x) > 0}

    def cuts_at(eps: Fraction) -> list[int]:
        out = []
        gap = 0
        for x in seq:
            gap |= 1 << x
            if U.sup_mass(gap) >= eps:
                out.append(x)
                gap = 0
        return out or [seq[0]]

    levels = [cuts_at(Fraction(1, 2**n)) for n in range(1, N + 1)]
    while not charged <= set(levels[-1]):
        levels.append(cuts_at(Fraction(1, 2 ** (len(levels) + 1))))
    return levels


def threshold_witness_measure(order: InstanceSpace, U: DistributionClass, grid) -> SmoothedToleranceSpec:
    """Base measure and step tolerance dominating every member of ``U`` on order-intervals."""
    levels = threshold_cut_levels(order, U, grid)
    last = len(levels)
    mass = [Fraction(0)] * order.n
    weights = []
    for n, cuts in enumerate(levels, start=1):
        total = Fraction(1, 2**n) if n < last else Fraction(1, 2 ** (n - 1))
        w = total / len(cuts)
        weights.append(w)
        for x in cuts:
            mass[x] += w
    base = Distribution(tuple(mass))
    table: dict[Fraction, Fraction] = {}
    t = None
    for l, w in enumerate(weights, start=1):
        t = w if t is None else min(t, w)
        value = Fraction(4, 2**l)
        table[t] = max(table.get(t, Fraction(0)), value)
    return SmoothedToleranceSpec(base, tuple(sorted(table.items())))
