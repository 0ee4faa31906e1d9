"""Independent brute-force reference implementations.

These work on explicit label tuples, datasets and point lists rather than the
bitmask machinery of the package, so agreement is evidence of correctness and
not just self-consistency.
"""

from __future__ import annotations

import itertools
from fractions import Fraction


def rows(F):
    return [tuple(r) for r in F.labels]


def realizable(rows_, dataset):
    return any(all(r[x] == y for x, y in dataset) for r in rows_)


def sup_mass_list(members, points):
    points = set(points)
    return max(sum((mu.mass[x] for x in points), Fraction(0)) for mu in members)


def vc_oracle(rows_, n):
    best = 0
    for size in range(1, n + 1):
        for S in itertools.combinations(range(n), size):
            if len({tuple(r[x] for x in S) for r in rows_}) == 2**size:
                best = size
                break
    return best


def ldim_oracle(rows_, n):
    rows_ = list(rows_)
    if not rows_:
        return -1
    if len(rows_) == 1:
        return 0
    best = 0
    for x in range(n):
        a = [r for r in rows_ if r[x] == 0]
        b = [r for r in rows_ if r[x] == 1]
        if a and b:
            best = max(best, 1 + min(ldim_oracle(a, n), ldim_oracle(b, n)))
    return best


def in_level_oracle(rows_, n, sup_mass, eps, dataset, k):
    """Direct dataset-level recursion: is ``dataset`` in the k-th level set?"""
    if not realizable(rows_, dataset):
        return False
    if k == 0:
        return True
    region = [
        x
        for x in range(n)
        if in_level_oracle(rows_, n, sup_mass, eps, dataset + ((x, 0),), k - 1)
        and in_level_oracle(rows_, n, sup_mass, eps, dataset + ((x, 1),), k - 1)
    ]
    return sup_mass(region) >= eps


def level_oracle(rows_, n, sup_mass, eps, dataset=(), cap=8):
    if not realizable(rows_, dataset):
        return -1
    k = 0
    while k < cap and in_level_oracle(rows_, n, sup_mass, eps, tuple(dataset), k + 1):
        k += 1
    return k


def tilde_oracle(parent, sup_mass, eps):
    """Tilde level sets evaluated by walking parent pointers explicitly."""
    n = len(parent)

    def ancestors(y):
        out = []
        while y is not None:
            out.append(y)
            y = parent[y]
        return out

    strict_desc = {x: [y for y in range(n) if y != x and x in ancestors(y)] for x in range(n)}
    levels = [set(range(n))]
    while True:
        nxt = {x for x in range(n) if sup_mass([y for y in strict_desc[x] if y in levels[-1]]) >= eps}
        if not nxt:
            return levels
        levels.append(nxt)


def tdim_oracle(parent, sup_mass, eps):
    """Longest valid chain by enumerating every subset of every root path."""
    n = len(parent)

    def ancestors(y):
        out = []
        while y is not None:
            out.append(y)
            y = parent[y]
        return out[::-1]

    best = 0
    for leaf in range(n):
        path = ancestors(leaf)
        for size in range(1, len(path) + 1):
            for chain in itertools.combinations(range(len(path)), size):
                prev = -1
                ok = True
                for i in chain:
                    if sup_mass(path[prev + 1 : i + 1]) < eps:
                        ok = False
                        break
                    prev = i
                if ok:
                    best = max(best, size)
    return best


def cover_oracle(rows_, mu, eps):
    m = len(rows_)

    def dist(a, b):
        return sum((mu.mass[x] for x in range(len(a)) if a[x] != b[x]), Fraction(0))

    for size in range(1, m + 1):
        for C in itertools.combinations(range(m), size):
            if all(any(dist(rows_[f], rows_[c]) <= eps for c in C) for f in range(m)):
                return size
    return m


def max_packing_oracle(rows_, mu, eps):
    m = len(rows_)

    def dist(a, b):
        return sum((mu.mass[x] for x in range(len(a)) if a[x] != b[x]), Fraction(0))

    best = 1
    for size in range(2, m + 1):
        found = False
        for C in itertools.combinations(range(m), size):
            if all(dist(rows_[a], rows_[b]) >= eps for a, b in itertools.combinations(C, 2)):
                found = True
                break
        if not found:
            break
        best = size
    return best


def plain_tree_oracle(rows_, pool, eps, max_depth):
    """Largest Plain-shattered depth by explicit recursion over constraint lists.

    A constraint is ``(mu, g)`` meaning every function below must be within eps/3
    of ``g`` under ``mu``. No memoization and no bitmasks.
    """
    m = len(rows_)

    def dist(mu, a, b):
        return sum((mu.mass[x] for x in range(len(rows_[a])) if rows_[a][x] != rows_[b][x]), Fraction(0))

    def ok(f, constraints):
        return all(dist(mu, f, g) <= eps / 3 for mu, g in constraints)

    def exists(constraints, d):
        if d == 0:
            return True
        for mu in pool:
            for f0, f1 in itertools.combinations(range(m), 2):
                if dist(mu, f0, f1) < eps or not ok(f0, constraints) or not ok(f1, constraints):
                    continue
                if exists(constraints + [(mu, f0)], d - 1) and exists(constraints + [(mu, f1)], d - 1):
                    return True
        return False

    best = 0
    for d in range(1, max_depth + 1):
        if not exists([], d):
            break
        best = d
    return best
