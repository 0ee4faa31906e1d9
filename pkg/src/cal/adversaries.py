"""Adversaries: benign streams and the constructions behind the regret lower bounds.

An adversary is asked for one round at a time and sees only the past instances
and the learner's past predictions. It answers with a ``Round``: a member of the
distribution class to sample ``x_t`` from and a committed labeling rule. The
adversary's own randomness for round ``t`` comes from its stream at counter
``t``; one-off choices (a packing index, a leaf of a tree) use counter 0.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .core import Distribution, DistributionClass, HypothesisClass, to_fraction
from .critical import LevelContext
from .dims import packing_set
from .errors import InputError
from .learners import shared_context
from .rng import ADVERSARY, as_streams, categorical
from .trees import InteractionTree, Plain, StrictEta, validate_tree_certificate

__all__ = [
    "Round",
    "Adversary",
    "make_iid",
    "make_packing_adversary",
    "make_tree_walk_adversary",
    "make_critical_adversary",
    "make_smoothed_adversarial",
    "make_gaussian_halfspace",
    "decompose_mixture",
]


@dataclass
class Round:
    sample: Callable[[np.random.Generator], object]
    label: Callable[[object], int]
    mu_index: int
    mu: Distribution | None = None


class Adversary:
    realizable = False

    def __init__(self, seed=None):
        self.streams = as_streams(seed, ADVERSARY)
        self.played: list[Distribution] = []
        self._index: dict[Distribution, int] = {}
        self._floats: dict[int, np.ndarray] = {}

    def next_round(self, t: int, history) -> Round:
        raise NotImplementedError

    def _register(self, mu: Distribution) -> int:
        i = self._index.get(mu)
        if i is None:
            i = len(self.played)
            self.played.append(mu)
            self._index[mu] = i
            self._floats[i] = mu.as_floats()
        return i

    def _round(self, mu: Distribution, label) -> Round:
        i = self._register(mu)
        p = self._floats[i]
        return Round(lambda gen: categorical(gen, p), label, i, mu)


def decompose_mixture(U: DistributionClass, mu: Distribution) -> list[Distribution]:
    """Members of ``U`` whose uniform mixture is ``mu`` (``[mu]`` when it is a member)."""
    if U.contains(mu):
        return [mu]
    if U.kind == "list":
        for size in range(2, min(U.mixture_cap, len(U.members)) + 1):
            for combo in itertools.combinations(U.members, size):
                if Distribution.mixture(list(combo)) == mu:
                    return list(combo)
    if U.kind == "dirac_all":
        support = [x for x in range(U.n) if mu.mass[x] > 0]
        if all(mu.mass[x] == mu.mass[support[0]] for x in support):
            return [Distribution.dirac(U.n, x) for x in support]
    raise InputError("node distribution is not a uniform mixture of class members")


class IID(Adversary):
    realizable = True

    def __init__(self, F: HypothesisClass, mu: Distribution, f: int = 0, noise=0, seed=None):
        super().__init__(seed)
        if not 0 <= f < F.m:
            raise InputError(f"function index {f} out of range")
        self.F = F
        self.mu = mu
        self.f = f
        self.noise = float(noise)
        if not 0 <= self.noise <= 1:
            raise InputError("noise rate must lie in [0, 1]")
        self.realizable = self.noise == 0

    def next_round(self, t, history) -> Round:
        flip = int(self.noise > 0 and self.streams.at(t).random() < self.noise)
        F, f = self.F, self.f
        return self._round(self.mu, lambda x: F.value(f, x) ^ flip)


def make_iid(F: HypothesisClass, mu: Distribution, f: int = 0, noise=0, seed=None) -> IID:
    return IID(F, mu, f, noise, seed)


class Packing(Adversary):
    """Plays one fixed distribution and one function drawn from an eps-packing."""

    realizable = True

    def __init__(self, F: HypothesisClass, U: DistributionClass, mu: Distribution, eps, seed=None):
        super().__init__(seed)
        self.packing = packing_set(F, mu, to_fraction(eps))
        if len(self.packing) < 2:
            raise InputError("the eps-packing has fewer than two functions")
        self.F = F
        self.components = decompose_mixture(U, mu)
        gen = self.streams.at(0)
        self.target = self.packing[int(gen.integers(len(self.packing)))]

    def next_round(self, t, history) -> Round:
        gen = self.streams.at(t)
        mu = self.components[int(gen.integers(len(self.components)))] if len(self.components) > 1 else self.components[0]
        F, f = self.F, self.target
        return self._round(mu, lambda x: F.value(f, x))


def make_packing_adversary(F, U: DistributionClass, mu: Distribution | None = None, eps=Fraction(1, 4), seed=None) -> Packing:
    return Packing(F, U, U.default_member() if mu is None else mu, eps, seed)


class TreeWalk(Adversary):
    """Walks a uniformly random root-to-leaf path of a shattered tree.

    Agnostic mode spends ``floor(T/d)`` rounds per node; labels on the node's
    disagreement region follow the chosen child's function with probability
    ``1/2 + p_k`` and are fair coins elsewhere. Realizable mode spends one round
    per node and labels everything with the leaf function.
    """

    def __init__(self, tree: InteractionTree, U: DistributionClass, T: int, mode: str, eps, seed=None):
        super().__init__(seed)
        if mode not in ("agnostic", "realizable"):
            raise InputError(f"unknown tree-walk mode {mode!r}")
        if tree.depth < 1:
            raise InputError("tree walk needs a tree of depth at least 1")
        self.tree = tree
        self.U = U
        self.T = T
        self.mode = mode
        self.realizable = mode == "realizable"
        self.d = min(tree.depth, T)
        self.n0 = T // self.d if mode == "agnostic" else 1
        gen = self.streams.at(0)
        self.leaf = tuple(int(b) for b in gen.integers(0, 2, size=self.d))
        last = self.leaf[: self.d - 1]
        self.target = tree.edge_function(last, self.leaf[self.d - 1])
        self._parts = {}
        F = tree.functions
        self.p = []
        for k in range(self.d):
            node = tree.node(self.leaf[:k])
            gap = tree.pool[node.dist].of(F.disagreement_mask(node.f0, node.f1))
            self.p.append(min(float(eps), 1 / math.sqrt(self.n0)) / (8 * float(gap)) if gap else 0.0)

    def _member(self, mu: Distribution, gen) -> Distribution:
        parts = self._parts.get(mu)
        if parts is None:
            parts = self._parts[mu] = decompose_mixture(self.U, mu)
        return parts[int(gen.integers(len(parts)))] if len(parts) > 1 else parts[0]

    def next_round(self, t, history) -> Round:
        gen = self.streams.at(t)
        F = self.tree.functions
        k = (t - 1) // self.n0
        if k >= self.d:
            mu = self.U.default_member()
            f = self.target
            return self._round(mu, lambda x: F.value(f, x))
        node = self.tree.node(self.leaf[:k])
        mu = self._member(self.tree.pool[node.dist], gen)
        if self.realizable:
            f = self.target
            return self._round(mu, lambda x: F.value(f, x))
        b = int(gen.random() < 0.5 + self.p[k])
        c = int(gen.random() < 0.5)
        side = self.leaf[k]
        near, far = (node.f1, node.f0) if side else (node.f0, node.f1)

        def label(x):
            if F.value(node.f0, x) == F.value(node.f1, x):
                return c
            return F.value(near if b else far, x)

        return self._round(mu, label)


def make_tree_walk_adversary(
    tree: InteractionTree, U: DistributionClass, T: int, mode: str, eps, seed=None
) -> TreeWalk:
    """Validate the tree for the mode, then walk it.

    Agnostic mode needs a Plain(eps) certificate; realizable mode needs
    StrictEta(eps, eps / (4T)).
    """
    eps = to_fraction(eps)
    kind = Plain(eps) if mode == "agnostic" else StrictEta(eps, eps / (4 * T))
    if not validate_tree_certificate(tree, kind):
        raise InputError(f"tree does not certify {type(kind).__name__} shattering")
    return TreeWalk(tree, U, T, mode, eps, seed)


class Critical(Adversary):
    """Plays the witness of the current critical region.

    ``D`` (kept as a version-space mask) grows on critical hits only in agnostic
    mode and on every round in realizable mode, where labels off the critical
    region keep the larger level.
    """

    def __init__(self, ctx: LevelContext, mode: str, T: int | None = None, seed=None):
        super().__init__(seed)
        if mode not in ("agnostic", "realizable"):
            raise InputError(f"unknown critical-adversary mode {mode!r}")
        self.ctx = ctx
        self.mode = mode
        self.realizable = mode == "realizable"
        self.T = T
        self.V = ctx.F.full
        self.k_trace: list[int] = []
        self.hits: list[bool] = []

    def _k(self) -> int:
        k = self.ctx.level_mask(self.V)
        if self.mode == "agnostic" and self.T is not None:
            k = min(k, self.T)
        return k

    def next_round(self, t, history) -> Round:
        ctx = self.ctx
        k = self._k()
        self.k_trace.append(k)
        if k > 0:
            region = ctx.critical_region_mask(self.V, k)
            mu = ctx.U.witness(region)
        else:
            region = 0
            mu = ctx.U.default_member()
        coin = int(self.streams.at(t).integers(2))

        def label(x):
            hit = bool(region >> x & 1)
            y = coin if hit or not self.realizable else ctx.argmax_label(self.V, x)
            self.hits.append(hit)
            if hit or self.realizable:
                self.V &= ctx.F.with_label(x, y)
                after = ctx.level_mask(self.V)
                assert after >= (k - 1 if hit else k // 2), "level dropped too fast"
            return y

        return self._round(mu, label)


def make_critical_adversary(F, U, eps, mode: str = "realizable", T: int | None = None, seed=None) -> Critical:
    return Critical(shared_context(F, U, to_fraction(eps)), mode, T, seed)


class SmoothedAdversarial(Adversary):
    """Puts the full density cap on the version space's disagreement region."""

    realizable = True

    def __init__(self, F: HypothesisClass, base: Distribution, cap, eps=Fraction(1, 8), seed=None):
        super().__init__(seed)
        self.F = F
        self.cls = DistributionClass.smoothed(base, cap)
        self.ctx = shared_context(F, self.cls, to_fraction(eps))
        self.V = F.full

    def next_round(self, t, history) -> Round:
        region = self.F.disagreement_region(self.V)
        mu = self.cls.witness(region)

        def label(x):
            y = self.ctx.argmax_label(self.V, x)
            self.V &= self.F.with_label(x, y)
            return y

        return self._round(mu, label)


def make_smoothed_adversarial(F, base: Distribution, cap, eps=Fraction(1, 8), seed=None) -> SmoothedAdversarial:
    if to_fraction(cap) < 1:
        raise InputError("ratio cap must be at least 1")
    return SmoothedAdversarial(F, base, cap, eps, seed)


class GaussianHalfspace(Adversary):
    """Standard Gaussian points in R^d labeled by a random halfspace, with label noise."""

    def __init__(self, d: int, noise=0.0, seed=None):
        super().__init__(seed)
        gen = self.streams.at(0)
        self.a = gen.standard_normal(d)
        self.b = 0.5 * gen.standard_normal()
        self.d = d
        self.noise = float(noise)
        self.realizable = self.noise == 0

    def next_round(self, t, history) -> Round:
        flip = int(self.noise > 0 and self.streams.at(t).random() < self.noise)
        a, b, d = self.a, self.b, self.d

        def label(x):
            return int(a @ x + b >= 0) ^ flip

        return Round(lambda gen: gen.standard_normal(d), label, 0, None)


def make_gaussian_halfspace(d: int, noise=0.0, seed=None) -> GaussianHalfspace:
    return GaussianHalfspace(d, noise, seed)
