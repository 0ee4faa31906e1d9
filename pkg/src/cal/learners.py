"""Online learners for finite classes.

Every learner follows the same two-call protocol per round: ``observe_instance``
returns the prediction for ``x_t`` and ``observe_label`` reveals ``y_t``.
Randomized learners draw from their own counter-based stream at round ``t``.
Expert sets are handled as pools that predict for all experts at once.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache
from math import comb

import numpy as np

from .core import DistributionClass, HypothesisClass, InstanceSpace, bits, to_fraction
from .critical import LevelContext
from .dims import eps_dimension, vc_dimension
from .errors import CapExceededError, InputError
from .rng import LEARNER, as_streams, categorical
from .trees import Relaxed

__all__ = [
    "Learner",
    "Hedge",
    "HedgeLearner",
    "make_hedge",
    "play_hedge",
    "make_level_learner",
    "make_mistake_expert",
    "make_agnostic_adaptive",
    "make_epoch_oblivious",
    "make_vc1_learner",
    "make_vc1_optimistic",
    "FunctionLearner",
    "DEFAULT_EXPERT_CAP",
]

DEFAULT_EXPERT_CAP = 50_000


class Learner:
    def observe_instance(self, x) -> int:
        raise NotImplementedError

    def observe_label(self, y: int) -> None:
        raise NotImplementedError


@lru_cache(maxsize=64)
def shared_context(F: HypothesisClass, U: DistributionClass, eps) -> LevelContext:
    """Level memo tables are pure functions of (F, U, eps), so runs may share them."""
    return LevelContext(F, U, eps)


# ---------------------------------------------------------------- Hedge core


class Hedge:
    """Exponential weights over ``K`` experts with log-space bookkeeping."""

    def __init__(self, K: int, mode: str = "fixed", T: int | None = None):
        if K < 1:
            raise InputError("Hedge needs at least one expert")
        if mode not in ("fixed", "adaptive"):
            raise InputError(f"unknown Hedge mode {mode!r}")
        if mode == "fixed" and (T is None or T < 1):
            raise InputError("fixed-rate Hedge needs the horizon T")
        self.K = K
        self.mode = mode
        self.T = T
        self.L = np.zeros(K)

    def eta(self) -> float:
        if self.K == 1:
            return 0.0
        if self.mode == "fixed":
            return math.sqrt(8 * math.log(self.K) / self.T)
        return math.sqrt(2 * math.log(self.K) / (1 + self.L.min()))

    def probabilities(self) -> np.ndarray:
        z = -self.eta() * (self.L - self.L.min())
        w = np.exp(z)
        return w / w.sum()

    def update(self, losses) -> None:
        self.L += losses


def play_hedge(losses, mode: str = "fixed", seed=None) -> tuple[np.ndarray, np.ndarray]:
    """Run Hedge on a ``T x K`` loss matrix.

    Returns the realized per-round loss of the sampled expert and the expected
    per-round loss ``p_t . l_t``.
    """
    losses = np.asarray(losses, dtype=float)
    if losses.ndim != 2 or losses.shape[1] == 0:
        raise InputError("loss matrix must be T x K with K >= 1")
    T, K = losses.shape
    streams = as_streams(seed, LEARNER)
    hedge = Hedge(K, mode, T)
    realized = np.empty(T)
    expected = np.empty(T)
    for t in range(T):
        p = hedge.probabilities()
        i = categorical(streams.at(t + 1), p)
        realized[t] = losses[t, i]
        expected[t] = p @ losses[t]
        hedge.update(losses[t])
    return realized, expected


class ExpertPool:
    """Predictions of ``size`` experts at once."""

    size: int

    def predict(self, x) -> np.ndarray:
        raise NotImplementedError

    def update(self, x, y: int) -> None:
        raise NotImplementedError


class LearnerPool(ExpertPool):
    def __init__(self, learners):
        self.learners = list(learners)
        self.size = len(self.learners)

    def predict(self, x) -> np.ndarray:
        return np.array([lrn.observe_instance(x) for lrn in self.learners], dtype=np.int8)

    def update(self, x, y: int) -> None:
        for lrn in self.learners:
            lrn.observe_label(y)


class FunctionPool(ExpertPool):
    """Constant experts: fixed functions of the class."""

    def __init__(self, F: HypothesisClass, indices):
        self.indices = np.asarray(list(indices), dtype=np.int64)
        self.size = len(self.indices)
        self._cols = F.matrix()[self.indices].T.copy()

    def predict(self, x) -> np.ndarray:
        return self._cols[x]

    def update(self, x, y: int) -> None:
        pass


class HedgeLearner(Learner):
    """Samples one expert per round from the Hedge distribution and follows it."""

    def __init__(self, pool: ExpertPool, mode: str = "fixed", T: int | None = None, seed=None):
        self.pool = pool
        self.hedge = Hedge(pool.size, mode, T)
        self.streams = as_streams(seed, LEARNER)
        self.t = 0
        self._x = None
        self._preds = None

    def observe_instance(self, x) -> int:
        self.t += 1
        self._x = x
        self._preds = self.pool.predict(x)
        p = self.hedge.probabilities()
        i = categorical(self.streams.at(self.t), p)
        return int(self._preds[i])

    def observe_label(self, y: int) -> None:
        self.hedge.update((self._preds != y).astype(float))
        self.pool.update(self._x, y)


def make_hedge(experts, mode: str = "fixed", T: int | None = None, seed=None) -> HedgeLearner:
    """Hedge over a list of learners (for loss matrices see ``play_hedge``)."""
    if isinstance(experts, ExpertPool):
        pool = experts
    else:
        experts = list(experts)
        if not experts:
            raise InputError("Hedge needs at least one expert")
        pool = LearnerPool(experts)
    return HedgeLearner(pool, mode, T, seed)


# ------------------------------------------------------------ finite classes


class FunctionLearner(Learner):
    """Always predicts with one fixed function."""

    def __init__(self, F: HypothesisClass, f: int):
        self.F = F
        self.f = f

    def observe_instance(self, x) -> int:
        return self.F.value(self.f, x)

    def observe_label(self, y: int) -> None:
        pass


class LevelLearner(Learner):
    """Predicts the label whose one-point extension keeps the larger level."""

    def __init__(self, ctx: LevelContext):
        self.ctx = ctx
        self.V = ctx.F.full
        self._x = None

    def observe_instance(self, x) -> int:
        self._x = x
        return self.ctx.argmax_label(self.V, x)

    def observe_label(self, y: int) -> None:
        self.V &= self.ctx.F.with_label(self._x, y)


def make_level_learner(F: HypothesisClass, U: DistributionClass, eps) -> LevelLearner:
    return LevelLearner(shared_context(F, U, to_fraction(eps)))


def _mistake_step(ctx: LevelContext, V: int, x: int) -> tuple[int, bool]:
    """Prediction of a mistake-time expert with dataset ``V`` and whether it may record."""
    k = ctx.level_mask(V)
    if k < 0 or ctx.point_levels(V)[x] >= k:
        return 0, False
    return ctx.argmax_label(V, x), True


class MistakeExpert(Learner):
    """Follows the level learner on its own dataset, which only grows at times in ``S``.

    At a time in ``S`` the expert records the opposite of its own prediction,
    so it never looks at the revealed labels.
    """

    def __init__(self, ctx: LevelContext, S, T: int | None = None):
        S = frozenset(int(s) for s in S)
        if any(s < 1 for s in S) or (T is not None and any(s > T for s in S)):
            raise InputError("mistake times must lie in 1..T")
        self.ctx = ctx
        self.S = S
        self.V = ctx.F.full
        self.t = 0
        self._pending = None

    def observe_instance(self, x) -> int:
        self.t += 1
        pred, may_record = _mistake_step(self.ctx, self.V, x)
        self._pending = (x, 1 - pred) if may_record and self.t in self.S else None
        return pred

    def observe_label(self, y: int) -> None:
        if self._pending is not None:
            x, label = self._pending
            self.V &= self.ctx.F.with_label(x, label)


def make_mistake_expert(F: HypothesisClass, U: DistributionClass, eps, S, T: int | None = None) -> MistakeExpert:
    return MistakeExpert(shared_context(F, U, to_fraction(eps)), S, T)


def _subsets_up_to(T: int, k: int, cap: int, what: str) -> list[tuple[int, ...]]:
    k = min(k, T)
    count = sum(comb(T, j) for j in range(k + 1))
    if count > cap:
        raise CapExceededError(f"{what} needs {count} experts (cap {cap}); use a smaller T or a coarser parameter")
    out = []
    for j in range(k + 1):
        out.extend(itertools.combinations(range(1, T + 1), j))
    return out


def _times_index(sets, T: int) -> list[np.ndarray]:
    """For each round t (1-based), the experts whose set contains t."""
    buckets: list[list[int]] = [[] for _ in range(T + 2)]
    for e, S in enumerate(sets):
        for s in S:
            buckets[s].append(e)
    return [np.asarray(b, dtype=np.int64) for b in buckets]


class MistakeExpertPool(ExpertPool):
    """All mistake-time experts, grouped by their current dataset."""

    def __init__(self, ctx: LevelContext, sets, T: int):
        self.ctx = ctx
        self.size = len(sets)
        self.T = T
        self.by_time = _times_index(sets, T)
        self.group_masks = [ctx.F.full]
        self.group_of = {ctx.F.full: 0}
        self.gid = np.zeros(self.size, dtype=np.int64)
        self.t = 0
        self._step = None

    def _group(self, V: int) -> int:
        g = self.group_of.get(V)
        if g is None:
            g = len(self.group_masks)
            self.group_masks.append(V)
            self.group_of[V] = g
        return g

    def predict(self, x) -> np.ndarray:
        self.t += 1
        live = np.unique(self.gid)
        preds = np.zeros(len(self.group_masks), dtype=np.int8)
        step = {}
        for g in live.tolist():
            pred, may_record = _mistake_step(self.ctx, self.group_masks[g], x)
            preds[g] = pred
            step[g] = (pred, may_record)
        self._step = step
        return preds[self.gid]

    def update(self, x, y: int) -> None:
        if self.t >= len(self.by_time):
            return
        movers = self.by_time[self.t]
        if len(movers) == 0:
            return
        F = self.ctx.F
        old = self.gid[movers]
        remap = {}
        for g in np.unique(old).tolist():
            pred, may_record = self._step[g]
            remap[g] = self._group(self.group_masks[g] & F.with_label(x, 1 - pred)) if may_record else g
        self.gid[movers] = np.array([remap[g] for g in old.tolist()], dtype=np.int64)


def make_agnostic_adaptive(
    F: HypothesisClass, U: DistributionClass, eps, T: int, cap: int = DEFAULT_EXPERT_CAP, seed=None
) -> HedgeLearner:
    ctx = shared_context(F, U, to_fraction(eps))
    sets = _subsets_up_to(T, ctx.k_of_eps(), cap, "agnostic learner")
    return HedgeLearner(MistakeExpertPool(ctx, sets, T), "fixed", T, seed)


class EpochOblivious(Learner):
    """Restarting Hedge over the leaves of a deepest relaxed tree of the version space."""

    def __init__(self, F, U, eps, T: int, c0=16, budget: int = 200_000, seed=None):
        self.F = F
        self.U = U
        self.eps = to_fraction(eps)
        self.T = T
        self.budget = budget
        self.streams = as_streams(seed, LEARNER)
        self.d = vc_dimension(F)
        self.n_eps = float(c0) * self.d * math.log(max(T, 1)) / float(self.eps)
        self.V = F.full
        self.t = 0
        self.start = 0
        self.epochs: list[tuple[int, list[int]]] = []
        self.flagged_epochs: list[int] = []
        self.hedge = None
        self.experts = None
        self._preds = None
        self._x = None

    def _continues(self) -> bool:
        elapsed = self.t - self.start
        return elapsed <= self.n_eps or self.hedge.L.min() <= 2 * float(self.eps) * (elapsed - 1)

    def _start_epoch(self) -> None:
        self.start = self.t - 1
        V = self.V
        if V == 0:
            self.flagged_epochs.append(len(self.epochs))
            experts = [0]
        else:
            report = eps_dimension(self.F, self.U, Relaxed(self.eps), budget=self.budget, allowed=V)
            experts = report.certificate.leaf_functions() if report.value > 0 else [bits(V)[0]]
        self.epochs.append((self.t, experts))
        self.experts = FunctionPool(self.F, experts)
        self.hedge = Hedge(len(experts), "adaptive")

    def observe_instance(self, x) -> int:
        self.t += 1
        if self.hedge is None or not self._continues():
            self._start_epoch()
        self._x = x
        self._preds = self.experts.predict(x)
        i = categorical(self.streams.at(self.t), self.hedge.probabilities())
        return int(self._preds[i])

    def observe_label(self, y: int) -> None:
        self.hedge.update((self._preds != y).astype(float))
        self.V &= self.F.with_label(self._x, y)


def make_epoch_oblivious(F, U, eps, T: int, c0=16, budget: int = 200_000, seed=None) -> EpochOblivious:
    return EpochOblivious(F, U, eps, T, c0, budget, seed)


# ------------------------------------------------------------- tree orders


class VC1Learner(Learner):
    """Predicts 1 exactly below the largest positive seen so far."""

    def __init__(self, order: InstanceSpace):
        if not order.has_order:
            raise InputError("the VC-1 learner needs an ordered instance space")
        self.order = order
        self.x_max: int | None = None
        self.t = 0
        self.flagged_rounds: list[int] = []
        self._x = None

    def observe_instance(self, x) -> int:
        self.t += 1
        self._x = x
        return int(self.x_max is not None and self.order.precedes(x, self.x_max))

    def observe_label(self, y: int) -> None:
        if not y:
            return
        x = self._x
        if self.x_max is None or self.order.precedes(self.x_max, x):
            self.x_max = x
        elif not self.order.precedes(x, self.x_max):
            self.flagged_rounds.append(self.t)


def make_vc1_learner(order: InstanceSpace) -> VC1Learner:
    return VC1Learner(order)


class VC1ExpertPool(ExpertPool):
    """Experts that re-anchor at their chosen times and predict 1 below the anchor."""

    def __init__(self, order: InstanceSpace, sets, T: int):
        n = order.n
        self.size = len(sets)
        self.by_time = _times_index(sets, T)
        below = np.zeros((n + 1, n), dtype=np.int8)
        for a in range(n):
            for x in range(n):
                below[a, x] = order.precedes(x, a)
        self.below = below
        # row n is the "no anchor yet" state
        self.anchor = np.full(self.size, n, dtype=np.int64)
        self.t = 0

    def predict(self, x) -> np.ndarray:
        self.t += 1
        if self.t < len(self.by_time):
            self.anchor[self.by_time[self.t]] = x
        return self.below[self.anchor, x]

    def update(self, x, y: int) -> None:
        pass


def resolve_kt(T: int, KT) -> int:
    if KT in (None, "sqrt"):
        return max(1, math.isqrt(T))
    KT = int(KT)
    if KT < 0:
        raise InputError("K_T must be nonnegative")
    return KT


def make_vc1_optimistic(order: InstanceSpace, T: int, KT="sqrt", cap: int = DEFAULT_EXPERT_CAP, seed=None) -> HedgeLearner:
    if not order.has_order:
        raise InputError("the VC-1 learner needs an ordered instance space")
    sets = _subsets_up_to(T, resolve_kt(T, KT), cap, "VC-1 optimistic learner")
    return HedgeLearner(VC1ExpertPool(order, sets, T), "fixed", T, seed)
