"""Halfspace certainty regions in R^d and the learners built on them.

A halfspace labels ``x`` with 1 iff ``a.x + b >= 0``. Given realizable data with
positives ``P`` and negatives ``N``, the certainty region ``S(1)`` holds the
points that every consistent halfspace labels 1. By Farkas' lemma

    S(1) = { sum_i l_i p_i - sum_j m_j n_j : l, m >= 0, sum l = 1 + sum m },

and ``S(0)`` is the same with the roles of ``P`` and ``N`` swapped.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import linprog

from .errors import DegenerateDataError, InputError, SolverError
from .learners import DEFAULT_EXPERT_CAP, ExpertPool, Hedge, HedgeLearner, Learner, _subsets_up_to, _times_index
from .rng import LEARNER, as_streams, categorical

__all__ = [
    "certainty_membership",
    "certainty_distance",
    "nearest_point",
    "LinearLearner",
    "make_linear_learner",
    "make_linear_agnostic",
    "epoch_starts",
    "default_eps_list",
]

QP_TOL = 1e-9
QP_MAX_ITER = 10_000


def _points(arr, d: int | None = None) -> np.ndarray:
    a = np.asarray(arr, dtype=float)
    if a.size == 0:
        return np.zeros((0, d or 0))
    if a.ndim == 1:
        a = a[None, :]
    return a


def _feasible(pos_ge0: np.ndarray, neg_le_m1: np.ndarray) -> bool:
    """Is there (a, b) with a.p + b >= 0 on ``pos_ge0`` and a.q + b <= -1 on ``neg_le_m1``?"""
    d = pos_ge0.shape[1] if len(pos_ge0) else neg_le_m1.shape[1]
    rows = []
    rhs = []
    for p in pos_ge0:
        rows.append(np.append(-p, -1.0))
        rhs.append(0.0)
    for q in neg_le_m1:
        rows.append(np.append(q, 1.0))
        rhs.append(-1.0)
    if not rows:
        return True
    res = linprog(
        np.zeros(d + 1),
        A_ub=np.array(rows),
        b_ub=np.array(rhs),
        bounds=[(None, None)] * (d + 1),
        method="highs",
    )
    if res.status == 0:
        return True
    if res.status == 2:
        return False
    raise SolverError(f"LP solver failed: {res.message}")


def _member(P: np.ndarray, N: np.ndarray, x: np.ndarray, y: int) -> bool:
    """Membership without the realizability check; assumes realizable data."""
    if y == 1:
        if len(P) == 0:
            return False
        return not _feasible(P, np.vstack([N, x[None, :]]) if len(N) else x[None, :])
    if len(N) == 0:
        return False
    return not _feasible(np.vstack([P, x[None, :]]) if len(P) else x[None, :], N)


def check_realizable(P, N) -> bool:
    P = _points(P)
    N = _points(N, P.shape[1] if P.size else None)
    if len(P) == 0 or len(N) == 0:
        return True
    return _feasible(P, N)


def certainty_membership(P, N, x, y: int) -> bool:
    """Whether every halfspace consistent with (P, N) labels ``x`` with ``y``."""
    x = np.asarray(x, dtype=float)
    P = _points(P, len(x))
    N = _points(N, len(x))
    if y not in (0, 1):
        raise InputError("label must be 0 or 1")
    inside = _member(P, N, x, y)
    if inside and not check_realizable(P, N):
        raise DegenerateDataError("no halfspace separates the data; certainty regions are undefined")
    return inside


def _affine_min_norm(A: np.ndarray, e: np.ndarray, x: np.ndarray) -> np.ndarray:
    """argmin ||A z - x|| subject to e.z = 1 with z free (KKT system, least squares)."""
    m = A.shape[1]
    K = np.zeros((m + 1, m + 1))
    K[:m, :m] = A.T @ A
    K[:m, m] = e
    K[m, :m] = e
    rhs = np.concatenate([A.T @ x, [1.0]])
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    return sol[:m]


def nearest_point(P: np.ndarray, N: np.ndarray, x: np.ndarray, tol=QP_TOL, max_iter=QP_MAX_ITER) -> np.ndarray:
    """Nearest point to ``x`` in conv(P) + cone{p - n : p in P, n in N}.

    Wolfe's minimum-norm-point method with rays: a corral of at most d + 1
    affinely independent atoms is grown by the most violated optimality
    condition and shrunk by line searches until the affine minimizer is a
    nonnegative combination. The recession directions p - n are never listed;
    the most violated one is found as (argmin_p r.p) - (argmax_n r.n).
    """
    scale = 1.0 + max(float(np.abs(P).max()), float(np.abs(N).max()) if len(N) else 0.0, float(np.abs(x).max()))
    eps = tol * scale
    i0 = int(np.argmin(((P - x) ** 2).sum(axis=1)))
    atoms = [P[i0]]
    kinds = [1]  # 1 = point of P, 0 = ray
    w = np.array([1.0])
    y = P[i0].copy()
    for _ in range(max_iter):
        r = y - x
        add = None
        if len(N):
            dp = P[int(np.argmin(P @ r))] - N[int(np.argmax(N @ r))]
            if r @ dp < -eps * scale:
                add = (dp, 0)
        if add is None:
            p = P[int(np.argmin(P @ r))]
            if r @ p < r @ y - eps * scale:
                add = (p, 1)
        if add is None:
            return y
        atoms.append(add[0])
        kinds.append(add[1])
        w = np.append(w, 0.0)
        while True:
            A = np.array(atoms).T
            e = np.array(kinds, dtype=float)
            z = _affine_min_norm(A, e, x)
            if (z > eps).all() or (len(z) == 1 and kinds[0] == 1):
                w = z
                break
            neg = z <= eps
            theta = min(1.0, min(w[i] / (w[i] - z[i]) for i in np.flatnonzero(neg) if w[i] - z[i] > 0))
            w = w + theta * (z - w)
            keep = [i for i in range(len(atoms)) if w[i] > eps or (kinds[i] == 1 and sum(kinds) == 1 and w[i] > 0)]
            if not any(kinds[i] == 1 for i in keep):
                keep.append(max((i for i in range(len(atoms)) if kinds[i] == 1), key=lambda i: w[i]))
                keep.sort()
            atoms = [atoms[i] for i in keep]
            kinds = [kinds[i] for i in keep]
            w = w[keep]
            pts = w[np.array(kinds) == 1].sum()
            w = np.where(np.array(kinds) == 1, w / pts, w) if pts > 0 else w
        y = np.array(atoms).T @ w
    raise SolverError("nearest-point iteration cap reached")


def certainty_distance(P, N, x, y: int, exact_membership: bool = True) -> float:
    """Euclidean distance from ``x`` to the certainty region ``S(y)``; inf if it is empty."""
    x = np.asarray(x, dtype=float)
    P = _points(P, len(x))
    N = _points(N, len(x))
    gens, others = (P, N) if y == 1 else (N, P)
    if len(gens) == 0:
        return math.inf
    if exact_membership and certainty_membership(P, N, x, y):
        return 0.0
    return float(np.linalg.norm(nearest_point(gens, others, x) - x))


class LinearLearner(Learner):
    """Predicts the label whose certainty region is nearer; ties and double-inf go to 0.

    Labels that contradict a certainty region (possible only on noisy streams)
    are dropped so that the stored data stays separable; ``dropped`` counts them.
    """

    def __init__(self, d: int):
        if d < 1:
            raise InputError("dimension must be positive")
        self.d = d
        self.P: list[np.ndarray] = []
        self.N: list[np.ndarray] = []
        self.dropped = 0
        self._x = None
        self._inside = (False, False)

    def copy(self) -> LinearLearner:
        other = LinearLearner(self.d)
        other.P = list(self.P)
        other.N = list(self.N)
        other.dropped = self.dropped
        other._x = self._x
        other._inside = self._inside
        return other

    def _arrays(self):
        return _points(self.P, self.d), _points(self.N, self.d)

    def observe_instance(self, x) -> int:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.d,):
            raise InputError("point dimension mismatch")
        self._x = x
        P, N = self._arrays()
        in1 = _member(P, N, x, 1)
        in0 = False if in1 else _member(P, N, x, 0)
        self._inside = (in0, in1)
        if in1:
            return 1
        if in0:
            return 0
        d1 = certainty_distance(P, N, x, 1, exact_membership=False)
        d0 = certainty_distance(P, N, x, 0, exact_membership=False)
        return 1 if d1 < d0 else 0

    def accepts(self, y: int) -> bool:
        """Adding (x, y) keeps the data separable iff x is not certain to be 1 - y."""
        return not self._inside[1 - y]

    def observe_label(self, y: int) -> None:
        if not self.accepts(y):
            self.dropped += 1
            return
        (self.P if y else self.N).append(self._x)


def make_linear_learner(d: int) -> LinearLearner:
    return LinearLearner(d)


class LinearExpertPool(ExpertPool):
    """Mistake-time experts over the linear learner.

    Expert ``E(S)`` feeds its own prediction back as the label, flipped at the
    times in ``S``. Experts whose replayed data coincide share one learner.
    """

    def __init__(self, d: int, sets, T: int):
        self.d = d
        self.size = len(sets)
        self.by_time = _times_index(sets, T)
        self.states: dict[tuple, LinearLearner] = {(): LinearLearner(d)}
        self.state_of = [()] * self.size
        self.t = 0
        self._preds: dict[tuple, int] = {}

    def predict(self, x) -> np.ndarray:
        self.t += 1
        self._preds = {key: lrn.observe_instance(x) for key, lrn in self.states.items()}
        return np.array([self._preds[k] for k in self.state_of], dtype=np.int8)

    def update(self, x, y: int) -> None:
        flips = set(self.by_time[self.t].tolist()) if self.t < len(self.by_time) else set()
        t = self.t
        new_states: dict[tuple, LinearLearner] = {}
        moved: dict[tuple, tuple[tuple, tuple]] = {}
        flipping = {self.state_of[e] for e in flips}
        staying = {k for e, k in enumerate(self.state_of) if e not in flips}
        for key, lrn in self.states.items():
            pred = self._preds[key]
            keys = [key, key]
            for side, label in ((0, pred), (1, 1 - pred)):
                if key not in (flipping if side else staying):
                    continue
                if lrn.accepts(label):
                    keys[side] = key + ((t, label),)
                if keys[side] not in new_states:
                    branch = lrn.copy()
                    branch.observe_label(label)
                    new_states[keys[side]] = branch
            moved[key] = (keys[0], keys[1])
        self.state_of = [moved[k][1 if e in flips else 0] for e, k in enumerate(self.state_of)]
        live = set(self.state_of)
        self.states = {k: v for k, v in new_states.items() if k in live}


def epoch_starts(T: int) -> list[int]:
    """Restart times k(k+1)/2 that fall in 1..T."""
    out = []
    k = 1
    while k * (k + 1) // 2 <= T:
        out.append(k * (k + 1) // 2)
        k += 1
    return out


class RestartHedge(Learner):
    """Hedge restarted on the epochs [t_k, t_{k+1}) with horizon k over the first k learners."""

    def __init__(self, learners, seed=None):
        self.learners = list(learners)
        if not self.learners:
            raise InputError("need at least one learner")
        self.streams = as_streams(seed, LEARNER)
        self.t = 0
        self.k = 0
        self.hedge = None
        self._preds = None

    def observe_instance(self, x) -> int:
        self.t += 1
        if self.t >= (self.k + 1) * (self.k + 2) // 2:
            self.k += 1
            self.hedge = Hedge(min(self.k, len(self.learners)), "fixed", self.k)
        self._preds = np.array([lrn.observe_instance(x) for lrn in self.learners], dtype=np.int8)
        i = categorical(self.streams.at(self.t), self.hedge.probabilities())
        return int(self._preds[i])

    def observe_label(self, y: int) -> None:
        K = self.hedge.K
        self.hedge.update((self._preds[:K] != y).astype(float))
        for lrn in self.learners:
            lrn.observe_label(y)


def default_eps_list(T: int) -> list[float]:
    """Dyadic values 2^-i whose mistake budget floor(2^-i T) is at most one, largest first.

    Larger budgets are allowed through ``eps_list`` but the number of distinct
    replayed datasets grows like C(t, budget), each needing its own LPs.
    """
    out = []
    i = 1
    while True:
        eps = 2.0**-i
        budget = math.floor(eps * T)
        if budget <= 1:
            out.append(eps)
        if budget == 0:
            return out
        i += 1


def make_linear_agnostic(d: int, T: int, eps_list=None, expert_cap: int = DEFAULT_EXPERT_CAP, seed=None) -> RestartHedge:
    """Restart-Hedge over inner Hedge learners L(eps), each over E(S) with |S| <= eps T."""
    streams = as_streams(seed, LEARNER)
    if eps_list is None:
        eps_list = default_eps_list(T)
    inner = []
    for i, eps in enumerate(eps_list):
        budget = int(math.floor(float(eps) * T))
        sets = _subsets_up_to(T, budget, expert_cap, "linear agnostic learner")
        inner.append(HedgeLearner(LinearExpertPool(d, sets, T), "fixed", T, streams.child(i + 1)))
    return RestartHedge(inner, streams.child(0))
