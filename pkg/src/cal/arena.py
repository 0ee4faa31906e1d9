"""Game engine: learner against adversary, Monte-Carlo regret estimates and sweeps.

Per round the adversary commits a distribution and a labeling rule from the
past instances and predictions, the environment samples ``x_t``, the learner
predicts from the past labeled data and ``x_t``, and then sees ``y_t``.
Repetition ``r`` draws everything from streams keyed by (seed, r, role), so
results do not depend on how repetitions are scheduled across processes.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import adversaries as adv
from . import learners as lrn
from . import linear
from .critical import k_of_eps
from .dims import eps_dimension
from .errors import InputError
from .problem import Problem, rational
from .rng import ADVERSARY, ENV, LEARNER, Streams
from .trees import Plain, StrictEta

__all__ = [
    "GameConfig",
    "Transcript",
    "RegretEstimate",
    "parse_spec",
    "build_learner",
    "build_adversary",
    "run_game",
    "estimate_regret",
    "sweep",
    "rows_to_csv",
    "halfspace_erm_loss",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ("axis", "mean_regret", "stderr", "normalized_mean", "T", "R", "seed")
MODES = ("oblivious", "adaptive")


def parse_spec(text: str) -> tuple[str, list[str], dict[str, str]]:
    """``"name:pos,key=val"`` into (name, positional args, keyword args)."""
    if not isinstance(text, str) or not text.strip():
        raise InputError("empty spec string")
    name, _, rest = text.strip().partition(":")
    args: list[str] = []
    kwargs: dict[str, str] = {}
    for part in filter(None, (p.strip() for p in rest.split(","))):
        key, eq, value = part.partition("=")
        if eq:
            kwargs[key.strip()] = value.strip()
        else:
            args.append(part)
    return name.strip(), args, kwargs


def format_spec(name: str, args, kwargs) -> str:
    parts = list(args) + [f"{k}={v}" for k, v in kwargs.items()]
    return name + (":" + ",".join(parts) if parts else "")


def with_eps(spec: str, eps) -> str:
    name, args, kwargs = parse_spec(spec)
    if name in EPS_SPECS:
        kwargs["eps"] = str(rational(eps) if not isinstance(eps, float) else eps)
    return format_spec(name, args, kwargs)


EPS_SPECS = {"level", "epoch", "agnostic", "mistake", "packing", "treewalk", "critical", "smoothed"}


@dataclass(frozen=True)
class GameConfig:
    problem: Problem
    learner: str
    adversary: str
    T: int
    R: int = 1
    seed: int = 0
    mode: str = "adaptive"
    expert_cap: int = lrn.DEFAULT_EXPERT_CAP
    budget: int = 200_000

    def __post_init__(self):
        if self.T < 1:
            raise InputError("T must be at least 1")
        if self.R < 1:
            raise InputError("R must be at least 1")
        if self.mode not in MODES:
            raise InputError(f"regret mode must be one of {MODES}")

    def echo(self) -> dict:
        return {
            "learner": self.learner,
            "adversary": self.adversary,
            "T": self.T,
            "R": self.R,
            "seed": self.seed,
            "mode": self.mode,
            "expert_cap": self.expert_cap,
            "budget": self.budget,
        }


@dataclass
class Transcript:
    xs: list
    predictions: np.ndarray
    labels: np.ndarray
    mu_index: np.ndarray
    hypothesis_losses: np.ndarray | None
    comparator_loss: int
    approximate: bool
    realizable: bool
    played: list = field(default_factory=list)

    @property
    def losses(self) -> np.ndarray:
        return (self.predictions != self.labels).astype(np.int64)

    @property
    def learner_loss(self) -> int:
        return int(self.losses.sum())

    def __len__(self) -> int:
        return len(self.xs)


@dataclass(frozen=True)
class RegretEstimate:
    mean: float
    stderr: float
    R: int
    mode: str
    learner_mean: float
    comparator_mean: float
    approximate: bool = False


def _need(problem: Problem, what: str):
    if what == "finite" and not problem.finite:
        raise InputError("this spec needs a finite hypothesis class")
    if what == "order" and (problem.order is None):
        raise InputError("this spec needs a tree order ('parent' in the problem file)")
    if what == "euclidean" and problem.euclidean is None:
        raise InputError("this spec needs a 'euclidean' section in the problem file")


def _eps(kwargs, default=None) -> Fraction:
    if "eps" not in kwargs:
        if default is None:
            raise InputError("spec needs eps=...")
        return Fraction(default)
    eps = rational(kwargs["eps"])
    if eps <= 0:
        raise InputError("eps must be positive")
    return eps


def build_learner(spec: str, config: GameConfig, seed: Streams):
    name, args, kw = parse_spec(spec)
    P, T = config.problem, config.T
    if name == "hedge":
        _need(P, "finite")
        mode = args[0] if args else kw.get("mode", "fixed")
        return lrn.HedgeLearner(lrn.FunctionPool(P.F, range(P.F.m)), mode, T, seed)
    if name == "function":
        _need(P, "finite")
        return lrn.FunctionLearner(P.F, int(kw.get("f", args[0] if args else 0)))
    if name == "level":
        _need(P, "finite")
        return lrn.make_level_learner(P.F, P.U, _eps(kw))
    if name == "mistake":
        _need(P, "finite")
        S = [int(s) for s in kw.get("S", "").split(";") if s]
        return lrn.make_mistake_expert(P.F, P.U, _eps(kw), S, T)
    if name == "agnostic":
        _need(P, "finite")
        return lrn.make_agnostic_adaptive(P.F, P.U, _eps(kw), T, config.expert_cap, seed)
    if name == "epoch":
        _need(P, "finite")
        return lrn.make_epoch_oblivious(P.F, P.U, _eps(kw), T, rational(kw.get("c0", "16")), config.budget, seed)
    if name == "vc1":
        _need(P, "order")
        return lrn.make_vc1_learner(P.order)
    if name == "vc1opt":
        _need(P, "order")
        return lrn.make_vc1_optimistic(P.order, T, kw.get("KT", "sqrt"), config.expert_cap, seed)
    if name == "linear":
        _need(P, "euclidean")
        return linear.make_linear_learner(P.euclidean["d"])
    if name == "linear-agnostic":
        _need(P, "euclidean")
        eps_list = [float(rational(e)) for e in kw["eps"].split(";")] if "eps" in kw else None
        return linear.make_linear_agnostic(P.euclidean["d"], T, eps_list, config.expert_cap, seed)
    raise InputError(f"unknown learner {name!r}")


@lru_cache(maxsize=16)
def _tree(F, U, kind, budget: int):
    report = eps_dimension(F, U, kind, budget=budget)
    return report.certificate


def build_adversary(spec: str, config: GameConfig, seed: Streams):
    name, args, kw = parse_spec(spec)
    P, T = config.problem, config.T
    if name == "gauss":
        _need(P, "euclidean")
        return adv.make_gaussian_halfspace(P.euclidean["d"], float(rational(kw.get("noise", "0"))), seed)
    _need(P, "finite")
    if name == "iid":
        return adv.make_iid(P.F, P.U.default_member(), int(kw.get("f", 0)), rational(kw.get("noise", "0")), seed)
    if name == "packing":
        return adv.make_packing_adversary(P.F, P.U, None, _eps(kw), seed)
    if name in ("treewalk", "critical"):
        mode = args[0] if args else kw.get("mode", "realizable")
        if mode not in ("agnostic", "realizable"):
            raise InputError(f"unknown mode {mode!r}")
        eps = _eps(kw)
        if name == "critical":
            return adv.make_critical_adversary(P.F, P.U, eps, mode, T, seed)
        kind = Plain(eps) if mode == "agnostic" else StrictEta(eps, eps / (4 * T))
        tree = _tree(P.F, P.U, kind, config.budget)
        return adv.make_tree_walk_adversary(tree, P.U, T, mode, eps, seed)
    if name == "smoothed":
        base = P.U.base if P.U.kind == "smoothed" else None
        if base is None:
            from .core import Distribution

            base = Distribution.uniform(P.n)
        cap = rational(kw["cap"]) if "cap" in kw else (P.U.cap if P.U.kind == "smoothed" else Fraction(1))
        return adv.make_smoothed_adversarial(P.F, base, cap, _eps(kw, Fraction(1, 8)), seed)
    raise InputError(f"unknown adversary {name!r}")


def halfspace_erm_loss(X: np.ndarray, Y: np.ndarray, chunk: int = 4096) -> int:
    """Fewest mistakes of any halfspace on (X, Y), by enumerating hyperplanes through d points.

    Points on an enumerated hyperplane may take either label (a small tilt
    realizes any pattern on affinely independent points), so the search is
    exact for points in general position.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=np.int64)
    T, d = X.shape
    best = int(min(Y.sum(), T - Y.sum()))
    if T <= d or best == 0:
        return 0 if T <= d else best
    Xh = np.hstack([X, np.ones((T, 1))])
    scale = 1.0 + float(np.abs(X).max())
    combos = itertools.combinations(range(T), d)
    while True:
        block = np.array(list(itertools.islice(combos, chunk)))
        if len(block) == 0:
            return best
        sub = Xh[block]  # (c, d, d+1)
        _, _, vt = np.linalg.svd(sub)
        w = vt[:, -1, :]  # normals (a, b) of the hyperplanes through the d points
        scores = w @ Xh.T  # (c, T)
        on = np.abs(scores) <= 1e-9 * scale * (1 + np.abs(w).sum(axis=1, keepdims=True))
        for sign in (1.0, -1.0):
            pred = (sign * scores > 0).astype(np.int64)
            err = ((pred != Y[None, :]) & ~on).sum(axis=1)
            best = min(best, int(err.min()))


def run_game(config: GameConfig, rep: int = 0) -> Transcript:
    learner = build_learner(config.learner, config, Streams(config.seed, rep, LEARNER))
    adversary = build_adversary(config.adversary, config, Streams(config.seed, rep, ADVERSARY))
    env = Streams(config.seed, rep, ENV)
    T = config.T
    xs = []
    preds = np.zeros(T, dtype=np.int64)
    labels = np.zeros(T, dtype=np.int64)
    mus = np.zeros(T, dtype=np.int64)
    history: list[tuple] = []
    for t in range(1, T + 1):
        rnd = adversary.next_round(t, history)
        x = rnd.sample(env.at(t))
        y = int(rnd.label(x))
        yhat = int(learner.observe_instance(x))
        learner.observe_label(y)
        history.append((x, yhat))
        xs.append(x)
        preds[t - 1] = yhat
        labels[t - 1] = y
        mus[t - 1] = rnd.mu_index
    P = config.problem
    if P.finite:
        M = P.F.matrix()
        idx = np.asarray(xs, dtype=np.int64)
        hyp = (M[:, idx] != labels[None, :]).sum(axis=1).astype(np.int64)
        comp = int(hyp.min())
        approx = False
    else:
        hyp = None
        comp = halfspace_erm_loss(np.array(xs), labels)
        approx = True
    if adversary.realizable and P.finite:
        assert comp == 0, "realizable adversary produced a transcript no function fits"
    return Transcript(xs, preds, labels, mus, hyp, comp, approx, adversary.realizable, list(adversary.played))


def _rep_summary(args) -> tuple[int, object]:
    config, rep = args
    tr = run_game(config, rep)
    return tr.learner_loss, (tr.hypothesis_losses if tr.hypothesis_losses is not None else tr.comparator_loss)


def _stderr(values: np.ndarray) -> float:
    if len(values) < 2:
        return float("nan")
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))


def estimate_regret(config: GameConfig, jobs: int = 1) -> RegretEstimate:
    work = [(config, r) for r in range(config.R)]
    if jobs > 1 and config.R > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_rep_summary, work))
    else:
        results = [_rep_summary(w) for w in work]
    learner = np.array([r[0] for r in results], dtype=float)
    finite = config.problem.finite
    if finite:
        H = np.array([r[1] for r in results], dtype=float)  # R x m
    if config.mode == "adaptive":
        best = H.min(axis=1) if finite else np.array([r[1] for r in results], dtype=float)
        diffs = learner - best
        return RegretEstimate(float(diffs.mean()), _stderr(diffs), config.R, "adaptive", float(learner.mean()), float(best.mean()), not finite)
    if not finite:
        raise InputError("oblivious regret needs a finite class; use --mode adaptive for Euclidean games")
    f_star = int(np.argmin(H.mean(axis=0)))
    diffs = learner - H[:, f_star]
    return RegretEstimate(float(diffs.mean()), _stderr(diffs), config.R, "oblivious", float(learner.mean()), float(H[:, f_star].mean()))


def sweep(config: GameConfig, axis: str, values, jobs: int = 1) -> list[dict]:
    """One regret estimate per axis value; ``axis`` is ``"T"`` or ``"eps"``."""
    values = list(values)
    if not values:
        raise InputError("sweep axis is empty")
    if axis not in ("T", "eps"):
        raise InputError("sweep axis must be T or eps")
    rows = []
    for v in values:
        if axis == "T":
            cfg = replace(config, T=int(v))
            label = int(v)
        else:
            eps = rational(v)
            cfg = replace(config, learner=with_eps(config.learner, eps), adversary=with_eps(config.adversary, eps))
            label = eps
        est = estimate_regret(cfg, jobs)
        row = {
            "axis": label,
            "mean_regret": est.mean,
            "stderr": est.stderr,
            "normalized_mean": est.mean / cfg.T,
            "T": cfg.T,
            "R": cfg.R,
            "seed": cfg.seed,
        }
        if axis == "eps" and config.problem.finite:
            row["k"] = k_of_eps(config.problem.F, config.problem.U, label)
        rows.append(row)
    return rows


def _cell(v) -> str:
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def rows_to_csv(rows: list[dict]) -> str:
    cols = list(CSV_COLUMNS) + [c for c in (rows[0] if rows else {}) if c not in CSV_COLUMNS]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(r[c]) for c in cols])
    return buf.getvalue()


def rows_to_json(rows: list[dict], config: GameConfig | None = None, axis: str | None = None) -> str:
    out = {
        "config": None if config is None else config.echo(),
        "axis": axis,
        "rows": [{k: (_cell(v) if isinstance(v, (float, Fraction)) else v) for k, v in r.items()} for r in rows],
    }
    return json.dumps(out, sort_keys=True, indent=2) + "\n"
