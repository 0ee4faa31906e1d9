import math

import numpy as np
import pytest
from scipy.optimize import minimize

from cal.errors import CapExceededError, DegenerateDataError, InputError
from cal.linear import (
    LinearExpertPool,
    certainty_distance,
    certainty_membership,
    default_eps_list,
    epoch_starts,
    make_linear_agnostic,
    make_linear_learner,
    nearest_point,
)
from cal.learners import _subsets_up_to

P0 = [[0.0, 0.0]]
N0 = [[1.0, 1.0], [-1.0, 1.0]]


def _separable(gen, d, n):
    a = gen.normal(size=d)
    b = gen.normal() * 0.3
    X = gen.normal(size=(n, d))
    y = (X @ a + b >= 0).astype(int)
    return X, y, a, b


def _slsqp_distance(G, O, x):
    """Distance to conv(G) + cone(G - O), optimized over explicit generator weights."""
    G, O = np.asarray(G, float), np.asarray(O, float)
    rays = np.array([g - o for g in G for o in O]).reshape(-1, len(x))
    k, r = len(G), len(rays)

    def point(w):
        return w[:k] @ G + (w[k:] @ rays if r else 0)

    res = minimize(
        lambda w: np.sum((point(w) - x) ** 2),
        np.full(k + r, 1.0 / k) * np.r_[np.ones(k), np.zeros(r)],
        method="SLSQP",
        bounds=[(0, None)] * (k + r),
        constraints=[{"type": "eq", "fun": lambda w: w[:k].sum() - 1}],
        options={"ftol": 1e-14, "maxiter": 2000},
    )
    return math.sqrt(max(res.fun, 0.0))


def test_membership_examples():
    assert certainty_membership(P0, N0, [0, -5], 1)
    assert not certainty_membership(P0, N0, [5, 5], 1)
    assert certainty_membership(P0, N0, [0, 3], 0)
    assert not certainty_membership([], N0, [0, 0], 1)


def test_distance_examples():
    assert certainty_distance(P0, N0, [0, 2], 1) == pytest.approx(2.0, abs=1e-7)
    assert certainty_distance(P0, N0, [0, -5], 1) == 0
    assert certainty_distance([], N0, [0, 0], 1) == math.inf
    assert certainty_distance(P0, [], [3, 4], 1) == pytest.approx(5.0, abs=1e-7)


def test_non_separable_data_is_degenerate():
    with pytest.raises(DegenerateDataError):
        certainty_membership([[0.0], [2.0]], [[1.0]], [1.0], 1)
    with pytest.raises(InputError):
        certainty_membership(P0, N0, [0, 0], 2)


def test_distance_matches_slsqp():
    gen = np.random.default_rng(11)
    for _ in range(60):
        d = int(gen.integers(1, 4))
        X, y, _, _ = _separable(gen, d, int(gen.integers(3, 9)))
        P, N = X[y == 1], X[y == 0]
        if len(P) == 0:
            continue
        x = gen.normal(size=d) * 2
        got = float(np.linalg.norm(nearest_point(P, N, x) - x))
        assert got == pytest.approx(_slsqp_distance(P, N, x), abs=1e-5)


def test_membership_agrees_with_zero_distance():
    # the separation LP and the generator-form projection are independent routes
    gen = np.random.default_rng(12)
    for _ in range(80):
        d = int(gen.integers(1, 4))
        X, y, _, _ = _separable(gen, d, int(gen.integers(2, 8)))
        P, N = X[y == 1], X[y == 0]
        x = gen.normal(size=d) * 2
        for label in (0, 1):
            dist = certainty_distance(P, N, x, label, exact_membership=False)
            inside = certainty_membership(P, N, x, label)
            if inside:
                assert dist < 1e-6
            elif dist < 1e-9:
                pytest.fail("positive-distance point reported inside region")


def test_membership_never_contradicted_by_sampled_halfspaces():
    gen = np.random.default_rng(13)
    for _ in range(15):
        X, y, _, _ = _separable(gen, 2, 6)
        P, N = X[y == 1], X[y == 0]
        H = gen.normal(size=(20_000, 3))
        ok = np.all(P @ H[:, :2].T + H[:, 2] >= 0, axis=0) & np.all(N @ H[:, :2].T + H[:, 2] < 0, axis=0)
        H = H[ok]
        for x in gen.normal(size=(10, 2)) * 2:
            labels = (H[:, :2] @ x + H[:, 2] >= 0).astype(int)
            for label in (0, 1):
                if certainty_membership(P, N, x, label):
                    assert np.all(labels == label)


def test_regions_grow_with_data():
    gen = np.random.default_rng(14)
    X, y, _, _ = _separable(gen, 2, 12)
    queries = gen.normal(size=(25, 2)) * 2
    before = [[certainty_membership(X[:6][y[:6] == 1], X[:6][y[:6] == 0], q, lab) for lab in (0, 1)] for q in queries]
    after = [[certainty_membership(X[y == 1], X[y == 0], q, lab) for lab in (0, 1)] for q in queries]
    for b, a in zip(before, after):
        assert a[0] >= b[0] and a[1] >= b[1]


def test_linear_learner_first_round_and_shape():
    lrn = make_linear_learner(2)
    assert lrn.observe_instance([0.3, -1.0]) == 0
    with pytest.raises(InputError):
        lrn.observe_instance([1.0])
    with pytest.raises(InputError):
        make_linear_learner(0)


def test_linear_learner_never_errs_inside_certainty_regions():
    gen = np.random.default_rng(15)
    X, y, _, _ = _separable(gen, 2, 60)
    lrn = make_linear_learner(2)
    for x, label in zip(X, y):
        pred = lrn.observe_instance(x)
        in0, in1 = lrn._inside
        if in0 or in1:
            assert pred == label
        lrn.observe_label(int(label))
    assert lrn.dropped == 0


@pytest.mark.slow
def test_linear_learner_makes_fewer_late_mistakes():
    gen = np.random.default_rng(16)
    T = 256
    early = late = 0
    for _ in range(3):
        X, y, _, _ = _separable(gen, 2, T)
        lrn = make_linear_learner(2)
        for t, (x, label) in enumerate(zip(X, y)):
            miss = lrn.observe_instance(x) != label
            lrn.observe_label(int(label))
            if t < T // 2:
                early += miss
            else:
                late += miss
    assert late < early


def test_epoch_starts_and_eps_list():
    assert epoch_starts(10) == [1, 3, 6, 10]
    assert epoch_starts(1) == [1]
    assert default_eps_list(32) == [1 / 32, 1 / 64]
    assert all(math.floor(e * 100) <= 1 for e in default_eps_list(100))


def test_mistake_expert_at_plain_mistake_times_replays_the_plain_learner():
    gen = np.random.default_rng(17)
    T = 20
    X, y, _, _ = _separable(gen, 2, T)
    plain = make_linear_learner(2)
    preds, mistakes = [], []
    for t, (x, label) in enumerate(zip(X, y), start=1):
        p = plain.observe_instance(x)
        preds.append(p)
        if p != label:
            mistakes.append(t)
        plain.observe_label(int(label))
    pool = LinearExpertPool(2, [(), tuple(mistakes)], T)
    replay = []
    for x, label in zip(X, y):
        replay.append(pool.predict(x).tolist())
        pool.update(x, int(label))
    assert [r[1] for r in replay] == preds


def test_linear_pool_shares_states_for_identical_replays():
    gen = np.random.default_rng(18)
    T = 8
    sets = _subsets_up_to(T, 1, 100, "test")
    pool = LinearExpertPool(2, sets, T)
    for x in gen.normal(size=(T, 2)):
        pool.predict(x)
        pool.update(x, 0)
        assert len(pool.states) <= len(sets)


def test_linear_agnostic_runs_and_caps():
    gen = np.random.default_rng(19)
    T = 16
    X, y, _, _ = _separable(gen, 2, T)

    def play():
        lrn = make_linear_agnostic(2, T, seed=3)
        preds = []
        for x, label in zip(X, y):
            preds.append(lrn.observe_instance(x))
            lrn.observe_label(int(label))
        return preds

    first = play()
    assert set(first) <= {0, 1}
    assert play() == first
    with pytest.raises(CapExceededError):
        make_linear_agnostic(2, 64, eps_list=[0.5], expert_cap=1000)
