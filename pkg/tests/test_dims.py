import itertools
import json
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cal.core import Distribution, DistributionClass, build_hypothesis_class
from cal.dims import (
    covering_number,
    eps_dimension,
    littlestone_dimension,
    node_pool,
    packing_set,
    region_dimension,
    threshold_chain,
    threshold_cut_levels,
    threshold_dimension,
    threshold_witness_measure,
    vc_dimension,
)
from cal.errors import CapExceededError, InputError, MalformedTreeError
from cal.trees import InteractionTree, Plain, Region, Relaxed, StrictEta, TreeNode, validate_tree_certificate

import oracles
from conftest import chain, random_class, random_distribution, thresholds, tree_functions, uniform_class


def small_sets(n, k):
    return build_hypothesis_class([[int(x in S) for x in range(n)] for j in range(k + 1) for S in itertools.combinations(range(n), j)])


def test_vc_examples():
    assert vc_dimension(thresholds(8)) == 1
    powerset = build_hypothesis_class(list(itertools.product((0, 1), repeat=3)))
    assert vc_dimension(powerset) == 3
    assert vc_dimension(small_sets(4, 1)) == 1


def test_littlestone_examples():
    assert littlestone_dimension(small_sets(6, 2)) == 2
    assert littlestone_dimension(build_hypothesis_class([[0, 1, 1]])) == 0
    assert littlestone_dimension(thresholds(8)) == oracles.ldim_oracle(oracles.rows(thresholds(8)), 8) == 3


def test_vc_and_littlestone_match_oracles_on_random_classes(rng):
    for _ in range(25):
        n = rng.randint(2, 6)
        F = random_class(rng, n, rng.randint(2, 14), prune=False)
        assert vc_dimension(F) == oracles.vc_oracle(oracles.rows(F), n)
        assert littlestone_dimension(F) == oracles.ldim_oracle(oracles.rows(F), n)
        assert vc_dimension(F) <= littlestone_dimension(F)


def test_covering_examples():
    F = thresholds(8)
    mu = Distribution.uniform(8)
    assert covering_number(F, mu, 1) == 1
    two = build_hypothesis_class([[0, 0, 1, 1], [1, 1, 1, 1]])
    assert covering_number(two, Distribution.uniform(4), Fraction(1, 4)) == 2
    assert covering_number(F, mu, Fraction(1, 4)) == oracles.cover_oracle(oracles.rows(F), mu, Fraction(1, 4))


def test_covering_cap():
    F = thresholds(24)
    with pytest.raises(CapExceededError):
        covering_number(F, Distribution.uniform(24), Fraction(1, 8))
    assert covering_number(F, Distribution.uniform(24), Fraction(1, 8), mode="greedy") >= 1


def test_covering_exact_greedy_and_oracle(rng):
    for _ in range(20):
        n = rng.randint(3, 6)
        F = random_class(rng, n, rng.randint(2, 10), prune=False)
        mu = random_distribution(rng, n)
        eps = rng.choice([Fraction(1, 8), Fraction(1, 4), Fraction(1, 3)])
        exact = covering_number(F, mu, eps)
        greedy = covering_number(F, mu, eps, mode="greedy")
        assert exact == oracles.cover_oracle(oracles.rows(F), mu, eps)
        assert exact <= greedy <= (math.log(F.m) + 1) * exact


def test_packing_examples():
    F = thresholds(8)
    mu = Distribution.uniform(8)
    assert packing_set(F, mu, Fraction(1, 40320)) == list(range(9))
    assert len(packing_set(F, mu, Fraction(3, 2))) == 1
    P = packing_set(F, mu, Fraction(1, 4))
    assert len(P) >= 4
    assert oracles.max_packing_oracle(oracles.rows(F), mu, Fraction(1, 4)) >= 4


def test_packing_is_maximal_and_separated(rng):
    for _ in range(20):
        n = rng.randint(3, 7)
        F = random_class(rng, n, rng.randint(2, 12), prune=False)
        mu = random_distribution(rng, n)
        eps = Fraction(rng.randint(1, 4), 8)
        P = packing_set(F, mu, eps)
        for f, g in itertools.combinations(P, 2):
            assert mu.of(F.disagreement_mask(f, g)) >= eps
        for f in set(range(F.m)) - set(P):
            assert any(mu.of(F.disagreement_mask(f, g)) < eps for g in P)


def test_eps_dimension_dirac_is_littlestone(rng):
    for _ in range(10):
        n = rng.randint(2, 5)
        F = random_class(rng, n, rng.randint(2, 10))
        report = eps_dimension(F, DistributionClass.dirac_all(F.n), Plain(Fraction(1, 2)))
        assert report.value == littlestone_dimension(F)
        assert report.exact


def test_eps_dimension_singleton_is_zero():
    F = build_hypothesis_class([[0, 1, 0]])
    for eps in (Fraction(1), Fraction(1, 8)):
        assert eps_dimension(F, uniform_class(3), Plain(eps)).value == 0


def test_eps_dimension_thresholds_matches_tree_oracle():
    F = thresholds(8)
    U = uniform_class(8)
    report = eps_dimension(F, U, Plain(Fraction(1, 4)))
    pool = [e.distribution for e in node_pool(U, F)[0]]
    assert report.value == oracles.plain_tree_oracle(oracles.rows(F), pool, Fraction(1, 4), 4)
    assert validate_tree_certificate(report.certificate, Plain(Fraction(1, 4)))


def test_eps_dimension_matches_oracle_on_random_instances(rng):
    for _ in range(8):
        n = rng.randint(2, 4)
        F = random_class(rng, n, rng.randint(2, 6))
        U = DistributionClass.explicit([random_distribution(rng, F.n, zeros=False)])
        eps = rng.choice([Fraction(1, 2), Fraction(1, 4)])
        pool = [e.distribution for e in node_pool(U, F)[0]]
        report = eps_dimension(F, U, Plain(eps))
        assert report.value == oracles.plain_tree_oracle(oracles.rows(F), pool, eps, 3)


def test_eps_dimension_monotone_in_eps(rng):
    for _ in range(10):
        n = rng.randint(3, 6)
        F = random_class(rng, n, rng.randint(2, 10))
        U = DistributionClass.explicit([random_distribution(rng, F.n, zeros=False)])
        values = [eps_dimension(F, U, Plain(e)).value for e in (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8))]
        assert values == sorted(values)


def test_budget_exhaustion_reports_inexact():
    F = thresholds(8)
    report = eps_dimension(F, DistributionClass.dirac_all(8), Plain(Fraction(1, 2)), budget=3)
    assert not report.exact
    assert validate_tree_certificate(report.certificate, Plain(Fraction(1, 2)))


def test_plain_certificates_convert_to_relaxed(rng):
    for _ in range(15):
        n = rng.randint(3, 6)
        F = random_class(rng, n, rng.randint(2, 10))
        U = DistributionClass.explicit([random_distribution(rng, F.n, zeros=False) for _ in range(2)])
        eps = rng.choice([Fraction(1, 2), Fraction(1, 4)])
        report = eps_dimension(F, U, Plain(eps))
        if report.value:
            assert validate_tree_certificate(report.certificate.as_relaxed(), Relaxed(eps))
            assert eps_dimension(F, U, Relaxed(eps)).value >= report.value


def _depth1(eps_mass):
    F = build_hypothesis_class([[0, 0, 0, 0], [1, 1, 0, 0]])
    return InteractionTree(1, F, (Distribution.uniform(4),), {(): TreeNode(0, 0, 1)})


def test_validate_depth_one_examples():
    tree = _depth1(Fraction(1, 2))
    assert validate_tree_certificate(tree, Plain(Fraction(1, 2)))
    assert not validate_tree_certificate(tree, Plain(Fraction(1)))


def test_validate_malformed_is_an_error():
    tree = _depth1(Fraction(1, 2))
    broken = InteractionTree(2, tree.functions, tree.pool, dict(tree.nodes))
    with pytest.raises(MalformedTreeError):
        validate_tree_certificate(broken, Plain(Fraction(1, 2)))
    bad_index = InteractionTree(1, tree.functions, tree.pool, {(): TreeNode(0, 0, 7)})
    with pytest.raises(MalformedTreeError):
        validate_tree_certificate(bad_index, Plain(Fraction(1, 2)))


def test_strict_and_region_kinds():
    tree = _depth1(Fraction(1, 2))
    assert validate_tree_certificate(tree, StrictEta(Fraction(1, 2), Fraction(1, 8)))
    with pytest.raises(InputError):
        StrictEta(Fraction(1, 2), Fraction(1, 2))
    assert validate_tree_certificate(tree, Region(Fraction(1, 2), {(): {0, 1}}))
    assert not validate_tree_certificate(tree, Region(Fraction(1, 2), {(): {0}}))
    with pytest.raises(MalformedTreeError):
        validate_tree_certificate(tree, Region(Fraction(1, 2), {}))


def test_certificate_json_round_trip():
    report = eps_dimension(thresholds(8), DistributionClass.dirac_all(8), Plain(Fraction(1, 4)))
    text = report.certificate.dumps()
    again = InteractionTree.from_json(json.loads(text))
    assert again.dumps() == text
    assert validate_tree_certificate(again, Plain(Fraction(1, 4)))
    with pytest.raises(MalformedTreeError):
        InteractionTree.from_json({"depth": 1})


def test_threshold_dimension_examples():
    order = chain(8)
    U = uniform_class(8)
    assert threshold_dimension(order, U, Fraction(1, 4)) == 4
    assert threshold_chain(order, U, Fraction(1, 4)) == [1, 3, 5, 7]
    assert threshold_dimension(order, U, Fraction(5, 4)) == 0
    assert threshold_dimension(order, DistributionClass.dirac_all(8), Fraction(1, 2)) == 8
    with pytest.raises(InputError):
        from cal.core import InstanceSpace

        threshold_dimension(InstanceSpace(3), uniform_class(3), Fraction(1, 2))


def _forest(rng, n):
    return [None] + [rng.randrange(x) if rng.random() < 0.85 else None for x in range(1, n)]


def test_threshold_dimension_matches_oracle(rng):
    from cal.core import InstanceSpace

    for _ in range(25):
        n = rng.randint(2, 8)
        parent = _forest(rng, n)
        order = InstanceSpace(n, parent)
        members = [random_distribution(rng, n) for _ in range(rng.randint(1, 2))]
        U = DistributionClass.explicit(members)
        for eps in (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)):
            expect = oracles.tdim_oracle(parent, lambda B: oracles.sup_mass_list(members, B), eps)
            assert threshold_dimension(order, U, eps) == expect


def test_threshold_dimension_monotone(rng):
    order = chain(10)
    for _ in range(10):
        U = DistributionClass.explicit([random_distribution(rng, 10)])
        values = [threshold_dimension(order, U, Fraction(1, 2**k)) for k in range(1, 5)]
        assert values == sorted(values)


def _intervals(order):
    seq = order.chain_sequence()
    for i in range(len(seq) + 1):
        for j in range(i, len(seq) + 1):
            yield seq[i:j]


def _check_witness(order, members, grid):
    U = DistributionClass.explicit(members)
    spec = threshold_witness_measure(order, U, grid)
    assert sum(spec.base.mass) == 1
    for I in _intervals(order):
        base = spec.base.of(I)
        for mu in members:
            assert mu.of(I) <= spec.rho(base)
    return spec


def test_witness_measure_uniform():
    order = chain(8)
    grid = [Fraction(1, 2), Fraction(1, 4)]
    spec = _check_witness(order, [Distribution.uniform(8)], grid)
    cuts = set().union(*map(set, threshold_cut_levels(order, uniform_class(8), grid)))
    assert {x for x in range(8) if spec.base.mass[x] > 0} == cuts
    assert spec.rho(0) == 0


def test_witness_measure_dirac():
    order = chain(6)
    spec = _check_witness(order, [Distribution.dirac(6, 0)], [Fraction(1, 2), Fraction(1, 4)])
    assert spec.base.mass[0] > 0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(3, 8), st.integers(1, 3))
def test_witness_measure_dominates_random_classes(seed, n, levels):
    rng = random.Random(seed)
    members = [random_distribution(rng, n) for _ in range(rng.randint(1, 3))]
    _check_witness(chain(n), members, [Fraction(1, 2**k) for k in range(1, levels + 1)])


def test_witness_measure_rejects_bad_grid():
    with pytest.raises(InputError):
        threshold_witness_measure(chain(4), uniform_class(4), [Fraction(1, 3)])


def test_vc1_bridge_on_small_chains(rng):
    for _ in range(6):
        n = rng.randint(3, 6)
        order = chain(n)
        F = tree_functions(order)
        U = DistributionClass.explicit([random_distribution(rng, n, zeros=False)])
        for eps in (Fraction(1, 4), Fraction(1, 8)):
            r = region_dimension(F, U, eps)
            low = threshold_dimension(order, U, 2 * eps)
            assert (low.bit_length() - 1 if low else 0) <= r <= threshold_dimension(order, U, eps / 8)


def test_node_pool_exactness_flags():
    F = thresholds(4)
    assert node_pool(DistributionClass.dirac_all(4), F)[1]
    assert not node_pool(DistributionClass.explicit([Distribution.uniform(4), Distribution.dirac(4, 0)]), F)[1]
    assert node_pool(uniform_class(4), F)[1]
