import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from census_lab.census import max_complexity
from census_lab.errors import CapExceeded, DomainError
from census_lab.walk import (
    Placement, a1, a3_exact, brute_force_joint, esc_right_probability, mstar_distribution,
    mstar_mean, prob_tree_exact, survival_probability, verify_identity, walk_from_counts,
)
from conftest import TILTS

HALF = Fraction(1, 2)


def test_walk_examples():
    w = walk_from_counts((2, 0, 0))
    assert w.Y == (1, 2, 1, 0) and w.tree and w.m_stat == 1
    for k in (2, 5, 9):
        w = walk_from_counts([1] * (k - 1) + [0])
        assert all(y == 1 for y in w.Y[:k]) and w.tree and w.m_stat == 0
    w = walk_from_counts((0, 2, 0))
    assert w.Y[1] == 0 and not w.tree
    with pytest.raises(DomainError):
        walk_from_counts((1, 1, 1))


@pytest.mark.parametrize("k", range(1, 7))
def test_excess_identity_exhaustive(k):
    for T in itertools.product(range(1, k + 1), repeat=k - 1):
        pl = Placement.from_T(k, T)
        w = walk_from_counts(pl.Z)
        assert w.Y[-1] == 0
        assert math.comb(k, 2) - sum(T) == sum(y - 1 for y in w.Y[1:k]) == w.m_stat
        assert w.tree == all(y > 0 for y in w.Y[1:k])


def test_prob_tree_examples():
    assert prob_tree_exact(3, HALF) == Fraction(32, 49)
    assert prob_tree_exact(2, HALF) == Fraction(2, 3)
    for k in (2, 6, 40):
        assert prob_tree_exact(k, 1) == 1
    assert brute_force_joint(2, Fraction(1, 3))[0] == Fraction(3, 5)


def test_mstar_examples():
    d = mstar_distribution(3, HALF)
    assert d.mass == {0: HALF, 1: HALF} and d.prob_tree == Fraction(32, 49)
    for p in TILTS:
        assert mstar_distribution(2, p).mass == {0: 1}


@pytest.mark.parametrize("k", range(2, 7))
@pytest.mark.parametrize("p", TILTS)
def test_dp_matches_oracle(k, p):
    prob, oracle = brute_force_joint(k, p)
    dist = mstar_distribution(k, p)
    assert prob_tree_exact(k, p) == prob == dist.prob_tree
    assert dist.mass == oracle.mass
    float_prob = prob_tree_exact(k, float(p))
    assert abs(float_prob - float(prob)) < 1e-12
    float_dist = mstar_distribution(k, float(p))
    assert all(abs(float_dist.mass[m] - float(w)) < 1e-12 for m, w in dist.mass.items())


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 18), st.builds(Fraction, st.integers(1, 30), st.just(31)))
def test_mstar_law_invariants(k, p):
    dist = mstar_distribution(k, p)
    assert sum(dist.mass.values()) == 1
    lo, hi = dist.support()
    assert 0 <= lo and hi <= math.comb(k, 2) - (k - 1)
    assert 0 < dist.prob_tree <= 1
    assert dist.prob_tree == prob_tree_exact(k, p)
    assert sum(a3_exact(dist, l) for l in range(hi + 1)) == 1


def test_factor_examples():
    d = mstar_distribution(3, HALF)
    assert a1(3, HALF) == Fraction(49, 64)
    assert a3_exact(d, 0) == Fraction(3, 4)
    assert a3_exact(d, 1) == Fraction(1, 4)
    assert a3_exact(d, 2) == 0


def test_identity_examples():
    r = verify_identity(3, 0, HALF)
    assert r.lhs == r.rhs == Fraction(3, 8) and r.equal
    r = verify_identity(3, 1, HALF)
    assert r.lhs == r.rhs == Fraction(1, 8) and r.equal
    for p in (Fraction(1, 7), HALF, Fraction(5, 6), Fraction(1)):
        r = verify_identity(2, 0, p)
        assert r.lhs == r.rhs == p and r.equal


@pytest.mark.parametrize("p", TILTS)
def test_identity_suite(p):
    failures = []
    for k in range(2, 11):
        dist = mstar_distribution(k, p)
        for l in range(max_complexity(k) + 1):
            if not verify_identity(k, l, p, dist=dist).equal:
                failures.append((k, l))
    assert failures == []


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 12), st.builds(Fraction, st.integers(1, 12), st.just(13)), st.data())
def test_identity_random_tilts(k, p, data):
    l = data.draw(st.integers(0, max_complexity(k)))
    assert verify_identity(k, l, p).equal


def test_identity_domain():
    with pytest.raises(DomainError):
        verify_identity(4, 4, HALF)
    with pytest.raises(DomainError):
        verify_identity(1, 0, HALF)


def test_caps():
    with pytest.raises(CapExceeded):
        brute_force_joint(8, HALF)
    with pytest.raises(CapExceeded):
        mstar_distribution(31, HALF)


def test_exact_and_float_tree_agree():
    p = Fraction(1, 25)
    assert abs(prob_tree_exact(50, float(p)) - float(prob_tree_exact(50, p))) < 1e-12


def test_mstar_mean_matches_law():
    for k, p in [(6, 0.3), (12, 0.2), (25, 0.08)]:
        assert math.isclose(mstar_mean(k, p), mstar_distribution(k, p).mean(), rel_tol=1e-10)


def test_prob_tree_large_limit_trend():
    target = 1 - 3 * math.exp(-2)
    errs = [abs(prob_tree_exact(k, 2 / k) - target) for k in (100, 200, 400)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[-1] < 0.05


def test_survival_probability():
    assert survival_probability(1.0) == 0.0
    assert survival_probability(0.5) == 0.0
    y = survival_probability(2.0)
    assert abs(y - 0.7968) < 1e-4
    assert abs(math.exp(-2 * y) - (1 - y)) <= 1e-12
    eps = 1e-3
    assert abs(survival_probability(1 + eps) / (2 * eps) - 1) < 0.01
    with pytest.raises(DomainError):
        survival_probability(0)


@given(st.floats(1e-3, 3.0))
def test_survival_bounds(eps):
    y = survival_probability(1 + eps)
    assert 0 < y < 1
    assert y <= 2 * eps
    assert abs(-math.expm1(-(1 + eps) * y) - y) <= 1e-12


@given(st.floats(1e-6, 1 - 1e-6))
def test_esc_right_probability(eps):
    assert esc_right_probability(eps) == eps


def test_esc_right_examples():
    assert esc_right_probability(0.2) == 0.2
    assert esc_right_probability(0.5) == 0.5
    for bad in (0, 1, -0.1):
        with pytest.raises(DomainError):
            esc_right_probability(bad)
