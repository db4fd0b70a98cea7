import math

import pytest
from hypothesis import given, settings, strategies as st

from census_lab.asymptotics import (
    compare_table, large_closed_form, log_asymptotic, log_asymptotic_large,
    log_asymptotic_small, log_asymptotic_verylarge, log_binomial, log_cayley, parse_l_rule,
)
from census_lab.census import binomial, count_connected, max_complexity
from census_lab.errors import CapExceeded, DomainError
from census_lab.tilt import f1, solve_c


def rel_error(k, l, value):
    exact = math.log(count_connected(k, l))
    return abs(value - exact) / exact


def components_ok(est):
    return math.isclose(math.fsum(est.components.values()), est.log_value, rel_tol=1e-9)


def test_small_formula_components():
    est = log_asymptotic_small(10 ** 4, 10)
    assert math.isfinite(est.log_value) and components_ok(est)
    assert est.warning is None
    assert log_asymptotic_small(100, 10).warning is not None
    with pytest.raises(DomainError):
        log_asymptotic_small(100, 0)


def test_small_formula_value():
    k, l = 500, 3
    expected = ((k - 2) * math.log(k) + 1.5 * l * math.log(k) + 0.5 * l * (1 - math.log(12 * l))
                + math.log(3) - 0.5 * math.log(math.pi) + 0.5 * math.log(l))
    assert log_asymptotic_small(k, l).log_value == pytest.approx(expected, rel=1e-12)


def test_tree_fallback_is_cayley():
    for k in (2, 5, 40):
        assert log_asymptotic(k, 0).log_value == log_cayley(k) == pytest.approx(
            math.log(k ** (k - 2)))


def test_small_error_improves():
    assert rel_error(80, 5, log_asymptotic_small(80, 5).log_value) < rel_error(
        40, 3, log_asymptotic_small(40, 3).log_value)


def test_large_route_b_improves():
    errs = [rel_error(k, k, log_asymptotic_large(k, k).log_value) for k in (30, 60)]
    assert errs[1] < errs[0]


def test_large_components_and_a2():
    est = log_asymptotic_large(1000, 1000)
    assert components_ok(est)
    assert est.regime.c_or_beta == solve_c(1)
    assert abs(f1(solve_c(1)) - 1) <= 1e-9
    # the A2 factor at c = 2 is Pr[TREE] in the linear regime
    k = 500
    c = solve_c(f1(2.0))
    assert c == pytest.approx(2.0, rel=1e-9)
    est = log_asymptotic_large(k, round(f1(2.0) * k))
    assert math.exp(est.components["log_A2"]) == pytest.approx(
        1 - (est.regime.c_or_beta + 1) * math.exp(-est.regime.c_or_beta))
    assert 1 - 3 * math.exp(-2) == pytest.approx(1 - (c + 1) * math.exp(-c), rel=1e-9)


@pytest.mark.parametrize("k", [1000, 10 ** 4, 10 ** 5])
def test_routes_agree(k):
    est = log_asymptotic_large(k, k)
    a = est.alternatives["closed_form"]
    assert abs(a - est.log_value) / abs(est.log_value) < 1e-6
    assert a == large_closed_form(k, k)


def test_verylarge_formula():
    k = 30
    top = max_complexity(k)
    assert log_asymptotic_verylarge(k, top).log_value == 0.0
    l = math.floor(0.6 * k * math.log(k))
    assert l == 61
    ratio = count_connected(k, l) / binomial(math.comb(k, 2), k + l - 1)
    assert 0.5 < ratio <= 1
    est = log_asymptotic_verylarge(k, l)
    assert est.log_value == pytest.approx(math.log(binomial(math.comb(k, 2), k + l - 1)))


def test_log_binomial_modes():
    assert log_binomial(10, 3) == pytest.approx(math.log(120))
    assert log_binomial(5, 7) == -math.inf
    n = 10 ** 7
    assert log_binomial(n, 3) == pytest.approx(math.log(math.comb(n, 3)), rel=1e-12)


def test_no_overflow_at_a_million():
    k = 10 ** 6
    for l in (10, 2 * 10 ** 5 + 1, k, 3 * k, 10 * k):
        est = log_asymptotic(k, l)
        assert math.isfinite(est.log_value) and components_ok(est)


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 10 ** 6), st.data())
def test_components_sum(k, data):
    l = data.draw(st.integers(1, max(1, min(max_complexity(k), int(k * math.log(k))))))
    est = log_asymptotic(k, l)
    assert components_ok(est)


def test_dispatch():
    assert log_asymptotic(10 ** 6, 100).regime.name == "small"
    assert log_asymptotic(1000, 1000).regime.name == "large"
    assert log_asymptotic(1000, 5000).regime.name == "very_large"
    out = log_asymptotic(100, 1000)
    assert out.regime.name == "out_of_range" and out.warning


def test_l_rules():
    assert parse_l_rule("const:3")(50) == 3
    assert parse_l_rule("pow:0.4")(80) == 5
    assert parse_l_rule("lin:1.5")(10) == 15
    assert parse_l_rule("nlogn:0.6")(30) == 61
    for bad in ("pow", "cube:2", "lin:x"):
        with pytest.raises(DomainError):
            parse_l_rule(bad)


def test_compare_table():
    rows = compare_table([20, 40, 80], "pow:0.4")
    assert [r.l for r in rows] == [3, 4, 5]
    errs = [r.rel_log_error for r in rows]
    assert errs[0] > errs[1] > errs[2]
    assert all(r.log_exact > 0 and r.regime == "small" for r in rows)
    assert compare_table([], "pow:0.4") == []
    zero = compare_table([5, 9], "const:0")
    assert all(r.rel_log_error == 0 and r.log_exact == r.log_asymptotic for r in zero)


def test_compare_table_caps(monkeypatch):
    monkeypatch.setenv("CENSUS_LAB_CAPS", '{"census_vertices": 20}')
    with pytest.raises(CapExceeded):
        compare_table([30], "const:2")
