"""Tests for src/numerics/quadrature.py: exactness, symmetry and order validation."""

import math

import numpy as np
import pytest

from src.numerics import quadrature
from src.numerics.quadrature import RuleKind


def test_single_node_hermite_rule():
    rule = quadrature.gauss_hermite(1)
    assert rule.nodes.tolist() == [0.0]
    assert rule.weights[0] == pytest.approx(math.sqrt(math.pi), rel=1e-14)


def test_two_node_legendre_rule_is_plus_minus_one_over_root_three():
    rule = quadrature.gauss_legendre(2)
    np.testing.assert_allclose(rule.nodes, [-1 / math.sqrt(3), 1 / math.sqrt(3)], rtol=1e-14)
    np.testing.assert_allclose(rule.weights, [1.0, 1.0], rtol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 7, 30, 300, 1000])
def test_weights_sum_to_the_weight_function_mass(n):
    assert quadrature.gauss_hermite(n).weights.sum() == pytest.approx(math.sqrt(math.pi), rel=1e-10)
    assert quadrature.gauss_legendre(n).weights.sum() == pytest.approx(2.0, rel=1e-10)


def test_hermite_rule_integrates_even_monomials_exactly():
    n = 10
    rule = quadrature.gauss_hermite(n)
    for k in range(n):
        # integral of x^(2k) exp(-x^2) over the real line is Gamma(k + 1/2)
        assert rule.weights @ rule.nodes ** (2 * k) == pytest.approx(math.gamma(k + 0.5), rel=1e-10)
        odd = rule.weights @ rule.nodes ** (2 * k + 1)
        assert odd == pytest.approx(0.0, abs=1e-10 * math.gamma(k + 1.5))


def test_legendre_rule_integrates_polynomials_up_to_degree_2n_minus_1():
    n = 5
    rule = quadrature.gauss_legendre(n)
    for degree in range(2 * n):
        exact = 0.0 if degree % 2 else 2.0 / (degree + 1)
        assert rule.weights @ rule.nodes**degree == pytest.approx(exact, abs=1e-14)


@pytest.mark.parametrize("kind", list(RuleKind))
@pytest.mark.parametrize("n", [1, 4, 5, 110, 301])
def test_rules_are_sorted_and_exactly_symmetric(kind, n):
    rule = quadrature.rule(kind, n)
    assert len(rule) == n
    assert np.all(np.diff(rule.nodes) > 0)
    assert np.array_equal(rule.nodes, -rule.nodes[::-1])
    assert np.array_equal(rule.weights, rule.weights[::-1])
    if n % 2:
        assert rule.nodes[n // 2] == 0.0


def test_high_order_hermite_weights_are_non_negative_and_finite():
    rule = quadrature.gauss_hermite(2000)
    assert np.all(np.isfinite(rule.weights))
    assert np.all(rule.weights >= 0)
    assert np.all(np.isfinite(rule.nodes))


def test_rules_are_cached_and_read_only():
    rule = quadrature.gauss_hermite(30)
    assert quadrature.gauss_hermite(30) is rule
    with pytest.raises(ValueError):
        rule.nodes[0] = 1.0


def test_iterating_a_rule_yields_node_weight_pairs():
    pairs = list(quadrature.gauss_legendre(3))
    assert len(pairs) == 3
    assert pairs[1][0] == 0.0
    assert pairs[1][1] == pytest.approx(8 / 9, rel=1e-14)


def test_rule_accepts_kind_names():
    assert quadrature.rule("legendre", 3).kind is RuleKind.LEGENDRE
    with pytest.raises(ValueError):
        quadrature.rule("laguerre", 3)


@pytest.mark.parametrize("n", [0, -3, 2001, 2.5, True, "10"])
def test_unsupported_orders_are_rejected(n):
    with pytest.raises(ValueError):
        quadrature.gauss_hermite(n)
    with pytest.raises(ValueError):
        quadrature.gauss_legendre(n)
