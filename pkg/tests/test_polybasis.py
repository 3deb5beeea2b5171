"""Scaled monomial bases and quadrature rules."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rdahelm.polybasis import (MAX_EXACTNESS, PolySpec, UnsupportedOrderError,
                               dim_pm, eval_scaled_monomials, map_to_segment,
                               map_to_triangle, monomial_exponents,
                               segment_quadrature, triangle_quadrature)


def reference_triangle_integral(a, b):
    """Exact integral of x^a y^b over the unit reference triangle."""
    return math.factorial(a) * math.factorial(b) / math.factorial(a + b + 2)


@pytest.mark.parametrize("m,expect", [(0, 1), (1, 3), (2, 6), (4, 15),
                                      (6, 28)])
def test_dim_pm(m, expect):
    assert dim_pm(m) == expect


def test_monomial_exponents_graded():
    expo = monomial_exponents(3)
    assert len(expo) == dim_pm(3)
    assert tuple(expo[0]) == (0, 0)
    degrees = [a + b for a, b in expo]
    assert degrees == sorted(degrees)
    assert len(set(map(tuple, expo))) == len(expo)


def test_values_at_center():
    spec = PolySpec(3, np.array([0.4, -0.2]), 0.7)
    vals, _ = eval_scaled_monomials(spec.center, spec)
    expect = np.zeros(spec.dim)
    expect[0] = 1.0
    assert np.allclose(vals, expect, atol=1e-15)


def test_linear_basis_values():
    spec = PolySpec(1, np.array([0.0, 0.0]), 1.0)
    vals, _ = eval_scaled_monomials(np.array([2.0, 3.0]), spec)
    assert np.allclose(vals, [1.0, 2.0, 3.0])


@settings(max_examples=20, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1))
def test_gradients_match_finite_differences(x, y):
    spec = PolySpec(3, np.array([0.1, -0.3]), 0.8)
    p = np.array([x, y])
    _, grad = eval_scaled_monomials(p, spec)
    step = 1e-5
    for d in range(2):
        e = np.zeros(2)
        e[d] = step
        vp, _ = eval_scaled_monomials(p + e, spec)
        vm, _ = eval_scaled_monomials(p - e, spec)
        assert np.max(np.abs(grad[:, d] - (vp - vm) / (2 * step))) < 1e-6


@settings(max_examples=20, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2))
def test_scale_covariance(x, y):
    c, L = np.array([0.5, -1.0]), 2.5
    scaled = PolySpec(2, c, L)
    unit = PolySpec(2, np.zeros(2), 1.0)
    p = np.array([x, y])
    v1, _ = eval_scaled_monomials(p, scaled)
    v2, _ = eval_scaled_monomials((p - c) / L, unit)
    assert np.allclose(v1, v2, atol=1e-13)


@pytest.mark.parametrize("exactness", [1, 3, 5, 8, 14])
def test_triangle_rule_exactness(exactness):
    rule = triangle_quadrature(exactness)
    assert np.all(rule.weights > 0.0)
    assert abs(rule.weights.sum() - 0.5) < 1e-12
    pts = np.atleast_2d(rule.points)
    for a in range(exactness + 1):
        for b in range(exactness + 1 - a):
            got = float(rule.weights @ (pts[:, 0] ** a * pts[:, 1] ** b))
            assert abs(got - reference_triangle_integral(a, b)) < 1e-12


def test_triangle_rule_linear_example():
    rule = triangle_quadrature(2)
    pts = np.atleast_2d(rule.points)
    assert abs(rule.weights @ pts[:, 0] - 1.0 / 6.0) < 1e-13


def test_triangle_rule_x2y3_example():
    rule = triangle_quadrature(5)
    pts = np.atleast_2d(rule.points)
    got = float(rule.weights @ (pts[:, 0] ** 2 * pts[:, 1] ** 3))
    assert abs(got - reference_triangle_integral(2, 3)) < 1e-12


@pytest.mark.parametrize("exactness", [1, 3, 7, 14])
def test_segment_rule_exactness(exactness):
    rule = segment_quadrature(exactness)
    assert np.all(rule.weights > 0.0)
    assert abs(rule.weights.sum() - 1.0) < 1e-13
    pts = np.ravel(rule.points)
    for p in range(exactness + 1):
        assert abs(rule.weights @ pts ** p - 1.0 / (p + 1)) < 1e-13
    # Gauss-Legendre nodes are symmetric about the midpoint
    assert np.allclose(np.sort(pts) + np.sort(pts)[::-1], 1.0, atol=1e-13)


def test_segment_rule_midpoint():
    rule = segment_quadrature(1)
    assert np.allclose(np.ravel(rule.points), [0.5])
    assert np.allclose(rule.weights, [1.0])


def test_unsupported_exactness():
    with pytest.raises(UnsupportedOrderError):
        triangle_quadrature(MAX_EXACTNESS + 1)
    with pytest.raises(UnsupportedOrderError):
        segment_quadrature(MAX_EXACTNESS + 1)


def test_map_to_triangle_area_and_moments():
    rule = triangle_quadrature(4)
    p0 = np.array([1.0, 1.0])
    p1 = np.array([3.0, 1.0])
    p2 = np.array([1.0, 3.0])
    pts, w = map_to_triangle(rule, p0, p1, p2)
    assert abs(w.sum() - 2.0) < 1e-12           # triangle area
    # centroid of the mapped triangle
    assert np.allclose(w @ pts / w.sum(), [5.0 / 3.0, 5.0 / 3.0], atol=1e-12)


def test_map_to_segment():
    rule = segment_quadrature(3)
    a, b = np.array([0.0, 1.0]), np.array([0.0, 4.0])
    pts, w = map_to_segment(rule, a, b)
    assert abs(w.sum() - 3.0) < 1e-13           # segment length
    assert np.all((pts[:, 1] > 1.0) & (pts[:, 1] < 4.0))
    assert np.allclose(pts[:, 0], 0.0, atol=1e-14)
