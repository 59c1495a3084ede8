from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from avoidant.poly import (Polynomial, derivative_sup_bound, eval_scale, evaluate, from_roots,
                           local_variation_bound, roots, sup_on, taylor_coefficients)


def naive(coeffs, z):
    return sum(complex(c) * z**k for k, c in enumerate(coeffs))


def test_trailing_zeros_are_trimmed():
    p = Polynomial([1, 2, 0, 0])
    assert p.degree == 1
    assert Polynomial([0, 0]).degree == 0
    assert Polynomial([1, 1, 1e-20]).degree == 1


def test_degree_and_leading():
    p = Polynomial([3, 0, 2j])
    assert p.degree == 2
    assert p.leading == 2j


def test_evaluate_matches_monomial_sum():
    rng = np.random.default_rng(0)
    c = rng.normal(size=7) + 1j * rng.normal(size=7)
    p = Polynomial(c)
    for z in rng.normal(size=20) + 1j * rng.normal(size=20):
        assert abs(p(z) - naive(c, z)) <= 1e-12 * eval_scale(p, z)


def test_evaluate_vectorized_shape():
    p = Polynomial([1, 1])
    z = np.zeros((3, 4), dtype=complex)
    assert evaluate(p, z).shape == (3, 4)
    assert isinstance(p(2.0), complex)


def test_arithmetic_matches_numpy():
    a = Polynomial([1, 2j, 3])
    b = Polynomial([-1, 1])
    np.testing.assert_allclose((a * b).coeffs, np.polynomial.polynomial.polymul(a.coeffs, b.coeffs))
    np.testing.assert_allclose((a + b).coeffs, [0, 1 + 2j, 3])
    np.testing.assert_allclose((a - a).coeffs, [0])
    assert (a - a).is_zero()
    np.testing.assert_allclose((-b).coeffs, [1, -1])


def test_derivative_matches_numpy():
    c = [1, 2, 3, 4j]
    np.testing.assert_allclose(Polynomial(c).derivative().coeffs, np.polynomial.polynomial.polyder(c))
    assert Polynomial([5]).derivative().coeffs.tolist() == [0]


def test_json_round_trip():
    p = Polynomial([1 + 2j, -3, 0.5j])
    assert Polynomial.from_json(p.to_json()) == p


def test_coefficients_are_read_only():
    p = Polynomial([1, 2])
    with pytest.raises(ValueError):
        p.coeffs[0] = 5


def test_roots_of_quadratic():
    r = sorted(roots(Polynomial([1, 0, 1])).roots, key=lambda z: z.imag)
    assert abs(r[0] + 1j) < 1e-12 and abs(r[1] - 1j) < 1e-12


def test_triple_root_recovered():
    p = from_roots(1, [1 + 1j] * 3)
    fact = roots(p)
    assert all(abs(z - (1 + 1j)) < 1e-7 for z in fact.roots)
    assert fact.multiplicities() == [(pytest.approx(1 + 1j), 3)]


def test_roots_need_positive_degree():
    with pytest.raises(ValueError):
        roots(Polynomial([4]))


def test_roots_agree_with_numpy_companion():
    rng = np.random.default_rng(1)
    for _ in range(20):
        c = rng.normal(size=9) + 1j * rng.normal(size=9)
        ours = np.sort_complex(np.array(roots(Polynomial(c)).roots))
        ref = np.sort_complex(np.roots(c[::-1]))
        np.testing.assert_allclose(ours, ref, atol=1e-8)


def test_from_roots_expands_product():
    p = from_roots(2, [1, -1])
    np.testing.assert_allclose(p.coeffs, [-2, 0, 2])
    assert from_roots(3, []).coeffs.tolist() == [3]


def test_sup_on_and_derivative_bound():
    circle = np.exp(2j * np.pi * np.arange(64) / 64)
    z2 = Polynomial([0, 0, 1])
    assert sup_on(z2, circle) == pytest.approx(1.0)
    assert derivative_sup_bound(z2, circle) == pytest.approx(1.05 * 2)
    with pytest.raises(ValueError):
        sup_on(z2, [])


def test_taylor_coefficients_match_binomial_expansion():
    c = np.array([1, -2, 3j, 0.5])
    b = 0.3 - 0.7j
    t = taylor_coefficients(Polynomial(c), [b])[0]
    expect = [sum(c[n] * math.comb(n, k) * b ** (n - k) for n in range(k, len(c))) for k in range(len(c))]
    np.testing.assert_allclose(t, expect, atol=1e-14)


def test_local_variation_bound_is_an_upper_bound():
    rng = np.random.default_rng(2)
    p = Polynomial(rng.normal(size=6) + 1j * rng.normal(size=6))
    centers = rng.normal(size=10) + 1j * rng.normal(size=10)
    rho = 0.1
    bound = local_variation_bound(p, centers, rho)
    for b, lim in zip(centers, bound):
        w = b + rho * np.sqrt(rng.uniform(size=200)) * np.exp(2j * np.pi * rng.uniform(size=200))
        assert np.max(np.abs(p(w) - p(b))) <= lim * (1 + 1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(-2, 2), st.floats(-2, 2)), min_size=1, max_size=10),
       st.floats(0.5, 3))
def test_round_trip_property(pairs, lead):
    zs = [complex(x, y) for x, y in pairs]
    p = from_roots(lead, zs)
    q = roots(p).polynomial()
    scale = float(np.abs(p.coeffs).sum())
    assert np.max(np.abs(q.coeffs - p.coeffs)) <= 1e-7 * scale


def test_round_trip_recovers_separated_roots():
    rng = np.random.default_rng(3)
    for _ in range(50):
        m = int(rng.integers(1, 13))
        zs = np.exp(2j * np.pi * (np.arange(m) + rng.uniform(0, 0.3, m)) / m) * rng.uniform(0.5, 2)
        got = np.array(roots(from_roots(1, zs)).roots)
        d = np.abs(got[:, None] - zs[None, :]).min(axis=0)
        assert d.max() < 1e-7


def test_unit_root_of_unity_phases():
    fact = roots(Polynomial([-1, 0, 0, 0, 0, 1]))
    for z in fact.roots:
        assert abs(abs(z) - 1) < 1e-12
        k = cmath.phase(z) / (2 * math.pi / 5)
        assert abs(k - round(k)) < 1e-10
