import math

import numpy as np
import pytest

from cdpa_lab.behavioral.activations import morlet, morlet_deriv, normalize_hidden, sigmoid, sigmoid_deriv


def test_sigmoid_values():
    """Symmetry point and a saturated value"""
    assert sigmoid(0.0) == 0.5
    assert sigmoid(10.0) == pytest.approx(0.9999546, abs=1e-7)


def test_sigmoid_identities():
    """f(x) + f(-x) = 1 and f' = f(1 - f) at random points"""
    x = np.random.default_rng(3).normal(scale=5.0, size=100)
    np.testing.assert_allclose(sigmoid(x) + sigmoid(-x), 1.0, atol=1e-12)
    np.testing.assert_allclose(sigmoid_deriv(x), sigmoid(x) * (1 - sigmoid(x)), atol=1e-12)


def test_morlet_values():
    """Unit peak at the origin; cos(1.75) exp(-1/2) at z=1"""
    assert morlet(0.0) == 1.0
    assert morlet(1.0) == pytest.approx(math.cos(1.75) * math.exp(-0.5), abs=1e-12)
    assert morlet(1.0) == pytest.approx(-0.1081, abs=1e-3)


def test_morlet_parity_and_bound():
    """Morlet is even and bounded by 1; its derivative is odd"""
    z = np.linspace(-6, 6, 241)
    np.testing.assert_allclose(morlet(z), morlet(-z), atol=1e-15)
    np.testing.assert_allclose(morlet_deriv(z), -morlet_deriv(-z), atol=1e-15)
    assert np.all(np.abs(morlet(z)) <= 1.0)
    assert morlet_deriv(0.0) == 0.0


def test_morlet_deriv_matches_finite_difference():
    """Central difference with h=1e-5 agrees within 1e-6"""
    z = np.linspace(-4, 4, 81)
    h = 1e-5
    numeric = (morlet(z + h) - morlet(z - h)) / (2 * h)
    np.testing.assert_allclose(morlet_deriv(z), numeric, atol=1e-6)


def test_normalize_hidden_examples():
    """Scale by max |z|; zero vector passes through"""
    np.testing.assert_array_equal(normalize_hidden(np.array([2.0, -4.0, 1.0])), [0.5, -1.0, 0.25])
    np.testing.assert_array_equal(normalize_hidden(np.zeros(2)), [0.0, 0.0])


def test_normalize_hidden_properties():
    """Max |z| is exactly 1 and the operation is idempotent"""
    rng = np.random.default_rng(11)
    for _ in range(20):
        v = rng.normal(scale=rng.uniform(0.01, 100), size=7)
        once = normalize_hidden(v)
        assert np.max(np.abs(once)) == 1.0
        np.testing.assert_array_equal(normalize_hidden(once), once)
