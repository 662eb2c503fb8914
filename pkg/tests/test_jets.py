"""Tests the truncated Taylor arithmetic of jets.py
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from equiloc import jets
from equiloc.errors import JetOrderError

import logging

logger = logging.getLogger(__name__)

POINTS = np.array([[0.3, -0.7], [1.1, 0.4], [-0.5, 0.9]])


def variables(points=POINTS):
    space = jets.jet_space(points.shape[1])
    return [jets.Jet.variable(space, points, i) for i in range(points.shape[1])]


def test_multi_index_layout():
    space = jets.jet_space(2)
    # 1 + 2 + 3 + 4 coefficients up to order 3
    assert space.size == 10
    assert space.multi_indices[0] == (0, 0)
    assert space.multi_indices[space.unit(0)] == (1, 0)
    assert space.multi_indices[space.unit(1)] == (0, 1)
    assert jets.jet_space(2) is space


def test_polynomial_partials():
    x, y = variables()
    f = x * x * y + 3 * y
    px, py = POINTS[:, 0], POINTS[:, 1]
    assert_allclose(f.value, px**2 * py + 3 * py)
    assert_allclose(f.partial((1, 0)), 2 * px * py)
    assert_allclose(f.partial((0, 1)), px**2 + 3)
    assert_allclose(f.partial((2, 0)), 2 * py)
    assert_allclose(f.partial((1, 1)), 2 * px)
    assert_allclose(f.partial((2, 1)), np.full(3, 2.0))
    assert_allclose(f.partial((3, 0)), np.zeros(3), atol=1e-14)


def test_elementary_functions_against_analytic_derivatives():
    x, y = variables()
    px, py = POINTS[:, 0], POINTS[:, 1]
    f = jets.sin(x * y)
    assert_allclose(f.partial((1, 0)), py * np.cos(px * py))
    assert_allclose(f.partial((0, 2)), -(px**2) * np.sin(px * py))
    g = jets.exp(2 * x)
    assert_allclose(g.partial((3, 0)), 8 * np.exp(2 * px))
    h = jets.cos(y)
    assert_allclose(h.partial((0, 3)), np.sin(py))


def test_inverse_functions():
    x, y = variables()
    f = 2 + x * x + jets.sin(y)
    assert_allclose(jets.log(jets.exp(f)).coeffs, f.coeffs, atol=1e-12)
    assert_allclose((jets.reciprocal(f) * f).coeffs, jets.Jet.constant(f.space, 3, 1.0).coeffs, atol=1e-12)
    assert_allclose((jets.sqrt(f) * jets.sqrt(f)).coeffs, f.coeffs, atol=1e-12)
    assert_allclose((f**-2 * f * f).coeffs, jets.Jet.constant(f.space, 3, 1.0).coeffs, atol=1e-12)


def test_finite_differences():
    """First and second derivatives of a composite function against central differences."""

    def function(p):
        x, y = p[:, 0], p[:, 1]
        return np.exp(np.sin(x)) * np.cos(y) / (2 + x**2)

    x, y = variables()
    f = jets.exp(jets.sin(x)) * jets.cos(y) / (2 + x * x)
    assert_allclose(f.value, function(POINTS))
    h = 1e-5
    for axis, alpha in ((0, (1, 0)), (1, (0, 1))):
        step = np.zeros(2)
        step[axis] = h
        numeric = (function(POINTS + step) - function(POINTS - step)) / (2 * h)
        assert_allclose(f.partial(alpha).real, numeric, rtol=1e-7, atol=1e-9)
    h = 1e-4
    step = np.array([h, 0.0])
    numeric = (function(POINTS + step) - 2 * function(POINTS) + function(POINTS - step)) / h**2
    assert_allclose(f.partial((2, 0)).real, numeric, rtol=1e-5, atol=1e-6)


def test_derivative_lowers_order():
    x, y = variables()
    f = x * x * x * y
    df = f.derivative(0)
    assert df.order == jets.ORDER - 1
    assert_allclose(df.value, 3 * POINTS[:, 0] ** 2 * POINTS[:, 1])
    assert_allclose(df.derivative(1).value, 3 * POINTS[:, 0] ** 2)
    third = f.derivative(0).derivative(0).derivative(1)
    assert third.order == 0
    assert_allclose(third.value, 6 * POINTS[:, 0])
    with pytest.raises(JetOrderError):
        third.derivative(0)
    with pytest.raises(JetOrderError):
        df.partial((2, 1))


def test_numpy_scalars_defer_to_jets():
    x, _ = variables()
    product = np.float64(2.0) * x
    assert isinstance(product, jets.Jet)
    assert_allclose(product.value, 2 * POINTS[:, 0])
    assert isinstance(np.float64(1.0) - x, jets.Jet)


def test_complex_coefficients():
    x, _ = variables()
    f = jets.exp(1j * x)
    assert_allclose(f.value, np.exp(1j * POINTS[:, 0]))
    assert_allclose(f.partial((1, 0)), 1j * np.exp(1j * POINTS[:, 0]))


if __name__ == "__main__":
    """
    Tests the jet arithmetic
    """

    # introspect and run all the functions starting with 'test'
    for f in dir():
        if f.startswith("test"):
            print(f)
            globals()[f]()
