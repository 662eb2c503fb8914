"""Tests the exterior algebra of forms_engine.py
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from equiloc.errors import ChartMismatchError, ScenarioSchemaError
from equiloc.forms_engine import (
    ComplexVectorField,
    MixedForm,
    Sample,
    ScalarField,
    commutator_residual,
    exp_form,
    exterior_derivative,
    interior_product,
    lie_bracket,
    lie_derivative,
    random_mixed_form,
    wedge,
)
from equiloc.geometry import Chart

import logging

logger = logging.getLogger(__name__)

PLANE = Chart("plane", ["x", "y"], [-1, -1], [1, 1])
SPACE = Chart("space", ["x", "y", "z"], [-1, -1, -1], [1, 1, 1])


def assert_forms_close(a, b, sample, atol=1e-10):
    assert (a - b).max_norm(sample) <= atol


def test_wedge_signs():
    dx = MixedForm.differential(PLANE, 0)
    dy = MixedForm.differential(PLANE, 1)
    sample = Sample.random(PLANE, count=5)
    assert_forms_close(wedge(dx, dy), -wedge(dy, dx), sample)
    assert not wedge(dx, dx).components
    assert_allclose(wedge(dy, dx).coefficient((0, 1)).values(sample), -np.ones(5))
    dz = MixedForm.differential(SPACE, 2)
    dx3 = MixedForm.differential(SPACE, 0)
    dy3 = MixedForm.differential(SPACE, 1)
    # dz ^ dx ^ dy is an even permutation of dx ^ dy ^ dz
    assert_allclose(wedge(dz, wedge(dx3, dy3)).top().values(Sample.random(SPACE, count=3)), np.ones(3))


def test_wedge_of_one_forms_in_four_dimensions():
    chart = Chart("four", ["a", "b", "c", "d"], [-1] * 4, [1] * 4)
    rng = np.random.default_rng(5)
    alpha = random_mixed_form(chart, rng, degrees=[1])
    beta = random_mixed_form(chart, rng, degrees=[1])
    sample = Sample.random(chart, count=20)
    product = wedge(alpha, beta)
    assert (product + wedge(beta, alpha)).max_norm(sample) < 1e-12

    a = np.stack([alpha.coefficient((i,)).values(sample) for i in range(4)], axis=-1)
    b = np.stack([beta.coefficient((i,)).values(sample) for i in range(4)], axis=-1)
    dense = a[:, :, None] * b[:, None, :] - a[:, None, :] * b[:, :, None]
    for i in range(4):
        for j in range(i + 1, 4):
            assert_allclose(product.coefficient((i, j)).values(sample), dense[:, i, j], rtol=1e-12, atol=1e-12)


def test_d_squared_vanishes():
    rng = np.random.default_rng(1)
    form = random_mixed_form(SPACE, rng)
    sample = Sample.random(SPACE, count=20)
    assert exterior_derivative(exterior_derivative(form)).max_norm(sample) < 1e-10


def test_leibniz_rule():
    rng = np.random.default_rng(2)
    a = random_mixed_form(SPACE, rng, degrees=[1])
    b = random_mixed_form(SPACE, rng)
    sample = Sample.random(SPACE, count=20)
    left = exterior_derivative(wedge(a, b))
    right = wedge(exterior_derivative(a), b) - wedge(a, exterior_derivative(b))
    assert_forms_close(left, right, sample, atol=1e-9)


def test_interior_product():
    x = ScalarField.coordinate(PLANE, 0)
    y = ScalarField.coordinate(PLANE, 1)
    field = ComplexVectorField(PLANE, [-y, x])
    area = MixedForm(PLANE, {(0, 1): 1.0})
    contracted = interior_product(field, area)
    sample = Sample.random(PLANE, count=7)
    # i_V (dx ^ dy) = V^x dy - V^y dx
    assert_allclose(contracted.coefficient((1,)).values(sample), -sample.points[:, 1])
    assert_allclose(contracted.coefficient((0,)).values(sample), -sample.points[:, 0])
    rng = np.random.default_rng(3)
    form = random_mixed_form(PLANE, rng)
    assert interior_product(field, interior_product(field, form)).max_norm(sample) < 1e-12


def test_lie_derivative_of_function_is_directional_derivative():
    rng = np.random.default_rng(4)
    f = random_mixed_form(SPACE, rng, degrees=[0])
    z = ScalarField.coordinate(SPACE, 2)
    field = ComplexVectorField(SPACE, [z, 1.0, 0.0], [0.0, 0.0, 2.0])
    sample = Sample.random(SPACE, count=10)
    expected = field.apply_to(f.scalar_part())
    assert_allclose(lie_derivative(field, f).scalar_part().values(sample), expected.values(sample), atol=1e-12)


def test_lie_derivative_matches_the_flow():
    rotation = ComplexVectorField.from_expressions(PLANE, ["-y", "x"])
    form = MixedForm.from_expressions(PLANE, {(0, 1): "x**2*y + sin(x)"})
    coefficient = form.coefficient((0, 1))
    points = np.random.default_rng(6).uniform(-0.5, 0.5, size=(20, 2))

    def rotated(t):
        # the flow of -y d_x + x d_y is the rotation by t, of unit determinant
        c, s = np.cos(t), np.sin(t)
        return Sample(PLANE, points @ np.array([[c, s], [-s, c]]))

    h = 1e-4
    flow = (coefficient.values(rotated(h)) - coefficient.values(rotated(-h))) / (2 * h)
    derivative = lie_derivative(rotation, form).coefficient((0, 1)).values(Sample(PLANE, points))
    assert_allclose(derivative, flow, rtol=1e-6, atol=1e-8)

    sphere = Chart("sphere", ["theta", "phi"], [0, 0], [np.pi, 2 * np.pi], periodic=[False, True])
    area = MixedForm.from_expressions(sphere, {(0, 1): "sin(theta)"})
    d_phi = ComplexVectorField.from_expressions(sphere, ["0", "1"])
    assert lie_derivative(d_phi, area).max_norm(Sample.random(sphere, count=20)) < 1e-14


def test_exp_form():
    x = ScalarField.coordinate(PLANE, 0)
    omega = MixedForm(PLANE, {(0, 1): x})
    form = MixedForm.scalar(PLANE, x * 0.5) + omega
    result = exp_form(form)
    sample = Sample.random(PLANE, count=6)
    px = sample.points[:, 0]
    assert_allclose(result.scalar_part().values(sample), np.exp(0.5 * px))
    assert_allclose(result.top().values(sample), np.exp(0.5 * px) * px)
    assert result.degrees == [0, 2]


def test_expressions_and_parameters():
    field = ScalarField.from_expression(PLANE, "a*x**2 + sin(y)", {"a": 3.0})
    sample = Sample.random(PLANE, count=4)
    px, py = sample.points[:, 0], sample.points[:, 1]
    assert_allclose(field.values(sample), 3 * px**2 + np.sin(py))
    assert_allclose(field.derivative(0).values(sample), 6 * px)
    constant = ScalarField.from_expression(PLANE, "2*pi", {})
    assert constant.is_constant
    assert_allclose(constant.constant_value, 2 * np.pi)
    with pytest.raises(ScenarioSchemaError):
        ScalarField.from_expression(PLANE, "x + w")
    with pytest.raises(ScenarioSchemaError):
        ScalarField.from_expression(PLANE, "x +* y")


def test_constant_folding():
    x = ScalarField.coordinate(PLANE, 0)
    zero = ScalarField.zero(PLANE)
    assert (zero * x).is_zero
    assert (x * 1.0) is x
    assert (zero + x) is x
    assert not MixedForm(PLANE, {(0,): 0.0}).components


def test_unsupported_operands():
    x = ScalarField.coordinate(PLANE, 0)
    for operation in (lambda: x / "two", lambda: "two" / x, lambda: "two" - x, lambda: x - None):
        with pytest.raises(TypeError):
            operation()


def test_sample_memo():
    x = ScalarField.coordinate(PLANE, 0)
    f = (x * x).exp()
    sample = Sample.random(PLANE, count=3)
    assert f.evaluate(sample) is f.evaluate(sample)


def test_chart_mismatch():
    other = Chart("other", ["x", "y"], [-1, -1], [1, 1])
    with pytest.raises(ChartMismatchError):
        wedge(MixedForm.differential(PLANE, 0), MixedForm.differential(other, 1))
    with pytest.raises(ChartMismatchError):
        ScalarField.coordinate(PLANE, 0).values(Sample.random(other, count=2))
    with pytest.raises(ChartMismatchError):
        Sample(PLANE, np.zeros((2, 3)))


def test_lie_bracket():
    x = ScalarField.coordinate(PLANE, 0)
    d_x = ComplexVectorField(PLANE, [1.0, 0.0])
    x_d_y = ComplexVectorField(PLANE, [0.0, x])
    bracket = lie_bracket(d_x, x_d_y)
    sample = Sample.random(PLANE, count=5)
    assert_allclose(bracket.real[1].values(sample), np.ones(5))
    assert bracket.real[0].is_zero
    assert commutator_residual(d_x, ComplexVectorField(PLANE, [0.0, 1.0]), sample) == 0.0
    assert_allclose(commutator_residual(d_x, x_d_y, sample), 1.0)


if __name__ == "__main__":
    """
    Tests the exterior algebra
    """

    # introspect and run all the functions starting with 'test'
    for f in dir():
        if f.startswith("test"):
            print(f)
            globals()[f]()
