"""Tests the Riemannian layer of geometry.py
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from equiloc.errors import SingularMetricError
from equiloc.forms_engine import ComplexVectorField, Sample
from equiloc.geometry import (
    Chart,
    MetricField,
    bianchi_first_residual,
    christoffel,
    curvature_skew_residual,
    killing_residual,
    lemma2_residual,
    metric_compatibility_residual,
    musical_flat,
    positive_definite_check,
    riemann,
    sectional_curvature,
    volume_form,
)

import logging

logger = logging.getLogger(__name__)

SPHERE = Chart("sphere", ["theta", "phi"], [0, 0], [np.pi, 2 * np.pi], periodic=[False, True])
NORTH = Chart("north", ["x", "y"], [-0.65, -0.65], [0.65, 0.65])


def round_sphere(scale=1.0):
    return MetricField.from_expressions(SPHERE, [[f"{scale}", "0"], ["0", f"{scale}*sin(theta)**2"]])


def graph_metric():
    rho = "(1 - x**2 - y**2)"
    return MetricField.from_expressions(
        NORTH, [[f"1 + x**2/{rho}", f"x*y/{rho}"], [f"x*y/{rho}", f"1 + y**2/{rho}"]]
    )


def test_christoffel_symbols_of_the_round_sphere():
    sample = Sample.random(SPHERE, count=10)
    connection = christoffel(round_sphere())
    theta = sample.points[:, 0]
    assert_allclose(connection.component(0, 1, 1).values(sample), -np.sin(theta) * np.cos(theta), atol=1e-13)
    assert_allclose(connection.component(1, 0, 1).values(sample), np.cos(theta) / np.sin(theta), atol=1e-12)
    assert_allclose(connection.component(1, 1, 0).values(sample), np.cos(theta) / np.sin(theta), atol=1e-12)
    assert_allclose(connection.component(0, 0, 0).values(sample), np.zeros(10), atol=1e-14)


def test_sectional_curvature():
    for g, expected in ((round_sphere(), 1.0), (round_sphere(2.0), 0.5), (graph_metric(), 1.0)):
        sample = Sample.random(g.chart, count=10)
        curvature = riemann(christoffel(g))
        assert_allclose(sectional_curvature(curvature, sample).real, expected, rtol=1e-10)


def test_riemannian_identities():
    for g in (round_sphere(), graph_metric()):
        sample = Sample.random(g.chart, count=20)
        connection = christoffel(g)
        curvature = riemann(connection)
        assert metric_compatibility_residual(connection, sample) < 1e-10
        assert curvature_skew_residual(curvature, sample) < 1e-10
        assert bianchi_first_residual(curvature, sample) < 1e-10


def test_killing_residual():
    sample = Sample.random(SPHERE, count=20)
    g = round_sphere()
    rotation = ComplexVectorField.from_expressions(SPHERE, ["0", "1"])
    tilted = ComplexVectorField.from_expressions(SPHERE, ["-sin(phi)", "-cos(phi)*cot(theta)"])
    not_killing = ComplexVectorField.from_expressions(SPHERE, ["sin(theta)", "0"])
    assert killing_residual(rotation, g, sample) < 1e-12
    assert killing_residual(tilted, g, sample) < 1e-10
    assert killing_residual(not_killing, g, sample) > 0.1


def test_lemma2_for_commuting_killing_fields():
    sample = Sample.random(NORTH, count=20)
    g = graph_metric()
    x = ComplexVectorField.from_expressions(NORTH, ["-y", "x"])
    y = ComplexVectorField.from_expressions(NORTH, ["-2*y", "2*x"])
    assert killing_residual(x, g, sample) < 1e-12
    assert lemma2_residual(x, y, g, sample) < 1e-10


def test_volume_form_and_determinant():
    sample = Sample.random(SPHERE, count=10)
    g = round_sphere()
    theta = sample.points[:, 0]
    assert_allclose(g.determinant.values(sample), np.sin(theta) ** 2)
    assert_allclose(volume_form(g).top().values(sample), np.sin(theta))
    assert_allclose(volume_form(g, orientation=-1).top().values(sample), -np.sin(theta))
    assert_allclose(g.inverse_fields[1][1].values(sample), 1 / np.sin(theta) ** 2)


def test_musical_flat():
    sample = Sample.random(SPHERE, count=10)
    theta = sample.points[:, 0]
    rotation = ComplexVectorField.from_expressions(SPHERE, ["0", "1"])
    dual = musical_flat(rotation, round_sphere())
    assert_allclose(dual.coefficient((0,)).values(sample), np.zeros(10), atol=1e-14)
    assert_allclose(dual.coefficient((1,)).values(sample), np.sin(theta) ** 2, atol=1e-14)
    imaginary = ComplexVectorField.from_expressions(SPHERE, ["0", "0"], ["0", "1"])
    assert_allclose(musical_flat(imaginary, round_sphere()).coefficient((1,)).values(sample), 1j * np.sin(theta) ** 2, atol=1e-14)


def test_singular_metric():
    flat = Chart("flat", ["x", "y"], [-1, -1], [1, 1])
    degenerate = MetricField.from_expressions(flat, [["1", "1"], ["1", "1"]])
    sample = Sample.random(flat, count=4)
    with pytest.raises(SingularMetricError):
        christoffel(degenerate).component(0, 0, 0).values(sample)
    indefinite = MetricField.from_expressions(flat, [["1", "0"], ["0", "-1"]])
    with pytest.raises(SingularMetricError):
        positive_definite_check(indefinite, sample)
    positive_definite_check(graph_metric(), Sample.random(NORTH, count=4))


if __name__ == "__main__":
    """
    Tests the Riemannian layer
    """

    # introspect and run all the functions starting with 'test'
    for f in dir():
        if f.startswith("test"):
            print(f)
            globals()[f]()
