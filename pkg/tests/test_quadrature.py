"""Tests the chart quadrature of quadrature.py
"""
import numpy as np
import pytest
import scipy.integrate
from numpy.testing import assert_allclose

from equiloc.errors import ChartMismatchError
from equiloc.forms_engine import (
    MixedForm,
    ScalarField,
    exp_form,
    exterior_derivative,
    random_mixed_form,
    random_scalar_field,
)
from equiloc.geometry import Chart
from equiloc.quadrature import QuadratureGrid, integrate_top

import logging

logger = logging.getLogger(__name__)

SQUARE = Chart("square", ["x", "y"], [-1, -1], [1, 1])
SPHERE = Chart("sphere", ["theta", "phi"], [0, 0], [np.pi, 2 * np.pi], periodic=[False, True])


def test_gauss_legendre_is_exact_for_polynomials():
    form = MixedForm.from_expressions(SQUARE, {(0, 1): "x**2*y**4 + x*y"})
    assert_allclose(integrate_top(SQUARE, form, QuadratureGrid(SQUARE, 8)), (2 / 3) * (2 / 5), rtol=1e-13)


def test_periodic_axes_use_the_trapezoid_rule():
    grid = QuadratureGrid(SPHERE, 16)
    assert_allclose(grid.axis_nodes[1][:2], [0, 2 * np.pi / 16])
    assert np.all(grid.axis_nodes[0] > 0) and np.all(grid.axis_nodes[0] < np.pi)
    assert_allclose(np.sum(grid.weights), 2 * np.pi**2)
    form = MixedForm.from_expressions(SPHERE, {(0, 1): "cos(phi)**2*sin(theta)"})
    assert_allclose(integrate_top(SPHERE, form, grid), 2 * np.pi, rtol=1e-10)


def test_sphere_area_and_orientation():
    form = MixedForm.from_expressions(SPHERE, {(0, 1): "sin(theta)"})
    grid = QuadratureGrid(SPHERE, 64)
    assert_allclose(integrate_top(SPHERE, form, grid), 4 * np.pi, rtol=1e-12)
    flipped = Chart("sphere-flipped", ["theta", "phi"], [0, 0], [np.pi, 2 * np.pi], periodic=[False, True], orientation=-1)
    flipped_form = MixedForm.from_expressions(flipped, {(0, 1): "sin(theta)"})
    assert_allclose(integrate_top(flipped, flipped_form, QuadratureGrid(flipped, 64)), -4 * np.pi, rtol=1e-12)


def test_against_scipy():
    c = 0.7 - 0.4j
    h = ScalarField.from_expression(SPHERE, "-cos(theta)")
    omega = MixedForm.from_expressions(SPHERE, {(0, 1): "sin(theta)"})
    eta = exp_form(MixedForm.scalar(SPHERE, h * c) + omega)
    value = integrate_top(SPHERE, eta, QuadratureGrid(SPHERE, 64))
    real, _ = scipy.integrate.quad(lambda t: (np.exp(-c * np.cos(t)) * np.sin(t)).real, 0, np.pi)
    imag, _ = scipy.integrate.quad(lambda t: (np.exp(-c * np.cos(t)) * np.sin(t)).imag, 0, np.pi)
    assert_allclose(value, 2 * np.pi * (real + 1j * imag), rtol=1e-10)


def test_stokes_on_closed_charts():
    rng = np.random.default_rng(9)
    torus = Chart("torus", ["x", "y"], [0, 0], [2 * np.pi, 2 * np.pi], periodic=[True, True])
    for _ in range(3):
        alpha = random_mixed_form(torus, rng, degrees=[1])
        assert abs(integrate_top(torus, exterior_derivative(alpha), QuadratureGrid(torus, 48))) < 1e-8

    # a 1-form vanishing at both poles, so d(alpha) integrates to zero over the sphere
    sin2 = ScalarField.from_expression(SPHERE, "sin(theta)**2")
    for _ in range(3):
        alpha = MixedForm(SPHERE, {(1,): sin2 * random_scalar_field(SPHERE, rng)})
        assert abs(integrate_top(SPHERE, exterior_derivative(alpha), QuadratureGrid(SPHERE, 64))) < 1e-8


def test_grid_refinement_converges():
    c = 1 + 2j
    h = ScalarField.from_expression(SPHERE, "-cos(theta)")
    omega = MixedForm.from_expressions(SPHERE, {(0, 1): "sin(theta)"})
    bumpy = MixedForm.from_expressions(SPHERE, {(0, 1): "exp(sin(phi) + cos(theta))*sin(theta)**3"})
    for form in (exp_form(MixedForm.scalar(SPHERE, h * c) + omega), bumpy):
        coarse = integrate_top(SPHERE, form, QuadratureGrid(SPHERE, 64))
        fine = integrate_top(SPHERE, form, QuadratureGrid(SPHERE, 128))
        assert abs(fine - coarse) <= 1e-9 * abs(fine)


def test_thread_count_does_not_change_the_result():
    form = MixedForm.from_expressions(SPHERE, {(0, 1): "exp(sin(phi))*sin(theta)**3"})
    grid = QuadratureGrid(SPHERE, 32)
    single = integrate_top(SPHERE, form, grid, threads=1, chunk_size=100)
    several = integrate_top(SPHERE, form, grid, threads=4, chunk_size=100)
    assert single == several


def test_trivial_tops():
    assert integrate_top(SQUARE, MixedForm.from_expressions(SQUARE, {(): "x"})) == 0j
    constant = MixedForm(SQUARE, {(0, 1): 2.5})
    assert_allclose(integrate_top(SQUARE, constant, QuadratureGrid(SQUARE, 8)), 10.0)


def test_invalid_grids():
    with pytest.raises(ValueError):
        QuadratureGrid(SQUARE, 4)
    with pytest.raises(ChartMismatchError):
        QuadratureGrid(SQUARE, [16, 16, 16])
    form = MixedForm(SQUARE, {(0, 1): 1.0})
    with pytest.raises(ChartMismatchError):
        integrate_top(SPHERE, form)
    with pytest.raises(ChartMismatchError):
        integrate_top(SQUARE, form, QuadratureGrid(SPHERE, 8))
    assert QuadratureGrid(SQUARE, [8, 12]).size == 96


if __name__ == "__main__":
    """
    Tests the chart quadrature
    """

    # introspect and run all the functions starting with 'test'
    for f in dir():
        if f.startswith("test"):
            print(f)
            globals()[f]()
