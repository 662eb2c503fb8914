"""
Operators of the equivariant complex of a pair of commuting Killing fields X, Y with
K = X + sqrt(-1) Y: the differential d_K = d + i_K, the invariance test for
L_X + sqrt(-1) L_Y, moment endomorphisms, the equivariant connection and curvature, and
the characteristic and Euler forms built from the equivariant curvature.
"""

import logging
import math

import numpy as np
import sympy

from .errors import OddDimensionError
from .forms_engine import (
    ComplexVectorField,
    MixedForm,
    ScalarField,
    as_sample,
    check_same_chart,
    exterior_derivative,
    interior_product,
    lie_bracket,
    lie_derivative,
    wedge,
)
from .geometry import christoffel, musical_flat, riemann
from .skewlinalg import pfaffian_of_form_matrix

logger = logging.getLogger(__name__)

# Highest polynomial degree accepted for characteristic forms
MAX_POLYNOMIAL_DEGREE = 6


class EquivariantPair:
    """Two real vector fields X, Y and their combination K = X + sqrt(-1) Y.

    Parameters
    ----------
    x : `equiloc.forms_engine.ComplexVectorField`
        Real field X (imaginary part zero).
    y : `equiloc.forms_engine.ComplexVectorField`, optional
        Real field Y. Default: zero.
    """

    def __init__(self, x, y=None):
        y = ComplexVectorField.zero(x.chart) if y is None else y
        check_same_chart(x, y)
        if not (x.is_real and y.is_real):
            raise ValueError("X and Y must be real vector fields")
        self.chart = x.chart
        self.x = x
        self.y = y
        self.combined = ComplexVectorField(x.chart, x.real, y.real)

    @property
    def has_imaginary_part(self):
        return not self.y.is_zero

    def lie(self, form):
        """``(L_X + sqrt(-1) L_Y) form``, through the two Lie derivatives separately."""
        result = lie_derivative(self.x, form)
        if self.has_imaginary_part:
            result = result + lie_derivative(self.y, form) * 1j
        return result

    def scaled(self, factor):
        """The pair ``(factor X, factor Y)`` for a real ``factor``."""
        return EquivariantPair(self.x.scaled(factor), self.y.scaled(factor))

    def __repr__(self):
        return f"EquivariantPair(on {self.chart.name})"


def d_equivariant(pair, form):
    """``d_K form = d form + i_K form``."""
    check_same_chart(pair, form)
    return exterior_derivative(form) + interior_product(pair.combined, form)


def invariance_residual(pair, form, sample):
    """Max coefficient modulus of ``(L_X + sqrt(-1) L_Y) form`` over the sample.

    Zero exactly for members of the invariant subcomplex on which d_K squares to zero.
    """
    sample = as_sample(pair.chart, sample)
    return pair.lie(form).max_norm(sample)


def lemma1_residual(pair, form, sample):
    """Max modulus of ``(d_K^2 - L_X - sqrt(-1) L_Y) form`` over the sample."""
    sample = as_sample(pair.chart, sample)
    square = d_equivariant(pair, d_equivariant(pair, form))
    return (square - pair.lie(form)).max_norm(sample)


def dual_form(pair, g):
    """``X' + sqrt(-1) Y'``, the metric dual of K."""
    return musical_flat(pair.combined, g)


def lemma3_residual(pair, g, sample):
    """Max modulus of ``d_K d_K (X' + sqrt(-1) Y')``: the form ``d_K K'`` is d_K-closed."""
    sample = as_sample(pair.chart, sample)
    closed = d_equivariant(pair, dual_form(pair, g))
    return d_equivariant(pair, closed).max_norm(sample)


class MomentEndomorphism:
    """Matrix ``mu^i_j`` of scalar fields acting on tangent vectors."""

    def __init__(self, chart, matrix):
        self.chart = chart
        self.matrix = matrix

    @property
    def dim(self):
        return self.chart.dim

    def values(self, sample):
        """Numerical matrices, shape ``(npoints, n, n)``."""
        return np.stack(
            [np.stack([self.matrix[i][j].values(sample) for j in range(self.dim)], axis=-1) for i in range(self.dim)],
            axis=-2,
        )

    def lowered(self, g):
        """``(g mu)_kj = g_ki mu^i_j``, antisymmetric for a Killing field."""
        n = self.dim
        return [[_sum(self.chart, [g.g[k][i] * self.matrix[i][j] for i in range(n)]) for j in range(n)] for k in range(n)]

    def skew_residual(self, g, sample):
        """Max of ``|g(mu Z, W) + g(Z, mu W)|`` over coordinate vectors Z, W."""
        sample = as_sample(self.chart, sample)
        lowered = self.lowered(g)
        worst = 0.0
        for k in range(self.dim):
            for j in range(k, self.dim):
                total = lowered[k][j] + lowered[j][k]
                if not total.is_zero:
                    worst = max(worst, float(np.max(np.abs(total.values(sample)))))
        return worst

    def __add__(self, other):
        check_same_chart(self, other)
        return MomentEndomorphism(
            self.chart, [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.matrix, other.matrix)]
        )

    def __mul__(self, factor):
        return MomentEndomorphism(self.chart, [[entry * factor for entry in row] for row in self.matrix])

    __rmul__ = __mul__


def _sum(chart, fields):
    total = ScalarField.zero(chart)
    for field in fields:
        total = total + field
    return total


def moment_endomorphism(field, connection):
    """``mu(X) = -nabla X``, i.e. ``mu^i_j = -(d_j X^i + Gamma^i_jk X^k)``.

    Complex fields are accepted: the result is complex-linear in the field, so passing K gives
    ``mu(X) + sqrt(-1) mu(Y)``.
    """
    check_same_chart(field, connection)
    n = connection.dim
    x = field.components()
    matrix = [
        [
            -(x[i].derivative(j) + _sum(connection.chart, [connection.component(i, j, k) * x[k] for k in range(n)]))
            for j in range(n)
        ]
        for i in range(n)
    ]
    return MomentEndomorphism(connection.chart, matrix)


def covariant_derivative(connection, field, other):
    """Components of ``nabla_V W = V^k (d_k W^i + Gamma^i_kl W^l) d_i``, complex-bilinear."""
    check_same_chart(field, other)
    n = connection.dim
    v = field.components()
    w = other.components()
    return [
        _sum(
            connection.chart,
            [
                v[k] * (w[i].derivative(k) + _sum(connection.chart, [connection.component(i, k, l) * w[l] for l in range(n)]))
                for k in range(n)
            ],
        )
        for i in range(n)
    ]


def moment_via_lie_derivative(field, connection):
    """``mu(X) Z = L_X Z - nabla_X Z`` column by column on the coordinate fields Z = d_j.

    ``L_X Z`` is the Lie bracket ``[X, Z]``; agreement with `moment_endomorphism` is the
    torsion-freeness of the connection.
    """
    check_same_chart(field, connection)
    chart = connection.chart
    n = connection.dim
    columns = []
    for j in range(n):
        coordinate = ComplexVectorField(chart, [1.0 if i == j else 0.0 for i in range(n)])
        bracket = lie_bracket(field, coordinate).components()
        transport = covariant_derivative(connection, field, coordinate)
        columns.append([bracket[i] - transport[i] for i in range(n)])
    return MomentEndomorphism(chart, [[columns[j][i] for j in range(n)] for i in range(n)])


def moment_identity_residual(field, connection, sample):
    """Max difference between the L - nabla and the -nabla X constructions of the moment."""
    sample = as_sample(connection.chart, sample)
    first = moment_endomorphism(field, connection).values(sample)
    second = moment_via_lie_derivative(field, connection).values(sample)
    return float(np.max(np.abs(first - second)))


# Matrices of mixed forms (End(TM)-valued forms in a coordinate frame)
def form_identity(chart, n):
    return [[MixedForm.scalar(chart, 1.0 if i == j else 0.0) for j in range(n)] for i in range(n)]


def form_matmul(a, b):
    """Matrix product with wedge-multiplied entries."""
    chart = a[0][0].chart
    n, m, p = len(a), len(b), len(b[0])
    result = []
    for i in range(n):
        row = []
        for j in range(p):
            entry = MixedForm.zero(chart)
            for k in range(m):
                entry = entry + wedge(a[i][k], b[k][j])
            row.append(entry)
        result.append(row)
    return result


def form_trace(matrix):
    chart = matrix[0][0].chart
    total = MixedForm.zero(chart)
    for i in range(len(matrix)):
        total = total + matrix[i][i]
    return total


def connection_form(connection):
    """Connection 1-form matrix ``omega^i_j = Gamma^i_kj dx^k``."""
    n = connection.dim
    return [
        [MixedForm(connection.chart, {(k,): connection.component(i, k, j) for k in range(n)}) for j in range(n)]
        for i in range(n)
    ]


class EquivariantCurvature:
    """The End(TM)-valued mixed form ``R - mu(X) - sqrt(-1) mu(Y)`` in a coordinate frame.

    Attributes
    ----------
    matrix : `list` of `list` of `equiloc.forms_engine.MixedForm`
        Entry (i, j) has 2-form part ``R^i_{j,kl}`` and 0-form part ``-mu_K^i_j``.
    moment : `MomentEndomorphism`
        ``mu(X) + sqrt(-1) mu(Y)``.
    curvature : `equiloc.geometry.CurvatureField`
    metric : `equiloc.geometry.MetricField`
    """

    def __init__(self, matrix, moment, curvature, metric):
        self.matrix = matrix
        self.moment = moment
        self.curvature = curvature
        self.metric = metric
        self.chart = metric.chart

    @property
    def dim(self):
        return self.chart.dim

    def lowered(self):
        """``(g R~)_ij = g_im R~^m_j``, a skew matrix of even forms."""
        n = self.dim
        g = self.metric.g
        return [
            [_sum_forms(self.chart, [self.matrix[m][j] * g[i][m] for m in range(n)]) for j in range(n)]
            for i in range(n)
        ]


def _sum_forms(chart, forms):
    total = MixedForm.zero(chart)
    for form in forms:
        total = total + form
    return total


def equivariant_curvature(pair, g, connection=None):
    """Assemble ``R~ = R - mu(X) - sqrt(-1) mu(Y)``.

    Parameters
    ----------
    pair : `EquivariantPair`
    g : `equiloc.geometry.MetricField`
    connection : `equiloc.geometry.ConnectionField`, optional
        Levi-Civita connection of g; computed when omitted.

    Returns
    -------
    curvature : `EquivariantCurvature`
    """
    check_same_chart(pair, g)
    connection = christoffel(g) if connection is None else connection
    curvature = riemann(connection)
    moment = moment_endomorphism(pair.combined, connection)
    n = g.dim
    matrix = [
        [curvature.form(i, j) - MixedForm.scalar(g.chart, moment.matrix[i][j]) for j in range(n)] for i in range(n)
    ]
    return EquivariantCurvature(matrix, moment, curvature, g)


def bianchi_residual(curvature, pair, connection, sample):
    """Max modulus of the equivariant covariant derivative of R~.

    For the even End(TM)-valued form A = R~ this is
    ``dA + omega ^ A - A ^ omega + i_K A``; its 3-form part is the second Bianchi identity
    and its 1-form part says ``nabla mu_K = i_K R``.
    """
    sample = as_sample(pair.chart, sample)
    omega = connection_form(connection)
    a = curvature.matrix
    left = form_matmul(omega, a)
    right = form_matmul(a, omega)
    worst = 0.0
    for i in range(curvature.dim):
        for j in range(curvature.dim):
            entry = exterior_derivative(a[i][j]) + left[i][j] - right[i][j] + interior_product(pair.combined, a[i][j])
            worst = max(worst, entry.max_norm(sample))
    return worst


class Polynomial:
    """A polynomial ``f(x) = c_0 + c_1 x + ... + c_d x^d`` with complex coefficients.

    Parameters
    ----------
    coefficients : `list` of `complex`
        ``c_0 .. c_d``; degree at most `MAX_POLYNOMIAL_DEGREE`.
    """

    def __init__(self, coefficients):
        coefficients = [complex(c) for c in coefficients] or [0j]
        while len(coefficients) > 1 and coefficients[-1] == 0:
            coefficients.pop()
        if len(coefficients) - 1 > MAX_POLYNOMIAL_DEGREE:
            raise ValueError(f"polynomial degree {len(coefficients) - 1} exceeds {MAX_POLYNOMIAL_DEGREE}")
        self.coefficients = coefficients

    @classmethod
    def parse(cls, text):
        """Polynomial from text in the indeterminate x, e.g. ``"1 + 2*x^3"``."""
        x = sympy.Symbol("x")
        try:
            expr = sympy.sympify(str(text).replace("^", "**"), locals={"x": x})
            poly = sympy.Poly(expr, x)
        except (sympy.SympifyError, sympy.PolynomialError, SyntaxError, TypeError) as error:
            raise ValueError(f"not a polynomial in x: {text!r}") from error
        return cls([complex(c) for c in reversed(poly.all_coeffs())])

    @property
    def degree(self):
        return len(self.coefficients) - 1

    def __call__(self, matrix):
        """``f(A)`` for a square matrix of mixed forms, by Horner's rule."""
        chart = matrix[0][0].chart
        n = len(matrix)
        identity = form_identity(chart, n)
        result = [[entry * self.coefficients[-1] for entry in row] for row in identity]
        for c in reversed(self.coefficients[:-1]):
            result = form_matmul(result, matrix)
            for i in range(n):
                result[i][i] = result[i][i] + c
        return result

    def __repr__(self):
        terms = " + ".join(f"({c:g})x^{k}" for k, c in enumerate(self.coefficients) if c != 0)
        return f"Polynomial({terms or '0'})"


def characteristic_form(f, curvature):
    """``Tr f(R~)``, an inhomogeneous even form; wedge powers past degree n vanish."""
    if not isinstance(f, Polynomial):
        f = Polynomial(f)
    return form_trace(f(curvature.matrix))


def characteristic_closedness_residual(f, curvature, pair, sample):
    """Max modulus of ``d_K Tr f(R~)`` over the sample."""
    sample = as_sample(pair.chart, sample)
    return d_equivariant(pair, characteristic_form(f, curvature)).max_norm(sample)


def equivariant_euler_form(curvature, g):
    """``Pf(g R~ / 2 pi) / sqrt(det g)``, oriented by the chart.

    For X = Y = 0 the top part is the Gauss-Bonnet-Chern density.

    Raises
    ------
    OddDimensionError
        On odd-dimensional charts.
    """
    n = g.dim
    if n % 2:
        raise OddDimensionError(f"no Euler form on the {n}-dimensional chart {g.chart.name}")
    pf = pfaffian_of_form_matrix(curvature.lowered(), 2 * math.pi, chart=g.chart)
    return pf * (g.sqrt_determinant.reciprocal() * g.chart.orientation)


class VectorValuedForm:
    """A TM-valued mixed form: component i is the form multiplying ``d_i``."""

    def __init__(self, chart, components):
        if len(components) != chart.dim:
            raise ValueError(f"a TM-valued form on {chart.name} needs {chart.dim} components")
        self.chart = chart
        self.components = list(components)

    @classmethod
    def from_vector_field(cls, field):
        """A vector field viewed as a TM-valued 0-form."""
        return cls(field.chart, [MixedForm.scalar(field.chart, c) for c in field.components()])

    def max_norm(self, sample):
        return max(component.max_norm(sample) for component in self.components)


def equivariant_covariant_derivative(pair, connection, form):
    """``(nabla + i_K)`` on a TM-valued form; i_K contracts the form factor only."""
    omega = connection_form(connection)
    n = form.chart.dim
    components = []
    for i in range(n):
        total = exterior_derivative(form.components[i]) + interior_product(pair.combined, form.components[i])
        for j in range(n):
            total = total + wedge(omega[i][j], form.components[j])
        components.append(total)
    return VectorValuedForm(form.chart, components)


def vector_lie_derivative(pair, form):
    """``(L_X + sqrt(-1) L_Y)`` on a TM-valued form: ``L_K(V^i) - V^j d_j K^i``."""
    k = pair.combined.components()
    n = form.chart.dim
    components = []
    for i in range(n):
        total = pair.lie(form.components[i])
        for j in range(n):
            derivative = k[i].derivative(j)
            if not derivative.is_zero:
                total = total - form.components[j] * derivative
        components.append(total)
    return VectorValuedForm(form.chart, components)


def vector_invariance_residual(pair, form, sample):
    sample = as_sample(pair.chart, sample)
    return vector_lie_derivative(pair, form).max_norm(sample)


def lemma5_residual(pair, connection, form, sample):
    """Invariance residual of ``nabla~ form``; zero whenever ``form`` itself is invariant."""
    return vector_invariance_residual(pair, equivariant_covariant_derivative(pair, connection, form), sample)
