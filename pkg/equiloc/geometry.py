"""
Chart-level Riemannian data: metric, Levi-Civita connection, Riemann curvature, musical
isomorphism, volume form and Killing-field checks.

Tensors are exposed component-wise as lazy `equiloc.forms_engine.ScalarField` objects; the
whole table of a tensor is computed once per `equiloc.forms_engine.Sample` and memoised.
Index conventions: ``Gamma^k_ij`` is stored as ``table[k][i][j]`` and the curvature
``R^i_{j,kl}`` (the End(TM)-valued 2-form with ``R(d_k, d_l) d_j = R^i_{j,kl} d_i``) as
``table[i][j][k][l]``.
"""

import logging

import numpy as np

from . import config
from . import jets
from .errors import SingularMetricError
from .forms_engine import (
    MixedForm,
    ScalarField,
    as_sample,
    check_same_chart,
    lie_derivative,
)

logger = logging.getLogger(__name__)

# Pivot modulus below which the metric counts as singular
SINGULAR_PIVOT = 1e-14


class Chart:
    """A coordinate box presenting (part of) a manifold.

    Parameters
    ----------
    name : `str`
        Identifier; objects on charts with different names never combine.
    coordinates : `list` of `str`
        Coordinate names, also the symbols of scenario expressions.
    lower, upper : `list` of `float`
        Box bounds per axis.
    periodic : `list` of `bool`, optional
        Periodic axes have period ``upper - lower``. Default: none periodic.
    excluded : `str`, optional
        Description of the measure-zero singular locus (e.g. the poles of polar coordinates).
    orientation : `int`, optional
        +1 if the coordinate order is positively oriented, -1 otherwise. Default: +1.
    """

    def __init__(self, name, coordinates, lower, upper, periodic=None, excluded="", orientation=1):
        self.name = name
        self.coordinates = list(coordinates)
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        self.periodic = list(periodic) if periodic is not None else [False] * len(self.coordinates)
        if not (len(self.lower) == len(self.upper) == len(self.periodic) == len(self.coordinates)):
            raise ValueError(f"chart {name}: bounds, periodic flags and coordinates differ in length")
        if np.any(self.upper <= self.lower):
            raise ValueError(f"chart {name}: empty coordinate box")
        if orientation not in (1, -1):
            raise ValueError(f"chart {name}: orientation must be +1 or -1, got {orientation}")
        self.excluded = excluded
        self.orientation = orientation

    @property
    def dim(self):
        return len(self.coordinates)

    def period(self, axis):
        """Period of a periodic axis (``None`` for a non-periodic one)."""
        return self.upper[axis] - self.lower[axis] if self.periodic[axis] else None

    def clamp(self, points, margin=config.CHART_MARGIN):
        """Keep non-periodic coordinates at least ``margin`` inside the box."""
        points = np.array(points, dtype=float)
        for axis in range(self.dim):
            if not self.periodic[axis]:
                points[:, axis] = np.clip(points[:, axis], self.lower[axis] + margin, self.upper[axis] - margin)
        return points

    def random_points(self, rng, count, margin=config.CHART_MARGIN):
        """``count`` uniform points in the box, ``margin`` away from non-periodic edges."""
        lower = np.where(self.periodic, self.lower, self.lower + margin)
        upper = np.where(self.periodic, self.upper, self.upper - margin)
        return rng.uniform(lower, upper, size=(count, self.dim))

    def __repr__(self):
        return f"Chart({self.name!r}, {self.coordinates})"


def jet_matrix_inverse(matrix):
    """Gauss-Jordan inverse and determinant of a matrix of jets.

    No pivoting: the matrices inverted here are Riemannian metrics (positive-definite).

    Parameters
    ----------
    matrix : `list` of `list` of `equiloc.jets.Jet`

    Returns
    -------
    inverse : `list` of `list` of `equiloc.jets.Jet`
    determinant : `equiloc.jets.Jet`
    """
    n = len(matrix)
    first = matrix[0][0]
    one = jets.Jet.constant(first.space, first.npoints, 1.0)
    zero = jets.Jet.constant(first.space, first.npoints, 0.0)
    a = [list(row) for row in matrix]
    inverse = [[one if i == j else zero for j in range(n)] for i in range(n)]
    determinant = one
    for col in range(n):
        pivot = a[col][col]
        smallest = np.min(np.abs(pivot.value))
        if smallest < SINGULAR_PIVOT:
            raise SingularMetricError(f"singular metric: pivot {col} has modulus {smallest:.3e}")
        determinant = determinant * pivot
        scale = jets.reciprocal(pivot)
        a[col] = [x * scale for x in a[col]]
        inverse[col] = [x * scale for x in inverse[col]]
        for row in range(n):
            if row == col:
                continue
            factor = a[row][col]
            a[row] = [x - factor * y for x, y in zip(a[row], a[col])]
            inverse[row] = [x - factor * y for x, y in zip(inverse[row], inverse[col])]
    return inverse, determinant


class MetricField:
    """Riemannian metric ``g_ij`` on a chart.

    Only the upper triangle of ``components`` is read; the lower triangle mirrors it, so
    the metric is symmetric by construction.

    Parameters
    ----------
    chart : `Chart`
    components : `list` of `list`
        ``n x n`` matrix of `ScalarField` (or numbers).
    """

    def __init__(self, chart, components):
        self.chart = chart
        n = chart.dim
        if len(components) != n or any(len(row) != n for row in components):
            raise ValueError(f"metric on {chart.name} needs a {n}x{n} component matrix")
        rows = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                field = components[i][j]
                if not isinstance(field, ScalarField):
                    field = ScalarField.constant(chart, field)
                check_same_chart(self, field)
                rows[i][j] = rows[j][i] = field
        self.g = rows
        self.inverse_fields = [
            [ScalarField(chart, self._inverse_entry(i, j)) for j in range(n)] for i in range(n)
        ]
        self.determinant = ScalarField(chart, lambda s: self._inverse_and_determinant(s)[1])
        self.sqrt_determinant = self.determinant.sqrt()

    @classmethod
    def from_expressions(cls, chart, expressions, parameters=None):
        return cls(
            chart,
            [[ScalarField.from_expression(chart, text, parameters) for text in row] for row in expressions],
        )

    @property
    def dim(self):
        return self.chart.dim

    def _inverse_and_determinant(self, sample):
        return sample.memo(
            self,
            lambda s: jet_matrix_inverse([[self.g[i][j].evaluate(s) for j in range(self.dim)] for i in range(self.dim)]),
        )

    def _inverse_entry(self, i, j):
        return lambda sample: self._inverse_and_determinant(sample)[0][i][j]

    def table(self, sample):
        return [[self.g[i][j].evaluate(sample) for j in range(self.dim)] for i in range(self.dim)]

    def matrix_values(self, sample):
        """Numerical metric, shape ``(npoints, n, n)``."""
        return np.stack(
            [np.stack([self.g[i][j].values(sample) for j in range(self.dim)], axis=-1) for i in range(self.dim)],
            axis=-2,
        )

    def scaled(self, factor):
        """The metric ``factor * g`` on the same chart."""
        return MetricField(self.chart, [[factor * entry for entry in row] for row in self.g])

    def lower(self, components):
        """Lower the index of vector components: ``v_i = g_ij v^j``."""
        return [
            _sum(self.chart, [self.g[i][j] * components[j] for j in range(self.dim)]) for i in range(self.dim)
        ]

    def pairing(self, u, v):
        """Complex-bilinear ``g(u, v)`` of two component lists."""
        return _sum(self.chart, [self.g[i][j] * u[i] * v[j] for i in range(self.dim) for j in range(self.dim)])


def _sum(chart, fields):
    total = ScalarField.zero(chart)
    for field in fields:
        total = total + field
    return total


def positive_definite_check(g, sample):
    """Raise `SingularMetricError` unless g is real positive-definite at every sample point."""
    values = g.matrix_values(sample)
    if np.max(np.abs(values.imag)) > 0:
        raise SingularMetricError(f"metric on {g.chart.name} has a nonzero imaginary part")
    try:
        np.linalg.cholesky(values.real)
    except np.linalg.LinAlgError as error:
        raise SingularMetricError(f"metric on {g.chart.name} is not positive-definite at a sample point") from error


class ConnectionField:
    """Christoffel symbols of the Levi-Civita connection of a metric."""

    def __init__(self, metric):
        self.metric = metric
        self.chart = metric.chart

    @property
    def dim(self):
        return self.chart.dim

    def table(self, sample):
        """``table[k][i][j] = Gamma^k_ij`` as jets (exact to one order below the metric)."""
        return sample.memo(self, self._compute)

    def _compute(self, sample):
        n = self.dim
        g = self.metric.table(sample)
        inverse = self.metric._inverse_and_determinant(sample)[0]
        dg = [[[g[i][j].derivative(l) for j in range(n)] for i in range(n)] for l in range(n)]
        # first kind: Gamma_{l,ij} = (d_i g_jl + d_j g_il - d_l g_ij) / 2
        first = [[[(dg[i][j][l] + dg[j][i][l] - dg[l][i][j]) * 0.5 for j in range(n)] for i in range(n)] for l in range(n)]
        table = [[[None] * n for _ in range(n)] for _ in range(n)]
        for k in range(n):
            for i in range(n):
                for j in range(i, n):
                    total = inverse[k][0] * first[0][i][j]
                    for l in range(1, n):
                        total = total + inverse[k][l] * first[l][i][j]
                    table[k][i][j] = table[k][j][i] = total
        return table

    def component(self, k, i, j):
        """``Gamma^k_ij`` as a lazy scalar field."""
        return ScalarField(self.chart, lambda s: self.table(s)[k][i][j])


def christoffel(g):
    """Levi-Civita connection of ``g``.

    Parameters
    ----------
    g : `MetricField`

    Returns
    -------
    connection : `ConnectionField`
        ``Gamma^k_ij = g^{kl} (d_i g_jl + d_j g_il - d_l g_ij) / 2``; a singular metric raises
        `SingularMetricError` when the symbols are evaluated.
    """
    return ConnectionField(g)


class CurvatureField:
    """Riemann curvature ``R^i_{j,kl}`` of a connection, antisymmetric in (k, l)."""

    def __init__(self, connection):
        self.connection = connection
        self.metric = connection.metric
        self.chart = connection.chart

    @property
    def dim(self):
        return self.chart.dim

    def table(self, sample):
        return sample.memo(self, self._compute)

    def _compute(self, sample):
        n = self.dim
        gamma = self.connection.table(sample)
        zero = sample.constant(0.0)
        table = [[[[zero] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for l in range(k + 1, n):
                        total = gamma[i][l][j].derivative(k) - gamma[i][k][j].derivative(l)
                        for m in range(n):
                            total = total + gamma[i][k][m] * gamma[m][l][j] - gamma[i][l][m] * gamma[m][k][j]
                        table[i][j][k][l] = total
                        table[i][j][l][k] = -total
        return table

    def component(self, i, j, k, l):
        return ScalarField(self.chart, lambda s: self.table(s)[i][j][k][l])

    def lowered_component(self, i, j, k, l):
        """``R_{ij,kl} = g_im R^m_{j,kl}``."""
        return _sum(self.chart, [self.metric.g[i][m] * self.component(m, j, k, l) for m in range(self.dim)])

    def form(self, i, j):
        """The (i, j) entry of the End(TM)-valued 2-form, ``sum_{k<l} R^i_{j,kl} dx^k ^ dx^l``."""
        return MixedForm(
            self.chart,
            {(k, l): self.component(i, j, k, l) for k in range(self.dim) for l in range(k + 1, self.dim)},
        )


def riemann(connection):
    """Curvature of ``connection``.

    ``R^i_{j,kl} = d_k Gamma^i_lj - d_l Gamma^i_kj + Gamma^i_km Gamma^m_lj - Gamma^i_lm Gamma^m_kj``.
    """
    return CurvatureField(connection)


def musical_flat(field, g):
    """Metric dual 1-form ``(X' + sqrt(-1) Y')_i = g_ij (X^j + sqrt(-1) Y^j)``.

    The pairing is complex-bilinear; nothing is conjugated.
    """
    check_same_chart(field, g)
    lowered = g.lower(field.components())
    return MixedForm(g.chart, {(i,): lowered[i] for i in range(g.dim)})


def lie_derivative_of_metric(field, g):
    """``(L_X g)_ij = X^k d_k g_ij + g_kj d_i X^k + g_ik d_j X^k`` as a matrix of fields."""
    check_same_chart(field, g)
    n = g.dim
    x = field.components()
    return [
        [
            _sum(
                g.chart,
                [x[k] * g.g[i][j].derivative(k) + g.g[k][j] * x[k].derivative(i) + g.g[i][k] * x[k].derivative(j) for k in range(n)],
            )
            for j in range(n)
        ]
        for i in range(n)
    ]


def _matrix_max_norm(matrix, sample):
    norms = [np.max(np.abs(entry.values(sample))) for row in matrix for entry in row if not entry.is_zero]
    return float(max(norms, default=0.0))


def killing_residual(field, g, sample):
    """Max over the sample of ``|(L_X g)_ij|``; zero exactly for Killing fields.

    Parameters
    ----------
    field : `equiloc.forms_engine.ComplexVectorField`
        Usually the real or the imaginary part of a pair, tested separately.
    g : `MetricField`
    sample : `equiloc.forms_engine.Sample` or `numpy.ndarray`
        Evaluation points.

    Returns
    -------
    residual : `float`
    """
    sample = as_sample(g.chart, sample)
    return _matrix_max_norm(lie_derivative_of_metric(field, g), sample)


def volume_form(g, orientation=1):
    """Riemannian volume form ``orientation * sqrt(det g) dx^1 ^ ... ^ dx^n``."""
    if orientation not in (1, -1):
        raise ValueError(f"orientation must be +1 or -1, got {orientation}")
    return MixedForm(g.chart, {tuple(range(g.dim)): g.sqrt_determinant * orientation})


def lemma2_residual(x, y, g, sample):
    """Max-norm of ``L_X Y' + L_Y X'`` for Killing fields X, Y (zero when they commute)."""
    sample = as_sample(g.chart, sample)
    total = lie_derivative(x, musical_flat(y, g)) + lie_derivative(y, musical_flat(x, g))
    return total.max_norm(sample)


def metric_compatibility_residual(connection, sample):
    """Max of ``|d_k g_ij - Gamma^l_ki g_lj - Gamma^l_kj g_il|``."""
    g = connection.metric
    sample = as_sample(g.chart, sample)
    gamma = connection.table(sample)
    table = g.table(sample)
    n = g.dim
    worst = 0.0
    for k in range(n):
        for i in range(n):
            for j in range(n):
                value = table[i][j].derivative(k)
                for l in range(n):
                    value = value - gamma[l][k][i] * table[l][j] - gamma[l][k][j] * table[i][l]
                worst = max(worst, float(np.max(np.abs(value.value))))
    return worst


def curvature_skew_residual(curvature, sample):
    """Max of ``|R_{ij,kl} + R_{ji,kl}|`` (skew-adjointness of R(d_k, d_l))."""
    n = curvature.dim
    sample = as_sample(curvature.chart, sample)
    worst = 0.0
    for i in range(n):
        for j in range(i, n):
            for k in range(n):
                for l in range(k + 1, n):
                    total = curvature.lowered_component(i, j, k, l) + curvature.lowered_component(j, i, k, l)
                    if not total.is_zero:
                        worst = max(worst, float(np.max(np.abs(total.values(sample)))))
    return worst


def bianchi_first_residual(curvature, sample):
    """Max of ``|R^i_{j,kl} + R^i_{k,lj} + R^i_{l,jk}|``."""
    n = curvature.dim
    sample = as_sample(curvature.chart, sample)
    table = curvature.table(sample)
    worst = 0.0
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    total = table[i][j][k][l] + table[i][k][l][j] + table[i][l][j][k]
                    worst = max(worst, float(np.max(np.abs(total.value))))
    return worst


def sectional_curvature(curvature, sample, k=0, l=1):
    """``R_{kl,kl} / (g_kk g_ll - g_kl^2)`` at each sample point."""
    g = curvature.metric
    sample = as_sample(curvature.chart, sample)
    numerator = curvature.lowered_component(k, l, k, l).values(sample)
    denominator = (g.g[k][k] * g.g[l][l] - g.g[k][l] * g.g[k][l]).values(sample)
    return numerator / denominator
