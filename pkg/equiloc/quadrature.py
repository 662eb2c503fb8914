"""
Tensor-product quadrature of top-degree form coefficients over a chart box.

Non-periodic axes use Gauss-Legendre nodes (never on the box edges, so polar charts are
integrated over the open box); periodic axes use the uniform trapezoid rule, which is
spectrally accurate for smooth periodic integrands.
"""

import concurrent.futures
import logging

import numpy as np

from . import config
from .errors import ChartMismatchError, ZeroSetError
from .forms_engine import Sample
from .geometry import Chart
from .zeroset import ComponentKind

logger = logging.getLogger(__name__)

# Smallest accepted per-axis resolution
MIN_RESOLUTION = 8


class QuadratureGrid:
    """Nodes and weights of a tensor-product rule on a chart box.

    Parameters
    ----------
    chart : `equiloc.geometry.Chart`
        Supplies the box and the periodic flags.
    resolution : `int` or `list` of `int`, optional
        Nodes per axis. Default: `equiloc.config.RESOLUTION`.

    Attributes
    ----------
    axis_nodes, axis_weights : `list` of `numpy.ndarray`
        One-dimensional rules per axis.
    points : `numpy.ndarray`
        All nodes, shape ``(prod(resolution), dim)``, last axis fastest.
    weights : `numpy.ndarray`
        Product weights matching ``points``.
    """

    def __init__(self, chart, resolution=config.RESOLUTION):
        if np.isscalar(resolution):
            resolution = [int(resolution)] * chart.dim
        if len(resolution) != chart.dim:
            raise ChartMismatchError(f"{len(resolution)} resolutions given for the {chart.dim}-dimensional chart {chart.name}")
        if min(resolution) < MIN_RESOLUTION:
            raise ValueError(f"resolution must be at least {MIN_RESOLUTION} per axis, got {resolution}")
        self.chart = chart
        self.resolution = list(resolution)
        self.axis_nodes = []
        self.axis_weights = []
        for axis, count in enumerate(self.resolution):
            lower, upper = chart.lower[axis], chart.upper[axis]
            if chart.periodic[axis]:
                step = (upper - lower) / count
                nodes = lower + step * np.arange(count)
                weights = np.full(count, step)
            else:
                x, w = np.polynomial.legendre.leggauss(count)
                nodes = 0.5 * (upper - lower) * x + 0.5 * (upper + lower)
                weights = 0.5 * (upper - lower) * w
            self.axis_nodes.append(nodes)
            self.axis_weights.append(weights)

        mesh = np.meshgrid(*self.axis_nodes, indexing="ij")
        self.points = np.stack([m.ravel() for m in mesh], axis=-1)
        weight_mesh = np.meshgrid(*self.axis_weights, indexing="ij")
        self.weights = np.prod(np.stack([w.ravel() for w in weight_mesh], axis=-1), axis=-1)

    @property
    def size(self):
        return self.weights.size

    def chunks(self, chunk_size=config.CHUNK_SIZE):
        """Consecutive ``(points, weights)`` blocks of at most ``chunk_size`` nodes."""
        for start in range(0, self.size, chunk_size):
            yield self.points[start:start + chunk_size], self.weights[start:start + chunk_size]

    def __repr__(self):
        return f"QuadratureGrid({self.chart.name}, {self.resolution})"


def _chunk_integral(chart, coefficient, points, weights):
    sample = Sample(chart, points)
    return complex(np.sum(weights * coefficient.values(sample)))


def integrate_top(chart, form, grid=None, threads=config.THREADS, chunk_size=config.CHUNK_SIZE):
    """Integral of the top-degree part of ``form`` over the chart box.

    Parameters
    ----------
    chart : `equiloc.geometry.Chart`
    form : `equiloc.forms_engine.MixedForm`
        Only the coefficient of ``dx^0 ^ ... ^ dx^(n-1)`` contributes.
    grid : `QuadratureGrid`, optional
        Default: a grid at `equiloc.config.RESOLUTION`.
    threads : `int`, optional
        Worker threads evaluating node blocks. Block sums are added in block order, so the
        result does not depend on ``threads``.
    chunk_size : `int`, optional
        Nodes per evaluation block.

    Returns
    -------
    integral : `complex`
        Coordinate integral of the coefficient times the chart orientation.
    """
    if form.chart.name != chart.name:
        raise ChartMismatchError(f"form on {form.chart.name} integrated over chart {chart.name}")
    grid = QuadratureGrid(chart) if grid is None else grid
    if grid.chart.name != chart.name:
        raise ChartMismatchError(f"grid of chart {grid.chart.name} used on chart {chart.name}")

    coefficient = form.top()
    if coefficient.is_zero:
        logger.debug(f"no top-degree part on {chart.name}: integral is 0")
        return 0j
    if coefficient.is_constant:
        return complex(coefficient.constant_value * np.sum(grid.weights) * chart.orientation)

    blocks = list(grid.chunks(chunk_size))
    if threads > 1 and len(blocks) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
            partial = list(executor.map(lambda block: _chunk_integral(chart, coefficient, *block), blocks))
    else:
        partial = [_chunk_integral(chart, coefficient, *block) for block in blocks]

    total = 0j
    for value in partial:
        total += value
    logger.debug(f"integrated top part over {chart.name} on {grid}: {total:.12g}")
    return total * chart.orientation


def _slice_grid(component, resolution):
    """Quadrature nodes on a slice component, embedded in its probe chart."""
    chart = component.chart
    free = component.free_axes
    sub_chart = Chart(
        f"{chart.name}|{component.id}",
        [chart.coordinates[axis] for axis in free],
        chart.lower[free],
        chart.upper[free],
        periodic=[chart.periodic[axis] for axis in free],
    )
    grid = QuadratureGrid(sub_chart, resolution)
    points = np.zeros((grid.size, chart.dim))
    points[:, free] = grid.points
    for axis, value in component.declaration.fixed.items():
        points[:, axis] = value
    return points, grid.weights


def integrate_component(component, form, resolution=config.RESOLUTION, threads=config.THREADS):
    """Integral of ``form`` over a confirmed zero-set component.

    Parameters
    ----------
    component : `equiloc.zeroset.ZeroComponent`
    form : `equiloc.forms_engine.MixedForm`
        A form on the component's probe chart.
    resolution : `int`, optional
        Nodes per free axis.
    threads : `int`, optional

    Returns
    -------
    integral : `complex`
        The 0-form part at an isolated point; the free-axis coefficient integrated over a
        slice (in increasing free-axis order); `integrate_top` over the chart for the full
        manifold.

    Raises
    ------
    ZeroSetError
        For unconfirmed components.
    """
    if not component.confirmed:
        raise ZeroSetError(f"component {component.id} has not been confirmed")
    if form.chart.name != component.chart.name:
        raise ChartMismatchError(f"form on {form.chart.name} integrated over component on {component.chart.name}")
    kind = component.kind
    if kind is ComponentKind.ISOLATED_POINT:
        return complex(form.scalar_part().values(component.sample())[0])
    if kind is ComponentKind.FULL_MANIFOLD:
        return integrate_top(component.chart, form, QuadratureGrid(component.chart, resolution), threads=threads)

    coefficient = form.coefficient(tuple(component.free_axes))
    if coefficient.is_zero:
        return 0j
    points, weights = _slice_grid(component, resolution)
    return _chunk_integral(component.chart, coefficient, points, weights)
