"""
The zero set M0 = {<K, K> = 0} of the complex bilinear self-pairing of K = X + sqrt(-1) Y.

Components are declared by the scenario and confirmed numerically: the pairing must vanish
on the component and stay above a declared gap on a tube boundary around it. Confirmed
components are then enriched with an oriented g-orthonormal normal frame, the normal
moment endomorphisms and the normal block of the equivariant curvature, which feed the
Pfaffian denominator of the localization formula.
"""

import dataclasses
import enum
import logging

import numpy as np

from . import config
from .equivariant import equivariant_curvature, moment_endomorphism
from .errors import NormalDataError, OddNormalRankError, ZeroSetError
from .forms_engine import MixedForm, Sample, ScalarField, as_sample, check_same_chart
from .geometry import christoffel
from .skewlinalg import pfaffian_of_form_matrix

logger = logging.getLogger(__name__)

# |<K, K>| below which the pairing counts as vanishing on a component
VANISHING_TOL = 1e-10

# Directions sampled on a tube boundary around each component point
TUBE_DIRECTIONS = 100

# Points sampled on positive-dimensional components
COMPONENT_SAMPLES = 100

# Bound on the skewness and commutation residuals of normal data
NORMAL_TOL = 1e-9


class ComponentKind(enum.Enum):
    ISOLATED_POINT = "point"
    FULL_MANIFOLD = "full"
    DECLARED_SUBMANIFOLD = "slice"


class PairingField:
    """``<K, K>`` for K = X + sqrt(-1) Y, complex-bilinear in K.

    Parameters
    ----------
    pair : `equiloc.equivariant.EquivariantPair`
    g : `equiloc.geometry.MetricField`

    Attributes
    ----------
    value : `equiloc.forms_engine.ScalarField`
        ``g(K, K)`` built from the complex components.
    real_part, imag_part : `equiloc.forms_engine.ScalarField`
        ``|X|^2 - |Y|^2`` and ``2 <X, Y>``, built from the real fields separately.
    """

    def __init__(self, pair, g):
        check_same_chart(pair, g)
        self.chart = g.chart
        self.pair = pair
        self.metric = g
        k = pair.combined.components()
        x, y = pair.x.real, pair.y.real
        self.value = g.pairing(k, k)
        self.real_part = g.pairing(x, x) - g.pairing(y, y)
        self.imag_part = g.pairing(x, y) * 2.0

    def values(self, sample):
        return self.value.values(as_sample(self.chart, sample))

    def expansion_residual(self, sample):
        """Max of ``|<K, K> - (|X|^2 - |Y|^2) - 2 sqrt(-1) <X, Y>|``."""
        sample = as_sample(self.chart, sample)
        expanded = self.real_part.values(sample) + 1j * self.imag_part.values(sample)
        return float(np.max(np.abs(self.value.values(sample) - expanded)))


def pairing_field(pair, g):
    """The self-pairing ``<X + sqrt(-1) Y, X + sqrt(-1) Y>`` as a `PairingField`."""
    return PairingField(pair, g)


@dataclasses.dataclass
class ZeroDeclaration:
    """A scenario's analytic claim about one component of M0.

    Attributes
    ----------
    id : `str`
    kind : `ComponentKind`
    chart : `str`
        Name of the probe chart the component is described in.
    location : `tuple` of `float`
        Coordinates of an isolated point.
    fixed : `dict`
        ``{axis: value}`` of the coordinates held fixed on a slice component.
    tube_radius : `float`
        Coordinate distance of the tube boundary on which the gap is checked.
    gap : `float`
        Lower bound of ``|<K, K>|`` on the tube boundary.
    """

    id: str
    kind: ComponentKind
    chart: str
    location: tuple = ()
    fixed: dict = dataclasses.field(default_factory=dict)
    tube_radius: float = 0.0
    gap: float = 0.0


@dataclasses.dataclass
class ZeroComponent:
    """A confirmed component of M0 with its probe-chart geometry and normal data.

    The normal fields are filled in by `normal_data`.
    """

    declaration: ZeroDeclaration
    chart: object
    metric: object
    pair: object
    confirmed: bool = False
    normal_rank: int = 0
    orientation: int = 1
    frame: list = dataclasses.field(default_factory=list)
    mu_x: list = dataclasses.field(default_factory=list)
    mu_y: list = dataclasses.field(default_factory=list)
    normal_matrix: list = dataclasses.field(default_factory=list)
    residuals: dict = dataclasses.field(default_factory=dict)

    @property
    def id(self):
        return self.declaration.id

    @property
    def kind(self):
        return self.declaration.kind

    @property
    def free_axes(self):
        if self.kind is ComponentKind.ISOLATED_POINT:
            return []
        return [axis for axis in range(self.chart.dim) if axis not in self.declaration.fixed]

    @property
    def normal_axes(self):
        if self.kind is ComponentKind.ISOLATED_POINT:
            return list(range(self.chart.dim))
        return sorted(self.declaration.fixed)

    def sample(self, count=COMPONENT_SAMPLES, seed=config.SEED):
        """Points on the component (the point itself for isolated points)."""
        if self.kind is ComponentKind.ISOLATED_POINT:
            return Sample(self.chart, np.asarray(self.declaration.location, dtype=float))
        points = self.chart.random_points(np.random.default_rng(seed), count)
        for axis, value in self.declaration.fixed.items():
            points[:, axis] = value
        return Sample(self.chart, points)


def _tube_points(component, directions=TUBE_DIRECTIONS, seed=config.SEED):
    """Points at coordinate distance ``tube_radius`` from the component, across its normal axes."""
    normal = component.normal_axes
    base = component.sample(seed=seed).points
    rng = np.random.default_rng(seed)
    if len(normal) == 2:
        angles = np.linspace(0.0, 2 * np.pi, directions, endpoint=False)
        offsets = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    else:
        offsets = rng.normal(size=(directions, len(normal)))
        offsets /= np.linalg.norm(offsets, axis=-1, keepdims=True)
    points = np.repeat(base, directions, axis=0)
    tiled = np.tile(offsets, (base.shape[0], 1)) * component.declaration.tube_radius
    points[:, normal] += tiled
    return points


def _confirm(component):
    declaration = component.declaration
    pairing = pairing_field(component.pair, component.metric)
    if declaration.kind is ComponentKind.FULL_MANIFOLD:
        sample = Sample.random(component.chart, count=COMPONENT_SAMPLES)
    else:
        sample = component.sample()
    worst = float(np.max(np.abs(pairing.values(sample))))
    component.residuals["pairing_on_component"] = worst
    if worst > VANISHING_TOL:
        raise ZeroSetError(
            f"pairing does not vanish on declared component {declaration.id}: max |<K,K>| = {worst:.3e}"
        )
    if declaration.kind is ComponentKind.FULL_MANIFOLD:
        return

    rank = len(component.normal_axes)
    if rank % 2:
        raise OddNormalRankError(f"component {declaration.id} has odd normal rank {rank}")
    if declaration.tube_radius <= 0:
        raise ZeroSetError(f"component {declaration.id} declares no tube radius")
    tube = component.chart.clamp(_tube_points(component))
    smallest = float(np.min(np.abs(pairing.values(Sample(component.chart, tube)))))
    component.residuals["tube_gap"] = smallest
    if smallest < declaration.gap * (1 - NORMAL_TOL):
        raise ZeroSetError(
            f"gap violated around component {declaration.id}: min |<K,K>| = {smallest:.3e} "
            f"on the tube of radius {declaration.tube_radius} < declared gap {declaration.gap}"
        )


def validate_declared_zero_set(declarations, probes):
    """Confirm every declared component of M0.

    Parameters
    ----------
    declarations : `list` of `ZeroDeclaration`
    probes : `dict`
        Chart name to an object with ``chart``, ``metric`` and ``pair`` attributes.

    Returns
    -------
    components : `list` of `ZeroComponent`
        Confirmed components in declaration order.

    Raises
    ------
    ZeroSetError
        When the pairing does not vanish on a component or the tube gap is violated.
    OddNormalRankError
        For components of odd codimension.
    """
    components = []
    for declaration in declarations:
        if declaration.chart not in probes:
            raise ZeroSetError(f"component {declaration.id} refers to the unknown chart {declaration.chart}")
        probe = probes[declaration.chart]
        component = ZeroComponent(declaration, probe.chart, probe.metric, probe.pair)
        _confirm(component)
        component.confirmed = True
        component.normal_rank = len(component.normal_axes) if declaration.kind is not ComponentKind.FULL_MANIFOLD else 0
        logger.info(f"zero-set component {declaration.id} ({declaration.kind.value}) confirmed on {probe.chart.name}")
        components.append(component)
    return components


def validate_gap_region(pairing, lower, upper, gap, resolution=16):
    """Check ``|<K, K>| >= gap`` on a coordinate grid over a sub-box of the chart.

    Used for the region a scenario declares free of zeros (the whole chart when M0 is empty).

    Returns
    -------
    smallest : `float`
        The smallest modulus found.
    """
    axes = [np.linspace(lo, hi, resolution) for lo, hi in zip(lower, upper)]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=-1)
    smallest = float(np.min(np.abs(pairing.values(Sample(pairing.chart, points)))))
    if smallest < gap * (1 - NORMAL_TOL):
        raise ZeroSetError(f"|<K,K>| = {smallest:.3e} below the declared gap {gap} on {pairing.chart.name}")
    return smallest


def _unit(chart, axis):
    return [ScalarField.constant(chart, 1.0 if i == axis else 0.0) for i in range(chart.dim)]


def orthonormal_frame(g, vectors):
    """Gram-Schmidt of component lists with respect to ``g``; keeps the orientation."""
    frame = []
    for v in vectors:
        w = list(v)
        for e in frame:
            c = g.pairing(e, w)
            w = [wi - c * ei for wi, ei in zip(w, e)]
        scale = g.pairing(w, w).sqrt().reciprocal()
        frame.append([wi * scale for wi in w])
    return frame


def _project(matrix, frame, zero):
    """``F^T M F`` for a lowered matrix M and frame vectors F_a."""
    n = len(matrix)
    projected = []
    for a in frame:
        row = []
        for b in frame:
            entry = zero
            for i in range(n):
                for j in range(n):
                    entry = entry + matrix[i][j] * a[i] * b[j]
            row.append(entry)
        projected.append(row)
    return projected


def _matrix_values(matrix, sample):
    size = len(matrix)
    out = np.zeros((sample.npoints, size, size), dtype=complex)
    for a in range(size):
        for b in range(size):
            out[:, a, b] = matrix[a][b].values(sample)
    return out


def _permutation_sign(order):
    inversions = sum(1 for i in range(len(order)) for j in range(i + 1, len(order)) if order[i] > order[j])
    return -1 if inversions % 2 else 1


def normal_data(component, connection=None, tolerance=NORMAL_TOL):
    """Enrich a confirmed component with its normal frame and normal endomorphisms.

    The tangent directions are the free coordinate axes; the normal frame is the
    Gram-Schmidt continuation of the tangent basis through the normal axes, so
    (tangent, normal) has the orientation of the coordinate permutation times the chart
    orientation. That sign is stored in ``component.orientation``.

    Parameters
    ----------
    component : `ZeroComponent`
    connection : `equiloc.geometry.ConnectionField`, optional
        Levi-Civita connection of the probe metric.
    tolerance : `float`, optional
        Bound on the skewness residuals.

    Returns
    -------
    component : `ZeroComponent`
        The same object with ``frame``, ``mu_x``, ``mu_y``, ``normal_matrix`` and the
        ``normal_skew``, ``curvature_skew``, ``tangential``, ``tangency`` and
        ``normal_commutation`` residuals set.

    Raises
    ------
    ZeroSetError
        For unconfirmed components.
    NormalDataError
        When the projected moment or curvature is not skew in the orthonormal frame.
    """
    if not component.confirmed:
        raise ZeroSetError(f"component {component.id} has not been confirmed")
    chart, g, pair = component.chart, component.metric, component.pair
    connection = christoffel(g) if connection is None else connection
    if component.kind is ComponentKind.FULL_MANIFOLD:
        component.normal_rank = 0
        component.orientation = 1
        component.frame, component.mu_x, component.mu_y, component.normal_matrix = [], [], [], []
        return component

    tangent_axes, normal_axes = component.free_axes, component.normal_axes
    if len(normal_axes) % 2:
        raise OddNormalRankError(f"component {component.id} has odd normal rank {len(normal_axes)}")
    basis = orthonormal_frame(g, [_unit(chart, axis) for axis in tangent_axes + normal_axes])
    frame = basis[len(tangent_axes):]
    component.frame = frame
    component.normal_rank = len(frame)
    component.orientation = chart.orientation * _permutation_sign(tangent_axes + normal_axes)

    zero = ScalarField.zero(chart)
    mu_x = moment_endomorphism(pair.x, connection)
    mu_y = moment_endomorphism(pair.y, connection)
    component.mu_x = _project(mu_x.lowered(g), frame, zero)
    component.mu_y = _project(mu_y.lowered(g), frame, zero)
    curvature = equivariant_curvature(pair, g, connection)
    component.normal_matrix = _project(curvature.lowered(), frame, MixedForm.zero(chart))

    sample = component.sample()
    nx = _matrix_values(component.mu_x, sample)
    ny = _matrix_values(component.mu_y, sample)
    residuals = component.residuals
    residuals["normal_skew"] = float(
        max(np.max(np.abs(nx + np.swapaxes(nx, 1, 2))), np.max(np.abs(ny + np.swapaxes(ny, 1, 2))))
    )
    residuals["curvature_skew"] = max(
        (
            (component.normal_matrix[a][b] + component.normal_matrix[b][a]).max_norm(sample)
            for a in range(len(frame))
            for b in range(a, len(frame))
        ),
        default=0.0,
    )
    residuals["normal_commutation"] = float(np.max(np.abs(nx @ ny - ny @ nx)))

    mu_c = moment_endomorphism(pair.combined, connection)
    tangential = [
        np.abs(mu_c.matrix[i][axis].values(sample)) for axis in tangent_axes for i in range(chart.dim)
    ]
    residuals["tangential"] = float(max((np.max(t) for t in tangential), default=0.0))
    normal_components = [
        np.abs(g.pairing(field, f).values(sample)) for field in (pair.x.real, pair.y.real) for f in frame
    ]
    residuals["tangency"] = float(max((np.max(c) for c in normal_components), default=0.0))

    for name in ("normal_skew", "curvature_skew"):
        if residuals[name] > tolerance:
            raise NormalDataError(f"{name} residual {residuals[name]:.3e} on component {component.id} exceeds {tolerance}")
    logger.debug(f"normal data of {component.id}: rank {component.normal_rank}, residuals {residuals}")
    return component


def normal_pfaffian(component, normalization=2 * np.pi):
    """``orientation * Pf(F^T g R~ F / normalization)``, the localization denominator.

    For the full manifold (normal rank 0) this is the constant 1.
    """
    pf = pfaffian_of_form_matrix(component.normal_matrix, normalization, chart=component.chart)
    return pf * float(component.orientation)


def normal_moment_values(component, at=None):
    """``mu^N(X) + sqrt(-1) mu^N(Y)`` at the component sample, shape ``(npoints, r, r)``."""
    sample = component.sample() if at is None else as_sample(component.chart, at)
    return _matrix_values(component.mu_x, sample) + 1j * _matrix_values(component.mu_y, sample)
