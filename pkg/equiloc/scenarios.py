"""
Test manifolds with their Killing pairs, declared zero sets and equivariantly closed forms.

A scenario is a JSON document (schema version 1, see ``docs/scenario_schema.rst``). Every
chart it declares carries its own metric, generators and form data, so the integration
chart and the probe charts around isolated zeros are each self-contained. The builders
`build_sphere_scenario` and `build_torus_scenario` produce the same documents as the
shipped files.
"""

import glob
import json
import logging
import math
import os

import sympy

from . import config
from .data_load import SCENARIO_DIR, SCENARIO_SUFFIX
from .equivariant import (
    EquivariantPair,
    Polynomial,
    characteristic_form,
    d_equivariant,
    equivariant_curvature,
    equivariant_euler_form,
    invariance_residual,
)
from .errors import (
    PreconditionError,
    ScenarioSchemaError,
    ScenarioValidationError,
    UnknownScenarioError,
    ZeroSetError,
)
from .forms_engine import ComplexVectorField, MixedForm, Sample, ScalarField, commutator_residual, exp_form
from .geometry import Chart, MetricField, christoffel, killing_residual, positive_definite_check
from .zeroset import ComponentKind, ZeroDeclaration, pairing_field, validate_declared_zero_set, validate_gap_region

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

ETA_KINDS = ("dh", "euler", "characteristic", "custom")

# Killing residual above which a declared generator is refused at load
KILLING_TOL = 1e-10


def _number(value, parameters=None, what="value"):
    """A real or complex number from a JSON number or a sympy expression string."""
    if isinstance(value, (int, float)):
        return value
    try:
        expr = sympy.sympify(str(value))
        if parameters:
            expr = expr.subs({sympy.Symbol(name): v for name, v in parameters.items()})
        number = complex(expr)
    except (sympy.SympifyError, SyntaxError, TypeError) as error:
        raise ScenarioSchemaError(f"{what}: {value!r} is not a number") from error
    return number.real if number.imag == 0 else number


def _index_key(text):
    """``"0,1"`` -> ``(0, 1)``; ``""`` -> ``()``."""
    text = str(text).strip()
    if not text:
        return ()
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as error:
        raise ScenarioSchemaError(f"form component key {text!r} is not a list of axis indices") from error


def _require(mapping, key, where):
    if key not in mapping:
        raise ScenarioSchemaError(f"{where}: missing required field {key!r}")
    return mapping[key]


class ChartGeometry:
    """One chart of a scenario with everything expressed on it.

    Parameters
    ----------
    chart : `equiloc.geometry.Chart`
    metric : `equiloc.geometry.MetricField`
    pair : `equiloc.equivariant.EquivariantPair`
    hamiltonian : `equiloc.forms_engine.ScalarField`, optional
        h of the Duistermaat-Heckman form ``exp(c h + omega)``.
    symplectic : `equiloc.forms_engine.MixedForm`, optional
        omega of the Duistermaat-Heckman form.
    extra : `equiloc.forms_engine.MixedForm`, optional
        Added to eta whatever its kind.
    components : `equiloc.forms_engine.MixedForm`, optional
        eta of a custom scenario.
    """

    def __init__(self, chart, metric, pair, hamiltonian=None, symplectic=None, extra=None, components=None):
        self.chart = chart
        self.metric = metric
        self.pair = pair
        self.hamiltonian = hamiltonian
        self.symplectic = symplectic
        self.extra = extra
        self.components = components
        self.connection = christoffel(metric)
        self._curvature = None

    @property
    def name(self):
        return self.chart.name

    @property
    def curvature(self):
        """Equivariant curvature ``R - mu(X) - sqrt(-1) mu(Y)`` (built once)."""
        if self._curvature is None:
            self._curvature = equivariant_curvature(self.pair, self.metric, self.connection)
        return self._curvature

    def dh_form(self, coefficient):
        if self.hamiltonian is None or self.symplectic is None:
            raise ScenarioSchemaError(f"chart {self.name} has no hamiltonian/symplectic data for a DH form")
        return exp_form(MixedForm.scalar(self.chart, self.hamiltonian * coefficient) + self.symplectic)

    def euler_form(self):
        return equivariant_euler_form(self.curvature, self.metric)

    def characteristic_form(self, polynomial):
        return characteristic_form(polynomial, self.curvature)

    def eta(self, kind, coefficient=None, polynomial=None):
        """eta of the given kind on this chart, plus the chart's extra components."""
        if kind == "dh":
            form = self.dh_form(coefficient)
        elif kind == "euler":
            form = self.euler_form()
        elif kind == "characteristic":
            form = self.characteristic_form(polynomial)
        elif kind == "custom":
            if self.components is None:
                raise ScenarioSchemaError(f"chart {self.name} declares no eta_components for a custom eta")
            form = self.components
        else:
            raise ScenarioSchemaError(f"unknown eta kind {kind!r}; expected one of {ETA_KINDS}")
        if self.extra is not None:
            form = form + self.extra
        return form

    def __repr__(self):
        return f"ChartGeometry({self.name})"


def _parse_form(chart, data, parameters, where):
    if isinstance(data, (str, int, float)):
        return MixedForm(chart, {tuple(range(chart.dim)): ScalarField.from_expression(chart, data, parameters)})
    if not isinstance(data, dict):
        raise ScenarioSchemaError(f"{where}: a form is an expression or a mapping of index keys to expressions")
    return MixedForm(
        chart, {_index_key(key): ScalarField.from_expression(chart, text, parameters) for key, text in data.items()}
    )


def _parse_chart(name, data, parameters):
    where = f"chart {name}"
    coordinates = _require(data, "coordinates", where)
    n = len(coordinates)
    chart = Chart(
        name,
        coordinates,
        [_number(v, parameters, f"{where} lower bound") for v in _require(data, "lower", where)],
        [_number(v, parameters, f"{where} upper bound") for v in _require(data, "upper", where)],
        periodic=data.get("periodic", [False] * n),
        excluded=data.get("excluded", ""),
        orientation=int(data.get("orientation", 1)),
    )
    metric = MetricField.from_expressions(chart, _require(data, "metric", where), parameters)
    zero = ["0"] * n
    x = ComplexVectorField.from_expressions(chart, data.get("generator_x", zero), parameters=parameters)
    y = ComplexVectorField.from_expressions(chart, data.get("generator_y", zero), parameters=parameters)
    hamiltonian = None
    if "hamiltonian" in data:
        hamiltonian = ScalarField.from_expression(chart, data["hamiltonian"], parameters)
    symplectic = _parse_form(chart, data["symplectic"], parameters, where) if "symplectic" in data else None
    extra = _parse_form(chart, data["eta_extra"], parameters, where) if "eta_extra" in data else None
    components = _parse_form(chart, data["eta_components"], parameters, where) if "eta_components" in data else None
    return ChartGeometry(chart, metric, EquivariantPair(x, y), hamiltonian, symplectic, extra, components)


def _parse_declaration(data, charts, parameters):
    where = f"zero-set component {data.get('id', '?')}"
    try:
        kind = ComponentKind(_require(data, "kind", where))
    except ValueError as error:
        raise ScenarioSchemaError(f"{where}: kind must be one of {[k.value for k in ComponentKind]}") from error
    chart = _require(data, "chart", where)
    if chart not in charts:
        raise ScenarioSchemaError(f"{where}: unknown chart {chart!r}")
    location = tuple(float(_number(v, parameters, where)) for v in data.get("location", ()))
    if kind is ComponentKind.ISOLATED_POINT and len(location) != charts[chart].chart.dim:
        raise ScenarioSchemaError(f"{where}: an isolated point needs {charts[chart].chart.dim} coordinates")
    fixed = {int(axis): float(_number(v, parameters, where)) for axis, v in data.get("fixed", {}).items()}
    if kind is ComponentKind.DECLARED_SUBMANIFOLD and not fixed:
        raise ScenarioSchemaError(f"{where}: a slice component needs fixed axes")
    return ZeroDeclaration(
        id=_require(data, "id", where),
        kind=kind,
        chart=chart,
        location=location,
        fixed=fixed,
        tube_radius=float(_number(data.get("tube_radius", 0.0), parameters, where)),
        gap=float(_number(data.get("gap", 0.0), parameters, where)),
    )


class Scenario:
    """A validated test manifold.

    Attributes
    ----------
    id : `str`
    charts : `dict`
        Chart name to `ChartGeometry`.
    integration_chart : `str`
        The chart whose box presents all of M (up to a null set).
    commuting : `bool`
        Whether the scenario declares ``[X, Y] = 0``.
    declarations : `list` of `equiloc.zeroset.ZeroDeclaration`
    gap_region : `dict` or `None`
        ``{"lower", "upper", "gap"}`` box of the integration chart declared free of zeros.
    eta_kind : `str`
    coefficient : `complex`
        c of the DH form ``exp(c h + omega)``.
    polynomial : `equiloc.equivariant.Polynomial` or `None`
    expected : `complex` or `None`
        Reference value of the integral of eta, with ``provenance``.
    residuals : `dict`
        Load-time residuals by name.
    failures : `dict`
        Load-time failures by name (message), e.g. ``commutator`` or ``zero_set``.
    components : `list` of `equiloc.zeroset.ZeroComponent`
        Confirmed zero-set components (empty when confirmation failed).
    """

    def __init__(self, document, source=None):
        self.document = document
        self.source = source
        where = f"scenario {document.get('id', source)}"
        version = _require(document, "schema_version", where)
        if version != SCHEMA_VERSION:
            raise ScenarioSchemaError(f"{where}: schema version {version} is not supported (expected {SCHEMA_VERSION})")
        self.id = _require(document, "id", where)
        self.description = document.get("description", "")
        self.parameters = {k: float(v) for k, v in document.get("parameters", {}).items()}
        charts = _require(document, "charts", where)
        if not charts:
            raise ScenarioSchemaError(f"{where}: no charts")
        try:
            self.charts = {name: _parse_chart(name, data, self.parameters) for name, data in charts.items()}
        except ValueError as error:
            raise ScenarioSchemaError(f"{where}: {error}") from error
        self.integration_chart = document.get("integration_chart", next(iter(self.charts)))
        if self.integration_chart not in self.charts:
            raise ScenarioSchemaError(f"{where}: unknown integration chart {self.integration_chart!r}")
        self.commuting = bool(document.get("hypotheses", {}).get("commuting", False))
        self.declarations = [_parse_declaration(d, self.charts, self.parameters) for d in document.get("zero_set", [])]

        region = document.get("gap_region")
        self.gap_region = None
        if region is not None:
            self.gap_region = {
                "lower": [float(_number(v, self.parameters, where)) for v in _require(region, "lower", where)],
                "upper": [float(_number(v, self.parameters, where)) for v in _require(region, "upper", where)],
                "gap": float(_number(_require(region, "gap", where), self.parameters, where)),
            }

        eta = _require(document, "eta", where)
        self.eta_kind = _require(eta, "kind", where)
        if self.eta_kind not in ETA_KINDS:
            raise ScenarioSchemaError(f"{where}: unknown eta kind {self.eta_kind!r}")
        re, im = eta.get("coefficient", ["a", "b"]) if self.eta_kind == "dh" else (0, 0)
        self.coefficient = complex(_number(re, self.parameters, where)) + 1j * complex(_number(im, self.parameters, where))
        self.polynomial = None
        if self.eta_kind == "characteristic":
            try:
                self.polynomial = Polynomial.parse(_require(eta, "polynomial", where))
            except ValueError as error:
                raise ScenarioSchemaError(f"{where}: {error}") from error

        expected = document.get("expected", {})
        self.expected = complex(_number(expected["lhs"], self.parameters, where)) if "lhs" in expected else None
        self.provenance = expected.get("provenance", "")

        self.residuals = {}
        self.failures = {}
        self.components = []
        self._eta = {}

    @property
    def integration(self):
        return self.charts[self.integration_chart]

    @property
    def pair(self):
        return self.integration.pair

    @property
    def has_imaginary_part(self):
        return any(geometry.pair.has_imaginary_part for geometry in self.charts.values())

    def eta(self, chart=None):
        """eta on the named chart (the integration chart by default), built once."""
        chart = self.integration_chart if chart is None else chart
        if chart not in self._eta:
            self._eta[chart] = self.charts[chart].eta(self.eta_kind, self.coefficient, self.polynomial)
        return self._eta[chart]

    def _record(self, name, value, tolerance):
        self.residuals[name] = value
        if value > tolerance:
            self.failures[name] = f"{name} residual {value:.3e} exceeds {tolerance:.1e}"
            logger.warning(f"scenario {self.id}: {self.failures[name]}")

    def validate(self, count=config.SAMPLE_POINTS, seed=config.SEED, tolerance=config.RESIDUAL_TOL):
        """Re-check every declared property.

        Killing residuals above `KILLING_TOL` raise `ScenarioValidationError`; the
        commutator, closedness, invariance and zero-set checks are recorded in
        ``residuals``/``failures`` so verifications can report them as a failed verdict.
        """
        for geometry in self.charts.values():
            sample = Sample.random(geometry.chart, count=count, seed=seed)
            positive_definite_check(geometry.metric, sample)
            for label, field in (("killing_x", geometry.pair.x), ("killing_y", geometry.pair.y)):
                residual = killing_residual(field, geometry.metric, sample)
                self.residuals[f"{label}[{geometry.name}]"] = residual
                if residual > KILLING_TOL:
                    raise ScenarioValidationError(
                        label, residual, f"scenario {self.id}: declared field is not Killing on chart {geometry.name}"
                    )
            if self.commuting or geometry.pair.has_imaginary_part:
                self._record(f"commutator[{geometry.name}]", commutator_residual(geometry.pair.x, geometry.pair.y, sample), tolerance)
            eta = self.eta(geometry.name)
            self._record(f"closedness[{geometry.name}]", d_equivariant(geometry.pair, eta).max_norm(sample), tolerance)
            self._record(f"invariance[{geometry.name}]", invariance_residual(geometry.pair, eta, sample), tolerance)

        try:
            self.components = validate_declared_zero_set(self.declarations, self.charts)
            if self.gap_region is not None:
                pairing = pairing_field(self.pair, self.integration.metric)
                region = self.gap_region
                self.residuals["gap"] = validate_gap_region(pairing, region["lower"], region["upper"], region["gap"])
        except ZeroSetError as error:
            self.components = []
            self.failures["zero_set"] = str(error)
            logger.warning(f"scenario {self.id}: zero set rejected: {error}")
        logger.info(f"scenario {self.id} validated ({len(self.failures)} recorded failures)")
        return self

    def __repr__(self):
        return f"Scenario({self.id!r})"


def scenario_from_dict(document, validate=True, source=None):
    scenario = Scenario(document, source=source)
    return scenario.validate() if validate else scenario


def load_scenario(file, validate=True):
    """Parse and validate a scenario file.

    Parameters
    ----------
    file : `str`
        Path of a JSON scenario document.
    validate : `bool`, optional
        Re-check the declared properties. Default: True.

    Returns
    -------
    scenario : `Scenario`

    Raises
    ------
    ScenarioSchemaError
        When the document does not follow the schema.
    ScenarioValidationError
        When a declared Killing field is not Killing.
    """
    try:
        with open(file, "r") as stream:
            document = json.load(stream)
    except json.JSONDecodeError as error:
        raise ScenarioSchemaError(f"{file}: not valid JSON ({error})") from error
    if not isinstance(document, dict):
        raise ScenarioSchemaError(f"{file}: a scenario is a JSON object")
    logger.debug(f"loading scenario from {file}")
    return scenario_from_dict(document, validate=validate, source=file)


def list_scenarios():
    """Ids of the shipped scenarios, sorted."""
    paths = glob.glob(os.path.join(SCENARIO_DIR, f"*{SCENARIO_SUFFIX}"))
    return sorted(os.path.basename(path)[: -len(SCENARIO_SUFFIX)] for path in paths)


def resolve_scenario(id_or_path, validate=True):
    """Load a shipped scenario by id, or any scenario file by path."""
    if os.path.isfile(id_or_path):
        return load_scenario(id_or_path, validate=validate)
    path = os.path.join(SCENARIO_DIR, f"{id_or_path}{SCENARIO_SUFFIX}")
    if not os.path.isfile(path):
        raise UnknownScenarioError(f"unknown scenario {id_or_path!r}; shipped: {', '.join(list_scenarios())}")
    return load_scenario(path, validate=validate)


# Probe charts around the poles of the unit sphere, graph coordinates over the equatorial
# plane: (x, y) = sin(theta) (cos(phi), sin(phi)) at the north pole and (u, v) = (x, -y)
# at the south pole, both positively oriented.
PROBE_HALF_WIDTH = 0.65
TUBE_RADIUS = 0.5
GAP_ANGLE = 0.6


def _scaled(expression, scale):
    if scale == 1:
        return expression
    return f"{scale:g}*({expression})"


def _graph_metric(p, q, scale):
    rho = f"(1 - {p}**2 - {q}**2)"
    return [
        [_scaled(f"1 + {p}**2/{rho}", scale), _scaled(f"{p}*{q}/{rho}", scale)],
        [_scaled(f"{p}*{q}/{rho}", scale), _scaled(f"1 + {q}**2/{rho}", scale)],
    ]


def _sphere_charts(scale):
    w = PROBE_HALF_WIDTH
    sphere = {
        "coordinates": ["theta", "phi"],
        "lower": [0, 0],
        "upper": ["pi", "2*pi"],
        "periodic": [False, True],
        "excluded": "poles theta = 0 and theta = pi",
        "orientation": 1,
        "metric": [[_scaled("1", scale), "0"], ["0", _scaled("sin(theta)**2", scale)]],
        "generator_x": ["0", "a"],
        "generator_y": ["0", "b"],
        "hamiltonian": "-cos(theta)",
        "symplectic": "sin(theta)",
    }
    north = {
        "coordinates": ["x", "y"],
        "lower": [-w, -w],
        "upper": [w, w],
        "orientation": 1,
        "metric": _graph_metric("x", "y", scale),
        "generator_x": ["-a*y", "a*x"],
        "generator_y": ["-b*y", "b*x"],
        "hamiltonian": "-sqrt(1 - x**2 - y**2)",
        "symplectic": "1/sqrt(1 - x**2 - y**2)",
    }
    south = {
        "coordinates": ["u", "v"],
        "lower": [-w, -w],
        "upper": [w, w],
        "orientation": 1,
        "metric": _graph_metric("u", "v", scale),
        "generator_x": ["a*v", "-a*u"],
        "generator_y": ["b*v", "-b*u"],
        "hamiltonian": "sqrt(1 - u**2 - v**2)",
        "symplectic": "1/sqrt(1 - u**2 - v**2)",
    }
    return {"sphere": sphere, "north": north, "south": south}


def sphere_document(a, b, kind="dh", scale=1.0):
    """The schema-1 document of the unit sphere with ``X = a d_phi``, ``Y = b d_phi``."""
    if kind not in ("dh", "euler"):
        raise ScenarioSchemaError(f"sphere scenarios are of kind 'dh' or 'euler', got {kind!r}")
    if kind == "dh" and a == 0 and b == 0:
        raise PreconditionError("a DH sphere scenario needs (a, b) != (0, 0)")
    c2 = abs(complex(a, b)) ** 2
    name = f"s2-{kind}-a{a:g}-b{b:g}" + ("" if scale == 1 else "-scaled")
    document = {
        "schema_version": SCHEMA_VERSION,
        "id": name,
        "description": f"unit sphere{'' if scale == 1 else f' with metric {scale:g} g'}, X = {a:g} d_phi, Y = {b:g} d_phi",
        "parameters": {"a": a, "b": b},
        "integration_chart": "sphere",
        "charts": _sphere_charts(scale),
        "hypotheses": {"commuting": True},
        "eta": {"kind": "dh", "coefficient": ["a", "b"]} if kind == "dh" else {"kind": "euler"},
    }
    if c2 == 0:
        document["zero_set"] = [{"id": "sphere", "kind": "full", "chart": "sphere"}]
    else:
        # |<K,K>| = scale |c|^2 sin(theta)^2 = scale |c|^2 r^2 in the probe charts
        tube_gap = 0.8 * scale * c2 * TUBE_RADIUS**2
        region_gap = 0.9 * scale * c2 * math.sin(GAP_ANGLE) ** 2
        document["zero_set"] = [
            {"id": "north-pole", "kind": "point", "chart": "north", "location": [0, 0],
             "tube_radius": TUBE_RADIUS, "gap": round(tube_gap, 6)},
            {"id": "south-pole", "kind": "point", "chart": "south", "location": [0, 0],
             "tube_radius": TUBE_RADIUS, "gap": round(tube_gap, 6)},
        ]
        document["gap_region"] = {"lower": [GAP_ANGLE, 0], "upper": [f"pi - {GAP_ANGLE}", "2*pi"], "gap": round(region_gap, 6)}
    if kind == "dh":
        c = "(a + I*b)"
        document["expected"] = {
            "lhs": f"4*pi*sinh({c})/{c}",
            "provenance": "closed form of the integral of exp(-c cos(theta)) sin(theta) over the sphere",
        }
    else:
        document["expected"] = {"lhs": "2", "provenance": "Euler characteristic of the sphere (Gauss-Bonnet)"}
    return document


def build_sphere_scenario(a, b, kind="dh", scale=1.0, validate=True):
    """Unit sphere (optionally with metric ``scale * g``), ``X = a d_phi``, ``Y = b d_phi``.

    Parameters
    ----------
    a, b : `float`
    kind : `str`
        ``"dh"`` for ``eta = exp(c (-cos(theta)) + sin(theta) dtheta ^ dphi)`` with
        c = a + sqrt(-1) b, ``"euler"`` for the equivariant Euler form.
    scale : `float`, optional
        Constant factor of the metric. eta uses the declared symplectic form, not the volume
        form of the metric, so it does not change.

    Returns
    -------
    scenario : `Scenario`

    Raises
    ------
    PreconditionError
        For ``kind="dh"`` with ``a = b = 0``.
    """
    return scenario_from_dict(sphere_document(a, b, kind, scale), validate=validate)


def torus_document(kind="degenerate", eta=None):
    """The schema-1 document of the flat torus ``[0, 2 pi)^2``."""
    if kind not in ("degenerate", "empty"):
        raise ScenarioSchemaError(f"torus scenarios are 'degenerate' or 'empty', got {kind!r}")
    chart = {
        "coordinates": ["x", "y"],
        "lower": [0, 0],
        "upper": ["2*pi", "2*pi"],
        "periodic": [True, True],
        "orientation": 1,
        "metric": [["1", "0"], ["0", "1"]],
        "generator_x": ["1", "0"],
        "generator_y": ["0", "1"] if kind == "degenerate" else ["0", "0"],
    }
    document = {
        "schema_version": SCHEMA_VERSION,
        "id": f"t2-{kind}",
        "integration_chart": "torus",
        "charts": {"torus": chart},
    }
    if kind == "degenerate":
        components = {"": "1"} if eta is None else eta
        chart["eta_components"] = components
        document.update(
            description="flat torus, X = d_x, Y = d_y: <K,K> vanishes identically and M0 = M",
            hypotheses={"commuting": True},
            zero_set=[{"id": "torus", "kind": "full", "chart": "torus"}],
            eta={"kind": "custom"},
            expected={"lhs": "4*pi**2" if "0,1" in components else "0",
                      "provenance": "area of the torus times the top coefficient" if "0,1" in components else "no top-degree part"},
        )
    else:
        document.update(
            description="flat torus, X = d_x, Y = 0: X has no zeros",
            hypotheses={"commuting": True},
            zero_set=[],
            gap_region={"lower": [0, 0], "upper": ["2*pi", "2*pi"], "gap": 0.5},
            eta={"kind": "euler"},
            expected={"lhs": "0", "provenance": "Euler characteristic of the torus"},
        )
    return document


def build_torus_scenario(kind="degenerate", eta=None, validate=True):
    """Flat torus ``[0, 2 pi)^2``.

    Parameters
    ----------
    kind : `str`
        ``"degenerate"`` (X = d_x, Y = d_y, M0 = M) or ``"empty"`` (X = d_x, Y = 0, M0 empty,
        eta the Euler form).
    eta : `dict`, optional
        Components of a custom eta for the degenerate torus (index key to expression).
        Default: the constant 1.
    """
    return scenario_from_dict(torus_document(kind, eta), validate=validate)
