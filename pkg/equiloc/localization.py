"""
Executable localization statements.

Each verification computes both sides of an identity by separate routes: the left side
only integrates forms over the integration chart, the right side only evaluates normal
data and Pfaffians on the confirmed zero-set components. The outcome is a
`LocalizationReport` with named residuals, a reason log and a verdict.
"""

import cmath
import dataclasses
import logging
import math
import time

import numpy as np

from . import config as settings
from .equivariant import (
    Polynomial,
    VectorValuedForm,
    characteristic_closedness_residual,
    characteristic_form,
    bianchi_residual,
    d_equivariant,
    dual_form,
    equivariant_curvature,
    invariance_residual,
    lemma1_residual,
    lemma3_residual,
    lemma5_residual,
    moment_endomorphism,
    moment_identity_residual,
    vector_invariance_residual,
)
from .errors import InapplicableCheckError, PreconditionError, ZeroSetError
from .forms_engine import Sample, exp_form, random_mixed_form, wedge
from .geometry import (
    bianchi_first_residual,
    christoffel,
    curvature_skew_residual,
    lemma2_residual,
    metric_compatibility_residual,
    riemann,
)
from .quadrature import QuadratureGrid, integrate_component, integrate_top
from .skewlinalg import inverse_of_mixed_form
from .zeroset import normal_data, normal_pfaffian, pairing_field

logger = logging.getLogger(__name__)

PASS = "pass"
FAIL = "fail"

# Random mixed forms per scenario in the Lemma 1 check
LEMMA1_FORMS = 10

# Polynomials whose characteristic forms are checked for closedness
CLOSEDNESS_POLYNOMIALS = ("x^2", "x^3", "x^4")


def _complex_dict(value):
    if value is None:
        return None
    return {"re": float(value.real), "im": float(value.imag)}


@dataclasses.dataclass
class LocalizationReport:
    """Outcome of one check on one scenario.

    Attributes
    ----------
    scenario, check : `str`
    lhs, rhs : `complex` or `None`
        Integral over M and the sum of component contributions (``None`` for checks
        without two sides, or when a side could not be formed).
    components : `list` of (`str`, `complex`)
        Right-hand side contribution of each zero-set component; ``rhs`` is their sum.
    s_scan : `list` of (`float`, `complex`)
    residuals : `dict`
        Named residuals; ``None`` marks a check that could not be carried out.
    tolerances : `dict`
        Tolerance each residual was held to.
    failures : `list` of `str`
        Names of the residuals that failed.
    verdict : `str`
        ``"pass"`` or ``"fail"``.
    config : `dict`
        Resolution, tolerances and s-values used.
    notes : `list` of `str`
        Reason log, one line per decision.
    timings : `dict`
        Seconds spent per stage; not part of the determinism contract.
    """

    scenario: str
    check: str
    lhs: complex = None
    rhs: complex = None
    reference: complex = None
    components: list = dataclasses.field(default_factory=list)
    s_scan: list = dataclasses.field(default_factory=list)
    residuals: dict = dataclasses.field(default_factory=dict)
    tolerances: dict = dataclasses.field(default_factory=dict)
    failures: list = dataclasses.field(default_factory=list)
    verdict: str = FAIL
    config: dict = dataclasses.field(default_factory=dict)
    notes: list = dataclasses.field(default_factory=list)
    timings: dict = dataclasses.field(default_factory=dict)

    def note(self, message):
        self.notes.append(message)
        logger.info(f"[{self.scenario}/{self.check}] {message}")

    def record(self, name, value, tolerance):
        """Store a residual and fail it when above ``tolerance``."""
        self.residuals[name] = float(value)
        self.tolerances[name] = tolerance
        if value > tolerance:
            self.failures.append(name)
            self.note(f"{name} = {value:.3e} exceeds {tolerance:.1e}")
            logger.warning(f"[{self.scenario}/{self.check}] hypothesis {name} failed: {value:.3e}")
        else:
            logger.debug(f"[{self.scenario}/{self.check}] {name} = {value:.3e} within {tolerance:.1e}")

    def record_failure(self, name, message):
        """A check that could not be carried out at all."""
        self.residuals[name] = None
        self.failures.append(name)
        self.note(f"{name} failed: {message}")

    @property
    def difference(self):
        if self.lhs is None or self.rhs is None:
            return None
        return abs(self.lhs - self.rhs)

    def decide(self, tolerance=settings.INTEGRAL_TOL):
        """Set the verdict: every residual within tolerance and, with two sides, they agree."""
        ok = not self.failures
        if self.lhs is not None and self.rhs is not None:
            bound = tolerance * (1 + abs(self.lhs))
            agree = self.difference <= bound
            self.note(f"|lhs - rhs| = {self.difference:.3e} {'<=' if agree else '>'} {bound:.3e}")
            ok = ok and agree
        elif self.check not in ("lemmas",):
            self.note("only one side could be formed")
            ok = False
        if self.failures:
            self.note(f"failed: {', '.join(self.failures)}")
        self.verdict = PASS if ok else FAIL
        self.note(f"verdict {self.verdict}")
        return self.verdict

    @property
    def passed(self):
        return self.verdict == PASS

    def to_dict(self):
        return {
            "scenario": self.scenario,
            "check": self.check,
            "lhs": _complex_dict(self.lhs),
            "rhs": _complex_dict(self.rhs),
            "reference": _complex_dict(self.reference),
            "components": [{"id": name, "value": _complex_dict(value)} for name, value in self.components],
            "s_scan": [{"s": s, "value": _complex_dict(value)} for s, value in self.s_scan],
            "residuals": self.residuals,
            "tolerances": self.tolerances,
            "failures": self.failures,
            "verdict": self.verdict,
            "config": self.config,
            "notes": self.notes,
            "timings": self.timings,
        }


def exact_dh_integral(c):
    """``4 pi sinh(c) / c``: the integral of ``exp(-c cos(theta)) sin(theta)`` over the sphere."""
    c = complex(c)
    if c == 0:
        return complex(4 * math.pi)
    return 4 * math.pi * cmath.sinh(c) / c


def lemma4_scan(
    pair,
    g,
    eta,
    s_values=settings.S_VALUES,
    grid=None,
    check_closed=True,
    sample=None,
    tolerance=settings.RESIDUAL_TOL,
    threads=settings.THREADS,
):
    """``s -> integral of exp(-s d_K K') ^ eta`` over the chart of ``eta``.

    Parameters
    ----------
    pair : `equiloc.equivariant.EquivariantPair`
    g : `equiloc.geometry.MetricField`
    eta : `equiloc.forms_engine.MixedForm`
    s_values : `list` of `float`, optional
    grid : `equiloc.quadrature.QuadratureGrid`, optional
    check_closed : `bool`, optional
        Refuse eta that is not invariant and d_K-closed. Default: True.
    sample : `equiloc.forms_engine.Sample`, optional
        Points for the closedness check.

    Returns
    -------
    scan : `list` of (`float`, `complex`)

    Raises
    ------
    PreconditionError
        When ``check_closed`` and eta is not equivariantly closed.
    """
    chart = g.chart
    if check_closed:
        sample = Sample.random(chart) if sample is None else sample
        closed = d_equivariant(pair, eta).max_norm(sample)
        invariant = invariance_residual(pair, eta, sample)
        if max(closed, invariant) > tolerance:
            raise PreconditionError(
                f"eta is not equivariantly closed (d_K residual {closed:.3e}, invariance residual {invariant:.3e})"
            )
    grid = QuadratureGrid(chart) if grid is None else grid
    exact = d_equivariant(pair, dual_form(pair, g))
    scan = []
    for s in s_values:
        form = eta if s == 0 else wedge(exp_form(exact * (-float(s))), eta)
        value = integrate_top(chart, form, grid, threads=threads)
        logger.debug(f"lemma 4 scan: s = {s}: {value:.12g}")
        scan.append((float(s), value))
    return scan


def scan_deviation(scan):
    """Largest pairwise relative deviation ``|I_s - I_t| / (1 + |I_s|)`` of a scan."""
    values = [value for _, value in scan]
    return max(
        (abs(a - b) / (1 + abs(a)) for i, a in enumerate(values) for b in values[i + 1:]),
        default=0.0,
    )


def _new_report(scenario, check, resolution, residual_tol, integral_tol, s_values=None):
    report = LocalizationReport(scenario=scenario.id, check=check)
    report.config = {
        "resolution": resolution,
        "residual_tol": residual_tol,
        "integral_tol": integral_tol,
    }
    if s_values is not None:
        report.config["s_values"] = [float(s) for s in s_values]
    return report


def _copy_load_checks(report, scenario, residual_tol):
    for name, value in sorted(scenario.residuals.items()):
        if name.startswith("killing") or name == "gap":
            report.residuals[name] = float(value)
            continue
        if name.startswith(("closedness", "invariance")) and report.check == "theorem2":
            # eta of theorem 2 is the characteristic form, checked separately
            continue
        report.record(name, value, residual_tol)
    for name, message in sorted(scenario.failures.items()):
        if name not in scenario.residuals:
            report.record_failure(name, message)


def _gate_commuting(scenario):
    if scenario.has_imaginary_part and not scenario.commuting:
        raise PreconditionError(
            f"scenario {scenario.id} has Y != 0 but does not declare the commuting hypothesis [X, Y] = 0"
        )


def _localize(report, scenario, eta_on, resolution, residual_tol, threads):
    """Both sides of the localization identity for the forms ``eta_on(chart name)``."""
    start = time.perf_counter()
    geometry = scenario.integration
    report.lhs = integrate_top(geometry.chart, eta_on(geometry.name), QuadratureGrid(geometry.chart, resolution), threads=threads)
    report.timings["lhs"] = time.perf_counter() - start
    report.note(f"lhs = {report.lhs:.12g} on {geometry.name} at resolution {resolution}")

    if "zero_set" in scenario.failures:
        report.note("rhs not formed: the zero set was not confirmed")
        return
    start = time.perf_counter()
    total = 0j
    for component in scenario.components:
        probe = scenario.charts[component.declaration.chart]
        try:
            normal_data(component, probe.connection)
        except ZeroSetError as error:
            report.record_failure(f"normal_data[{component.id}]", str(error))
            report.rhs = None
            return
        for name in ("tangential", "tangency", "normal_commutation"):
            if name in component.residuals:
                report.record(f"{name}[{component.id}]", component.residuals[name], residual_tol)
        denominator = normal_pfaffian(component)
        contribution = integrate_component(
            component, wedge(eta_on(probe.name), inverse_of_mixed_form(denominator)), resolution, threads=threads
        )
        report.components.append((component.id, contribution))
        report.note(f"component {component.id} ({component.kind.value}, normal rank {component.normal_rank}): {contribution:.12g}")
        total += contribution
    report.rhs = total
    report.timings["rhs"] = time.perf_counter() - start
    if not scenario.components:
        report.note("zero set is empty: rhs = 0")


def _compare_reference(report, scenario, integral_tol):
    if scenario.expected is None:
        return
    report.reference = scenario.expected
    for side in ("lhs", "rhs"):
        value = getattr(report, side)
        if value is not None:
            deviation = abs(value - scenario.expected) / (1 + abs(scenario.expected))
            report.record(f"reference[{side}]", deviation, integral_tol)
    report.note(f"reference value {scenario.expected:.12g} ({scenario.provenance})")


def _theorem1(scenario, check, resolution, residual_tol, integral_tol, threads):
    _gate_commuting(scenario)
    report = _new_report(scenario, check, resolution, residual_tol, integral_tol)
    report.note(f"eta kind {scenario.eta_kind}, {len(scenario.components)} zero-set components")
    _copy_load_checks(report, scenario, residual_tol)
    _localize(report, scenario, scenario.eta, resolution, residual_tol, threads)
    _compare_reference(report, scenario, integral_tol)
    return report


def theorem1_verify(
    scenario,
    resolution=settings.RESOLUTION,
    residual_tol=settings.RESIDUAL_TOL,
    integral_tol=settings.INTEGRAL_TOL,
    threads=settings.THREADS,
):
    """Check ``int_M eta = int_M0 eta / Pf((-mu^N(X) - sqrt(-1) mu^N(Y) + R^N) / 2 pi)``.

    Parameters
    ----------
    scenario : `equiloc.scenarios.Scenario`
        A validated scenario; its eta is used.
    resolution : `int`, optional
        Quadrature nodes per axis.

    Returns
    -------
    report : `LocalizationReport`

    Raises
    ------
    PreconditionError
        When Y != 0 and the scenario does not declare the commuting hypothesis.
    DegeneratePfaffianError
        When a localization denominator has a vanishing 0-form part.
    """
    report = _theorem1(scenario, "theorem1", resolution, residual_tol, integral_tol, threads)
    report.decide(integral_tol)
    return report


def corollary1_verify(
    scenario,
    resolution=settings.RESOLUTION,
    residual_tol=settings.RESIDUAL_TOL,
    integral_tol=settings.INTEGRAL_TOL,
    threads=settings.THREADS,
):
    """Theorem 1 for ``Y = 0``, with M0 cross-checked against the zeros of ``|X|^2``.

    Raises
    ------
    InapplicableCheckError
        When the scenario has a nonzero Y.
    """
    if scenario.has_imaginary_part:
        raise InapplicableCheckError(f"corollary 1 needs Y = 0; scenario {scenario.id} declares a nonzero Y")
    report = _theorem1(scenario, "corollary1", resolution, residual_tol, integral_tol, threads)
    for component in scenario.components:
        x = component.pair.x.real
        norm = component.metric.pairing(x, x)
        report.record(f"x_norm[{component.id}]", float(np.max(np.abs(norm.values(component.sample())))), residual_tol)
    report.decide(integral_tol)
    return report


def theorem2_verify(
    scenario,
    f,
    resolution=settings.RESOLUTION,
    residual_tol=settings.RESIDUAL_TOL,
    integral_tol=settings.INTEGRAL_TOL,
    threads=settings.THREADS,
    count=settings.SAMPLE_POINTS,
):
    """Theorem 1 with eta the equivariant characteristic form ``Tr f(R~)``.

    Parameters
    ----------
    scenario : `equiloc.scenarios.Scenario`
    f : `equiloc.equivariant.Polynomial` or `str`
    """
    _gate_commuting(scenario)
    if not isinstance(f, Polynomial):
        f = Polynomial.parse(f)
    report = _new_report(scenario, "theorem2", resolution, residual_tol, integral_tol)
    report.config["polynomial"] = [[c.real, c.imag] for c in f.coefficients]
    report.note(f"eta = Tr f(R~) for {f}")
    _copy_load_checks(report, scenario, residual_tol)

    forms = {}

    def eta_on(name):
        if name not in forms:
            forms[name] = scenario.charts[name].characteristic_form(f)
        return forms[name]

    for name, geometry in scenario.charts.items():
        sample = Sample.random(geometry.chart, count=count)
        residual = characteristic_closedness_residual(f, geometry.curvature, geometry.pair, sample)
        report.record(f"closedness[{name}]", residual, residual_tol)
    _localize(report, scenario, eta_on, resolution, residual_tol, threads)
    report.decide(integral_tol)
    return report


def connection_independence(f, pair, metric_a, metric_b, grid=None, threads=settings.THREADS):
    """Integrals of ``Tr f(R~)`` for two invariant metrics on the same chart.

    Returns
    -------
    first, second : `complex`
    deviation : `float`
        ``|first - second| / (1 + |first|)``.
    """
    if not isinstance(f, Polynomial):
        f = Polynomial.parse(f)
    chart = metric_a.chart
    grid = QuadratureGrid(chart) if grid is None else grid
    values = []
    for metric in (metric_a, metric_b):
        form = characteristic_form(f, equivariant_curvature(pair, metric, christoffel(metric)))
        values.append(integrate_top(chart, form, grid, threads=threads))
    first, second = values
    return first, second, abs(first - second) / (1 + abs(first))


def lemma_suite(
    scenario,
    resolution=settings.RESOLUTION,
    residual_tol=settings.RESIDUAL_TOL,
    integral_tol=settings.INTEGRAL_TOL,
    s_values=settings.S_VALUES,
    count=settings.SAMPLE_POINTS,
    seed=settings.SEED,
    threads=settings.THREADS,
):
    """Pointwise identities of the equivariant complex on the integration chart.

    Lemma 1 on random forms, Lemmas 2 and 3 on the dual form, the Lemma 4 scan when eta
    is closed, invariance preservation by the equivariant connection, the equivariant
    Bianchi identity, closedness and connection independence of characteristic forms,
    the two constructions of the moment and the Riemannian sanity identities.
    """
    report = _new_report(scenario, "lemmas", resolution, residual_tol, integral_tol, s_values)
    geometry = scenario.integration
    chart, g, pair, connection = geometry.chart, geometry.metric, geometry.pair, geometry.connection
    sample = Sample.random(chart, count=count, seed=seed)
    for name, value in sorted(scenario.residuals.items()):
        if name.startswith("killing"):
            report.residuals[name] = float(value)
    start = time.perf_counter()

    rng = np.random.default_rng(seed)
    lemma1 = max(lemma1_residual(pair, random_mixed_form(chart, rng), sample) for _ in range(LEMMA1_FORMS))
    report.record("lemma1", lemma1, residual_tol)
    if scenario.commuting or not pair.has_imaginary_part:
        report.record("lemma2", lemma2_residual(pair.x, pair.y, g, sample), residual_tol)
    report.record("lemma3", lemma3_residual(pair, g, sample), residual_tol)
    report.record("dual_invariance", invariance_residual(pair, dual_form(pair, g), sample), residual_tol)
    pairing = pairing_field(pair, g)
    report.record("pairing_expansion", pairing.expansion_residual(sample), residual_tol)

    eta = scenario.eta()
    closed = max(d_equivariant(pair, eta).max_norm(sample), invariance_residual(pair, eta, sample))
    if closed <= residual_tol:
        grid = QuadratureGrid(chart, resolution)
        report.s_scan = lemma4_scan(pair, g, eta, s_values, grid, check_closed=False, threads=threads)
        report.record("lemma4_flatness", scan_deviation(report.s_scan), integral_tol)
    else:
        report.note(f"lemma 4 scan skipped: eta is not equivariantly closed (residual {closed:.3e})")

    k = VectorValuedForm.from_vector_field(pair.combined)
    closed_dual = d_equivariant(pair, dual_form(pair, g))
    k_times_closed = VectorValuedForm(chart, [wedge(closed_dual, c) for c in k.components])
    for label, form in (("field", k), ("field_times_dual", k_times_closed)):
        report.record(f"lemma5_input[{label}]", vector_invariance_residual(pair, form, sample), residual_tol)
        report.record(f"lemma5[{label}]", lemma5_residual(pair, connection, form, sample), residual_tol)

    curvature = geometry.curvature
    report.record("lemma6", bianchi_residual(curvature, pair, connection, sample), residual_tol)
    report.record(
        "lemma7_closedness",
        max(characteristic_closedness_residual(Polynomial.parse(p), curvature, pair, sample) for p in CLOSEDNESS_POLYNOMIALS),
        residual_tol,
    )
    first, second, deviation = connection_independence(
        "x^2", pair, g, g.scaled(2.0), QuadratureGrid(chart, resolution), threads=threads
    )
    report.note(f"integral of Tr(R~^2): {first:.12g} for g, {second:.12g} for 2g")
    report.record("lemma7_connection_independence", deviation, integral_tol)

    for label, field in (("x", pair.x), ("y", pair.y)):
        report.record(f"moment_identity[{label}]", moment_identity_residual(field, connection, sample), residual_tol)
        report.record(f"moment_skew[{label}]", moment_endomorphism(field, connection).skew_residual(g, sample), residual_tol)
    report.record("metric_compatibility", metric_compatibility_residual(connection, sample), residual_tol)
    curvature_field = riemann(connection)
    report.record("curvature_skew", curvature_skew_residual(curvature_field, sample), residual_tol)
    report.record("bianchi_first", bianchi_first_residual(curvature_field, sample), residual_tol)

    report.timings["lemmas"] = time.perf_counter() - start
    report.decide(integral_tol)
    return report
