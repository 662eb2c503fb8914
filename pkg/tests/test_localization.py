"""Tests the localization checks of localization.py
"""
import json
import os

import numpy as np
import pytest
from numpy.testing import assert_allclose
from yaml import load, Loader

from equiloc import config
from equiloc.errors import InapplicableCheckError, PreconditionError
from equiloc.localization import (
    FAIL,
    PASS,
    LocalizationReport,
    corollary1_verify,
    exact_dh_integral,
    lemma4_scan,
    lemma_suite,
    scan_deviation,
    theorem1_verify,
    theorem2_verify,
)
from equiloc.quadrature import QuadratureGrid
from equiloc.scenarios import resolve_scenario, scenario_from_dict, sphere_document

import logging

logger = logging.getLogger(__name__)

RESOLUTION = 64


def expected_values(name):
    yaml_loc = os.path.join(os.path.dirname(__file__), "test_expected", f"{name}.yaml")
    with open(yaml_loc, "r") as stream:
        return load(stream, Loader=Loader)


def test_exact_dh_integral():
    assert_allclose(exact_dh_integral(0), 4 * np.pi)
    assert_allclose(exact_dh_integral(1), 14.768013746, rtol=1e-7)
    c = 1 + 2j
    assert_allclose(exact_dh_integral(c), 4 * np.pi * np.sinh(c) / c)


def test_theorem1_on_shipped_scenarios():
    for name in ("s2-dh-a1-b0", "s2-dh-a1-b0-scaled", "s2-euler-a1-b0", "s2-euler-a0-b0", "t2-empty", "t2-degenerate"):
        expected = expected_values(name)
        report = theorem1_verify(resolve_scenario(name), resolution=RESOLUTION)
        assert report.verdict == PASS, report.notes
        assert_allclose(report.lhs, expected["lhs"], rtol=expected["rtol"], atol=1e-9)
        assert_allclose(report.rhs, expected["lhs"], rtol=expected["rtol"], atol=1e-9)
        components = dict(report.components)
        assert sorted(components) == sorted(expected["components"])
        for component, value in expected["components"].items():
            assert_allclose(components[component], value, rtol=expected["rtol"], atol=1e-9)


def test_theorem1_with_a_complex_coefficient():
    c = 1 + 2j
    report = theorem1_verify(resolve_scenario("s2-dh-a1-b2"), resolution=RESOLUTION)
    assert report.passed, report.notes
    assert_allclose(report.lhs, exact_dh_integral(c), rtol=1e-8)
    assert_allclose(report.rhs, exact_dh_integral(c), rtol=1e-8)
    components = dict(report.components)
    assert_allclose(components["north-pole"], -2 * np.pi * np.exp(-c) / c, rtol=1e-8)
    assert_allclose(components["south-pole"], 2 * np.pi * np.exp(c) / c, rtol=1e-8)
    assert report.residuals["reference[rhs]"] < 1e-8
    assert report.residuals["normal_commutation[north-pole]"] < 1e-12


def test_corollary1():
    report = corollary1_verify(resolve_scenario("s2-euler-a1-b0"), resolution=RESOLUTION)
    assert report.passed, report.notes
    assert report.check == "corollary1"
    assert report.residuals["x_norm[north-pole]"] < 1e-12
    with pytest.raises(InapplicableCheckError):
        corollary1_verify(resolve_scenario("s2-dh-a1-b2"), resolution=RESOLUTION)


def test_theorem2_characteristic_forms():
    scenario = resolve_scenario("s2-dh-a1-b2")
    for f in ("1", "x", "x^2"):
        report = theorem2_verify(scenario, f, resolution=RESOLUTION)
        assert report.passed, report.notes
        # trace and pole contributions cancel on the sphere
        assert abs(report.lhs) < 1e-9
        assert abs(report.rhs) < 1e-9
        assert report.residuals["closedness[north]"] < 1e-9
    report = theorem2_verify(scenario, "x^2", resolution=RESOLUTION)
    components = dict(report.components)
    # Tr(mu^2) = -2 c^2 over -c / 2 pi at the north pole
    assert_allclose(components["north-pole"], 4 * np.pi * (1 + 2j), rtol=1e-8)


def test_negative_controls_fail():
    closedness = theorem1_verify(resolve_scenario("broken-closedness"), resolution=RESOLUTION)
    assert closedness.verdict == FAIL
    assert "closedness[sphere]" in closedness.failures
    commutator = theorem1_verify(resolve_scenario("broken-commutator"), resolution=RESOLUTION)
    assert commutator.verdict == FAIL
    assert "commutator[sphere]" in commutator.failures
    assert commutator.rhs == 0


def test_commuting_hypothesis_is_required():
    document = sphere_document(1, 2)
    document["hypotheses"]["commuting"] = False
    scenario = scenario_from_dict(document)
    with pytest.raises(PreconditionError) as info:
        theorem1_verify(scenario, resolution=RESOLUTION)
    assert not isinstance(info.value, InapplicableCheckError)
    with pytest.raises(PreconditionError):
        theorem2_verify(scenario, "x", resolution=RESOLUTION)


def test_unconfirmed_zero_set_fails():
    document = sphere_document(1, 0)
    document["zero_set"][0]["gap"] = 5.0
    report = theorem1_verify(scenario_from_dict(document), resolution=RESOLUTION)
    assert report.verdict == FAIL
    assert report.rhs is None
    assert "zero_set" in report.failures


def test_lemma4_scan_is_flat():
    scenario = resolve_scenario("s2-dh-a1-b0")
    geometry = scenario.integration
    grid = QuadratureGrid(geometry.chart, RESOLUTION)
    scan = lemma4_scan(geometry.pair, geometry.metric, scenario.eta(), (0.0, 0.5, 1.0), grid)
    assert [s for s, _ in scan] == [0.0, 0.5, 1.0]
    assert_allclose(scan[0][1], exact_dh_integral(1), rtol=1e-10)
    assert scan_deviation(scan) < 1e-8

    broken = resolve_scenario("broken-closedness")
    with pytest.raises(PreconditionError):
        lemma4_scan(broken.pair, broken.integration.metric, broken.eta(), (0.0, 1.0), grid)
    # without the closedness gate the scan of a non-closed eta moves with s
    drifting = lemma4_scan(broken.pair, broken.integration.metric, broken.eta(), (0.0, 1.0), grid, check_closed=False)
    assert_allclose(drifting[0][1], exact_dh_integral(1) + 2 * np.pi, rtol=1e-10)
    assert scan_deviation(drifting) > 1e-2


def test_lemma_suite():
    report = lemma_suite(resolve_scenario("s2-dh-a1-b2"), resolution=RESOLUTION)
    assert report.passed, report.notes
    assert report.lhs is None and report.rhs is None
    for name in ("lemma1", "lemma2", "lemma3", "lemma4_flatness", "lemma5[field]", "lemma6", "lemma7_closedness"):
        assert name in report.residuals
    assert [s for s, _ in report.s_scan] == [0.0, 0.5, 1.0, 2.0]

    broken = lemma_suite(resolve_scenario("broken-closedness"), resolution=RESOLUTION)
    assert "lemma4_flatness" not in broken.residuals
    assert broken.s_scan == []


def test_report_serialization():
    report = LocalizationReport(scenario="sphere", check="theorem1", lhs=1 + 2j, rhs=1 + 2j)
    report.record("small", 1e-12, 1e-9)
    report.record("large", 1.0, 1e-9)
    assert report.decide() == FAIL
    assert report.failures == ["large"]
    document = report.to_dict()
    assert document["lhs"] == {"re": 1.0, "im": 2.0}
    assert json.loads(json.dumps(document)) == document

    one_sided = LocalizationReport(scenario="sphere", check="theorem1", lhs=1.0)
    assert one_sided.decide() == FAIL
    assert LocalizationReport(scenario="sphere", check="lemmas").decide() == PASS

    # the default tolerance is the configured integral tolerance
    close = LocalizationReport(scenario="sphere", check="theorem1", lhs=1.0, rhs=1.0 + config.INTEGRAL_TOL)
    assert close.decide() == PASS
    far = LocalizationReport(scenario="sphere", check="theorem1", lhs=1.0, rhs=1.0 + 3 * config.INTEGRAL_TOL)
    assert far.decide() == FAIL


if __name__ == "__main__":
    """
    Tests the localization checks
    """

    # introspect and run all the functions starting with 'test'
    for f in dir():
        if f.startswith("test"):
            print(f)
            globals()[f]()
