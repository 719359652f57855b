import math
import os

import pytest

import tiltcheck

FIXTURES = os.environ.get("TILTCHECK_FIXTURES", "fixtures")


def fixture(name):
    return tiltcheck.load_problem(os.path.join(FIXTURES, name))


def test_parse_and_roundtrip():
    p = fixture("nlp1.nlp")
    assert p.n == 4
    assert p.num_equalities == 1
    assert p.num_inequalities == 6
    reparsed = tiltcheck.parse_problem(p.to_text(), p.name)
    assert reparsed.to_text() == p.to_text()


def test_nlp1_analysis():
    rec = tiltcheck.analyze(fixture("nlp1.nlp"))
    assert rec["stationary"] is True
    assert rec["cq"]["crcq"]["verdict"] == "fails-with-witness"
    assert rec["cq"]["crcq"]["witness"]["family"] == [5, 6]
    assert rec["cq"]["rcrcq"]["verdict"] == "holds-sampled"
    assert rec["multipliers"]["support_union"] == [1, 2, 3, 4, 5, 6]
    assert rec["tilt"]["verdict"] == "tilt-stable"
    assert math.isclose(rec["tilt"]["tilt_bound"], 1.0, abs_tol=1e-9)


def test_nlp2_analysis():
    rec = tiltcheck.analyze(fixture("nlp2.nlp"))
    assert rec["tilt"]["verdict"] == "not-tilt-stable"
    direction = rec["tilt"]["failure_direction"]
    assert abs(direction[3]) == pytest.approx(1.0, abs=1e-8)


def test_vertex_enumeration():
    vertices = tiltcheck.enumerate_vertices(fixture("nlp1.nlp"))
    assert len(vertices) == 8
    assert any(
        math.isclose(v[0], 3 / 8, abs_tol=1e-8) and math.isclose(v[1], 5 / 8, abs_tol=1e-8)
        for v in vertices
    )


def test_gradient_check():
    grad_err, hess_err = tiltcheck.check_gradients(fixture("nlp2.nlp"))
    assert grad_err < 1e-6
    assert hess_err < 1e-6


def test_records_are_deterministic():
    a = tiltcheck.analyze_json(fixture("nlp1.nlp"))
    b = tiltcheck.analyze_json(fixture("nlp1.nlp"))
    assert a == b


def test_nonstationary_short_circuit():
    rec = tiltcheck.analyze(fixture("nonstationary.nlp"))
    assert rec["stationary"] is False
    assert "tilt" not in rec
