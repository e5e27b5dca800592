import itertools
import json

from hypothesis import given, settings, strategies as st

from pmfix.axiom_check import (
    Axiom,
    AxiomReport,
    check_all,
    check_axioms,
    check_induced_metric,
    check_zero_implies_equal,
    reevaluate,
)
from pmfix.pm_core import Carrier, CandidateSpace, Point, make_space, sample_points

import pytest


def _witnesses(report, axiom):
    return [tuple(p.value for p in v.witness) for v in report.by_axiom(axiom)]


def _brute_force_p4(q, pts):
    return [
        (x, y, z)
        for x, y, z in itertools.product(pts, repeat=3)
        if q(x, y) > q(x, z) + q(z, y) - q(z, z)
    ]


def test_max_space_passes_on_small_grid(max_space):
    report = check_axioms(max_space, [0, 1, 2, 3], 1e-12)
    assert report.passed
    assert report.sample_size == 4


def test_max_space_passes_on_default_sample(max_space):
    assert check_all(max_space, sample_points(max_space)).passed


def test_min_fails_p2_with_witness():
    q = CandidateSpace(min)
    report = check_axioms(q, [1, 2])
    assert _witnesses(report, Axiom.P2) == [(2.0, 1.0)]
    v = report.by_axiom(Axiom.P2)[0]
    assert (v.lhs, v.rhs) == (2.0, 1.0)


def test_squared_difference_fails_p4():
    def q(a, b):
        return (a - b) ** 2

    report = check_axioms(CandidateSpace(q), [0, 1, 2])
    found = _witnesses(report, Axiom.P4)
    assert (0.0, 2.0, 1.0) in found
    v = next(v for v in report.by_axiom(Axiom.P4) if v.witness[0].value == 0.0)
    assert (v.lhs, v.rhs) == (4.0, 2.0)
    # identical to a brute-force scan
    assert sorted(found) == sorted(_brute_force_p4(q, [0.0, 1.0, 2.0]))


def test_squared_difference_fails_induced_triangle():
    report = check_induced_metric(CandidateSpace(lambda a, b: (a - b) ** 2), [0, 1, 2])
    bad = report.by_axiom(Axiom.PS_TRIANGLE)
    # ps = 2q here: ps(0, 2) = 8 against ps(0, 1) + ps(1, 2) = 4
    assert {w for w in _witnesses(report, Axiom.PS_TRIANGLE)} == {(0.0, 2.0, 1.0), (2.0, 0.0, 1.0)}
    assert all((v.lhs, v.rhs) == (8.0, 4.0) for v in bad)


def test_zero_implies_equal(lift, max_space):
    assert check_zero_implies_equal(lift, [1]).passed
    assert check_zero_implies_equal(max_space, [0, 1]).passed
    bad = CandidateSpace.from_matrix([[0, 0], [0, 0]])
    report = check_zero_implies_equal(bad, [0, 1])
    assert _witnesses(report, Axiom.ZERO_IMPLIES_EQUAL) == [(0, 1), (1, 0)]
    # the same matrix also breaks p1
    assert _witnesses(check_axioms(bad, [0, 1]), Axiom.P1)


def test_p1_reverse_direction():
    # distinct points with identical distances everywhere
    bad = CandidateSpace.from_matrix([[1, 1], [1, 1]])
    assert _witnesses(check_axioms(bad, [0, 1]), Axiom.P1) == [(0, 1), (1, 0)]


def test_p3_asymmetry():
    bad = CandidateSpace.from_matrix([[0, 1], [2, 0]])
    v = check_axioms(bad, [0, 1]).by_axiom(Axiom.P3)
    assert [(x.lhs, x.rhs) for x in v] == [(1.0, 2.0)]


def test_singleton_sample_passes(max_space):
    assert check_induced_metric(max_space, [3.0]).passed


def test_empty_sample_rejected(max_space):
    with pytest.raises(ValueError):
        check_axioms(max_space, [])


def test_report_json_round_trip():
    report = check_all(CandidateSpace(lambda a, b: (a - b) ** 2), [0, 1, 2])
    data = json.loads(report.to_json())
    assert data["passed"] is False
    again = AxiomReport.from_dict(data)
    assert again.violations == report.violations
    assert again.sample_size == 3


def test_violations_are_sorted_by_witness():
    report = check_axioms(CandidateSpace(lambda a, b: (a - b) ** 2), [2, 0, 1])
    keys = [v.sort_key() for v in report.violations]
    assert keys == sorted(keys)


CANDIDATES = {
    "min": min,
    "sq": lambda a, b: (a - b) ** 2,
    "max": max,
    "abs": lambda a, b: abs(a - b),
    "sum": lambda a, b: a + b,
    "half_max": lambda a, b: max(a, b) / 2 + abs(a - b),
}


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from(sorted(CANDIDATES)),
    st.lists(st.integers(0, 12).map(lambda i: i / 4), min_size=1, max_size=6, unique=True),
)
def test_witnesses_reproduce_exactly(name, values):
    space = CandidateSpace(CANDIDATES[name])
    report = check_all(space, values)
    for v in report.violations:
        lhs, rhs = reevaluate(space, v)
        assert lhs.hex() == v.lhs.hex() and rhs.hex() == v.rhs.hex()


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from(sorted(CANDIDATES)),
    st.lists(st.integers(0, 12).map(lambda i: i / 4), min_size=1, max_size=6, unique=True),
    st.data(),
)
def test_passing_is_monotone_under_subsets(name, values, data):
    space = CandidateSpace(CANDIDATES[name])
    if not check_all(space, values).passed:
        return
    subset = data.draw(st.lists(st.sampled_from(values), min_size=1, unique=True))
    assert check_all(space, subset).passed


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(st.integers(0, 4), min_size=n, max_size=n), min_size=n, max_size=n)
))
def test_axioms_imply_induced_metric(matrix):
    space = CandidateSpace.from_matrix(matrix)
    pts = list(range(len(matrix)))
    if check_axioms(space, pts).passed:
        assert check_induced_metric(space, pts).passed


def test_points_carry_kind():
    space = CandidateSpace.from_matrix([[0]])
    report = check_axioms(space, [Point(Carrier.TABULATED, 0)])
    assert report.carrier is Carrier.TABULATED
    assert make_space("max").kind is Carrier.MAX_HALFLINE
