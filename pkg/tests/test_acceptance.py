"""Exit criteria.  Each test carries an ``acceptance`` marker; the summary
hook in conftest prints one PASS/FAIL line per criterion."""
import time

import numpy as np
import pytest

from pmfix.axiom_check import Axiom, check_axioms, reevaluate
from pmfix.cli import main
from pmfix.contraction import (
    ContractionSpec,
    Mode,
    delta_of,
    sample_quadruples,
    symmetrize,
    validate_spec,
    verify_contraction,
)
from pmfix.errors import SpecError
from pmfix.maps import from_expr
from pmfix.pm_core import CandidateSpace, eval_p, induced_metric, make_space
from pmfix.solver import Status, a_priori_iters, probe_uniqueness, solve

MAX = make_space("MAX_HALFLINE")
LIFT = make_space("METRIC_LIFT")
TOL = 1e-9
SLACK = 1e-9


def example_run():
    return solve(from_expr("(x + y) / 6"), MAX, 1, 2, ContractionSpec("MIXED_ARG", 1 / 6, 1 / 6))


def quarter_run():
    return solve(from_expr("x / 4"), LIFT, 3, -2, ContractionSpec("SELF_DISPLACEMENT", 0.4, 0.4))


@pytest.mark.acceptance(1, "example convergence to (0, 0) within the a priori bound, < 1 s")
def test_example_convergence():
    t0 = time.perf_counter()
    cert, _ = example_run()
    elapsed = time.perf_counter() - t0
    bound = a_priori_iters(cert.d0, 1 / 3, TOL)
    assert cert.d0 == 3.0
    assert bound == 21
    assert cert.status is Status.CONVERGED
    assert cert.final_residual <= TOL
    assert cert.iterations <= bound
    x, y = cert.fixed_point
    assert abs(x.value) <= TOL and abs(y.value) <= TOL
    assert elapsed < 1.0


@pytest.mark.acceptance(2, "two coupled fixed points for (x + y) / 2, separated by p^s >= 0.5, < 1 s")
def test_non_uniqueness_at_boundary():
    t0 = time.perf_counter()
    report = probe_uniqueness(from_expr("(x + y) / 2"), MAX, [(0, 0), (1, 1)])
    elapsed = time.perf_counter() - t0
    assert len(report.distinct_points) == 2
    assert report.pairwise_ps[0][1] >= 0.5 and report.pairwise_ps[1][0] >= 0.5
    with pytest.raises(SpecError):
        validate_spec(ContractionSpec.equal("MIXED_ARG", 1.0))
    assert elapsed < 1.0


@pytest.mark.acceptance(3, "geometric decay and tail bound along the example trace")
def test_geometric_decay_audit():
    cert, trace = example_run()
    d0 = cert.d0
    for s in trace.steps:
        assert s.d_n <= (1 / 3) ** s.n * d0 + SLACK
    xs, ys = trace.xs(), trace.ys()
    for n in range(len(xs)):
        for m in range(n + 1):
            lhs = eval_p(MAX, xs[n], xs[m]) + eval_p(MAX, ys[n], ys[m])
            assert lhs <= (1 / 3) ** m * d0 / (1 - 1 / 3) + SLACK


@pytest.mark.acceptance(4, "axiom validator: max passes, min flags P2, (x - y)^2 flags P4, witnesses exact")
def test_axiom_validator_soundness():
    grid = [0.5 * i for i in range(11)]
    assert check_axioms(MAX, grid).passed

    q_min = CandidateSpace(min)
    r_min = check_axioms(q_min, grid)
    assert r_min.by_axiom(Axiom.P2)
    q_sq = CandidateSpace(lambda a, b: (a - b) ** 2)
    r_sq = check_axioms(q_sq, grid)
    assert r_sq.by_axiom(Axiom.P4)

    for space, report in ((q_min, r_min), (q_sq, r_sq)):
        for v in report.violations:
            lhs, rhs = reevaluate(space, v)
            assert lhs.hex() == v.lhs.hex() and rhs.hex() == v.rhs.hex()


@pytest.mark.acceptance(5, "p^s = |x - y| on the max space; d_n <= tol implies ps_step <= 2 tol")
def test_induced_metric_correspondence():
    rng = np.random.default_rng(42)
    for x, y in rng.uniform(0, 10, size=(1000, 2)):
        assert abs(induced_metric(MAX, float(x), float(y)) - abs(x - y)) <= 1e-15
    for cert, trace in (example_run(), quarter_run()):
        assert cert.status is Status.CONVERGED
        for s in trace.steps:
            if s.d_n <= TOL:
                assert s.ps_step <= 2 * TOL


@pytest.mark.acceptance(6, "rates of the three modes on 1000 random valid specs; CROSS symmetrization bound")
def test_mode_rates():
    rng = np.random.default_rng(6)
    for mode in Mode:
        found = 0
        while found < 1000:
            k, l = (float(v) for v in rng.uniform(0, 1, size=2))  # noqa: E741
            limit = k + 2 * l if mode is Mode.CROSS_DISPLACEMENT else k + l
            if not limit < 1:
                continue
            spec = ContractionSpec(mode, k, l)
            validate_spec(spec)
            expected = {
                Mode.MIXED_ARG: k + l,
                Mode.SELF_DISPLACEMENT: k / (1 - l),
                Mode.CROSS_DISPLACEMENT: l / (1 - l - k),
            }[mode]
            delta = delta_of(spec)
            assert delta == expected
            assert 0 <= delta < 1
            found += 1
    for k, l in ((0.5, 0.2), (0.35, 0.32), (0.6, 0.15), (0.9, 0.04)):
        spec = ContractionSpec("CROSS_DISPLACEMENT", k, l)
        validate_spec(spec)
        assert k + l >= 2 / 3
        with pytest.raises(SpecError):
            symmetrize(spec)


@pytest.mark.acceptance(7, "x / 4 on the metric lift: SELF mode verified, per-sequence decay, limit (0, 0)")
def test_self_mode_solver_property():
    F = from_expr("x / 4")
    spec = ContractionSpec("SELF_DISPLACEMENT", 0.4, 0.4)
    assert verify_contraction(F, LIFT, spec, sample_quadruples(LIFT, 256, seed=42)) == []
    cert, trace = quarter_run()
    delta = delta_of(spec)
    xs = trace.xs() + [cert.fixed_point[0]]
    ys = trace.ys() + [cert.fixed_point[1]]
    px0, py0 = eval_p(LIFT, xs[0], xs[1]), eval_p(LIFT, ys[0], ys[1])
    for n in range(len(xs) - 1):
        assert eval_p(LIFT, xs[n], xs[n + 1]) <= delta**n * px0 + SLACK
        assert eval_p(LIFT, ys[n], ys[n + 1]) <= delta**n * py0 + SLACK
    assert cert.status is Status.CONVERGED
    assert abs(cert.fixed_point[0].value) <= TOL and abs(cert.fixed_point[1].value) <= TOL


@pytest.mark.acceptance(8, "demo report files byte-identical across runs with the same seed")
def test_demo_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["demo", "--out", str(a), "--seed", "42"]) == 0
    assert main(["demo", "--out", str(b), "--seed", "42"]) == 0
    names = sorted(p.name for p in a.iterdir())
    assert names and names == sorted(p.name for p in b.iterdir())
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes()
