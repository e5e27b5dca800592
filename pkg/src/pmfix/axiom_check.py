"""Exhaustive-on-a-sample validation of partial metric candidates.

Every check evaluates the candidate once on the sample to build the
distance matrix ``P`` and then tests the axioms on all pairs / ordered
triples.  Reported ``lhs`` and ``rhs`` are computed with the same
floating-point operations, in the same order, as the scalar formulas in
the docstrings below, so re-evaluating a witness through
:func:`~pmfix.pm_core.eval_p` reproduces them bit for bit.

Equality "x = y" means equal Points (value equality on continuous
carriers, index equality on tabulated ones).  Approximate equality of
distances uses an absolute tolerance ``tol``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import CarrierError
from .pm_core import AXIOM_TOL, Carrier, PartialMetricSpace, Point, distance_matrix


class Axiom(str, Enum):
    P1 = "P1"
    P2 = "P2"
    P3 = "P3"
    P4 = "P4"
    ZERO_IMPLIES_EQUAL = "ZERO_IMPLIES_EQUAL"
    PS_NONNEGATIVE = "PS_NONNEGATIVE"
    PS_DIAGONAL = "PS_DIAGONAL"
    PS_SYMMETRY = "PS_SYMMETRY"
    PS_ZERO_IMPLIES_EQUAL = "PS_ZERO_IMPLIES_EQUAL"
    PS_TRIANGLE = "PS_TRIANGLE"


_AXIOM_ORDER = {a: i for i, a in enumerate(Axiom)}


@dataclass(frozen=True)
class Violation:
    axiom: Axiom
    witness: tuple[Point, ...]
    lhs: float
    rhs: float

    def sort_key(self):
        return (_AXIOM_ORDER[self.axiom], tuple(p.value for p in self.witness))

    def to_dict(self):
        return {
            "axiom": self.axiom.value,
            "witness": [p.value for p in self.witness],
            "lhs": self.lhs,
            "rhs": self.rhs,
        }


@dataclass
class AxiomReport:
    violations: list[Violation] = field(default_factory=list)
    sample_size: int = 0
    carrier: Carrier | None = None

    @property
    def passed(self) -> bool:
        return not self.violations

    def merge(self, other: "AxiomReport") -> "AxiomReport":
        return AxiomReport(
            sorted(self.violations + other.violations, key=Violation.sort_key),
            max(self.sample_size, other.sample_size),
            self.carrier or other.carrier,
        )

    def by_axiom(self, axiom) -> list[Violation]:
        return [v for v in self.violations if v.axiom is Axiom(axiom)]

    def to_dict(self):
        return {
            "passed": self.passed,
            "carrier": self.carrier.value if self.carrier else None,
            "sample_size": self.sample_size,
            "violations": [v.to_dict() for v in self.violations],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data) -> "AxiomReport":
        carrier = Carrier(data["carrier"]) if data.get("carrier") else None
        violations = [
            Violation(
                Axiom(v["axiom"]),
                tuple(Point(carrier, w) for w in v["witness"]),
                float(v["lhs"]),
                float(v["rhs"]),
            )
            for v in data["violations"]
        ]
        report = cls(violations, int(data["sample_size"]), carrier)
        if report.passed != data["passed"]:
            raise ValueError("inconsistent report: 'passed' disagrees with the violation list")
        return report


def _prepare(space: PartialMetricSpace, sample: Sequence) -> list[Point]:
    if not sample:
        raise ValueError("sample must be nonempty")
    pts = []
    seen = set()
    for s in sample:
        p = space.point(s)
        if p not in seen:
            seen.add(p)
            pts.append(p)
    return pts


def _equal_matrix(pts: Sequence[Point]) -> np.ndarray:
    n = len(pts)
    return np.eye(n, dtype=bool)  # points are deduplicated, so equality is the diagonal


def _report(violations, pts, space) -> AxiomReport:
    return AxiomReport(sorted(violations, key=Violation.sort_key), len(pts), space.kind)


def check_axioms(space: PartialMetricSpace, sample: Sequence, tol: float = AXIOM_TOL) -> AxiomReport:
    """Check (p1)-(p4) on every pair and ordered triple of ``sample``.

    ========  ==========================  ======================================
    axiom     witness                     violated when
    ========  ==========================  ======================================
    P1        (x, y), x != y              p(x,x) ~ p(x,y) ~ p(y,y); lhs=p(x,y), rhs=p(x,x)
    P1        (x, x)                      p(x,x) differs between evaluations
    P2        (x, y)                      lhs=p(x,x) > rhs=p(x,y) + tol
    P3        (x, y), x before y          |lhs=p(x,y) - rhs=p(y,x)| > tol
    P4        (x, y, z)                   lhs=p(x,y) > rhs=p(x,z)+p(z,y)-p(z,z) + tol
    ========  ==========================  ======================================
    """
    pts = _prepare(space, sample)
    P = distance_matrix(space, pts)
    n = len(pts)
    diag = np.diag(P)
    out = []

    # (p1), both directions
    close = (np.abs(diag[:, None] - P) <= tol) & (np.abs(P - diag[None, :]) <= tol)
    np.fill_diagonal(close, False)
    for i, j in zip(*np.nonzero(close)):
        out.append(Violation(Axiom.P1, (pts[i], pts[j]), float(P[i, j]), float(P[i, i])))
    for i in range(n):
        again = space.distance(pts[i].value, pts[i].value)
        if abs(again - P[i, i]) > tol:
            out.append(Violation(Axiom.P1, (pts[i], pts[i]), float(again), float(P[i, i])))

    # (p2)
    bad = diag[:, None] > P + tol
    for i, j in zip(*np.nonzero(bad)):
        out.append(Violation(Axiom.P2, (pts[i], pts[j]), float(P[i, i]), float(P[i, j])))

    # (p3)
    bad = np.triu(np.abs(P - P.T) > tol, k=1)
    for i, j in zip(*np.nonzero(bad)):
        out.append(Violation(Axiom.P3, (pts[i], pts[j]), float(P[i, j]), float(P[j, i])))

    # (p4): rhs[i, j, k] = (P[i,k] + P[k,j]) - P[k,k]
    rhs = (P[:, None, :] + P.T[None, :, :]) - diag[None, None, :]
    lhs = np.broadcast_to(P[:, :, None], rhs.shape)
    for i, j, k in zip(*np.nonzero(lhs > rhs + tol)):
        out.append(Violation(Axiom.P4, (pts[i], pts[j], pts[k]), float(P[i, j]), float(rhs[i, j, k])))

    return _report(out, pts, space)


def check_zero_implies_equal(
    space: PartialMetricSpace, sample: Sequence, tol: float = AXIOM_TOL
) -> AxiomReport:
    """Report every ordered pair x != y with ``p(x, y) <= tol`` (lhs=p(x,y), rhs=0)."""
    pts = _prepare(space, sample)
    P = distance_matrix(space, pts)
    bad = (P <= tol) & ~_equal_matrix(pts)
    out = [
        Violation(Axiom.ZERO_IMPLIES_EQUAL, (pts[i], pts[j]), float(P[i, j]), 0.0)
        for i, j in zip(*np.nonzero(bad))
    ]
    return _report(out, pts, space)


def check_induced_metric(
    space: PartialMetricSpace, sample: Sequence, tol: float = AXIOM_TOL
) -> AxiomReport:
    """Check that ``p^s = 2p(x,y) - p(x,x) - p(y,y)`` is a metric on the sample.

    PS_TRIANGLE witnesses are ``(x, y, z)`` with lhs=p^s(x,y) and
    rhs=p^s(x,z)+p^s(z,y), matching the P4 convention.
    """
    pts = _prepare(space, sample)
    P = distance_matrix(space, pts)
    diag = np.diag(P)
    S = (P - diag[:, None]) + (P - diag[None, :])
    out = []

    for i, j in zip(*np.nonzero(S < -tol)):
        out.append(Violation(Axiom.PS_NONNEGATIVE, (pts[i], pts[j]), float(S[i, j]), 0.0))
    for i in np.nonzero(np.abs(np.diag(S)) > tol)[0]:
        out.append(Violation(Axiom.PS_DIAGONAL, (pts[i], pts[i]), float(S[i, i]), 0.0))
    for i, j in zip(*np.nonzero(np.triu(np.abs(S - S.T) > tol, k=1))):
        out.append(Violation(Axiom.PS_SYMMETRY, (pts[i], pts[j]), float(S[i, j]), float(S[j, i])))
    for i, j in zip(*np.nonzero((S <= tol) & ~_equal_matrix(pts))):
        out.append(Violation(Axiom.PS_ZERO_IMPLIES_EQUAL, (pts[i], pts[j]), float(S[i, j]), 0.0))

    rhs = S[:, None, :] + S.T[None, :, :]
    lhs = np.broadcast_to(S[:, :, None], rhs.shape)
    for i, j, k in zip(*np.nonzero(lhs > rhs + tol)):
        out.append(
            Violation(Axiom.PS_TRIANGLE, (pts[i], pts[j], pts[k]), float(S[i, j]), float(rhs[i, j, k]))
        )
    return _report(out, pts, space)


def check_all(space: PartialMetricSpace, sample: Sequence, tol: float = AXIOM_TOL) -> AxiomReport:
    """All three checks merged into one report."""
    return (
        check_axioms(space, sample, tol)
        .merge(check_zero_implies_equal(space, sample, tol))
        .merge(check_induced_metric(space, sample, tol))
    )


def reevaluate(space: PartialMetricSpace, v: Violation) -> tuple[float, float]:
    """Recompute ``(lhs, rhs)`` of a violation from scalar evaluations."""
    from .pm_core import eval_p, induced_metric

    p, ps = eval_p, induced_metric
    w = v.witness
    a = v.axiom
    if a is Axiom.P1:
        x, y = w
        if x == y:
            return space.distance(x.value, x.value), p(space, x, x)
        return p(space, x, y), p(space, x, x)
    if a is Axiom.P2:
        x, y = w
        return p(space, x, x), p(space, x, y)
    if a is Axiom.P3:
        x, y = w
        return p(space, x, y), p(space, y, x)
    if a is Axiom.P4:
        x, y, z = w
        return p(space, x, y), p(space, x, z) + p(space, z, y) - p(space, z, z)
    if a is Axiom.ZERO_IMPLIES_EQUAL:
        x, y = w
        return p(space, x, y), 0.0
    if a in (Axiom.PS_NONNEGATIVE, Axiom.PS_DIAGONAL, Axiom.PS_ZERO_IMPLIES_EQUAL):
        x, y = w
        return ps(space, x, y), 0.0
    if a is Axiom.PS_SYMMETRY:
        x, y = w
        return ps(space, x, y), ps(space, y, x)
    if a is Axiom.PS_TRIANGLE:
        x, y, z = w
        return ps(space, x, y), ps(space, x, z) + ps(space, z, y)
    raise CarrierError(f"unknown axiom {a!r}")
