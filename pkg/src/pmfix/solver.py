"""Coupled Picard iteration with convergence certificates.

The scheme is ``x_{n+1} = F(x_n, y_n)``, ``y_{n+1} = F(y_n, x_n)``.  Each
step records the residual ``d_n = p(x_n, x_{n+1}) + p(y_n, y_{n+1})`` and
the induced-metric step ``p^s(x_n, x_{n+1}) + p^s(y_n, y_{n+1})``.

Two stopping rules are kept apart on purpose:

* certified: a valid :class:`~pmfix.contraction.ContractionSpec` was given,
  every residual so far obeys ``d_n <= delta**n * d_0 + SLACK``, and
  ``d_n <= tol``.  Status ``CONVERGED``.
* stationary: no spec (or the spec was contradicted by the run) and the
  ``p^s`` step is ``<= tol``.  Status ``STATIONARY_NO_CERT``.  This finds
  fixed points with positive self-distance, where ``d_n`` never reaches 0.

Neither rule comes from the convergence theory, whose arguments only take
``n -> infinity``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .contraction import ContractionSpec, delta_of, validate_spec
from .errors import SpecError
from .maps import CoupledMap, as_coupled_map
from .pm_core import Carrier, PartialMetricSpace, Point, eval_p, induced_metric

SLACK = 1e-9

__all__ = [
    "CoupledMap",
    "ConvergenceCertificate",
    "IterationTrace",
    "SolverConfig",
    "Status",
    "TraceStep",
    "UniquenessReport",
    "a_priori_iters",
    "probe_uniqueness",
    "residual",
    "solve",
    "step",
    "verify_coupled_fixed_point",
]


class Status(str, Enum):
    CONVERGED = "CONVERGED"
    STATIONARY_NO_CERT = "STATIONARY_NO_CERT"
    MAX_ITERS = "MAX_ITERS"
    DIVERGING = "DIVERGING"


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-9
    max_iters: int = 10_000
    divergence_cap: float = 1e12

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol!r}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be at least 1, got {self.max_iters!r}")


@dataclass(frozen=True)
class TraceStep:
    n: int
    x_n: Point
    y_n: Point
    d_n: float
    ps_step: float

    def to_dict(self):
        return {"n": self.n, "x_n": self.x_n.value, "y_n": self.y_n.value, "d_n": self.d_n, "ps_step": self.ps_step}


@dataclass
class IterationTrace:
    carrier: Carrier
    steps: list[TraceStep] = field(default_factory=list)

    def __len__(self):
        return len(self.steps)

    def xs(self) -> list[Point]:
        return [s.x_n for s in self.steps]

    def ys(self) -> list[Point]:
        return [s.y_n for s in self.steps]

    def to_dict(self):
        return {"carrier": self.carrier.value, "steps": [s.to_dict() for s in self.steps]}

    @classmethod
    def from_dict(cls, data) -> "IterationTrace":
        carrier = Carrier(data["carrier"])
        steps = [
            TraceStep(int(s["n"]), Point(carrier, s["x_n"]), Point(carrier, s["y_n"]), float(s["d_n"]), float(s["ps_step"]))
            for s in data["steps"]
        ]
        return cls(carrier, steps)


@dataclass
class ConvergenceCertificate:
    status: Status
    iterations: int
    final_residual: float
    d0: float
    fixed_point: tuple[Point, Point] | None = None
    delta: float | None = None
    a_priori_bound_iters: int | None = None
    spec: ContractionSpec | None = None
    bound_violation_at: int | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self):
        return {
            "status": self.status.value,
            "fixed_point": [p.value for p in self.fixed_point] if self.fixed_point else None,
            "iterations": self.iterations,
            "final_residual": self.final_residual,
            "delta": self.delta,
            "a_priori_bound_iters": self.a_priori_bound_iters,
            "d0": self.d0,
            "spec": self.spec.to_dict() if self.spec else None,
            "bound_violation_at": self.bound_violation_at,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, data, carrier: Carrier) -> "ConvergenceCertificate":
        fp = data.get("fixed_point")
        spec = data.get("spec")
        return cls(
            status=Status(data["status"]),
            iterations=int(data["iterations"]),
            final_residual=float(data["final_residual"]),
            d0=float(data["d0"]),
            fixed_point=tuple(Point(carrier, v) for v in fp) if fp else None,
            delta=data.get("delta"),
            a_priori_bound_iters=data.get("a_priori_bound_iters"),
            spec=ContractionSpec(spec["mode"], spec["k"], spec["l"]) if spec else None,
            bound_violation_at=data.get("bound_violation_at"),
            notes=list(data.get("notes", [])),
        )


def step(F, x: Point, y: Point, space: PartialMetricSpace | None = None) -> tuple[Point, Point]:
    """One coupled step: ``(F(x, y), F(y, x))``."""
    F = as_coupled_map(F)
    return F(x, y, space), F(y, x, space)


def residual(space: PartialMetricSpace, x_n, x_next, y_n, y_next) -> float:
    return eval_p(space, x_n, x_next) + eval_p(space, y_n, y_next)


def a_priori_iters(d0: float, delta: float, tol: float) -> int:
    """Smallest ``m >= 0`` with ``delta**m * d0 / (1 - delta) <= tol``."""
    if not 0 <= delta < 1:
        raise SpecError(f"rate must lie in [0, 1), got {delta!r}")
    if d0 < 0 or not math.isfinite(d0):
        raise ValueError(f"d0 must be finite and nonnegative, got {d0!r}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol!r}")

    def tail(m):
        return delta**m * d0 / (1 - delta)

    if tail(0) <= tol:
        return 0
    if delta == 0:
        return 1
    m = max(1, math.ceil(math.log(tol * (1 - delta) / d0) / math.log(delta)))
    # the logarithms can be off by one ulp either way
    while m > 1 and tail(m - 1) <= tol:
        m -= 1
    while tail(m) > tol:
        m += 1
    return m


def solve(
    F,
    space: PartialMetricSpace,
    x0,
    y0,
    spec: ContractionSpec | None = None,
    config: SolverConfig | None = None,
) -> tuple[ConvergenceCertificate, IterationTrace]:
    config = config or SolverConfig()
    F = as_coupled_map(F)
    x, y = space.point(x0), space.point(y0)
    delta = None
    if spec is not None:
        validate_spec(spec)
        delta = delta_of(spec)

    trace = IterationTrace(space.kind)
    certified = spec is not None
    notes = []
    bound_violation_at = None
    status = Status.MAX_ITERS
    fixed = None
    d0 = 0.0
    stop_n = config.max_iters

    for n in range(config.max_iters):
        x1, y1 = step(F, x, y, space)
        d = residual(space, x, x1, y, y1)
        ps = induced_metric(space, x, x1) + induced_metric(space, y, y1)
        trace.steps.append(TraceStep(n, x, y, d, ps))
        if n == 0:
            d0 = d

        if d > config.divergence_cap or ps > config.divergence_cap:
            status, stop_n = Status.DIVERGING, n
            break
        if certified and d > delta**n * d0 + SLACK:
            certified = False
            bound_violation_at = n
            notes.append(
                f"residual d_{n}={d!r} exceeds delta^n*d0={delta**n * d0!r}: "
                f"the map does not satisfy the supplied {spec.mode.value} spec along this run; "
                "falling back to the uncertified stationarity test"
            )
        if certified and d <= config.tol:
            status, fixed, stop_n = Status.CONVERGED, (x1, y1), n
            break
        if not certified and ps <= config.tol:
            status, fixed, stop_n = Status.STATIONARY_NO_CERT, (x1, y1), n
            if d > config.tol:
                notes.append(f"stationary point has positive self-distance (d_n={d!r})")
            break
        x, y = x1, y1

    cert = ConvergenceCertificate(
        status=status,
        iterations=stop_n,
        final_residual=trace.steps[-1].d_n,
        d0=d0,
        fixed_point=fixed,
        delta=delta,
        a_priori_bound_iters=a_priori_iters(d0, delta, config.tol) if delta is not None else None,
        spec=spec,
        bound_violation_at=bound_violation_at,
        notes=notes,
    )
    return cert, trace


def verify_coupled_fixed_point(F, space: PartialMetricSpace, x, y, tol: float = 1e-9) -> bool:
    """Check ``F(x, y) = x`` and ``F(y, x) = y`` up to ``tol`` in the induced metric."""
    F = as_coupled_map(F)
    x, y = space.point(x), space.point(y)
    fx, fy = step(F, x, y, space)
    return induced_metric(space, fx, x) <= tol and induced_metric(space, fy, y) <= tol


@dataclass
class UniquenessReport:
    distinct_points: list[tuple[Point, Point]]
    pairwise_ps: list[list[float]]
    runs: list[ConvergenceCertificate]
    starts: list[tuple[Point, Point]]

    @property
    def unique(self) -> bool:
        return len(self.distinct_points) == 1

    def to_dict(self):
        return {
            "distinct_points": [[a.value, b.value] for a, b in self.distinct_points],
            "pairwise_ps": self.pairwise_ps,
            "unique": self.unique,
            "runs": [
                {"start": [s[0].value, s[1].value], **c.to_dict()} for s, c in zip(self.starts, self.runs)
            ],
        }


def _pair_ps(space, a, b) -> float:
    return induced_metric(space, a[0], b[0]) + induced_metric(space, a[1], b[1])


def probe_uniqueness(
    F,
    space: PartialMetricSpace,
    starts: Sequence[Sequence],
    spec: ContractionSpec | None = None,
    config: SolverConfig | None = None,
    cluster_tol: float | None = None,
) -> UniquenessReport:
    """Solve from every start and cluster the terminal points.

    Two terminal pairs share a cluster when the summed ``p^s`` distance to
    the cluster's first member is ``<= cluster_tol`` (default: the solver
    tolerance).  Runs that end without a fixed point are kept in ``runs``
    but do not contribute clusters.
    """
    if not starts:
        raise ValueError("need at least one start")
    config = config or SolverConfig()
    cluster_tol = config.tol if cluster_tol is None else cluster_tol
    F = as_coupled_map(F)
    runs, pts = [], []
    reps: list[tuple[Point, Point]] = []
    for s in starts:
        x0, y0 = space.point(s[0]), space.point(s[1])
        pts.append((x0, y0))
        cert, _ = solve(F, space, x0, y0, spec, config)
        runs.append(cert)
        if cert.fixed_point is None:
            continue
        if not any(_pair_ps(space, cert.fixed_point, r) <= cluster_tol for r in reps):
            reps.append(cert.fixed_point)
    matrix = [[_pair_ps(space, a, b) for b in reps] for a in reps]
    return UniquenessReport(reps, matrix, runs, pts)


def dump_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=False)
        fh.write("\n")
