"""Partial metrics, the built-in carriers and the induced metric.

A partial metric ``p`` differs from a metric in that the self-distance
``p(x, x)`` may be positive.  Three carriers are supported:

``MAX_HALFLINE``
    ``[0, inf)`` with ``p(x, y) = max(x, y)``.
``METRIC_LIFT``
    the reals with an ordinary metric (self-distance 0), e.g. ``|x - y|``.
``TABULATED``
    ``{0, ..., n-1}`` with ``p`` given by an ``n x n`` matrix, validated
    exhaustively when the space is built.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import (
    CarrierError,
    MatrixFormatError,
    NegativeDistanceError,
    NonFiniteDistanceError,
)

AXIOM_TOL = 1e-12


class Carrier(str, Enum):
    MAX_HALFLINE = "MAX_HALFLINE"
    METRIC_LIFT = "METRIC_LIFT"
    TABULATED = "TABULATED"

    @classmethod
    def parse(cls, text: str) -> "Carrier":
        if isinstance(text, cls):
            return text
        aliases = {"MAX": cls.MAX_HALFLINE, "LIFT": cls.METRIC_LIFT, "TAB": cls.TABULATED}
        key = str(text).strip().upper()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise CarrierError(f"unknown carrier kind {text!r}") from None


@dataclass(frozen=True, order=True)
class Point:
    """An element of a carrier, tagged with the carrier kind."""

    kind: Carrier
    value: float | int

    def __post_init__(self):
        v = self.value
        if self.kind is Carrier.TABULATED:
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 0:
                raise CarrierError(f"tabulated point needs a nonnegative int index, got {v!r}")
            object.__setattr__(self, "value", int(v))
            return
        if isinstance(v, bool) or not isinstance(v, (int, float, np.floating, np.integer)):
            raise CarrierError(f"point value must be a real number, got {v!r}")
        v = float(v)
        if not math.isfinite(v):
            raise CarrierError(f"point value must be finite, got {v!r}")
        if self.kind is Carrier.MAX_HALFLINE and v < 0:
            raise CarrierError(f"max-space points are nonnegative, got {v!r}")
        object.__setattr__(self, "value", v)

    def __repr__(self):
        return f"Point({self.kind.name}, {self.value!r})"


class PartialMetricSpace:
    """Carrier descriptor plus distance evaluator.

    Subclasses implement :meth:`distance` on raw values; callers should go
    through :func:`eval_p`, which checks carrier membership and the codomain.
    """

    kind: Carrier

    def distance(self, a, b) -> float:
        raise NotImplementedError

    def contains(self, pt: Point) -> bool:
        return isinstance(pt, Point) and pt.kind is self.kind

    def point(self, value) -> Point:
        """Coerce a raw value (or check an existing Point) into this carrier."""
        if isinstance(value, Point):
            if not self.contains(value):
                raise CarrierError(f"{value!r} does not belong to {self.describe()}")
            return value
        return Point(self.kind, value)

    def describe(self) -> dict:
        return {"kind": self.kind.value}


class MaxHalfline(PartialMetricSpace):
    kind = Carrier.MAX_HALFLINE

    def distance(self, a, b):
        return float(max(a, b))

    def __eq__(self, other):
        return isinstance(other, MaxHalfline)

    def __hash__(self):
        return hash(self.kind)

    def __repr__(self):
        return "MaxHalfline()"


BASE_METRICS: dict[str, Callable[[float, float], float]] = {
    "abs": lambda a, b: abs(a - b),
    "discrete": lambda a, b: 0.0 if a == b else 1.0,
}


class MetricLift(PartialMetricSpace):
    """An ordinary metric on the reals viewed as a partial metric."""

    kind = Carrier.METRIC_LIFT

    def __init__(self, base: str = "abs"):
        if base not in BASE_METRICS:
            raise CarrierError(f"unknown base metric {base!r}; choose from {sorted(BASE_METRICS)}")
        self.base = base
        self._metric = BASE_METRICS[base]

    def distance(self, a, b):
        return float(self._metric(a, b))

    def describe(self):
        return {"kind": self.kind.value, "base": self.base}

    def __eq__(self, other):
        return isinstance(other, MetricLift) and other.base == self.base

    def __hash__(self):
        return hash((self.kind, self.base))

    def __repr__(self):
        return f"MetricLift({self.base!r})"


def _as_matrix(matrix) -> tuple[tuple[float, ...], ...]:
    rows = [list(r) for r in matrix]
    n = len(rows)
    if n == 0:
        raise MatrixFormatError("matrix must have at least one row")
    out = []
    for i, row in enumerate(rows):
        if len(row) != n:
            raise MatrixFormatError(f"row {i} has {len(row)} entries, expected {n}")
        vals = []
        for j, v in enumerate(row):
            try:
                f = float(v)
            except (TypeError, ValueError):
                raise MatrixFormatError(f"entry ({i}, {j}) is not a number: {v!r}") from None
            if not math.isfinite(f) or f < 0:
                raise MatrixFormatError(f"entry ({i}, {j}) must be finite and nonnegative, got {v!r}")
            vals.append(f)
        out.append(tuple(vals))
    return tuple(out)


class _MatrixSpace(PartialMetricSpace):
    kind = Carrier.TABULATED

    def __init__(self, matrix):
        self.matrix = _as_matrix(matrix)
        self.size = len(self.matrix)

    def distance(self, a, b):
        return self.matrix[a][b]

    def contains(self, pt):
        return super().contains(pt) and pt.value < self.size

    def point(self, value):
        if isinstance(value, (float, np.floating)) and float(value).is_integer():
            value = int(value)
        pt = super().point(value)
        if pt.value >= self.size:
            raise CarrierError(f"index {pt.value} out of range for a {self.size}-point space")
        return pt

    def describe(self):
        return {"kind": self.kind.value, "matrix": [list(r) for r in self.matrix]}

    def __eq__(self, other):
        return type(other) is type(self) and other.matrix == self.matrix

    def __hash__(self):
        return hash(self.matrix)


class Tabulated(_MatrixSpace):
    """Finite partial metric space given by a matrix.

    Construction runs the exhaustive axiom check and raises
    :class:`~pmfix.errors.AxiomViolationError` with the witnesses on failure.
    """

    def __init__(self, matrix, tol: float = AXIOM_TOL):
        super().__init__(matrix)
        from .axiom_check import check_all

        report = check_all(self, self.all_points(), tol)
        if not report.passed:
            from .errors import AxiomViolationError

            raise AxiomViolationError(report)

    def all_points(self) -> list[Point]:
        return [Point(self.kind, i) for i in range(self.size)]

    def __repr__(self):
        return f"Tabulated(size={self.size})"


class CandidateSpace(PartialMetricSpace):
    """An unvalidated distance function on one of the carriers.

    This is what the axiom checker is pointed at when the question is
    whether ``fn`` is a partial metric at all.  ``fn`` receives raw values.
    """

    def __init__(self, fn: Callable, carrier: Carrier = Carrier.MAX_HALFLINE, size: int | None = None):
        self.fn = fn
        self.kind = Carrier(carrier)
        self.size = size

    @classmethod
    def from_matrix(cls, matrix) -> "CandidateSpace":
        m = _as_matrix(matrix)
        return cls(lambda a, b: m[a][b], Carrier.TABULATED, size=len(m))

    def distance(self, a, b):
        return float(self.fn(a, b))

    def contains(self, pt):
        ok = super().contains(pt)
        if ok and self.size is not None:
            ok = pt.value < self.size
        return ok

    def __repr__(self):
        return f"CandidateSpace({getattr(self.fn, '__name__', 'fn')}, {self.kind.name})"


@dataclass(frozen=True)
class SpaceDescriptor:
    kind: Carrier
    base: str = "abs"
    matrix: Sequence[Sequence[float]] | None = None


def make_space(descriptor, tol: float = AXIOM_TOL) -> PartialMetricSpace:
    """Build a space from a :class:`SpaceDescriptor`, a kind name or a dict."""
    if isinstance(descriptor, (str, Carrier)):
        descriptor = SpaceDescriptor(Carrier.parse(descriptor))
    elif isinstance(descriptor, dict):
        descriptor = SpaceDescriptor(
            Carrier.parse(descriptor["kind"]),
            descriptor.get("base", "abs"),
            descriptor.get("matrix"),
        )
    kind = Carrier.parse(descriptor.kind)
    if kind is Carrier.MAX_HALFLINE:
        return MaxHalfline()
    if kind is Carrier.METRIC_LIFT:
        return MetricLift(descriptor.base)
    if descriptor.matrix is None:
        raise MatrixFormatError("TABULATED space needs a matrix")
    return Tabulated(descriptor.matrix, tol)


def _checked(space: PartialMetricSpace, value: float) -> float:
    if not math.isfinite(value):
        raise NonFiniteDistanceError(f"{space!r} produced a non-finite distance {value!r}")
    if value < 0:
        raise NegativeDistanceError(f"{space!r} produced a negative distance {value!r}")
    return value


def eval_p(space: PartialMetricSpace, x, y) -> float:
    x, y = space.point(x), space.point(y)
    return _checked(space, space.distance(x.value, y.value))


def induced_metric(space: PartialMetricSpace, x, y) -> float:
    """``2 p(x, y) - p(x, x) - p(y, y)``, an ordinary metric when p is partial.

    Grouped as ``(p(x,y) - p(x,x)) + (p(x,y) - p(y,y))`` so the result is
    exactly symmetric in floating point.
    """
    pxy = eval_p(space, x, y)
    return (pxy - eval_p(space, x, x)) + (pxy - eval_p(space, y, y))


def distance_matrix(space: PartialMetricSpace, points: Sequence[Point]) -> np.ndarray:
    return np.array([[eval_p(space, a, b) for b in points] for a in points], dtype=float)


# sampling ------------------------------------------------------------------

DEFAULT_SEED = 42
DEFAULT_SAMPLE_SIZE = 64


def default_grid(space: PartialMetricSpace) -> list[Point]:
    if space.kind is Carrier.TABULATED:
        return [Point(space.kind, i) for i in range(space.size)]
    lo = 0.0 if space.kind is Carrier.MAX_HALFLINE else -5.0
    steps = int((5.0 - lo) / 0.5)
    return [space.point(lo + 0.5 * i) for i in range(steps + 1)]


def sample_points(
    space: PartialMetricSpace,
    n: int = DEFAULT_SAMPLE_SIZE,
    seed: int = DEFAULT_SEED,
) -> list[Point]:
    """Fixed grid plus ``n`` seeded pseudo-random points (all indices if tabulated)."""
    grid = default_grid(space)
    if space.kind is Carrier.TABULATED:
        return grid
    rng = np.random.default_rng(seed)
    lo = 0.0 if space.kind is Carrier.MAX_HALFLINE else -10.0
    extra = [space.point(float(v)) for v in rng.uniform(lo, 10.0, size=n)]
    return grid + extra


# tabulated file format -------------------------------------------------------

def parse_matrix(text: str) -> list[list[float]]:
    """Parse ``n`` on the first line followed by ``n`` rows of ``n`` decimals."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MatrixFormatError("empty matrix file")
    try:
        n = int(lines[0])
    except ValueError:
        raise MatrixFormatError(f"first line must be the size n, got {lines[0]!r}") from None
    if n < 1:
        raise MatrixFormatError("matrix size must be positive")
    rows = lines[1:]
    if len(rows) != n:
        raise MatrixFormatError(f"expected {n} rows, found {len(rows)}")
    matrix = []
    for i, row in enumerate(rows):
        fields = row.split()
        if len(fields) != n:
            raise MatrixFormatError(f"row {i} has {len(fields)} entries, expected {n}")
        try:
            matrix.append([float(f) for f in fields])
        except ValueError:
            raise MatrixFormatError(f"row {i} contains a non-numeric entry: {row!r}") from None
    _as_matrix(matrix)
    return matrix


def load_matrix(path) -> list[list[float]]:
    return parse_matrix(Path(path).read_text())


def format_matrix(matrix) -> str:
    rows = [" ".join(repr(float(v)) for v in row) for row in matrix]
    return "\n".join([str(len(rows)), *rows]) + "\n"
