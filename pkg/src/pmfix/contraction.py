"""The three contractive conditions, their constraints and rates.

========================  =========================================  ============  ==============
mode                      right-hand side of p(F(x,y), F(u,v)) <=    constraint    rate
========================  =========================================  ============  ==============
MIXED_ARG                 k p(x,u) + l p(y,v)                        k + l < 1     k + l
SELF_DISPLACEMENT         k p(F(x,y),x) + l p(F(u,v),u)              k + l < 1     k / (1 - l)
CROSS_DISPLACEMENT        k p(F(x,y),u) + l p(F(u,v),x)              k + 2l < 1    l / (1 - l - k)
========================  =========================================  ============  ==============

Constants are checked empirically on finite samples only; a clean sample
is evidence, not proof.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import SpecError
from .maps import as_coupled_map
from .pm_core import Carrier, PartialMetricSpace, Point, eval_p, sample_points

DEFAULT_QUADRUPLES = 256
VERIFY_TOL = 1e-12


class Mode(str, Enum):
    MIXED_ARG = "MIXED_ARG"
    SELF_DISPLACEMENT = "SELF_DISPLACEMENT"
    CROSS_DISPLACEMENT = "CROSS_DISPLACEMENT"

    @classmethod
    def parse(cls, text: str) -> "Mode":
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).strip().upper())
        except ValueError:
            raise SpecError(f"unknown contraction mode {text!r}") from None


@dataclass(frozen=True)
class ContractionSpec:
    mode: Mode
    k: float
    l: float  # noqa: E741

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode.parse(self.mode))

    @classmethod
    def equal(cls, mode, k: float) -> "ContractionSpec":
        """Equal-constant form: both coefficients ``k / 2``."""
        return cls(mode, k / 2, k / 2)

    @property
    def delta(self) -> float:
        return delta_of(self)

    def to_dict(self):
        return {"mode": self.mode.value, "k": self.k, "l": self.l}


@dataclass(frozen=True)
class ViolationRecord:
    quadruple: tuple[Point, Point, Point, Point]
    lhs: float
    rhs: float

    def to_dict(self):
        return {"quadruple": [p.value for p in self.quadruple], "lhs": self.lhs, "rhs": self.rhs}


def validate_spec(spec: ContractionSpec) -> None:
    """Raise :class:`SpecError` unless the mode's strict constraint holds."""
    k, l = spec.k, spec.l  # noqa: E741
    for name, v in (("k", k), ("l", l)):
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v) or v < 0:
            raise SpecError(f"{name} must be a finite nonnegative number, got {v!r}")
    if spec.mode is Mode.CROSS_DISPLACEMENT:
        if not k + 2 * l < 1:
            raise SpecError(f"CROSS_DISPLACEMENT needs k + 2l < 1, got k + 2l = {k + 2 * l!r}")
    elif not k + l < 1:
        raise SpecError(f"{spec.mode.value} needs k + l < 1, got k + l = {k + l!r}")


def delta_of(spec: ContractionSpec) -> float:
    validate_spec(spec)
    k, l = spec.k, spec.l  # noqa: E741
    if spec.mode is Mode.MIXED_ARG:
        return k + l
    if spec.mode is Mode.SELF_DISPLACEMENT:
        return k / (1 - l)
    return l / (1 - l - k)


def symmetrize(spec: ContractionSpec) -> ContractionSpec:
    """Average the constants: same mode, ``k' = l' = (k + l) / 2``.

    For the two displacement modes a map satisfying the original inequality
    for all quadruples also satisfies it with the roles of (x, y) and (u, v)
    exchanged, and averaging the two gives the symmetric spec.  For
    MIXED_ARG that exchange leaves the inequality unchanged, so the averaged
    spec keeps the rate ``k + l`` but is *not* implied pointwise (``x / 2``
    on the metric lift satisfies (1/2, 0) but not (1/4, 1/4)).
    """
    validate_spec(spec)
    s = (spec.k + spec.l) / 2
    out = ContractionSpec(spec.mode, s, s)
    try:
        validate_spec(out)
    except SpecError as exc:
        raise SpecError(f"symmetrized spec is invalid: {exc}") from None
    return out


def rhs_of(F, space: PartialMetricSpace, spec: ContractionSpec, x, y, u, v, fxy=None, fuv=None) -> float:
    k, l = spec.k, spec.l  # noqa: E741
    if spec.mode is Mode.MIXED_ARG:
        return k * eval_p(space, x, u) + l * eval_p(space, y, v)
    fxy = F(x, y, space) if fxy is None else fxy
    fuv = F(u, v, space) if fuv is None else fuv
    if spec.mode is Mode.SELF_DISPLACEMENT:
        return k * eval_p(space, fxy, x) + l * eval_p(space, fuv, u)
    return k * eval_p(space, fxy, u) + l * eval_p(space, fuv, x)


def verify_contraction(
    F,
    space: PartialMetricSpace,
    spec: ContractionSpec,
    quadruples: Iterable[Sequence],
    tol: float = VERIFY_TOL,
) -> list[ViolationRecord]:
    """Evaluate the mode's inequality on every quadruple; return those with lhs > rhs + tol.

    The default absolute ``tol`` absorbs rounding in cases where the
    inequality is tight, e.g. ``max(x + y, u + v) / 6`` against
    ``max(x, u) / 6 + max(y, v) / 6``.
    """
    validate_spec(spec)
    F = as_coupled_map(F)
    out = []
    for q in quadruples:
        x, y, u, v = (space.point(p) for p in q)
        fxy, fuv = F(x, y, space), F(u, v, space)
        lhs = eval_p(space, fxy, fuv)
        rhs = rhs_of(F, space, spec, x, y, u, v, fxy, fuv)
        if lhs > rhs + tol:
            out.append(ViolationRecord((x, y, u, v), lhs, rhs))
    return out


def sample_quadruples(
    space: PartialMetricSpace,
    n: int = DEFAULT_QUADRUPLES,
    seed: int = 42,
    max_exhaustive: int = 4096,
) -> list[tuple[Point, Point, Point, Point]]:
    """All ordered quadruples of a small tabulated carrier, else ``n`` seeded random ones."""
    if space.kind is Carrier.TABULATED and space.size**4 <= max_exhaustive:
        pts = sample_points(space)
        return list(itertools.product(pts, repeat=4))
    rng = np.random.default_rng(seed)
    if space.kind is Carrier.TABULATED:
        idx = rng.integers(0, space.size, size=(n, 4))
        return [tuple(space.point(int(i)) for i in row) for row in idx]
    lo = 0.0 if space.kind is Carrier.MAX_HALFLINE else -10.0
    vals = rng.uniform(lo, 10.0, size=(n, 4))
    return [tuple(space.point(float(v)) for v in row) for row in vals]


def swap_quadruples(quadruples: Iterable[Sequence]) -> list[tuple]:
    """(x, y, u, v) -> (u, v, x, y)."""
    return [(u, v, x, y) for x, y, u, v in quadruples]
