"""Coupled maps ``F : X x X -> X``: expression-defined or built-in families."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .errors import CarrierError, DomainEscapeError
from .exprmap import compile_expr, parse_expr, to_text
from .pm_core import PartialMetricSpace, Point


@dataclass(frozen=True)
class CoupledMap:
    """A deterministic evaluator on raw carrier values.

    ``evaluate`` takes and returns raw numbers; calling the map on Points
    re-tags the result and checks it stays in the carrier.
    """

    evaluate: Callable[[float, float], float]
    provenance: str

    def __call__(self, x: Point, y: Point, space: PartialMetricSpace | None = None) -> Point:
        raw = self.evaluate(x.value, y.value)
        try:
            if space is not None:
                return space.point(raw)
            return Point(x.kind, raw)
        except CarrierError as exc:
            raise DomainEscapeError(
                f"{self.provenance} at ({x.value!r}, {y.value!r}) left the carrier: {exc}"
            ) from None


def from_expr(text: str) -> CoupledMap:
    ast = parse_expr(text)
    return CoupledMap(compile_expr(ast), f"expr:{to_text(ast)}")


def affine(a: float, b: float, c: float = 0.0) -> CoupledMap:
    """``F(x, y) = a*x + b*y + c``."""
    a, b, c = float(a), float(b), float(c)
    return CoupledMap(lambda x, y: a * x + b * y + c, f"affine(a={a!r}, b={b!r}, c={c!r})")


def constant(c: float) -> CoupledMap:
    return CoupledMap(lambda x, y: c, f"constant(c={c!r})")


FAMILIES = {"affine": affine, "constant": constant}


def as_coupled_map(f) -> CoupledMap:
    """Accept a CoupledMap, an expression string, or a plain ``f(x, y)`` callable."""
    if isinstance(f, CoupledMap):
        return f
    if isinstance(f, str):
        return from_expr(f)
    if callable(f):
        return CoupledMap(f, f"callable:{getattr(f, '__name__', 'anonymous')}")
    raise TypeError(f"cannot interpret {f!r} as a coupled map")
