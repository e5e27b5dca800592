"""Partial metric spaces and coupled fixed points by Picard iteration."""

__version__ = "0.1.0"

from .axiom_check import AxiomReport, check_axioms, check_induced_metric, check_zero_implies_equal
from .contraction import ContractionSpec, Mode, delta_of, symmetrize, validate_spec, verify_contraction
from .errors import PMError
from .exprmap import eval_expr, parse_expr
from .maps import CoupledMap, affine, constant, from_expr
from .pm_core import Carrier, Point, eval_p, induced_metric, make_space
from .solver import (
    SolverConfig,
    Status,
    a_priori_iters,
    probe_uniqueness,
    solve,
    step,
    verify_coupled_fixed_point,
)

__all__ = [
    "AxiomReport", "Carrier", "ContractionSpec", "CoupledMap", "Mode", "PMError", "Point",
    "SolverConfig", "Status", "a_priori_iters", "affine", "check_axioms", "check_induced_metric",
    "check_zero_implies_equal", "constant", "delta_of", "eval_expr", "eval_p", "from_expr",
    "induced_metric", "make_space", "parse_expr", "probe_uniqueness", "solve", "step",
    "symmetrize", "validate_spec", "verify_contraction", "verify_coupled_fixed_point",
]
