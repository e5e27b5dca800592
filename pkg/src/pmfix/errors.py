"""Exception hierarchy shared by all pmfix modules."""


class PMError(Exception):
    """Base class for every error raised by pmfix."""


class CarrierError(PMError, ValueError):
    """A point does not belong to the carrier it is used with."""


class NonFiniteDistanceError(PMError, ValueError):
    pass


class NegativeDistanceError(PMError, ValueError):
    pass


class MatrixFormatError(PMError, ValueError):
    pass


class AxiomViolationError(PMError, ValueError):
    """Raised when a tabulated matrix fails the partial-metric axioms.

    The full :class:`~pmfix.axiom_check.AxiomReport` is kept on ``report``.
    """

    def __init__(self, report):
        self.report = report
        first = report.violations[0]
        witness = ", ".join(str(p.value) for p in first.witness)
        super().__init__(
            f"{first.axiom.value} violated at ({witness}): "
            f"lhs={first.lhs!r} rhs={first.rhs!r} "
            f"({len(report.violations)} violation(s) in total)"
        )


class SpecError(PMError, ValueError):
    """A contraction spec breaks its mode's constraint on (k, l)."""


class DomainEscapeError(PMError, ValueError):
    """The coupled map produced a value outside the carrier."""


class ExprSyntaxError(PMError, ValueError):
    def __init__(self, message, offset):
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


class UnknownIdentifierError(ExprSyntaxError):
    pass


class ExprEvalError(PMError, ArithmeticError):
    pass


class ConfigError(PMError, ValueError):
    pass
