"""Exception hierarchy. Every error carries a short machine-readable code."""


class QuadWalkError(Exception):
    code = "error"


class InvalidFieldError(QuadWalkError, ValueError):
    code = "invalid-field"


class RationalInputError(QuadWalkError, ValueError):
    code = "rational-input"


class InvalidDiscriminantError(QuadWalkError, ValueError):
    code = "invalid-discriminant"


class InvalidMatrixError(QuadWalkError, ValueError):
    code = "invalid-matrix"


class DomainError(QuadWalkError, ValueError):
    code = "domain"


class DivergentSeriesError(QuadWalkError, ValueError):
    code = "divergent-series"


class PreconditionError(QuadWalkError, ValueError):
    code = "precondition"


class RationalValueError(QuadWalkError, ValueError):
    code = "rational-value"


class OverflowGuardError(QuadWalkError, OverflowError):
    code = "overflow-guard"


class ParseError(QuadWalkError, ValueError):
    code = "parse"

    def __init__(self, message, text="", column=0):
        super().__init__(message)
        self.text = text
        self.column = column

    def __str__(self):
        base = super().__str__()
        if self.text:
            return f"{base} (column {self.column + 1} in {self.text!r})"
        return base
