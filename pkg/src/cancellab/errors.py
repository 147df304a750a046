"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class LabError(Exception):
    """Base class for every error raised by the package."""


class FieldMismatch(LabError):
    pass


class AmbientMismatch(LabError):
    pass


class MissingImage(LabError):
    pass


class UnknownVariable(LabError):
    pass


class VariableClash(LabError):
    pass


class ParseError(LabError):
    pass


class ResourceBudgetExceeded(LabError):
    pass


class NotMember(LabError):
    pass


class NoPreimage(LabError):
    pass


class InconsistentPresentation(LabError):
    pass


class RelationNotPreserved(LabError):
    def __init__(self, relation, residual):
        super().__init__(f"relation {relation} maps to nonzero normal form {residual}")
        self.relation = relation
        self.residual = residual


class NotInverse(LabError):
    def __init__(self, generator, residual):
        super().__init__(f"round trip on {generator} leaves residual {residual}")
        self.generator = generator
        self.residual = residual


class NotEquivariant(LabError):
    def __init__(self, generator, residual):
        super().__init__(f"equivariance fails on {generator}: residual {residual}")
        self.generator = generator
        self.residual = residual


class BoundTooSmall(LabError):
    pass


class NotWellDefined(LabError):
    def __init__(self, relation, residual):
        super().__init__(f"derivation does not preserve relation {relation}: residual {residual}")
        self.relation = relation
        self.residual = residual


class BoundExceeded(LabError):
    def __init__(self, generator, last):
        super().__init__(f"chain of {generator} did not terminate; last nonzero entry {last}")
        self.generator = generator
        self.last = last


class NoSliceWithinBound(LabError):
    def __init__(self, bound):
        super().__init__(f"no slice among ansatz monomials of degree <= {bound}")
        self.bound = bound


class PresentationBudgetExceeded(LabError):
    pass


class NotFixedPointFree(LabError):
    pass


class MatchingSearchExhausted(LabError):
    def __init__(self, bound):
        super().__init__(f"divided-candidate search exhausted at bound {bound}")
        self.bound = bound


class PreimageFailure(LabError):
    pass


class NotClearable(LabError):
    def __init__(self, bound):
        super().__init__(f"denominators not cleared within f-power {bound}")
        self.bound = bound


class PreconditionError(LabError):
    """An operation was called on inputs violating its stated precondition."""


class StageError(LabError):
    """Wraps a failure inside a multi-stage pipeline, tagged by stage name."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


class ParameterError(LabError):
    pass
