"""Exception types shared across the package.

The CLI maps these onto its exit-code contract: parse/IO problems exit 1,
data invariant violations exit 2, translator/protocol failures exit 3.
"""


class OntoAlignError(Exception):
    """Base class for all package errors."""


class ParseError(OntoAlignError):
    """A malformed input record. Carries the 1-based line number when known."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class DataInvariantError(OntoAlignError):
    """A structural invariant of the data is violated."""


class DuplicateClass(DataInvariantError):
    pass


class DanglingParent(DataInvariantError):
    pass


class CyclicOntology(DataInvariantError):
    pass


class UnknownClass(DataInvariantError):
    pass


class UnknownPathId(DataInvariantError):
    pass


class TokenOverflow(DataInvariantError):
    pass


class StepOutOfRange(OntoAlignError):
    pass


class EmptyInstance(OntoAlignError):
    pass


class TranslatorError(OntoAlignError):
    """The translator backend failed or violated the wire protocol."""


class EmptyTargetSpace(OntoAlignError):
    pass


class MetricError(OntoAlignError):
    pass


class PrecisionUndefined(MetricError):
    pass


class RecallUndefined(MetricError):
    pass


class NoCases(MetricError):
    pass


class IncompleteScores(MetricError):
    pass
