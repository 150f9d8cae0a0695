"""Exception types raised across the package."""


class MDLSelectError(Exception):
    """Base class for all package errors."""


class DomainError(MDLSelectError, ValueError):
    """An argument lies outside the domain of a code-length function."""


class DegenerateResidual(MDLSelectError, ArithmeticError):
    """A task's residual sum of squares collapsed to (numerically) zero."""


class SingularDesign(MDLSelectError, ArithmeticError):
    """Adding a feature would make a task's design matrix rank deficient."""


class NoClassMap(MDLSelectError):
    """A class-aware code was requested for a dataset without feature classes."""


class SpecError(MDLSelectError, ValueError):
    """Invalid synthetic scenario specification."""


class ShapeMismatch(MDLSelectError, ValueError):
    pass


class FoldTooSmall(MDLSelectError):
    """A cross-validation fold lacks one of the two classes for some task."""


class EmptyTrainingSet(MDLSelectError, UserWarning):
    """Issued as a warning when a prior is built from no training models."""


class ParseError(MDLSelectError, ValueError):
    """Malformed input file. ``line`` and ``column`` are 1-based when known."""

    def __init__(self, message, path=None, line=None, column=None):
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.path = path
        self.line = line
        self.column = column


class DimensionMismatch(MDLSelectError, ValueError):
    pass


class UnknownFeature(MDLSelectError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class VersionMismatch(MDLSelectError, ValueError):
    pass


class ChecksumMismatch(MDLSelectError, ValueError):
    pass
