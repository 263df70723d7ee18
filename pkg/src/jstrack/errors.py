"""Exception and warning types raised across the package."""


class JstrackError(Exception):
    """Base class for all package errors."""


class DataError(JstrackError):
    """Bad or inconsistent input data (CLI exit code 2)."""


class NumericError(JstrackError):
    """Solver or numeric failure (CLI exit code 3)."""


class LexError(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ParseError(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateId(DataError):
    pass


class EmptyCorpus(DataError):
    pass


class VocabMismatch(DataError, ValueError):
    pass


class EmptyValidation(DataError):
    pass


class InsufficientPositives(DataError):
    pass


class EmptyPage(DataError):
    pass


class ContainmentViolation(DataError):
    pass


class MissingLabel(DataError):
    pass


class UniverseMismatch(DataError):
    pass


class EmptyInput(DataError, ValueError):
    pass


class VersionMismatch(DataError):
    pass


class CorruptModel(DataError):
    pass


class ConvergenceError(NumericError):
    pass


class DegenerateTraining(UserWarning):
    """All training vectors are identical; the fitted model is trivial."""


class CollapsedCalibration(UserWarning):
    """The probabilistic scorer turned out constant (or anti-monotone)."""


class InfeasibleNu(DataError, ValueError):
    """nu exceeds 2 * min(n_pos, n_neg) / n for a nu-SVC problem."""
