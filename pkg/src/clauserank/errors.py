"""Exception types shared across the toolkit.

Every error raised by library code derives from ClauserankError so callers
(and the CLI) can catch one base class.
"""


class ClauserankError(Exception):
    pass


# corpus
class EmptyContract(ClauserankError):
    pass


class MissingParties(ClauserankError):
    pass


# categorize
class PredictionImportError(ClauserankError):
    """Malformed or invalid prediction file; carries the offending line number."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


# bws
class InfeasibleDesign(ClauserankError):
    pass


class InvalidPick(ClauserankError):
    pass


class MissingTuple(ClauserankError):
    pass


class InsufficientAnnotations(ClauserankError):
    pass


# btrank
class EmptyInput(ClauserankError):
    pass


class UnknownItem(ClauserankError):
    pass


class UndefinedCorrelation(ClauserankError):
    pass


class ConvergenceError(ClauserankError):
    """Iteration did not converge; .scores holds the last iterate."""

    def __init__(self, message, scores=None):
        super().__init__(message)
        self.scores = scores


# rankers
class DegenerateInput(ClauserankError):
    pass


class MissingGold(ClauserankError):
    pass


class NoPredictions(ClauserankError):
    pass


# pipeline
class InvalidRanking(ClauserankError):
    pass


class EmptyReport(ClauserankError):
    pass


# annotation service
class NoWorkRemaining(ClauserankError):
    pass


class NoSuchAssignment(ClauserankError):
    pass


class LeaseExpired(ClauserankError):
    pass
