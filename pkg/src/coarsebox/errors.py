"""Exception hierarchy. Every error carries the exit code the CLI maps it to:
2 bad input, 3 exceeded budget, 4 internal consistency failure."""


class CoarseboxError(Exception):
    exit_code = 2


class MalformedWordError(CoarseboxError):
    """A word contains letters outside the signed-generator alphabet."""


class PresentationParseError(CoarseboxError):
    """The presentation text is malformed; the message names the line."""


class BadInputError(CoarseboxError):
    """An operation precondition on user-supplied data is violated."""


class WrongPresentationError(BadInputError):
    """A relator of the presentation is not closed in the given quotient."""


class InconsistentTowerError(BadInputError):
    """The deep quotient does not refine the shallow one: some word is
    closed deep but open shallow."""


class AmbiguousLiftError(BadInputError):
    """A path step has zero or several preimages within the scale; the
    message names the offending step."""


class NoCycleError(BadInputError):
    """The graph is the trivial one-vertex quotient, which has no
    nontrivial closed words to measure."""


class UnsupportedBaseError(BadInputError):
    """voltage covers are only defined over quotients of free groups."""


class BudgetExceededError(CoarseboxError):
    exit_code = 3


class InternalConsistencyError(CoarseboxError):
    """Two independent computations of the same quantity disagree."""

    exit_code = 4
