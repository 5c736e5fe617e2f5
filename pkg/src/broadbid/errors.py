"""Exceptions shared across the solver modules and the service layer."""


class BroadBidError(Exception):
    """Base class for all library errors."""


class ParseError(BroadBidError):
    """A document could not be parsed (malformed JSON, bad decimal, ...)."""


class ValidationError(BroadBidError):
    """A document parsed but violates instance rules (duplicate ids, dangling
    broad-match references, negative cost/clicks, ...)."""


class SizeLimitError(BroadBidError):
    """An exhaustive solver was asked to search beyond its configured limit."""


class IterationLimitError(BroadBidError):
    """The simplex solver hit its pivot budget without converging.

    Reported distinctly from infeasibility: the model may well be feasible.
    """


class SolverError(BroadBidError):
    """A solver produced a result violating a structural guarantee, e.g. a
    non-integral vertex on a network-matrix program or more than one
    fractional cluster in a budgeted solution."""
