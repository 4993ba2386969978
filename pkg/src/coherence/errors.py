"""Exception types raised across the package."""


class ValidationError(ValueError):
    """Malformed input: out-of-range credences, unknown outcomes, bad shapes."""


class NotInferableError(ValueError):
    """An event's probability is not determined by the stated credences."""


class IncoherentBaseError(ValueError):
    """An operation that needs a coherent base received an incoherent one."""


class RankDeficientError(ValueError):
    """The extended event matrix does not have full row rank."""


class SizeLimitError(ValueError):
    """A combinatorial search exceeded its configured budget."""


class InfeasibleConstraintsError(ValueError):
    """Extra equality constraints admit no point of the simplex."""


class NotProperError(ValueError):
    """A scoring rule failed the numerical properness check."""


class ConvergenceError(RuntimeError):
    """An iterative solve did not reach its tolerance."""
