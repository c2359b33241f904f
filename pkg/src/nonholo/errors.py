"""Exception types shared across the toolkit."""


class NonholoError(Exception):
    """Base class for all toolkit errors."""


class NumericDomainError(NonholoError):
    """A numerical evaluation produced non-finite values."""


class FrameDegenerateError(NonholoError):
    """The moving frame matrix is singular (or numerically so) at a point."""


class RegularityError(NonholoError):
    """The constrained Hessian (or the constrained two-form) is degenerate."""


class InvalidCompleteSolutionError(NonholoError):
    """A claimed complete solution fails its round-trip or transversality checks."""


class ScenarioError(NonholoError):
    """A scenario file failed to parse or validate."""
