class ValidationError(ValueError):
    """Input violates a documented precondition."""


class ResourceLimit(RuntimeError):
    """A node, iteration or box budget was exhausted before an exact answer was reached."""
