"""Domain errors. CLI maps these to exit code 1 with a one-line message."""


class DomainError(Exception):
    """A precondition or domain failure with a machine-parsable message."""
