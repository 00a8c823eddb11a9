"""Exception types shared across the package.

The CLI maps these onto process exit codes: DomainError -> 2 (precondition
violation), ConsistencyError -> 3 (verification failure), OSError -> 1 (I/O).
"""


class DomainError(ValueError):
    """An input violates an operation's stated precondition."""


class ConsistencyError(RuntimeError):
    """A cross-checkable identity failed beyond its tolerance."""
