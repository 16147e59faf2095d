# src/exceptions.py
"""
Exceptions raised by the placement toolkit.

main.py maps each family to a process exit code:
    UsageError          -> 2
    TopologyError       -> 3
    ModelError          -> 3
    EnumerationCapError -> 4
"""


class CtrPlacementError(Exception):
    """Base class for every error raised on purpose by this package."""

    exitCode = 1


class UsageError(CtrPlacementError):
    exitCode = 2


class TopologyError(CtrPlacementError, ValueError):
    """Topology could not be parsed or violates a structural invariant."""

    exitCode = 3


class ModelError(CtrPlacementError, ValueError):
    """A model or search was called outside its preconditions."""

    exitCode = 3


class EnumerationCapError(CtrPlacementError):
    exitCode = 4

    def __init__(self, count: int, cap: int):
        super().__init__(
            f"{count} placements exceed the enumeration cap of {cap}; use --algo evo instead"
        )
        self.count = count
        self.cap = cap
