"""Exception types shared across the package."""


class OpchainError(Exception):
    """Base class for all library errors."""


class DomainMismatchError(OpchainError):
    """A condition or state was used against the wrong domain."""


class ContradictionError(OpchainError):
    """A condition would require both polarities of the same grounding."""


class CapacityError(OpchainError):
    """An exhaustive operation was requested on a domain that is too large."""


class AugmentationError(OpchainError):
    """Unioning implicit conditions into an operator produced a contradiction."""

    def __init__(self, operator: str, detail: str):
        super().__init__(f"cannot augment operator '{operator}': {detail}")
        self.operator = operator


class PlanningFailedError(OpchainError):
    """A planning call did not produce a plan; carries the search verdict."""

    def __init__(self, result):
        self.result = result
        reason = "frontier exhausted" if result.exhausted_frontier else "limits hit"
        super().__init__(
            f"no plan found ({reason} after {result.expansions} expansions)"
        )


class PolicyError(OpchainError):
    """A world was asked to run a policy id it does not provide."""


class TraceFormatError(OpchainError):
    """A trace file line could not be decoded."""

    def __init__(self, line_no: int, detail: str):
        super().__init__(f"line {line_no}: {detail}")
        self.line_no = line_no
