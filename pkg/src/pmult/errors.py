"""Exception types shared across the package."""


class InvariantViolation(RuntimeError):
    """A construction invariant failed; this indicates a bug, not bad input."""


class UnsetValue(LookupError):
    def __init__(self, n: int):
        super().__init__(f"value at n={n} is unset")
        self.n = n


class CaseFiveViolation(InvariantViolation):
    pass


class RelationConflict(InvariantViolation):
    pass


class CountingFailure(InvariantViolation):
    pass


class SurplusFailure(InvariantViolation):
    pass


class DependencyCycle(InvariantViolation):
    pass


class DecompositionMismatch(InvariantViolation):
    pass


class NotFound(LookupError):
    pass
