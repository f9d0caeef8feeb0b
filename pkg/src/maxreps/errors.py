"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the domain of an operation (e.g. the empty string)."""


class PreconditionError(ValueError):
    """A caller-checkable precondition does not hold."""


class NotApplicable(Exception):
    """The statement being checked says nothing about this input."""


class LemmaViolation(AssertionError):
    """A lemma that must hold was observed to fail; indicates a bug."""


class AuditError(AssertionError):
    """A bound asserted by an audit was exceeded."""


class BudgetExceeded(RuntimeError):
    """Requested work is larger than the configured budget."""

    def __init__(self, estimate, budget):
        super().__init__(f"work estimate {estimate} exceeds budget {budget}")
        self.estimate = estimate
        self.budget = budget
