"""Exception hierarchy shared across the package."""


class SigmatreeError(Exception):
    """Base class for all errors raised by this package."""


class PTPValidationError(SigmatreeError):
    """A tree-pair document violates a structural invariant.

    Carries the full validation report so callers can list every
    violation, not just the first.
    """

    def __init__(self, report):
        self.report = report
        lines = "; ".join(v.message for v in report.violations)
        super().__init__(f"invalid tree-pair document: {lines}")


class BallBudgetExceeded(SigmatreeError):
    """Expansion hit the configured vertex budget.

    Signals that the requested ball is too large, not a logic error.
    """

    def __init__(self, budget, needed_hint=None):
        self.budget = budget
        self.needed_hint = needed_hint
        msg = f"ball expansion exceeded the vertex budget of {budget}"
        if needed_hint is not None:
            msg += f" (at least {needed_hint} vertices would be needed)"
        super().__init__(msg)


class BallTooShallow(SigmatreeError):
    """A search needs a deeper ball than the one provided."""

    def __init__(self, required_depth, message=None):
        self.required_depth = required_depth
        super().__init__(
            message or f"ball too shallow; a depth of at least {required_depth} is required"
        )


class EndNotFaced(SigmatreeError):
    """No disconnection witness exists for this end (it is not faced)."""


class InconclusiveMarking(SigmatreeError):
    """A partially marked class prevents an exact type-level answer."""

    def __init__(self, classes, message=None):
        self.classes = tuple(classes)
        super().__init__(
            message
            or "partially marked classes prevent an exact answer: "
            + ", ".join(f"({v}, {c})" for v, c in self.classes)
        )


class ConsistencyViolation(SigmatreeError):
    """An internal cross-check failed.

    Raised when two routes to the same fact disagree, e.g. the viability
    digraph contains two cycles even though the applicability hypotheses
    hold, which would contradict the at-most-one-end property.
    """
