"""Exception types shared across the package."""

from __future__ import annotations

from .syntax import CaptureError, SignatureError  # noqa: F401  (re-exported)
from .parser import ParseError  # noqa: F401


class InconsistentIntervals(ValueError):
    """A family of intervals has empty intersection."""


class InconsistentStream(RuntimeError):
    """A degree stream broke nesting or produced crossing bounds."""

    def __init__(self, msg, previous=None, current=None, certificates=()):
        super().__init__(msg)
        self.previous = previous
        self.current = current
        self.certificates = tuple(certificates)


class BudgetExhausted(RuntimeError):
    """A search or refinement ran out of budget; ``best`` holds partial progress."""

    def __init__(self, msg="budget exhausted", best=None):
        super().__init__(msg)
        self.best = best


class SideConditionViolation(ValueError):
    def __init__(self, schema, condition, detail=""):
        super().__init__(f"{schema}: {condition}" + (f" ({detail})" if detail else ""))
        self.schema = schema
        self.condition = condition


class InvalidStep(ValueError):
    def __init__(self, index: int, reason: str):
        super().__init__(f"invalid-step {index}: {reason}")
        self.index = index
        self.reason = reason


class MembershipRejected(InvalidStep):
    def __init__(self, index: int, formula=None):
        super().__init__(index, "theory axiom not in the theory")
        self.reason = "membership-rejected"
        self.formula = formula

    def __str__(self):
        return f"membership-rejected {self.index}"


class FlagViolation(RuntimeError):
    """Evidence that a declared trust flag is false."""


class OracleContradiction(RuntimeError):
    """The non-provability oracle denied something that has a checked proof."""


class UncoveredVariable(ValueError):
    pass


class EmptyConstantSet(ValueError):
    pass


class SequenceOrderViolation(ValueError):
    pass
