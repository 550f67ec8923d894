"""Shared exception types."""


class JetMeasureError(Exception):
    """Base class for all package errors."""


class PolyParseError(JetMeasureError):
    """Raised on malformed polynomial or class expressions.

    Carries the character offset of the failure in ``position``.
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class LevelMismatchError(JetMeasureError):
    """Series operands do not share the same truncation level."""


class BudgetExceededError(JetMeasureError):
    """Enumeration work exceeded the configured tuple budget."""

    def __init__(self, budget: int, hint: str = ""):
        msg = f"enumeration budget of {budget} candidate tuples exhausted"
        if hint:
            msg += f"; {hint}"
        super().__init__(msg)
        self.budget = budget


class UnspecializableClassError(JetMeasureError):
    """A class cannot be counted because an atom has no counting rule."""

    def __init__(self, atom_name: str):
        super().__init__(f"atom [{atom_name}] has no point counter; class cannot be specialized")
        self.atom_name = atom_name


class ContractViolationError(JetMeasureError):
    """A declared convergence or stability contract failed on actual data."""


class UnstableCylinderError(JetMeasureError):
    """Measure requested for a cylinder without a stability justification."""


class InconclusiveError(JetMeasureError):
    """A verdict could not be certified (unresolved lifting questions)."""


class ModelDataError(JetMeasureError):
    """Malformed or inconsistent model/presentation data."""
