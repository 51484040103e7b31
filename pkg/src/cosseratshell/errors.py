"""Exception hierarchy shared by all sub-packages.

Everything derives from ``ValueError`` or ``RuntimeError`` so callers can keep
catching the builtin types.
"""

from typing import Optional


class StructuralError(ValueError):
    """A matrix is not an element of se(3)."""


class DomainError(ValueError):
    """Argument outside the admissible range of an operation."""


class DegenerateReferenceError(ValueError):
    """Reference tangents are rank deficient."""


class MeshError(ValueError):
    """Mesh integrity or orientation problem."""


class ConfigurationError(ValueError):
    """Run setup cannot be solved as given."""


class ScenarioError(ConfigurationError):
    """Scenario file could not be parsed or validated."""

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        self.key = key
        self.line = line
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")


class SingularSystemError(RuntimeError):
    """Tangent matrix could not be factorized."""

    def __init__(self, message: str, condition: float = float("inf")):
        self.condition = condition
        super().__init__(f"{message} (condition estimate {condition:.3e})")


class ConvergenceError(RuntimeError):
    """Newton iteration failed; ``report`` holds the partial history."""

    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)
