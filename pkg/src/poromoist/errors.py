"""Exception types shared across the package."""

from __future__ import annotations


class PoromoistError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(PoromoistError):
    """Invalid parameter values or run configuration."""


class ParseError(ConfigError):
    """Config file is not valid JSON."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class ValidationError(ConfigError):
    """Config parsed but violates the schema; collects every violation."""

    def __init__(self, violations: list[tuple[str, str]]):
        self.violations = list(violations)
        lines = "; ".join(f"{path}: {msg}" for path, msg in self.violations)
        super().__init__(f"{len(self.violations)} config violation(s): {lines}")


class ModelInvalid(PoromoistError):
    """Saturation model violates a structural requirement (sign, monotonicity)."""


class NonPositiveRadius(PoromoistError):
    """Mollifier radius must be strictly positive."""


class DimensionMismatch(PoromoistError):
    """Array length does not match the grid it is bound to."""


class ZeroPivot(PoromoistError):
    """Tridiagonal elimination hit a pivot below the breakdown threshold."""

    def __init__(self, index: int, pivot: float):
        super().__init__(f"near-zero pivot {pivot:.3e} at row {index}")
        self.index = index
        self.pivot = pivot


class SingularMatrix(PoromoistError):
    """Dense solve failed: matrix numerically singular."""


class DominanceViolation(PoromoistError):
    """An assembled row lost strict diagonal dominance (dt too large for the drift)."""

    def __init__(self, system: str, index: int, margin: float):
        super().__init__(
            f"{system} system row {index} not strictly diagonally dominant "
            f"(margin {margin:.3e}); reduce dt or drift strength"
        )
        self.system = system
        self.index = index
        self.margin = margin


class PicardDivergence(PoromoistError):
    """Fixed-point sweeps did not converge within the iteration budget."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class NonfiniteIterate(PoromoistError):
    """A fixed-point sweep produced NaN or Inf values."""


class EnvelopeViolation(PoromoistError):
    """A monitored quantity escaped its a priori envelope."""

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t
