"""Exception types shared across the package."""


class ThermalCbfError(Exception):
    """Base class for all package-specific errors."""


class PgmParseError(ThermalCbfError):
    """Malformed PGM input. Carries the byte offset where parsing failed."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class ContractError(ThermalCbfError):
    """A caller violated a documented precondition (mismatched shapes, bad lengths, non-finite inputs)."""


class OracleCapError(ThermalCbfError):
    """Dense oracle refused a system larger than its configured cap."""


class SingularSystemError(ThermalCbfError):
    """Dense solve hit a numerically singular pivot; indicates an assembly bug, valid systems are nonsingular."""


class SolverFailure(ThermalCbfError):
    """Iterative solver did not converge. Carries the final SolveStats for caller policy."""

    def __init__(self, message: str, stats=None):
        super().__init__(message)
        self.stats = stats


class OutOfBoundsError(ThermalCbfError):
    """Sampled position lies outside the field's world extent."""


class ScenarioError(ThermalCbfError):
    """Scenario document is invalid or its start state violates the episode preconditions."""
