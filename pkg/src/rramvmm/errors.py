"""Exception types shared across the package."""


class RRAMError(Exception):
    """Base class for all package errors."""


class ParameterError(RRAMError, ValueError):
    """Invalid configuration or argument value."""


class ProgramFailure(RRAMError):
    """A program-and-verify loop ran out of attempts.

    The cell is left in its last sampled state; ``resistance`` holds that value
    so the caller can decide whether to accept the device or abort.
    """

    def __init__(self, row, col, target, resistance, attempts):
        self.row = row
        self.col = col
        self.target = target
        self.resistance = resistance
        self.attempts = attempts
        super().__init__(
            f"cell ({row}, {col}) did not verify as {target.name} after "
            f"{attempts} attempts (last R = {resistance:.4g} MOhm)"
        )


class SingularNetworkError(RRAMError):
    """Nodal system could not be factorized."""


class DataError(RRAMError):
    """Malformed dataset input."""


class SchemaError(RRAMError):
    """Artifact file does not match the expected schema."""


class ExperimentError(RRAMError):
    """A trial failed; ``trial`` is the failing trial index."""

    def __init__(self, trial, cause):
        self.trial = trial
        self.cause = cause
        super().__init__(f"trial {trial} failed: {cause}")
