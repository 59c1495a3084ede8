"""Exception hierarchy shared across the package."""

from __future__ import annotations


class AvoidantError(Exception):
    """Base class for all errors raised by this package."""


class RootFindingError(AvoidantError, ArithmeticError):
    """The simultaneous root iteration did not converge."""


class GeometryError(AvoidantError, ValueError):
    """A compact-set constructor received unsupported geometry."""


class TruncationTooLarge(AvoidantError, ValueError):
    """An enumeration of a countable set would exceed the configured size."""


class AvoidanceError(AvoidantError):
    """A perturbation step could not meet its budget or margin requirements."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message if step is None else f"step {step}: {message}")
        self.step = step


class FitError(AvoidantError):
    """No polynomial up to the degree cap reached the requested tolerance."""

    def __init__(self, message: str, best_error: float = float("inf"), best_degree: int = -1):
        super().__init__(message)
        self.best_error = best_error
        self.best_degree = best_degree


class RescaleError(AvoidantError):
    """No rescaling factor above the floor met the error target."""


class IndeterminateWinding(AvoidantError, ValueError):
    """The test point lies too close to the sampled curve."""


class PipelineError(AvoidantError):
    """A pipeline stage failed. ``stage`` names the stage."""

    def __init__(self, stage: str, message: str, inconclusive: bool = False):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.detail = message
        self.inconclusive = inconclusive

    def to_dict(self) -> dict:
        return {"stage": self.stage, "error": self.detail, "inconclusive": self.inconclusive}
