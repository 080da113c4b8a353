"""
Exception hierarchy for the fat round handle calculus.

Every domain failure derives from FatHandleError, itself a ValueError, so callers
that only care about "bad input" can keep catching ValueError.
"""


class FatHandleError(ValueError):
    """Base class for all domain errors raised by the toolkit."""


class LinkError(FatHandleError):
    """Invalid indexed link or component reference."""


class SelectorError(FatHandleError):
    """A selector does not name a legal component."""


class AmbiguousSelectorError(SelectorError):
    def __init__(self, message: str, candidates=()):
        self.candidates = tuple(candidates)
        if self.candidates:
            message = f"{message} (candidates: {', '.join(self.candidates)})"
        super().__init__(message)


class ExprSyntaxError(FatHandleError):
    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} at position {position}")


class ElaborationError(FatHandleError):
    """Expression cannot be turned into a construction sequence."""


class BitorusError(FatHandleError):
    """Identification of a class [I] with a class [II] fat handle."""


class PolarityError(FatHandleError):
    """Fat handles of the same polarity cannot be identified."""


class IdentificationError(FatHandleError):
    """Identification outside the supported host/guest form."""


class FlowModelError(FatHandleError):
    """Inconsistent flow model or illegal orbit reference."""


class OrderCycleError(FlowModelError):
    """Heteroclinic edges form a cycle: the model is inconsistent."""


class NotF3Error(FatHandleError):
    """Flow was not built from operation III only."""


class BoundExceededError(FatHandleError):
    """Requested saddle count is above the configured bound."""


class DrawingSizeError(FatHandleError):
    """Flow has too many saddles for a schematic."""
