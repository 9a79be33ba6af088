"""
Error Types
===========

Every failure raised inside the lab derives from LabError so the CLI can
map it to an exit code without knowing which step raised it.
"""

from typing import List, Optional


class LabError(RuntimeError):
    """Base class for all lab failures"""


class DomainError(LabError):
    """Argument outside the domain of the function being evaluated"""


class QuadratureError(LabError):
    """Adaptive quadrature did not reach the requested tolerance"""

    def __init__(self, message: str, value: float, error_estimate: float):
        super().__init__(f"{message} (value={value:.6g}, error estimate={error_estimate:.3g})")
        self.value = value
        self.error_estimate = error_estimate


class DivergenceError(LabError):
    """An improper integral diverges"""


class InconclusiveError(LabError):
    """Two tail extrapolations disagree beyond tolerance"""

    def __init__(self, message: str, first: float, second: float):
        super().__init__(f"{message} (estimates {first:.12g} vs {second:.12g})")
        self.estimates = (first, second)


class BlowUpError(LabError):
    """A shooting run did not blow up inside the integration range"""


class BracketError(LabError):
    """No pair of center values brackets the unit blow-up radius"""


class ConvergenceError(LabError):
    """Newton iteration stagnated"""

    def __init__(self, message: str, residual_history: Optional[List[float]] = None):
        history = residual_history or []
        tail = ", ".join(f"{r:.3e}" for r in history[-5:])
        super().__init__(f"{message} (last residuals: {tail})" if history else message)
        self.residual_history = history


class PreconditionError(LabError):
    """An operation was called outside its contract"""


class ConfigError(LabError):
    """Invalid or unparseable experiment configuration"""
