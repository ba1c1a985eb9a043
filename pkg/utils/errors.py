"""
Exception hierarchy for the solver
"""
from typing import List, Optional


class AdvacError(Exception):
    """Base class for all solver errors"""


class InvalidArgumentError(AdvacError, ValueError):
    """Raised when an operation receives an argument outside its domain"""


class ConfigError(AdvacError, ValueError):
    """Raised when an experiment configuration cannot be resolved"""


class CoercivityError(AdvacError):
    """Raised when the bilinear form cannot be coercive for the given data"""

    def __init__(self, message: str, min_divergence: Optional[float] = None,
                 smallest_value: Optional[float] = None):
        super().__init__(message)
        self.min_divergence = min_divergence
        self.smallest_value = smallest_value


class StepFailureError(AdvacError):
    """Raised when Newton's method does not converge within a time step"""

    def __init__(self, message: str, history: List[float], step: Optional[int] = None):
        super().__init__(message)
        self.history = list(history)
        self.step = step


class MissingDependencyError(AdvacError):
    """Raised when an optional feature is used without its packages installed"""

    def __init__(self, message: str, feature: Optional[str] = None):
        super().__init__(message)
        self.feature = feature
