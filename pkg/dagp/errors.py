"""
Exception hierarchy shared by every dagp module
Concrete errors also subclass the matching builtin so callers can catch either
"""

from typing import List, Optional


class DagpError(Exception):
    """Base class for all dagp errors"""


class IncommensurableError(DagpError, ValueError):
    """Addition or subtraction of operands with different unit signatures"""


class SignatureMismatchError(DagpError, ValueError):
    """A substitution would change the signature of the replaced subtree"""


class SizeLimitError(DagpError, ValueError):
    """An expression tree exceeds the configured node cap"""


class NonFiniteError(DagpError, ArithmeticError):
    """Evaluation produced inf or nan (division by zero, overflow)"""


class MalformedRowError(DagpError, ValueError):
    """A dataset row could not be parsed"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class ArityMismatchError(MalformedRowError):
    """A dataset row has the wrong number of columns"""


class InsufficientRowsError(DagpError, ValueError):
    """Requested more rows than the dataset holds"""


class RangeMisconfigurationError(DagpError, ValueError):
    """Sampling ranges are invalid or cannot avoid singular targets"""


class NoValidInitializationError(DagpError, RuntimeError):
    """No monomial reaches the target signature, even after widening"""


class UnknownEquationError(DagpError, KeyError):
    """Equation id not present in the registry"""

    def __init__(self, query: str, suggestions: Optional[List[str]] = None):
        self.query = query
        self.suggestions = suggestions or []
        message = f"unknown equation '{query}'"
        if self.suggestions:
            message += f" (did you mean: {', '.join(self.suggestions)}?)"
        super().__init__(message)

    def __str__(self) -> str:
        # KeyError would otherwise wrap the message in quotes
        return self.args[0]


class UnknownFormatError(DagpError, ValueError):
    """Unsupported export format"""


class ConfigError(DagpError, ValueError):
    """Invalid run configuration"""
