"""Exception hierarchy for universal_cover

Every error carries an ``exit_code`` so the CLI can map it without a lookup
table: 1 = usage / unsupported input, 2 = infeasible, 3 = solver failure.
"""
from typing import Any, Optional


class UniversalCoverError(Exception):
    """Base class for all errors raised by the package"""
    exit_code = 3


class InvalidInputError(UniversalCoverError, ValueError):
    """Malformed instance, distribution or mapping data"""
    exit_code = 1


class UnsupportedProblemError(UniversalCoverError):
    """Problem/model combination without a known algorithm"""
    exit_code = 1


class NotEvaluableError(UniversalCoverError):
    """Exact evaluation requested on a sampler-only distribution"""
    exit_code = 1

    def __init__(self, message: str = "sampler distributions are not exactly evaluable; "
                                      "use saa_solve (or the 'saa' command) instead"):
        super().__init__(message)


class InfeasibleInstanceError(UniversalCoverError):
    """Instance admits no feasible mapping"""
    exit_code = 2

    def __init__(self, message: str, element: Optional[Any] = None):
        super().__init__(message)
        self.element = element


class InfeasibleMappingError(UniversalCoverError):
    """Mapping leaves an element, client or pair uncovered"""
    exit_code = 2

    def __init__(self, message: str, key: Optional[Any] = None):
        super().__init__(message)
        self.key = key


class SizeLimitError(UniversalCoverError):
    """Enumeration would exceed its cap"""
    exit_code = 3

    def __init__(self, message: str, size: Optional[int] = None, cap: Optional[int] = None):
        super().__init__(message)
        self.size = size
        self.cap = cap


class SolverError(UniversalCoverError):
    """An iterative method did not converge or ran out of retries"""
    exit_code = 3

    def __init__(self, message: str, best: Optional[Any] = None, diagnostics: Optional[dict] = None):
        super().__init__(message)
        self.best = best
        self.diagnostics = diagnostics or {}


class LPInfeasibleError(SolverError):
    """Linear program has no feasible point"""


class LPUnboundedError(SolverError):
    """Linear program objective is unbounded"""
