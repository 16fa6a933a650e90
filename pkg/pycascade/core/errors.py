"""
Errors - Exception hierarchy for cascade computations
"""

from typing import List, Optional


class CascadeError(RuntimeError):
    """Base class for numeric and sampling failures"""


class NoCrossingError(CascadeError, ValueError):
    """Requested level is not crossed by the grid function"""


class DomainError(CascadeError, ValueError):
    """Window or evaluation point outside the available domain"""


class GridBudgetError(CascadeError):
    """Grid would exceed the configured point budget"""


class NotConvergedError(CascadeError):
    """Truncated tail sum has not reached its tolerance"""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class FitError(CascadeError):
    """Least-squares fit is singular or has no usable data"""


class ContractViolation(CascadeError, ValueError):
    """Series operation called outside its contract"""


class UnsupportedOrderError(CascadeError, ValueError):
    """No closed form for the requested moment order"""


class InvariantViolation(CascadeError):
    """A numerical invariant of the recurrence was broken"""


class NodeBudgetExceeded(CascadeError):
    """A single tree grew beyond the node cap"""

    def __init__(self, message: str, replicate: Optional[int] = None):
        super().__init__(message)
        self.replicate = replicate


class CensoredSampleError(CascadeError):
    """One or more replicates were censored by the node cap"""

    def __init__(self, replicates: List[int], node_cap: int):
        shown = ", ".join(str(r) for r in replicates[:10])
        more = "" if len(replicates) <= 10 else f" (+{len(replicates) - 10} more)"
        super().__init__(
            f"{len(replicates)} replicate(s) exceeded node_cap={node_cap}: {shown}{more}"
        )
        self.replicates = list(replicates)
        self.node_cap = node_cap
