"""Deterministic computations: grids, the height recurrence, exact series"""

from pycascade.core.grid import GridSpec, GridFunction
from pycascade.core.recurrence import RecurrenceRun
from pycascade.core.series import SeriesPoly

__all__ = ["GridSpec", "GridFunction", "RecurrenceRun", "SeriesPoly"]
