"""
pycascade - Heights and sizes of trees in the continuum cascade model
Height recurrence, traveling-wave analysis, exact series and Monte Carlo trees
"""

__version__ = "0.1.0"
__author__ = "pycascade Team"

from pycascade.core.grid import GridSpec, GridFunction
from pycascade.core.recurrence import RecurrenceRun, run
from pycascade.core.series import SeriesPoly
from pycascade.simulation.streams import SeedStream

__all__ = ["GridSpec", "GridFunction", "RecurrenceRun", "run", "SeriesPoly", "SeedStream", "__version__"]
