"""besched: cost-minimal operation schedules for building energy systems.

Component descriptions are compiled into a mixed-integer linear program over
a discretized horizon and solved either by the built-in exact branch-and-
bound or through an external MILP solver via LP files.
"""

from .assembly import BalanceLedger, TimeGrid, build_balances, build_objective
from .errors import BeschedError
from .milp import EQ, GE, LE, LinExpr, Model, export_lp
from .schedule import Schedule, extract_schedule
from .solver import Solution, SolveOptions, solve_builtin

__version__ = "0.1.0"

__all__ = [
    "BalanceLedger",
    "BeschedError",
    "EQ",
    "GE",
    "LE",
    "LinExpr",
    "Model",
    "Schedule",
    "Solution",
    "SolveOptions",
    "TimeGrid",
    "build_balances",
    "build_objective",
    "export_lp",
    "extract_schedule",
    "solve_builtin",
    "__version__",
]
